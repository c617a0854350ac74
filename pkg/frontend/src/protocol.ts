/** Wire types and codecs for the session protocol.
 *
 * Mirrors the server's canonical JSON messages. The map rides as RLE runs
 * [count, value, ...] in row-major order with the bottom row first; the
 * belief marginal rides as base64 little-endian float32, row-major (ny, nx).
 */

export type Role = "operator" | "observer";

export interface MapPayload {
  width: number;
  height: number;
  resolution: number;
  origin: [number, number];
  cells_rle: number[];
}

export interface WelcomeMsg {
  type: "welcome";
  role: Role;
  map: MapPayload;
}

export interface ErrorMsg {
  type: "error";
  code: string;
  message: string;
}

export interface BeliefPayload {
  nx: number;
  ny: number;
  xy_resolution: number;
  origin: [number, number];
  marginal_b64: string;
}

export interface TrajectoryMsg {
  v: number;
  omega: number;
  points: [number, number][];
  admissible: boolean;
  score: number;
}

export interface SnapshotMsg {
  type: "snapshot";
  tick: number;
  sim_time: number;
  estimate: [number, number, number];
  confidence: number;
  entropy: number;
  scan: [number, number][];
  belief: BeliefPayload;
  path: [number, number][];
  trajectories: TrajectoryMsg[];
  selected: { v: number; omega: number };
  state: string;
  snippet: string;
  timings_ms: Record<string, number>;
  warnings: string[];
  true_pose?: [number, number, number];
}

export type ServerMsg = WelcomeMsg | ErrorMsg | SnapshotMsg;

export class ProtocolError extends Error {}

// ------------------------------------------------------------------ map RLE

export function decodeCellsRle(
  runs: number[],
  width: number,
  height: number,
): Uint8Array {
  if (runs.length % 2 !== 0) {
    throw new ProtocolError("rle length must be even");
  }
  const out = new Uint8Array(width * height);
  let pos = 0;
  for (let i = 0; i < runs.length; i += 2) {
    const count = runs[i]!;
    const value = runs[i + 1]!;
    if (!Number.isInteger(count) || count <= 0 || ![0, 1, 2].includes(value)) {
      throw new ProtocolError("bad rle run");
    }
    if (pos + count > out.length) {
      throw new ProtocolError("rle overflows the map");
    }
    out.fill(value, pos, pos + count);
    pos += count;
  }
  if (pos !== out.length) {
    throw new ProtocolError("rle does not fill the map");
  }
  return out;
}

export function encodeCellsRle(cells: Uint8Array): number[] {
  const runs: number[] = [];
  let start = 0;
  for (let i = 1; i <= cells.length; i++) {
    if (i === cells.length || cells[i] !== cells[start]) {
      runs.push(i - start, cells[start]!);
      start = i;
    }
  }
  return runs;
}

// ----------------------------------------------------------- belief payload

export function decodeMarginal(b64: string, nx: number, ny: number): Float32Array {
  let binary: string;
  try {
    binary = atob(b64);
  } catch {
    throw new ProtocolError("marginal is not valid base64");
  }
  if (binary.length !== 4 * nx * ny) {
    throw new ProtocolError("marginal size mismatch");
  }
  const bytes = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) {
    bytes[i] = binary.charCodeAt(i);
  }
  // explicit little-endian read; never trust the platform default
  const dv = new DataView(bytes.buffer);
  const out = new Float32Array(nx * ny);
  for (let i = 0; i < out.length; i++) {
    out[i] = dv.getFloat32(4 * i, true);
  }
  return out;
}

// --------------------------------------------------------- message checking

function isPair(v: unknown): v is [number, number] {
  return (
    Array.isArray(v) && v.length === 2 &&
    typeof v[0] === "number" && typeof v[1] === "number"
  );
}

function isPose(v: unknown): v is [number, number, number] {
  return (
    Array.isArray(v) && v.length === 3 && v.every((c) => typeof c === "number")
  );
}

function isPairList(v: unknown): v is [number, number][] {
  return Array.isArray(v) && v.every(isPair);
}

function checkMap(m: unknown): asserts m is MapPayload {
  const p = m as MapPayload;
  if (
    typeof p !== "object" || p === null ||
    !Number.isInteger(p.width) || p.width <= 0 ||
    !Number.isInteger(p.height) || p.height <= 0 ||
    typeof p.resolution !== "number" || !(p.resolution > 0) ||
    !isPair(p.origin) ||
    !Array.isArray(p.cells_rle) ||
    !p.cells_rle.every((r) => typeof r === "number")
  ) {
    throw new ProtocolError("bad map payload");
  }
}

function checkBelief(b: unknown): asserts b is BeliefPayload {
  const p = b as BeliefPayload;
  if (
    typeof p !== "object" || p === null ||
    !Number.isInteger(p.nx) || p.nx <= 0 ||
    !Number.isInteger(p.ny) || p.ny <= 0 ||
    typeof p.xy_resolution !== "number" ||
    !isPair(p.origin) ||
    typeof p.marginal_b64 !== "string"
  ) {
    throw new ProtocolError("bad belief payload");
  }
}

function checkSnapshot(m: Record<string, unknown>): asserts m is Record<string, unknown> & SnapshotMsg {
  if (
    !Number.isInteger(m.tick) ||
    typeof m.sim_time !== "number" ||
    !isPose(m.estimate) ||
    typeof m.confidence !== "number" ||
    typeof m.entropy !== "number" ||
    !isPairList(m.scan) ||
    !isPairList(m.path) ||
    typeof m.state !== "string" ||
    typeof m.snippet !== "string" ||
    typeof m.selected !== "object" || m.selected === null ||
    typeof (m.selected as { v: unknown }).v !== "number" ||
    typeof (m.selected as { omega: unknown }).omega !== "number" ||
    typeof m.timings_ms !== "object" || m.timings_ms === null ||
    !Array.isArray(m.warnings) ||
    !m.warnings.every((w) => typeof w === "string") ||
    !Array.isArray(m.trajectories) ||
    ("true_pose" in m && !isPose(m.true_pose))
  ) {
    throw new ProtocolError("bad snapshot");
  }
  checkBelief(m.belief);
  for (const t of m.trajectories as TrajectoryMsg[]) {
    if (
      typeof t !== "object" || t === null ||
      typeof t.v !== "number" || typeof t.omega !== "number" ||
      typeof t.admissible !== "boolean" || typeof t.score !== "number" ||
      !isPairList(t.points)
    ) {
      throw new ProtocolError("bad trajectory");
    }
  }
}

/** Parse and structurally validate one server frame. Throws ProtocolError. */
export function parseServerMessage(text: string): ServerMsg {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    throw new ProtocolError("frame is not valid JSON");
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new ProtocolError("frame is not an object");
  }
  const msg = raw as Record<string, unknown>;
  switch (msg.type) {
    case "welcome":
      if (msg.role !== "operator" && msg.role !== "observer") {
        throw new ProtocolError("bad welcome role");
      }
      checkMap(msg.map);
      return msg as unknown as WelcomeMsg;
    case "error":
      if (typeof msg.code !== "string" || typeof msg.message !== "string") {
        throw new ProtocolError("bad error frame");
      }
      return msg as unknown as ErrorMsg;
    case "snapshot":
      checkSnapshot(msg);
      return msg as unknown as SnapshotMsg;
    default:
      throw new ProtocolError(`unknown frame type: ${String(msg.type)}`);
  }
}

// ----------------------------------------------------------- client frames

export function helloFrame(role: Role): string {
  return JSON.stringify({ type: "hello", role });
}

export function setGoalFrame(x: number, y: number): string {
  return JSON.stringify({ type: "set_goal", x, y });
}
