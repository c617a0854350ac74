/** ViewModel: everything the renderer reads, reduced from network events.
 *
 * Only complete, validated snapshots land here; a malformed frame is counted
 * and dropped before it can touch rendering state.
 */

import { Camera, screenToWorld } from "./camera";
import {
  decodeCellsRle,
  ErrorMsg,
  Role,
  SnapshotMsg,
  WelcomeMsg,
} from "./protocol";

export type Connection = "connecting" | "connected" | "retrying" | "closed";

export interface DecodedMap {
  width: number;
  height: number;
  resolution: number;
  origin: [number, number];
  /** row-major, bottom row first: 0 free, 1 occupied, 2 unknown */
  cells: Uint8Array;
}

export interface Banner {
  text: string;
  expiresAt: number;
}

export interface ViewModel {
  connection: Connection;
  requestedRole: Role;
  role: Role;
  debug: boolean;
  map: DecodedMap | null;
  snapshot: SnapshotMsg | null;
  banner: Banner | null;
  frameErrors: number;
}

export function initialView(requestedRole: Role, debug: boolean): ViewModel {
  return {
    connection: "connecting",
    requestedRole,
    role: requestedRole,
    debug,
    map: null,
    snapshot: null,
    banner: null,
    frameErrors: 0,
  };
}

const BANNER_MS = 4000;

export function showBanner(view: ViewModel, text: string, now: number): void {
  view.banner = { text, expiresAt: now + BANNER_MS };
}

export function activeBanner(view: ViewModel, now: number): string | null {
  if (view.banner && now < view.banner.expiresAt) {
    return view.banner.text;
  }
  return null;
}

export function applyWelcome(view: ViewModel, msg: WelcomeMsg, now: number): void {
  const m = msg.map;
  view.map = {
    width: m.width,
    height: m.height,
    resolution: m.resolution,
    origin: m.origin,
    cells: decodeCellsRle(m.cells_rle, m.width, m.height),
  };
  view.role = msg.role;
  view.connection = "connected";
  if (msg.role !== view.requestedRole) {
    showBanner(view, `joined as ${msg.role}`, now);
  }
}

export function applySnapshot(view: ViewModel, msg: SnapshotMsg): void {
  view.snapshot = msg;
}

export function applyServerError(view: ViewModel, msg: ErrorMsg, now: number): void {
  showBanner(view, `${msg.code}: ${msg.message}`, now);
}

export type ClickResult =
  | { kind: "goal"; x: number; y: number }
  | { kind: "notice"; text: string }
  | { kind: "none" };

/** Map a click to a set_goal, a view-only notice, or nothing. */
export function clickToGoal(
  view: ViewModel,
  camera: Camera,
  px: number,
  py: number,
): ClickResult {
  if (view.connection !== "connected" || view.map === null) {
    return { kind: "none" };
  }
  const [wx, wy] = screenToWorld(camera, px, py);
  const m = view.map;
  const inX = wx >= m.origin[0] && wx < m.origin[0] + m.width * m.resolution;
  const inY = wy >= m.origin[1] && wy < m.origin[1] + m.height * m.resolution;
  if (!inX || !inY) {
    return { kind: "none" }; // outside the map raster
  }
  if (view.role !== "operator") {
    return { kind: "notice", text: "view-only session" };
  }
  return { kind: "goal", x: wx, y: wy };
}
