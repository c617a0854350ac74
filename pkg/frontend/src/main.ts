/** Browser entry point: wires the session stream, the canvas, and the
 * side panel together. Query parameters: role=operator|observer (operator
 * by default), debug to show the true pose when the server exposes it.
 */

import { Camera, fitMap, panBy, zoomAt } from "./camera";
import { openSession } from "./net";
import { setGoalFrame } from "./protocol";
import { renderScene } from "./render";
import { snippetText } from "./snippets";
import {
  activeBanner,
  applyServerError,
  applySnapshot,
  applyWelcome,
  clickToGoal,
  initialView,
  showBanner,
  ViewModel,
} from "./view";

const params = new URLSearchParams(location.search);
const requestedRole = params.get("role") === "observer" ? "observer" : "operator";
const debug = params.has("debug");

const view: ViewModel = initialView(requestedRole, debug);
let camera: Camera | null = null;
let cameraTouched = false; // manual pan/zoom suppresses auto-refit
let statusDetail = "";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;

function el(id: string): HTMLElement {
  return document.getElementById(id)!;
}

const wsUrl =
  (location.protocol === "https:" ? "wss://" : "ws://") + location.host + "/ws";

const session = openSession(wsUrl, requestedRole, {
  onMessage(msg) {
    const now = performance.now();
    if (msg.type === "welcome") {
      applyWelcome(view, msg, now);
      if (!cameraTouched) {
        camera = null; // refit against the (possibly new) map
      }
    } else if (msg.type === "snapshot") {
      applySnapshot(view, msg);
    } else {
      applyServerError(view, msg, now);
    }
  },
  onFrameError() {
    view.frameErrors += 1;
  },
  onStatus(status, detail) {
    view.connection = status;
    statusDetail = detail ?? "";
  },
});

// ------------------------------------------------------------------- camera

function cssSize(): [number, number] {
  return [canvas.clientWidth, canvas.clientHeight];
}

function ensureCamera(): Camera | null {
  if (camera === null && view.map !== null) {
    const m = view.map;
    const [w, h] = cssSize();
    camera = fitMap(
      m.width * m.resolution,
      m.height * m.resolution,
      w,
      h,
      m.origin[0],
      m.origin[1],
    );
  }
  return camera;
}

window.addEventListener("resize", () => {
  if (!cameraTouched) {
    camera = null;
  }
});
el("fit").addEventListener("click", () => {
  cameraTouched = false;
  camera = null;
});

// -------------------------------------------------------------------- input

let dragFrom: { px: number; py: number; cam: Camera } | null = null;
let dragging = false;

canvas.addEventListener("mousedown", (ev) => {
  if (camera !== null) {
    dragFrom = { px: ev.offsetX, py: ev.offsetY, cam: camera };
    dragging = false;
  }
});

canvas.addEventListener("mousemove", (ev) => {
  if (dragFrom === null) {
    return;
  }
  const dx = ev.offsetX - dragFrom.px;
  const dy = ev.offsetY - dragFrom.py;
  if (dragging || Math.hypot(dx, dy) > 4) {
    dragging = true;
    cameraTouched = true;
    camera = panBy(dragFrom.cam, dx, dy);
  }
});

window.addEventListener("mouseup", (ev) => {
  const wasDragging = dragging;
  dragFrom = null;
  dragging = false;
  if (wasDragging || ev.target !== canvas || camera === null) {
    return;
  }
  const result = clickToGoal(view, camera, ev.offsetX, ev.offsetY);
  if (result.kind === "goal") {
    session.send(setGoalFrame(result.x, result.y));
  } else if (result.kind === "notice") {
    showBanner(view, result.text, performance.now());
  }
});

canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  const cam = ensureCamera();
  if (cam === null) {
    return;
  }
  let factor = Math.exp(-ev.deltaY * 0.0015);
  const next = Math.abs(cam.sx) * factor;
  factor *= Math.min(Math.max(next, 2), 5000) / next; // clamp px-per-meter
  cameraTouched = true;
  camera = zoomAt(cam, ev.offsetX, ev.offsetY, factor);
});

// ------------------------------------------------------------------- panels

const STAGES = ["sense", "localize", "plan", "act"] as const;

function updatePanels(): void {
  const dot = el("status-dot");
  dot.className = "dot " + view.connection;
  el("status-text").textContent =
    view.connection + (statusDetail ? ` (${statusDetail})` : "");
  el("role-badge").textContent = view.role;

  const banner = el("banner");
  const text = activeBanner(view, performance.now());
  banner.hidden = text === null;
  banner.textContent = text ?? "";

  const errs = el("frame-errors");
  errs.hidden = view.frameErrors === 0;
  errs.textContent = `dropped frames: ${view.frameErrors}`;

  const snap = view.snapshot;
  if (snap === null) {
    return;
  }
  const badge = el("state-badge");
  badge.textContent = snap.state;
  badge.className = "badge " + snap.state.toLowerCase();
  el("snippet").textContent = snippetText(snap.snippet);
  el("metrics").textContent =
    `tick ${snap.tick} · t=${snap.sim_time.toFixed(1)}s · ` +
    `confidence ${snap.confidence.toFixed(2)} · entropy ${snap.entropy.toFixed(2)}`;
  el("timings").textContent = STAGES.map(
    (s) => `${s} ${(snap.timings_ms[s] ?? 0).toFixed(1)}`,
  ).join(" · ") + " ms";
  const warn = el("warnings");
  warn.hidden = snap.warnings.length === 0;
  warn.textContent = snap.warnings.join("; ");
}

// --------------------------------------------------------------- frame loop

function frame(): void {
  const dpr = window.devicePixelRatio || 1;
  const [w, h] = cssSize();
  if (canvas.width !== Math.round(w * dpr) || canvas.height !== Math.round(h * dpr)) {
    canvas.width = Math.round(w * dpr);
    canvas.height = Math.round(h * dpr);
  }
  const cam = ensureCamera();
  ctx.setTransform(dpr, 0, 0, dpr, 0, 0);
  if (cam !== null) {
    renderScene(ctx, view, cam, w, h);
  }
  updatePanels();
  requestAnimationFrame(frame);
}

requestAnimationFrame(frame);
