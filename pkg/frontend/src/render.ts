/** Canvas renderer. Draw order, back to front: map cells, belief overlay,
 * planned path, laser rays, robot (plus true-pose outline in debug), DWA
 * candidate arcs with the selected one highlighted. Panels are DOM, not
 * canvas, and live in main.ts.
 */

import { Camera, worldToScreen } from "./camera";
import { decodeMarginal, SnapshotMsg } from "./protocol";
import { DecodedMap, ViewModel } from "./view";

const FREE_COLOR = "#f7f5ef";
const OCCUPIED_COLOR = "#35332f";
const UNKNOWN_COLOR = "#c7c2b6";
const BACKDROP = "#e9e7e1";
const ROBOT_RADIUS_M = 0.24; // visual size only; dynamics live server-side

const mapLayers = new WeakMap<DecodedMap, HTMLCanvasElement>();
let beliefLayer: { key: string; canvas: HTMLCanvasElement } | null = null;

function mapLayer(map: DecodedMap): HTMLCanvasElement {
  let layer = mapLayers.get(map);
  if (layer) {
    return layer;
  }
  layer = document.createElement("canvas");
  layer.width = map.width;
  layer.height = map.height;
  const ctx = layer.getContext("2d")!;
  for (let iy = 0; iy < map.height; iy++) {
    for (let ix = 0; ix < map.width; ix++) {
      const cell = map.cells[iy * map.width + ix]!;
      ctx.fillStyle =
        cell === 0 ? FREE_COLOR : cell === 1 ? OCCUPIED_COLOR : UNKNOWN_COLOR;
      // image rows run top-down, grid rows bottom-up
      ctx.fillRect(ix, map.height - 1 - iy, 1, 1);
    }
  }
  mapLayers.set(map, layer);
  return layer;
}

function beliefCanvas(snap: SnapshotMsg): HTMLCanvasElement {
  const b = snap.belief;
  if (beliefLayer && beliefLayer.key === b.marginal_b64) {
    return beliefLayer.canvas;
  }
  const weights = decodeMarginal(b.marginal_b64, b.nx, b.ny);
  let max = 0;
  for (const w of weights) {
    if (w > max) {
      max = w;
    }
  }
  const canvas = document.createElement("canvas");
  canvas.width = b.nx;
  canvas.height = b.ny;
  const ctx = canvas.getContext("2d")!;
  const image = ctx.createImageData(b.nx, b.ny);
  if (max > 0) {
    for (let iy = 0; iy < b.ny; iy++) {
      for (let ix = 0; ix < b.nx; ix++) {
        const a = Math.round(185 * (weights[iy * b.nx + ix]! / max));
        const px = 4 * ((b.ny - 1 - iy) * b.nx + ix);
        image.data[px] = 205;
        image.data[px + 1] = 18;
        image.data[px + 2] = 18;
        image.data[px + 3] = a;
      }
    }
  }
  ctx.putImageData(image, 0, 0);
  beliefLayer = { key: b.marginal_b64, canvas };
  return canvas;
}

/** Screen rect spanning a world-aligned box, robust to either y direction. */
function screenRect(
  cam: Camera,
  x0: number,
  y0: number,
  x1: number,
  y1: number,
): [number, number, number, number] {
  const [ax, ay] = worldToScreen(cam, x0, y0);
  const [bx, by] = worldToScreen(cam, x1, y1);
  return [Math.min(ax, bx), Math.min(ay, by), Math.abs(bx - ax), Math.abs(by - ay)];
}

function strokePolyline(
  ctx: CanvasRenderingContext2D,
  cam: Camera,
  points: [number, number][],
): void {
  if (points.length < 2) {
    return;
  }
  ctx.beginPath();
  for (let i = 0; i < points.length; i++) {
    const [sx, sy] = worldToScreen(cam, points[i]![0], points[i]![1]);
    if (i === 0) {
      ctx.moveTo(sx, sy);
    } else {
      ctx.lineTo(sx, sy);
    }
  }
  ctx.stroke();
}

function drawRobotMarker(
  ctx: CanvasRenderingContext2D,
  cam: Camera,
  pose: [number, number, number],
  outlineOnly: boolean,
): void {
  const [cx, cy] = worldToScreen(cam, pose[0], pose[1]);
  const r = Math.max(3, ROBOT_RADIUS_M * Math.abs(cam.sx));
  const [hx, hy] = worldToScreen(
    cam,
    pose[0] + 1.8 * ROBOT_RADIUS_M * Math.cos(pose[2]),
    pose[1] + 1.8 * ROBOT_RADIUS_M * Math.sin(pose[2]),
  );
  ctx.beginPath();
  ctx.arc(cx, cy, r, 0, 2 * Math.PI);
  if (outlineOnly) {
    ctx.strokeStyle = "#1d9e57";
    ctx.lineWidth = 1.5;
    ctx.setLineDash([4, 3]);
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.beginPath();
    ctx.moveTo(cx, cy);
    ctx.lineTo(hx, hy);
    ctx.stroke();
    return;
  }
  ctx.fillStyle = "#333a45";
  ctx.fill();
  ctx.strokeStyle = "#f7f5ef";
  ctx.lineWidth = 1.5;
  ctx.stroke();
  ctx.beginPath();
  ctx.moveTo(cx, cy);
  ctx.lineTo(hx, hy);
  ctx.strokeStyle = "#ffcf4d";
  ctx.lineWidth = 2.5;
  ctx.stroke();
}

export function renderScene(
  ctx: CanvasRenderingContext2D,
  view: ViewModel,
  cam: Camera,
  widthPx: number,
  heightPx: number,
): void {
  ctx.fillStyle = BACKDROP;
  ctx.fillRect(0, 0, widthPx, heightPx);
  const map = view.map;
  if (!map) {
    return;
  }
  ctx.imageSmoothingEnabled = false;

  const [mx, my, mw, mh] = screenRect(
    cam,
    map.origin[0],
    map.origin[1],
    map.origin[0] + map.width * map.resolution,
    map.origin[1] + map.height * map.resolution,
  );
  ctx.drawImage(mapLayer(map), mx, my, mw, mh);

  const snap = view.snapshot;
  if (!snap) {
    return;
  }

  const b = snap.belief;
  const [bx, by, bw, bh] = screenRect(
    cam,
    b.origin[0],
    b.origin[1],
    b.origin[0] + b.nx * b.xy_resolution,
    b.origin[1] + b.ny * b.xy_resolution,
  );
  ctx.drawImage(beliefCanvas(snap), bx, by, bw, bh);

  ctx.strokeStyle = "#1f5fd6";
  ctx.lineWidth = 2.5;
  strokePolyline(ctx, cam, snap.path);

  ctx.strokeStyle = "rgba(246,157,38,0.35)";
  ctx.lineWidth = 1;
  const [ex, ey] = worldToScreen(cam, snap.estimate[0], snap.estimate[1]);
  for (const [gx, gy] of snap.scan) {
    const [sx, sy] = worldToScreen(cam, gx, gy);
    ctx.beginPath();
    ctx.moveTo(ex, ey);
    ctx.lineTo(sx, sy);
    ctx.stroke();
  }

  drawRobotMarker(ctx, cam, snap.estimate, false);
  if (view.debug && snap.true_pose) {
    drawRobotMarker(ctx, cam, snap.true_pose, true);
  }

  for (const traj of snap.trajectories) {
    const selected =
      Math.abs(traj.v - snap.selected.v) < 1e-9 &&
      Math.abs(traj.omega - snap.selected.omega) < 1e-9;
    if (selected) {
      ctx.strokeStyle = "rgba(16,160,90,0.9)";
      ctx.lineWidth = 2.5;
    } else if (traj.admissible) {
      ctx.strokeStyle = "rgba(90,90,90,0.22)";
      ctx.lineWidth = 1;
    } else {
      ctx.strokeStyle = "rgba(201,60,60,0.12)";
      ctx.lineWidth = 1;
    }
    strokePolyline(ctx, cam, traj.points);
  }
}
