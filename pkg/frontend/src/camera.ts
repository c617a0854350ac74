/** Affine world<->screen transform with pan and zoom.
 *
 * screen = (ox + sx * wx, oy + sy * wy). Display cameras flip y (sy < 0)
 * so world +y points up; the identity camera keeps both axes untouched.
 */

export interface Camera {
  sx: number;
  sy: number;
  ox: number;
  oy: number;
}

export const IDENTITY: Camera = { sx: 1, sy: 1, ox: 0, oy: 0 };

export function worldToScreen(c: Camera, wx: number, wy: number): [number, number] {
  return [c.ox + c.sx * wx, c.oy + c.sy * wy];
}

export function screenToWorld(c: Camera, px: number, py: number): [number, number] {
  return [(px - c.ox) / c.sx, (py - c.oy) / c.sy];
}

/** Center the map extent in the viewport with a pixel margin, y up. */
export function fitMap(
  mapWidthM: number,
  mapHeightM: number,
  viewWidthPx: number,
  viewHeightPx: number,
  originX = 0,
  originY = 0,
  marginPx = 24,
): Camera {
  const usableW = Math.max(1, viewWidthPx - 2 * marginPx);
  const usableH = Math.max(1, viewHeightPx - 2 * marginPx);
  const scale = Math.min(usableW / mapWidthM, usableH / mapHeightM);
  const cx = originX + mapWidthM / 2;
  const cy = originY + mapHeightM / 2;
  return {
    sx: scale,
    sy: -scale,
    ox: viewWidthPx / 2 - scale * cx,
    oy: viewHeightPx / 2 + scale * cy,
  };
}

export function panBy(c: Camera, dxPx: number, dyPx: number): Camera {
  return { ...c, ox: c.ox + dxPx, oy: c.oy + dyPx };
}

/** Scale around a screen point so the world point under it stays put. */
export function zoomAt(c: Camera, px: number, py: number, factor: number): Camera {
  return {
    sx: c.sx * factor,
    sy: c.sy * factor,
    ox: px - (px - c.ox) * factor,
    oy: py - (py - c.oy) * factor,
  };
}
