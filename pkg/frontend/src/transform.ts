// World (meters, y up) to screen (pixels, y down) mapping that fits a room
// into a viewport while preserving aspect ratio.

export interface Fit {
  scale: number; // px per meter
  minX: number;
  minY: number;
  margin: number;
  width: number;
  height: number;
}

export function fitRoom(
  vertices: [number, number][],
  width: number,
  height: number,
  margin = 0.5,
): Fit {
  const xs = vertices.map((v) => v[0]);
  const ys = vertices.map((v) => v[1]);
  const minX = Math.min(...xs);
  const maxX = Math.max(...xs);
  const minY = Math.min(...ys);
  const maxY = Math.max(...ys);
  const worldW = maxX - minX + 2 * margin;
  const worldH = maxY - minY + 2 * margin;
  const scale = Math.min(width / worldW, height / worldH);
  return { scale, minX, minY, margin, width, height };
}

export function toScreen(fit: Fit, x: number, y: number): [number, number] {
  const sx = (x - fit.minX + fit.margin) * fit.scale;
  const sy = fit.height - (y - fit.minY + fit.margin) * fit.scale;
  return [sx, sy];
}

export function rotatedCorners(
  center: [number, number],
  halfExtents: [number, number],
  rotationDeg: number,
): [number, number][] {
  const r = (rotationDeg * Math.PI) / 180;
  const c = Math.cos(r);
  const s = Math.sin(r);
  const [hw, hd] = halfExtents;
  const locals: [number, number][] = [
    [-hw, -hd],
    [hw, -hd],
    [hw, hd],
    [-hw, hd],
  ];
  return locals.map(([lx, ly]) => [center[0] + c * lx - s * ly, center[1] + s * lx + c * ly]);
}

export function frontTick(
  center: [number, number],
  halfExtents: [number, number],
  rotationDeg: number,
  length = 0.15,
): [[number, number], [number, number]] {
  const r = (rotationDeg * Math.PI) / 180;
  const fx = -Math.sin(r);
  const fy = Math.cos(r);
  const start: [number, number] = [center[0] + fx * halfExtents[1], center[1] + fy * halfExtents[1]];
  const end: [number, number] = [start[0] + fx * length, start[1] + fy * length];
  return [start, end];
}
