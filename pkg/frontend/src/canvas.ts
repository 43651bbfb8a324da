// Layout renderer over a minimal 2D drawing interface.
//
// The interface is the structural subset of CanvasRenderingContext2D the
// renderer needs, so tests can substitute a recording context and assert
// exactly what was drawn. Rendering the same snapshot twice performs the
// same operations in the same order.

import type { PlacementDoc, RoomDoc } from "./types";
import { fitRoom, frontTick, rotatedCorners, toScreen } from "./transform";

export interface Draw2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  textAlign: string;
  textBaseline: string;
}

export interface RenderStats {
  rects: number;
  ticks: number;
  labels: number;
  features: number;
}

const ROOM_EDGE = "#1b1b1b";
const OBJECT_FILL = "#7fa8c9";
const OBJECT_EDGE = "#2b4a66";
const FEATURE_COLORS: Record<string, string> = { door: "#b03a2e", window: "#2874a6", open: "#7d8a8f" };

function polyPath(ctx: Draw2D, points: [number, number][]): void {
  ctx.beginPath();
  ctx.moveTo(points[0][0], points[0][1]);
  for (const [x, y] of points.slice(1)) ctx.lineTo(x, y);
  ctx.closePath();
}

export function renderLayout(
  ctx: Draw2D,
  width: number,
  height: number,
  room: RoomDoc,
  placements: PlacementDoc[],
  labelObjects = true,
): RenderStats {
  const stats: RenderStats = { rects: 0, ticks: 0, labels: 0, features: 0 };
  const fit = fitRoom(room.polygon.vertices, width, height);
  ctx.clearRect(0, 0, width, height);

  ctx.strokeStyle = ROOM_EDGE;
  ctx.lineWidth = 2;
  polyPath(ctx, room.polygon.vertices.map(([x, y]) => toScreen(fit, x, y)));
  ctx.stroke();

  for (const feature of room.polygon.features ?? []) {
    const verts = room.polygon.vertices;
    const a = verts[feature.wall_index];
    const b = verts[(feature.wall_index + 1) % verts.length];
    const len = Math.hypot(b[0] - a[0], b[1] - a[1]);
    const dx = (b[0] - a[0]) / len;
    const dy = (b[1] - a[1]) / len;
    const p1 = toScreen(fit, a[0] + dx * feature.start, a[1] + dy * feature.start);
    const p2 = toScreen(fit, a[0] + dx * feature.end, a[1] + dy * feature.end);
    ctx.strokeStyle = FEATURE_COLORS[feature.kind] ?? ROOM_EDGE;
    ctx.lineWidth = 4;
    ctx.beginPath();
    ctx.moveTo(p1[0], p1[1]);
    ctx.lineTo(p2[0], p2[1]);
    ctx.stroke();
    stats.features += 1;
  }

  const ordered = [...placements].sort((a, b) => a.id.localeCompare(b.id));
  for (const p of ordered) {
    const corners = rotatedCorners(p.center, p.half_extents, p.rotation).map(([x, y]) =>
      toScreen(fit, x, y),
    );
    ctx.fillStyle = OBJECT_FILL;
    ctx.strokeStyle = OBJECT_EDGE;
    ctx.lineWidth = 1.2;
    polyPath(ctx, corners);
    ctx.fill();
    ctx.stroke();
    stats.rects += 1;

    const [t1, t2] = frontTick(p.center, p.half_extents, p.rotation);
    const s1 = toScreen(fit, t1[0], t1[1]);
    const s2 = toScreen(fit, t2[0], t2[1]);
    ctx.strokeStyle = OBJECT_EDGE;
    ctx.lineWidth = 1.6;
    ctx.beginPath();
    ctx.moveTo(s1[0], s1[1]);
    ctx.lineTo(s2[0], s2[1]);
    ctx.stroke();
    stats.ticks += 1;

    if (labelObjects) {
      const [cx, cy] = toScreen(fit, p.center[0], p.center[1]);
      ctx.fillStyle = "#1b2b3a";
      ctx.font = "10px sans-serif";
      ctx.textAlign = "center";
      ctx.textBaseline = "middle";
      ctx.fillText(p.object_name, cx, cy);
      stats.labels += 1;
    }
  }
  return stats;
}
