// Best-so-far loss curve over snapshot events.

import type { Draw2D } from "./canvas";
import type { LossPoint } from "./model";

export interface ChartStats {
  points: number;
}

export function renderLossChart(
  ctx: Draw2D,
  width: number,
  height: number,
  points: LossPoint[],
): ChartStats {
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#9aa7b1";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(32, 8);
  ctx.lineTo(32, height - 20);
  ctx.lineTo(width - 8, height - 20);
  ctx.stroke();
  if (points.length === 0) return { points: 0 };

  const maxTotal = Math.max(...points.map((p) => p.total), 1e-9);
  const x0 = 36;
  const x1 = width - 12;
  const y0 = height - 24;
  const y1 = 12;
  const xFor = (i: number) => (points.length === 1 ? x0 : x0 + ((x1 - x0) * i) / (points.length - 1));
  const yFor = (total: number) => y0 - ((y0 - y1) * total) / maxTotal;

  ctx.strokeStyle = "#2b4a66";
  ctx.lineWidth = 1.6;
  ctx.beginPath();
  ctx.moveTo(xFor(0), yFor(points[0].total));
  for (let i = 1; i < points.length; i++) ctx.lineTo(xFor(i), yFor(points[i].total));
  ctx.stroke();

  ctx.fillStyle = "#4a5a68";
  ctx.font = "9px sans-serif";
  ctx.textAlign = "left";
  ctx.textBaseline = "top";
  ctx.fillText(`best energy ${points[points.length - 1].total.toFixed(3)}`, 40, 8);
  return { points: points.length };
}
