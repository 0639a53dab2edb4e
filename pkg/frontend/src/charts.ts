/** Per-trial metric series for the experimenter console. */
import type { TrialSummary } from "./protocol.js";
import type { Ctx2D } from "./render.js";

export type Aggregate = TrialSummary["aggregate"];

export interface Series {
  label: string;
  x: number[];
  y: number[];
}

export function buildSeries(
  summaries: Aggregate[],
  key: "mean_abs_force_error_n" | "force_sd_n" | "mean_abs_elongation_error_mm",
  label: string,
): Series {
  const x: number[] = [];
  const y: number[] = [];
  summaries.forEach((aggregate, index) => {
    const value = aggregate[key];
    if (value !== null && value !== undefined) {
      x.push(index);
      y.push(value);
    }
  });
  return { label, x, y };
}

export function drawLineChart(
  ctx: Ctx2D,
  series: Series,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#888";
  ctx.lineWidth = 1;
  ctx.strokeRect(0.5, 0.5, width - 1, height - 1);
  ctx.fillStyle = "#222";
  ctx.font = "12px sans-serif";
  ctx.textAlign = "left";
  ctx.fillText(series.label, 8, 16);
  if (series.y.length === 0) return;
  const yMax = Math.max(...series.y, 1e-9);
  const xMax = Math.max(...series.x, 1);
  const pad = 24;
  ctx.strokeStyle = "#2a6";
  ctx.lineWidth = 2;
  ctx.beginPath();
  series.x.forEach((xv, i) => {
    const px = pad + (xv / xMax) * (width - 2 * pad);
    const py = height - pad - (series.y[i] / yMax) * (height - 2 * pad);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();
}
