/**
 * Turns parsed traces into figure data: one series per (solver, seed),
 * empty-valued rows skipped, curves ordered by their final y value so the
 * legend ranks solvers by where they ended up.
 */

import { Trace, TraceColumn, TRACE_COLUMNS } from "./trace.js";

export const Y_FIELDS = ["subopt", "dist", "grad_norm"] as const;
export const X_FIELDS = ["block_matvecs", "iter"] as const;

export type YField = (typeof Y_FIELDS)[number];
export type XField = (typeof X_FIELDS)[number];

/** Values at or below the floor are drawn on the floor line. */
export const Y_FLOOR = 1e-16;

export interface Series {
  label: string;
  solver: string;
  seed: string;
  file: string;
  x: number[];
  y: number[];
  /** rows whose y field was empty (unknown), skipped rather than zeroed */
  skipped_rows: number;
  /** points at or below the log floor, drawn clipped */
  clipped_points: number;
}

export interface FigureData {
  x_field: XField;
  y_field: YField;
  yscale: "log";
  y_floor: number;
  ordering: "final_y_ascending";
  series: Series[];
}

function seriesLabel(trace: Trace): { label: string; solver: string; seed: string } {
  const solver = trace.meta["solver"] ?? "unknown";
  const variant = trace.meta["variant"];
  const seed = trace.meta["seed"] ?? "?";
  const name = variant && variant !== "exp" ? `${solver}-${variant}` : solver;
  return { label: `${name} (seed ${seed})`, solver, seed };
}

export function buildFigure(
  traces: Trace[],
  xField: XField,
  yField: YField
): FigureData {
  if (!(X_FIELDS as readonly string[]).includes(xField)) {
    throw new Error(`x axis must be one of ${X_FIELDS.join(", ")}, got ${xField}`);
  }
  if (!(Y_FIELDS as readonly string[]).includes(yField)) {
    throw new Error(`y axis must be one of ${Y_FIELDS.join(", ")}, got ${yField}`);
  }
  if (traces.length === 0) {
    throw new Error("no trace files matched the glob");
  }
  for (const field of [xField, yField] as TraceColumn[]) {
    if (!(TRACE_COLUMNS as readonly string[]).includes(field)) {
      throw new Error(`unknown trace column ${field}`);
    }
  }
  const series: Series[] = traces.map((trace) => {
    const { label, solver, seed } = seriesLabel(trace);
    const x: number[] = [];
    const y: number[] = [];
    let skipped = 0;
    let clipped = 0;
    for (const row of trace.rows) {
      const yv = row[yField];
      if (yv === null || yv === undefined || Number.isNaN(yv)) {
        skipped += 1;
        continue;
      }
      const xv = row[xField];
      x.push(xv);
      y.push(yv);
      if (yv <= Y_FLOOR) clipped += 1;
    }
    return {
      label,
      solver,
      seed,
      file: trace.file,
      x,
      y,
      skipped_rows: skipped,
      clipped_points: clipped,
    };
  });
  series.sort((a, b) => finalY(a) - finalY(b));
  return {
    x_field: xField,
    y_field: yField,
    yscale: "log",
    y_floor: Y_FLOOR,
    ordering: "final_y_ascending",
    series,
  };
}

function finalY(s: Series): number {
  return s.y.length ? s.y[s.y.length - 1] : Number.POSITIVE_INFINITY;
}

/** Deterministic JSON sidecar (no timestamps, stable key order). */
export function sidecarJson(figure: FigureData): string {
  return JSON.stringify(figure, null, 2) + "\n";
}
