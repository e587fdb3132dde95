/**
 * Reader for benchmark trace CSVs.
 *
 * Files carry '#'-prefixed metadata lines (key: value) followed by a fixed
 * header `iter,block_matvecs,fval,subopt,dist,grad_norm,wall_time_s` and
 * data rows. Reference-dependent fields (subopt, dist) may be empty, which
 * means "unknown", never zero.
 */

import { readFileSync, readdirSync, statSync } from "fs";
import path from "path";

export const TRACE_COLUMNS = [
  "iter",
  "block_matvecs",
  "fval",
  "subopt",
  "dist",
  "grad_norm",
  "wall_time_s",
] as const;

export type TraceColumn = (typeof TRACE_COLUMNS)[number];

export interface TraceRow {
  iter: number;
  block_matvecs: number;
  fval: number;
  subopt: number | null;
  dist: number | null;
  grad_norm: number;
  wall_time_s: number;
}

export interface Trace {
  file: string;
  meta: Record<string, string>;
  rows: TraceRow[];
}

function parseOptional(field: string): number | null {
  return field === "" ? null : Number(field);
}

export function parseTrace(filePath: string): Trace {
  const text = readFileSync(filePath, "utf-8");
  const meta: Record<string, string> = {};
  const body: string[] = [];
  for (const line of text.split(/\r?\n/)) {
    if (line.startsWith("#")) {
      const stripped = line.slice(1).trim();
      const sep = stripped.indexOf(":");
      if (sep > 0) {
        meta[stripped.slice(0, sep).trim()] = stripped.slice(sep + 1).trim();
      }
    } else if (line.trim() !== "") {
      body.push(line);
    }
  }
  if (body.length === 0 || body[0] !== TRACE_COLUMNS.join(",")) {
    throw new Error(
      `${filePath}: expected trace header "${TRACE_COLUMNS.join(",")}", ` +
        `got "${body[0] ?? "<empty>"}"`
    );
  }
  const rows: TraceRow[] = [];
  for (const line of body.slice(1)) {
    const parts = line.split(",");
    if (parts.length !== TRACE_COLUMNS.length) {
      throw new Error(`${filePath}: malformed row "${line}"`);
    }
    rows.push({
      iter: Number(parts[0]),
      block_matvecs: Number(parts[1]),
      fval: Number(parts[2]),
      subopt: parseOptional(parts[3]),
      dist: parseOptional(parts[4]),
      grad_norm: Number(parts[5]),
      wall_time_s: Number(parts[6]),
    });
  }
  return { file: filePath, meta, rows };
}

/**
 * Expand a single-directory glob like `traces/*.csv`.
 *
 * Only the final path segment may contain `*` wildcards; this covers the
 * tool's documented usage without pulling in a full glob implementation.
 */
export function expandGlob(pattern: string): string[] {
  const dir = path.dirname(pattern);
  const base = path.basename(pattern);
  if (!base.includes("*")) {
    statSync(pattern); // throws if missing
    return [pattern];
  }
  const regex = new RegExp(
    "^" + base.split("*").map(escapeRegex).join(".*") + "$"
  );
  const matches = readdirSync(dir)
    .filter((name) => regex.test(name))
    .sort()
    .map((name) => path.join(dir, name));
  return matches;
}

function escapeRegex(text: string): string {
  return text.replace(/[.*+?^${}()|[\]\\]/g, "\\$&");
}
