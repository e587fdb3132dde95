#!/usr/bin/env node
/**
 * traceplot: convergence figures from benchmark trace CSVs.
 *
 * Usage:
 *   traceplot plot --glob 'traces/*.csv' --y subopt --x block_matvecs --out fig.svg
 *
 * Writes an SVG figure plus a JSON data sidecar (same basename, .json) that
 * holds exactly the plotted series; re-running on identical inputs produces
 * a byte-identical sidecar.
 */

import { writeFileSync } from "fs";
import path from "path";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { buildFigure, sidecarJson, XField, X_FIELDS, YField, Y_FIELDS } from "./figure.js";
import { renderSvg } from "./svg.js";
import { expandGlob, parseTrace } from "./trace.js";

export interface PlotArgs {
  glob: string;
  y: YField;
  x: XField;
  out: string;
  title?: string;
}

export function runPlot(args: PlotArgs): { svgPath: string; sidecarPath: string } {
  const files = expandGlob(args.glob);
  if (files.length === 0) {
    throw new Error(`no trace files match ${args.glob}`);
  }
  const traces = files.map(parseTrace);
  const figure = buildFigure(traces, args.x, args.y);

  let outPath = args.out;
  if (outPath.toLowerCase().endsWith(".png")) {
    // no rasterizer here; the vector figure carries the same content
    outPath = outPath.slice(0, -4) + ".svg";
    console.error(`note: writing vector output to ${outPath} instead of .png`);
  }
  const svg = renderSvg(figure, {
    title: args.title ?? `${args.y} vs ${args.x}`,
  });
  writeFileSync(outPath, svg);
  const sidecarPath = outPath.replace(/\.[^.]+$/, "") + ".json";
  writeFileSync(sidecarPath, sidecarJson(figure));
  return { svgPath: outPath, sidecarPath };
}

export function main(argv: string[]): number {
  const parser = yargs(argv)
    .command(
      "plot",
      "render one figure from trace CSVs",
      (y) =>
        y
          .option("glob", {
            type: "string",
            demandOption: true,
            describe: "trace files, e.g. 'traces/*.csv'",
          })
          .option("y", {
            choices: Y_FIELDS as unknown as string[],
            default: "subopt",
            describe: "y-axis column (log scale)",
          })
          .option("x", {
            choices: X_FIELDS as unknown as string[],
            default: "block_matvecs",
            describe: "x-axis column",
          })
          .option("out", {
            type: "string",
            demandOption: true,
            describe: "output image path (.svg)",
          })
          .option("title", { type: "string" }),
      (args) => {
        const { svgPath, sidecarPath } = runPlot({
          glob: args.glob as string,
          y: args.y as YField,
          x: args.x as XField,
          out: args.out as string,
          title: args.title as string | undefined,
        });
        console.log(svgPath);
        console.log(sidecarPath);
      }
    )
    .demandCommand(1)
    .strict()
    .help();
  parser.parseSync();
  return 0;
}

const entry = process.argv[1] ? path.resolve(process.argv[1]) : "";
if (
  entry.endsWith(path.join("dist", "cli.js")) ||
  entry.endsWith(path.join("src", "cli.ts"))
) {
  try {
    process.exit(main(hideBin(process.argv)));
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    process.exit(1);
  }
}
