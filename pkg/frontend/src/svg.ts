/**
 * Hand-built SVG line chart with a logarithmic y axis.
 *
 * One polyline per series, decade ticks on the y axis, a legend in figure
 * order, and a dotted annotation line at the clipping floor whenever some
 * points were clipped onto it.
 */

import { FigureData, Series, Y_FLOOR } from "./figure.js";

const PALETTE = [
  "#4361ee",
  "#e63946",
  "#2d6a4f",
  "#f77f00",
  "#7209b7",
  "#0096c7",
  "#d62828",
  "#588157",
];

const W = 760;
const H = 520;
const MARGIN = { left: 80, right: 24, top: 48, bottom: 96 };

export interface SvgOptions {
  title?: string;
  xLabel?: string;
  yLabel?: string;
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function fmtTick(v: number): string {
  const exp = Math.round(Math.log10(v));
  if (Math.abs(v - 10 ** exp) / 10 ** exp < 1e-9) {
    return `1e${exp}`;
  }
  return v.toExponential(0);
}

export function renderSvg(figure: FigureData, opts: SvgOptions = {}): string {
  const plotted = figure.series.filter((s) => s.y.length > 0);
  const xs = plotted.flatMap((s) => s.x);
  const ys = plotted.flatMap((s) => s.y.map((v) => Math.max(v, Y_FLOOR)));
  const anyClipped = plotted.some((s) => s.clipped_points > 0);

  const xMin = xs.length ? Math.min(...xs) : 0;
  const xMax = xs.length ? Math.max(...xs) : 1;
  const yMinRaw = ys.length ? Math.min(...ys) : Y_FLOOR;
  const yMaxRaw = ys.length ? Math.max(...ys) : 1;
  const yLo = Math.floor(Math.log10(yMinRaw));
  const yHi = Math.ceil(Math.log10(yMaxRaw === yMinRaw ? yMaxRaw * 10 : yMaxRaw));

  const plotW = W - MARGIN.left - MARGIN.right;
  const plotH = H - MARGIN.top - MARGIN.bottom;
  const sx = (x: number) =>
    MARGIN.left + (xMax === xMin ? 0.5 : (x - xMin) / (xMax - xMin)) * plotW;
  const sy = (y: number) => {
    const ly = Math.log10(Math.max(y, Y_FLOOR));
    return MARGIN.top + (1 - (ly - yLo) / Math.max(yHi - yLo, 1)) * plotH;
  };

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" ` +
      `viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">`
  );
  parts.push(`<rect width="${W}" height="${H}" fill="white"/>`);
  if (opts.title) {
    parts.push(
      `<text x="${W / 2}" y="26" text-anchor="middle" font-size="16">` +
        `${esc(opts.title)}</text>`
    );
  }

  // frame
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" ` +
      `fill="none" stroke="#999" stroke-width="1"/>`
  );

  // y decade ticks and gridlines
  const decadeStep = Math.max(1, Math.ceil((yHi - yLo) / 10));
  for (let e = yLo; e <= yHi; e += decadeStep) {
    const v = 10 ** e;
    const y = sy(v);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y}" x2="${MARGIN.left + plotW}" y2="${y}" ` +
        `stroke="#eee" stroke-width="1"/>`
    );
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${y + 4}" text-anchor="end" font-size="11">` +
        `${fmtTick(v)}</text>`
    );
  }

  // x ticks
  const nXTicks = 6;
  for (let i = 0; i <= nXTicks; i++) {
    const v = xMin + ((xMax - xMin) * i) / nXTicks;
    const x = sx(v);
    parts.push(
      `<line x1="${x}" y1="${MARGIN.top + plotH}" x2="${x}" ` +
        `y2="${MARGIN.top + plotH + 5}" stroke="#666"/>`
    );
    parts.push(
      `<text x="${x}" y="${MARGIN.top + plotH + 20}" text-anchor="middle" ` +
        `font-size="11">${Math.round(v)}</text>`
    );
  }

  // floor annotation when anything was clipped onto it
  if (anyClipped) {
    const y = sy(Y_FLOOR);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y}" x2="${MARGIN.left + plotW}" y2="${y}" ` +
        `stroke="#888" stroke-width="1" stroke-dasharray="3,3"/>`
    );
    parts.push(
      `<text x="${MARGIN.left + plotW - 4}" y="${y - 5}" text-anchor="end" ` +
        `font-size="10" fill="#666">clipped at ${Y_FLOOR}</text>`
    );
  }

  // series
  plotted.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    parts.push(seriesPolyline(s, color, sx, sy));
  });

  // legend, in figure (final-value) order
  plotted.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const y = H - MARGIN.bottom + 44 + 16 * Math.floor(i / 2);
    const x = MARGIN.left + (i % 2) * (plotW / 2);
    parts.push(
      `<line x1="${x}" y1="${y - 4}" x2="${x + 22}" y2="${y - 4}" ` +
        `stroke="${color}" stroke-width="2"/>`
    );
    parts.push(
      `<text x="${x + 28}" y="${y}" font-size="11">${esc(s.label)}</text>`
    );
  });

  // axis labels
  const xLabel = opts.xLabel ?? figure.x_field;
  const yLabel = opts.yLabel ?? `${figure.y_field} (log scale)`;
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${MARGIN.top + plotH + 38}" ` +
      `text-anchor="middle" font-size="12">${esc(xLabel)}</text>`
  );
  parts.push(
    `<text x="20" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="12" ` +
      `transform="rotate(-90 20 ${MARGIN.top + plotH / 2})">${esc(yLabel)}</text>`
  );

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

function seriesPolyline(
  s: Series,
  color: string,
  sx: (x: number) => number,
  sy: (y: number) => number
): string {
  const pts = s.x
    .map((x, i) => `${sx(x).toFixed(2)},${sy(s.y[i]).toFixed(2)}`)
    .join(" ");
  return (
    `<polyline points="${pts}" fill="none" stroke="${color}" ` +
    `stroke-width="1.5" opacity="0.9"/>`
  );
}
