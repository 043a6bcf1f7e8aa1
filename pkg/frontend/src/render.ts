import { scaleLinear } from "d3-scale";
import { area, line } from "d3-shape";
import type { Panel, PanelSeries } from "./series.js";

export interface RenderOptions {
  width?: number;
  height?: number;
}

const PALETTE = [
  "#4e79a7",
  "#f28e2c",
  "#e15759",
  "#76b7b2",
  "#59a14f",
  "#edc949",
  "#af7aa1",
  "#ff9da7",
  "#9c755f",
  "#bab0ab",
];

const MARGIN = { top: 40, right: 18, bottom: 48, left: 64 };

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return [lo, hi];
}

/** Render a panel as a standalone SVG document string. */
export function renderSvg(panel: Panel, options: RenderOptions = {}): string {
  const width = options.width ?? 760;
  const height = options.height ?? 440;
  const innerRight = width - MARGIN.right;
  const innerBottom = height - MARGIN.bottom;

  const [tMin, tMax] = extent(panel.series[0].t);
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const s of panel.series) {
    const [lo] = extent(s.bandLow);
    const [, hi] = extent(s.bandHigh);
    const [lineLo, lineHi] = extent(s.line);
    yMin = Math.min(yMin, lo, lineLo);
    yMax = Math.max(yMax, hi, lineHi);
  }
  if (yMin === yMax) {
    yMin -= 1;
    yMax += 1;
  }

  const xs = scaleLinear().domain([tMin, tMax]).range([MARGIN.left, innerRight]);
  const ys = scaleLinear().domain([yMin, yMax]).nice().range([innerBottom, MARGIN.top]);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="12">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);

  const yTicks = ys.ticks(6);
  const yFormat = ys.tickFormat(6);
  for (const tick of yTicks) {
    const y = ys(tick);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y}" x2="${innerRight}" y2="${y}" stroke="#dddddd" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${y}" text-anchor="end" dominant-baseline="middle">${escapeXml(yFormat(tick))}</text>`,
    );
  }
  const xTicks = xs.ticks(6);
  const xFormat = xs.tickFormat(6);
  for (const tick of xTicks) {
    const x = xs(tick);
    parts.push(
      `<line x1="${x}" y1="${innerBottom}" x2="${x}" y2="${innerBottom + 5}" stroke="#333333" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${x}" y="${innerBottom + 18}" text-anchor="middle">${escapeXml(xFormat(tick))}</text>`,
    );
  }
  parts.push(
    `<line x1="${MARGIN.left}" y1="${innerBottom}" x2="${innerRight}" y2="${innerBottom}" stroke="#333333" stroke-width="1"/>`,
  );
  parts.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${innerBottom}" stroke="#333333" stroke-width="1"/>`,
  );

  const bandPath = (s: PanelSeries): string | null =>
    area<number>()
      .x((_, i) => xs(s.t[i]))
      .y0((_, i) => ys(s.bandLow[i]))
      .y1((_, i) => ys(s.bandHigh[i]))(s.t);
  const linePath = (s: PanelSeries): string | null =>
    line<number>()
      .x((_, i) => xs(s.t[i]))
      .y((_, i) => ys(s.line[i]))(s.t);

  panel.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const band = bandPath(s);
    if (band !== null) {
      parts.push(`<path d="${band}" fill="${color}" fill-opacity="0.18" stroke="none"/>`);
    }
  });
  panel.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const path = linePath(s);
    const dash = s.style === "dashed" ? ' stroke-dasharray="6,4"' : "";
    if (path !== null) {
      parts.push(
        `<path d="${path}" fill="none" stroke="${color}" stroke-width="1.8"${dash}/>`,
      );
    }
  });

  const legendX = MARGIN.left + 12;
  panel.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const y = MARGIN.top + 10 + 18 * i;
    const dash = s.style === "dashed" ? ' stroke-dasharray="6,4"' : "";
    parts.push(
      `<line x1="${legendX}" y1="${y}" x2="${legendX + 26}" y2="${y}" stroke="${color}" stroke-width="1.8"${dash}/>`,
    );
    parts.push(
      `<text x="${legendX + 32}" y="${y}" dominant-baseline="middle">${escapeXml(s.label)}</text>`,
    );
  });

  if (panel.title !== "") {
    parts.push(
      `<text x="${width / 2}" y="${MARGIN.top - 16}" text-anchor="middle" font-size="15">${escapeXml(panel.title)}</text>`,
    );
  }
  parts.push(
    `<text x="${(MARGIN.left + innerRight) / 2}" y="${height - 10}" text-anchor="middle">${escapeXml(panel.xLabel)}</text>`,
  );
  parts.push(
    `<text x="16" y="${(MARGIN.top + innerBottom) / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 16 ${(MARGIN.top + innerBottom) / 2})">${escapeXml(panel.yLabel)}</text>`,
  );

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
