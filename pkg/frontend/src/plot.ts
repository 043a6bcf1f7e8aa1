import { mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";
import { readAggregateCsv } from "./csv.js";
import { renderSvg } from "./render.js";
import { buildPanel, dumpPanel, type LoadedSeries, type Panel } from "./series.js";
import { loadSpec, type PlotSpec } from "./spec.js";

/** Read every CSV named by the spec and assemble the panel data. */
export function panelFromSpec(spec: PlotSpec): Panel {
  const loaded: LoadedSeries[] = spec.series.map((s) => ({
    file: s.csv,
    label: s.label,
    style: s.style,
    data: readAggregateCsv(s.csv),
  }));
  return buildPanel(spec, loaded);
}

export interface PlotResult {
  output: string;
  dump: string | null;
}

/**
 * Run one plot spec end to end: load the spec, read the CSVs, write the SVG
 * to the spec's output path (or `outOverride`), and optionally write the
 * resolved panel data as JSON to `dumpPath`.
 */
export function runPlot(
  specPath: string,
  outOverride?: string,
  dumpPath?: string,
): PlotResult {
  const spec = loadSpec(specPath);
  const panel = panelFromSpec(spec);
  const output = outOverride ?? spec.output;
  mkdirSync(dirname(output), { recursive: true });
  writeFileSync(output, renderSvg(panel), "utf-8");
  if (dumpPath !== undefined) {
    mkdirSync(dirname(dumpPath), { recursive: true });
    writeFileSync(dumpPath, dumpPanel(panel), "utf-8");
  }
  return { output, dump: dumpPath ?? null };
}
