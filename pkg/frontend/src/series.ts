import type { AggregateData } from "./csv.js";
import type { PlotSpec } from "./spec.js";

export interface PanelSeries {
  label: string;
  style: "solid" | "dashed";
  t: number[];
  line: number[];
  bandLow: number[];
  bandHigh: number[];
}

export interface Panel {
  title: string;
  xLabel: string;
  yLabel: string;
  yMode: PlotSpec["y_mode"];
  window: number;
  series: PanelSeries[];
}

export interface LoadedSeries {
  file: string;
  label: string;
  style: "solid" | "dashed";
  data: AggregateData;
}

/** Trailing mean over min(window, t) points; the warm-up uses the prefix. */
export function movingAverage(series: number[], window: number): number[] {
  if (!Number.isInteger(window) || window < 1) {
    throw new Error("window must be a positive integer");
  }
  const n = series.length;
  const csum = new Array<number>(n);
  let acc = 0;
  for (let i = 0; i < n; i++) {
    acc += series[i];
    csum[i] = acc;
  }
  const out = new Array<number>(n);
  const head = Math.min(window, n);
  for (let i = 0; i < head; i++) {
    out[i] = csum[i] / (i + 1);
  }
  for (let i = window; i < n; i++) {
    out[i] = (csum[i] - csum[i - window]) / window;
  }
  return out;
}

function sameGrid(a: number[], b: number[]): boolean {
  return a.length === b.length && a.every((value, i) => value === b[i]);
}

/**
 * Assemble panel data from loaded aggregates. In mean_cumulative mode the
 * band edges are the CSV's p25/p75 columns verbatim; in moving_average mode
 * every column is smoothed with the trailing window first. All series must
 * share one time grid.
 */
export function buildPanel(spec: PlotSpec, loaded: LoadedSeries[]): Panel {
  if (loaded.length === 0) {
    throw new Error("panel needs at least one series");
  }
  const reference = loaded[0];
  for (const s of loaded.slice(1)) {
    if (!sameGrid(s.data.t, reference.data.t)) {
      throw new Error(`${s.file}: time grid differs from ${reference.file}`);
    }
  }

  const smooth =
    spec.y_mode === "moving_average"
      ? (column: number[]) => movingAverage(column, spec.window)
      : (column: number[]) => column;

  const series = loaded.map((s) => ({
    label: s.label,
    style: s.style,
    t: s.data.t,
    line: smooth(s.data.mean),
    bandLow: smooth(s.data.p25),
    bandHigh: smooth(s.data.p75),
  }));

  const yLabel =
    spec.y_label ??
    (spec.y_mode === "mean_cumulative"
      ? "mean cumulative reward"
      : `moving average reward (window ${spec.window})`);

  return {
    title: spec.title,
    xLabel: spec.x_label,
    yLabel,
    yMode: spec.y_mode,
    window: spec.window,
    series,
  };
}

/** Serialize the resolved panel data (what the renderer draws) as JSON. */
export function dumpPanel(panel: Panel): string {
  const payload = {
    title: panel.title,
    y_mode: panel.yMode,
    window: panel.window,
    series: panel.series.map((s) => ({
      label: s.label,
      style: s.style,
      t: s.t,
      line: s.line,
      band_low: s.bandLow,
      band_high: s.bandHigh,
    })),
  };
  return JSON.stringify(payload, null, 1) + "\n";
}
