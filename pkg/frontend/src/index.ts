export { readAggregateCsv, type AggregateData } from "./csv.js";
export { loadSpec, parseSpec, type PlotSpec, type SeriesSpec } from "./spec.js";
export {
  buildPanel,
  dumpPanel,
  movingAverage,
  type LoadedSeries,
  type Panel,
  type PanelSeries,
} from "./series.js";
export { renderSvg, type RenderOptions } from "./render.js";
export { panelFromSpec, runPlot, type PlotResult } from "./plot.js";
