import { readFileSync } from "node:fs";
import { dirname, resolve } from "node:path";
import yaml from "js-yaml";
import { z } from "zod";

const seriesSchema = z
  .object({
    csv: z.string().min(1),
    label: z.string().min(1),
    style: z.enum(["solid", "dashed"]).default("solid"),
  })
  .strict();

const plotSpecSchema = z
  .object({
    title: z.string().default(""),
    x_label: z.string().default("timestep"),
    y_label: z.string().optional(),
    y_mode: z.enum(["mean_cumulative", "moving_average"]),
    window: z.number().int().positive().default(100),
    output: z.string().min(1),
    series: z.array(seriesSchema).min(1),
  })
  .strict();

export type SeriesSpec = z.infer<typeof seriesSchema>;
export type PlotSpec = z.infer<typeof plotSpecSchema>;

/** Validate a raw object (already parsed from YAML/JSON) as a plot spec. */
export function parseSpec(raw: unknown, origin = "plot spec"): PlotSpec {
  const result = plotSpecSchema.safeParse(raw);
  if (!result.success) {
    const issues = result.error.issues
      .map((issue) => `${issue.path.join(".") || "(root)"}: ${issue.message}`)
      .join("; ");
    throw new Error(`${origin}: ${issues}`);
  }
  return result.data;
}

/**
 * Load a YAML plot spec from disk. The csv and output paths inside the file
 * are resolved relative to the directory containing the spec.
 */
export function loadSpec(path: string): PlotSpec {
  const raw = yaml.load(readFileSync(path, "utf-8"));
  const spec = parseSpec(raw, path);
  const base = dirname(resolve(path));
  return {
    ...spec,
    output: resolve(base, spec.output),
    series: spec.series.map((s) => ({ ...s, csv: resolve(base, s.csv) })),
  };
}
