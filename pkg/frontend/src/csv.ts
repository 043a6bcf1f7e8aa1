import { readFileSync } from "node:fs";
import Papa from "papaparse";

export interface AggregateData {
  configHash: string | null;
  t: number[];
  mean: number[];
  p25: number[];
  p75: number[];
  nSeeds: number;
}

const REQUIRED_COLUMNS = ["t", "mean", "p25", "p75", "n_seeds"];

/**
 * Read an aggregate reward CSV: an optional `# config_hash=...` comment line,
 * a `t,mean,p25,p75,n_seeds` header, then one row per timestep.
 */
export function readAggregateCsv(path: string): AggregateData {
  let text = readFileSync(path, "utf-8");
  let configHash: string | null = null;
  if (text.startsWith("# config_hash=")) {
    const eol = text.indexOf("\n");
    configHash = text.slice("# config_hash=".length, eol).trim();
    text = text.slice(eol + 1);
  }

  const parsed = Papa.parse<Record<string, unknown>>(text, {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new Error(`${path}: ${first.message} (row ${first.row})`);
  }
  const fields = parsed.meta.fields ?? [];
  for (const column of REQUIRED_COLUMNS) {
    if (!fields.includes(column)) {
      throw new Error(`${path}: expected columns ${REQUIRED_COLUMNS.join(",")}, got ${fields.join(",")}`);
    }
  }
  if (parsed.data.length === 0) {
    throw new Error(`${path}: no data rows`);
  }

  const t: number[] = [];
  const mean: number[] = [];
  const p25: number[] = [];
  const p75: number[] = [];
  let nSeeds = 0;
  parsed.data.forEach((row, i) => {
    for (const column of REQUIRED_COLUMNS) {
      const value = row[column];
      if (typeof value !== "number" || !Number.isFinite(value)) {
        throw new Error(`${path}: non-numeric ${column} in data row ${i}`);
      }
    }
    t.push(row["t"] as number);
    mean.push(row["mean"] as number);
    p25.push(row["p25"] as number);
    p75.push(row["p75"] as number);
    nSeeds = row["n_seeds"] as number;
  });
  return { configHash, t, mean, p25, p75, nSeeds };
}
