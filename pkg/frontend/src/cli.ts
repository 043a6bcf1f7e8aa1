#!/usr/bin/env node
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { runPlot } from "./plot.js";

const argv = yargs(hideBin(process.argv))
  .scriptName("plot")
  .usage("$0 --spec <file> [--out <file>] [--dump <file>]")
  .option("spec", {
    type: "string",
    demandOption: true,
    describe: "YAML plot spec to render",
  })
  .option("out", {
    type: "string",
    describe: "override the output SVG path from the spec",
  })
  .option("dump", {
    type: "string",
    describe: "also write the resolved panel data as JSON",
  })
  .strict()
  .parseSync();

try {
  const result = runPlot(argv.spec, argv.out, argv.dump);
  console.log(`wrote ${result.output}`);
  if (result.dump !== null) {
    console.log(`wrote ${result.dump}`);
  }
} catch (exc) {
  const message = exc instanceof Error ? exc.message : String(exc);
  console.error(`error: ${message}`);
  process.exit(1);
}
