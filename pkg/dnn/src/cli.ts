/** Train a detector network on an exported dataset and report its error rates.

Usage:
  node dist/cli.js --data <dataset-dir> [--arch DNN4] [--epochs 150]
                   [--rho 100] [--seed 1] [--out results.csv]

<dataset-dir> is one grid-point directory written by
`onebit-relay export-dataset` (train.csv, test.csv, meta.json). Each
invocation trains one network per dataset directory given.
*/

import * as fs from "node:fs";

import { loadDataset } from "./data.js";
import { evaluateOnTest } from "./evaluate.js";
import { Architecture, Classifier, train } from "./model.js";
import { CSV_HEADER, resultRow } from "./results.js";

function parseArgs(argv: string[]): Map<string, string[]> {
  const args = new Map<string, string[]>();
  let key: string | null = null;
  for (const tok of argv) {
    if (tok.startsWith("--")) {
      key = tok.slice(2);
      args.set(key, []);
    } else if (key) {
      args.get(key)!.push(tok);
    }
  }
  return args;
}

export function main(argv: string[]): number {
  const args = parseArgs(argv);
  const dirs = args.get("data");
  if (!dirs || dirs.length === 0) {
    console.error("--data <dataset-dir> [more dirs...] is required");
    return 2;
  }
  const arch = (args.get("arch")?.[0] ?? "DNN4") as Architecture;
  const epochs = Number(args.get("epochs")?.[0] ?? 150);
  const rho = Number(args.get("rho")?.[0] ?? 100);
  const seed = Number(args.get("seed")?.[0] ?? 1);
  const out = args.get("out")?.[0];

  const rows: string[] = [];
  for (const dir of dirs) {
    const dataset = loadDataset(dir);
    const model = new Classifier({
      architecture: arch,
      inputBits: dataset.meta.vector_length,
      numClasses: dataset.meta.num_classes,
      rho,
      seed,
    });
    const history = train(model, dataset.train.inputs, dataset.train.labels,
                          dataset.train.rows, { epochs, seed });
    const ev = evaluateOnTest(model, dataset);
    const ref = dataset.meta.reference;
    console.log(
      `${dir}: ${arch} (${model.paramCount()} params, ${epochs} epochs, ` +
      `final loss ${history.trainLoss[history.trainLoss.length - 1].toFixed(4)}) ` +
      `svep=${ev.svep.toFixed(5)} ser=${ev.ser.toFixed(5)} ` +
      `| ${ref.detector} reference svep=${ref.svep.toFixed(5)}`);
    rows.push(resultRow(arch, dataset.meta, ev));
  }
  if (out) {
    fs.writeFileSync(out, [CSV_HEADER, ...rows].join("\n") + "\n");
    console.log(`wrote ${out}`);
  }
  return 0;
}

process.exitCode = main(process.argv.slice(2));
