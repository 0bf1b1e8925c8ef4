/**
 * Acceptance for the neural detector (criterion 9): on datasets exported by
 * the simulation harness for the [2, 8, 8] topology at first-hop SNR 20 dB
 * with 15 pilots per input, the large-recurrent-width network must stay
 * within 1.5x of the learned-model detector's vector error rate at
 * second-hop SNRs of 15 and 20 dB, and must not lose to the deeper
 * small-width variant. The analytic-gradient finite-difference check must
 * pass below 1e-4 relative error.
 *
 * Dataset generation shells out to the Python CLI, the same interface any
 * downstream consumer uses; the run is fully seeded end to end.
 */

import { execSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { Dataset, loadDataset } from "../src/data.js";
import { evaluateOnTest } from "../src/evaluate.js";
import { Architecture, Classifier, train } from "../src/model.js";
import { gradientCheck } from "../src/softmax.js";

const EPOCHS = 60;
const MODEL_SEED = 2;
const TRAIN_SEED = 11;

let dataDir: string;
const datasets = new Map<string, Dataset>();

beforeAll(() => {
  dataDir = fs.mkdtempSync(path.join(os.tmpdir(), "dnn-acceptance-"));
  execSync(
    [
      "python3 -m onebit_relay.cli export-dataset",
      "--users 2 --relays 8 --antennas 8",
      "--snr-db 20 15 --sweep-hop 2 --sweep-db 15 20",
      "--pilots 15 --symbols 8000 --trials 1 --seed 31",
      `--out ${dataDir}`,
    ].join(" "),
    { cwd: path.join(path.dirname(fileURLToPath(import.meta.url)), "..", ".."), stdio: "pipe" },
  );
  for (const tag of ["snr1_20_snr2_15", "snr1_20_snr2_20"]) {
    datasets.set(tag, loadDataset(path.join(dataDir, tag)));
  }
});

afterAll(() => {
  if (dataDir) fs.rmSync(dataDir, { recursive: true, force: true });
});

function trainAndScore(ds: Dataset, arch: Architecture): number {
  const model = new Classifier({
    architecture: arch,
    inputBits: ds.meta.vector_length,
    numClasses: ds.meta.num_classes,
    rho: 100,
    seed: MODEL_SEED,
  });
  train(model, ds.train.inputs, ds.train.labels, ds.train.rows,
        { epochs: EPOCHS, seed: TRAIN_SEED });
  return evaluateOnTest(model, ds).svep;
}

describe("acceptance", () => {
  it("criterion 9: network detector tracks the learned-model reference", () => {
    const details: string[] = [];
    let ok = true;
    for (const tag of ["snr1_20_snr2_15", "snr1_20_snr2_20"]) {
      const ds = datasets.get(tag)!;
      const dnn4 = trainAndScore(ds, "DNN4");
      const dnn1 = trainAndScore(ds, "DNN1");
      const ref = ds.meta.reference.svep;
      const ratio = dnn4 / ref;
      ok &&= ratio <= 1.5 && dnn4 <= dnn1;
      details.push(
        `${tag}: DNN4 svep=${dnn4.toFixed(5)} (${ratio.toFixed(2)}x of AML ${ref.toFixed(5)}), ` +
        `DNN1 svep=${dnn1.toFixed(5)}`);
    }
    const gc = gradientCheck();
    ok &&= gc.maxRelError < 1e-4;
    details.push(`gradient check rel err ${gc.maxRelError.toExponential(1)}`);
    console.log(`[${ok ? "PASS" : "FAIL"}] criterion 9: ${details.join("; ")}`);
    expect(ok).toBe(true);
  }, 900_000);
});
