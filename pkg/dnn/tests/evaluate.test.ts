import { describe, expect, it } from "vitest";

import { Classifier, train } from "../src/model.js";
import { evaluate } from "../src/evaluate.js";
import { resultRow, resultsCsv, wilsonInterval, CSV_HEADER } from "../src/results.js";
import type { DatasetMeta } from "../src/data.js";

function memorizedModel() {
  // two classes told apart by the first coordinate
  const inputs = new Float64Array([1, 1, 1, 1, -1, 1, 1, 1, 1, -1, -1, -1, -1, -1, 1, -1]);
  const labels = new Int32Array([0, 0, 1, 1]);
  const model = new Classifier({ architecture: "MLP", inputBits: 4, numClasses: 2, rho: 8, seed: 1 });
  train(model, inputs, labels, 4, { epochs: 120, seed: 2 });
  return { model, split: { inputs, labels, rows: 4 } };
}

describe("evaluation", () => {
  it("memorized training data evaluates to zero error", () => {
    const { model, split } = memorizedModel();
    const ev = evaluate(model, split, 1, 2);
    expect(ev.svep).toBe(0);
    expect(ev.ser).toBe(0);
  });

  it("confusion matrix rows sum to per-class sample counts", () => {
    const { model, split } = memorizedModel();
    const ev = evaluate(model, split, 1, 2);
    const rowSums = [0, 1].map((r) => ev.confusion[r * 2] + ev.confusion[r * 2 + 1]);
    expect(rowSums).toEqual([2, 2]);
  });

  it("per-user symbol errors never exceed vector errors times user count", () => {
    const { model, split } = memorizedModel();
    const ev = evaluate(model, split, 1, 2);
    expect(ev.symbolErrors).toBeLessThanOrEqual(ev.vectorErrors * 1);
    expect(ev.ser).toBeLessThanOrEqual(ev.svep);
  });
});

describe("results schema", () => {
  const meta = {
    snr_db: [20, 15], num_classes: 2, vector_length: 4, train_rows: 4, test_rows: 4,
    reference: { detector: "AML", ser: 0, svep: 0, test_vectors: 4 },
    spec: { n_users: 1, constellation: "qpsk" },
  } as DatasetMeta;

  it("emits rows in the shared sweep schema with an empty seconds column", () => {
    const { model, split } = memorizedModel();
    const ev = evaluate(model, split, 1, 2);
    const row = resultRow("DNN4", meta, ev);
    expect(row.startsWith("DNN4,20,15,0,")).toBe(true);
    expect(row.endsWith(",")).toBe(true);
    expect(row.split(",").length).toBe(CSV_HEADER.split(",").length);
    const csv = resultsCsv([row]);
    expect(csv.split("\n")[0]).toBe(CSV_HEADER);
  });

  it("wilson interval brackets the point estimate", () => {
    const [lo, hi] = wilsonInterval(100, 1000);
    expect(lo).toBeCloseTo(0.082905, 5);
    expect(hi).toBeCloseTo(0.120153, 5);
    expect(wilsonInterval(0, 50)[0]).toBe(0);
  });
});
