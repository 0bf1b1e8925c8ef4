import { describe, expect, it } from "vitest";

import { crossEntropy, gradientCheck, softmaxCrossEntropyGrad, softmaxRows } from "../src/softmax.js";

describe("softmax", () => {
  it("normalizes every row to one", () => {
    const logits = new Float64Array([1, 2, 3, -4, 0, 4, 100, 100, 100]);
    const probs = new Float64Array(9);
    softmaxRows(logits, probs, 3, 3);
    for (let b = 0; b < 3; b++) {
      let sum = 0;
      for (let c = 0; c < 3; c++) {
        const p = probs[b * 3 + c];
        expect(p).toBeGreaterThanOrEqual(0);
        sum += p;
      }
      expect(Math.abs(sum - 1)).toBeLessThan(1e-6);
    }
  });

  it("maps equal logits to the uniform distribution", () => {
    const logits = new Float64Array(16);
    const probs = new Float64Array(16);
    softmaxRows(logits, probs, 1, 16);
    for (let c = 0; c < 16; c++) expect(probs[c]).toBeCloseTo(1 / 16, 12);
  });

  it("is stable against large logits", () => {
    const logits = new Float64Array([1e4, 1e4 - 1]);
    const probs = new Float64Array(2);
    softmaxRows(logits, probs, 1, 2);
    expect(probs[0]).toBeCloseTo(1 / (1 + Math.exp(-1)), 10);
  });

  it("cross-entropy of a confident correct prediction is near zero", () => {
    const probs = new Float64Array([0.999, 0.0005, 0.0005]);
    expect(crossEntropy(probs, new Int32Array([0]), 1, 3)).toBeLessThan(0.01);
  });

  it("gradient is probabilities minus one-hot, averaged over the batch", () => {
    const probs = new Float64Array([0.2, 0.5, 0.3, 0.6, 0.1, 0.3]);
    const grad = new Float64Array(6);
    softmaxCrossEntropyGrad(probs, new Int32Array([1, 0]), grad, 2, 3);
    expect(grad[0]).toBeCloseTo(0.1, 12);
    expect(grad[1]).toBeCloseTo(-0.25, 12);
    expect(grad[3]).toBeCloseTo(-0.2, 12);
  });

  it("analytic gradient matches central finite differences", () => {
    const { maxRelError, checked } = gradientCheck();
    expect(checked).toBe(15);
    expect(maxRelError).toBeLessThan(1e-4);
  });
});
