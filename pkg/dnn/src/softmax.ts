/** Softmax + cross-entropy with analytic gradients, and a finite-difference check. */

/** Row-wise stable softmax of logits (B x C), written into probs. */
export function softmaxRows(
  logits: Float64Array, probs: Float64Array, rows: number, cols: number,
): void {
  for (let b = 0; b < rows; b++) {
    const off = b * cols;
    let max = -Infinity;
    for (let c = 0; c < cols; c++) max = Math.max(max, logits[off + c]);
    let sum = 0;
    for (let c = 0; c < cols; c++) {
      const e = Math.exp(logits[off + c] - max);
      probs[off + c] = e;
      sum += e;
    }
    for (let c = 0; c < cols; c++) probs[off + c] /= sum;
  }
}

/** Mean cross-entropy of probs (B x C) against integer labels. */
export function crossEntropy(
  probs: Float64Array, labels: Int32Array, rows: number, cols: number,
): number {
  let loss = 0;
  for (let b = 0; b < rows; b++) {
    loss -= Math.log(Math.max(probs[b * cols + labels[b]], 1e-300));
  }
  return loss / rows;
}

/**
 * Gradient of the mean cross-entropy w.r.t. the logits: (probs - onehot)/B.
 * This is the analytic softmax + cross-entropy backward pass.
 */
export function softmaxCrossEntropyGrad(
  probs: Float64Array, labels: Int32Array, dLogits: Float64Array,
  rows: number, cols: number,
): void {
  const inv = 1 / rows;
  for (let b = 0; b < rows; b++) {
    const off = b * cols;
    for (let c = 0; c < cols; c++) dLogits[off + c] = probs[off + c] * inv;
    dLogits[off + labels[b]] -= inv;
  }
}

export interface GradCheckResult {
  maxRelError: number;
  checked: number;
}

/**
 * Finite-difference verification of the analytic gradient on a toy linear
 * layer logits = W x + b followed by softmax + cross-entropy. Returns the
 * worst relative error over all weight and bias coordinates.
 */
export function gradientCheck(classes = 3, inputs = 4, seed = 12345): GradCheckResult {
  // deterministic toy problem
  let s = seed >>> 0;
  const rand = () => {
    s = (s * 1664525 + 1013904223) >>> 0;
    return s / 4294967296 - 0.5;
  };
  const w = new Float64Array(inputs * classes);
  const bias = new Float64Array(classes);
  const x = new Float64Array(inputs);
  for (let i = 0; i < w.length; i++) w[i] = rand();
  for (let i = 0; i < classes; i++) bias[i] = rand();
  for (let i = 0; i < inputs; i++) x[i] = rand() * 2;
  const label = new Int32Array([1]);

  const loss = (wv: Float64Array, bv: Float64Array): number => {
    const logits = new Float64Array(classes);
    for (let c = 0; c < classes; c++) {
      let acc = bv[c];
      for (let i = 0; i < inputs; i++) acc += x[i] * wv[i * classes + c];
      logits[c] = acc;
    }
    const probs = new Float64Array(classes);
    softmaxRows(logits, probs, 1, classes);
    return crossEntropy(probs, label, 1, classes);
  };

  // analytic: dlogits = p - onehot; dW = x dlogits^T; db = dlogits
  const logits = new Float64Array(classes);
  for (let c = 0; c < classes; c++) {
    let acc = bias[c];
    for (let i = 0; i < inputs; i++) acc += x[i] * w[i * classes + c];
    logits[c] = acc;
  }
  const probs = new Float64Array(classes);
  softmaxRows(logits, probs, 1, classes);
  const dLogits = new Float64Array(classes);
  softmaxCrossEntropyGrad(probs, label, dLogits, 1, classes);

  const eps = 1e-6;
  let worst = 0;
  let checked = 0;
  const compare = (analytic: number, bump: (h: number) => number) => {
    const numeric = (bump(eps) - bump(-eps)) / (2 * eps);
    const denom = Math.max(Math.abs(analytic), Math.abs(numeric), 1e-8);
    worst = Math.max(worst, Math.abs(analytic - numeric) / denom);
    checked++;
  };
  for (let i = 0; i < inputs; i++) {
    for (let c = 0; c < classes; c++) {
      compare(x[i] * dLogits[c], (h) => {
        const wv = w.slice();
        wv[i * classes + c] += h;
        return loss(wv, bias);
      });
    }
  }
  for (let c = 0; c < classes; c++) {
    compare(dLogits[c], (h) => {
      const bv = bias.slice();
      bv[c] += h;
      return loss(w, bv);
    });
  }
  return { maxRelError: worst, checked };
}
