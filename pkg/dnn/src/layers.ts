/** Batched network layers with manual backprop: LSTM, dense, ReLU. */

import { addBiasRows, biasGrad, matmul, matmulGradInput, matmulGradWeight, zeros } from "./ops.js";
import { Rng } from "./rng.js";

export interface Layer {
  readonly outDim: number;
  paramCount(): number;
  params(): Float64Array[];
  grads(): Float64Array[];
  forward(input: Float64Array, rows: number): Float64Array;
  backward(dOut: Float64Array, rows: number): Float64Array;
}

function glorot(rng: Rng, fanIn: number, fanOut: number, size: number): Float64Array {
  const limit = Math.sqrt(6 / (fanIn + fanOut));
  const w = new Float64Array(size);
  for (let i = 0; i < size; i++) w[i] = (rng.next() * 2 - 1) * limit;
  return w;
}

const sigmoid = (x: number) => 1 / (1 + Math.exp(-x));

/**
 * LSTM over a scalar sequence: the D input coordinates are consumed one per
 * time step (sequence length D, feature size 1) and the final hidden state
 * is the layer output. Gate order in the packed weight matrices is
 * [input, forget, cell, output].
 */
export class LstmLayer implements Layer {
  readonly outDim: number;
  private readonly seqLen: number;
  private readonly wx: Float64Array;   // (1 x 4H) input kernel
  private readonly wh: Float64Array;   // (H x 4H) recurrent kernel
  private readonly b: Float64Array;    // (4H)
  private readonly dwx: Float64Array;
  private readonly dwh: Float64Array;
  private readonly db: Float64Array;
  private cache: {
    rows: number;
    input: Float64Array;
    gates: Float64Array[];   // per step, (rows x 4H) post-activation
    cells: Float64Array[];   // per step, (rows x H)
    tanhC: Float64Array[];
    hidden: Float64Array[];  // per step, (rows x H); index 0 is the zero state
  } | null = null;

  constructor(seqLen: number, hidden: number, rng: Rng) {
    this.seqLen = seqLen;
    this.outDim = hidden;
    this.wx = glorot(rng, 1, hidden, 4 * hidden);
    this.wh = glorot(rng, hidden, hidden, hidden * 4 * hidden);
    this.b = zeros(4 * hidden);
    // forget-gate bias starts at one so early training does not wash out state
    for (let j = hidden; j < 2 * hidden; j++) this.b[j] = 1.0;
    this.dwx = zeros(this.wx.length);
    this.dwh = zeros(this.wh.length);
    this.db = zeros(this.b.length);
  }

  paramCount(): number {
    // 4 * ((d_in + 1) * H + H^2) with per-step input dimension d_in = 1
    return this.wx.length + this.wh.length + this.b.length;
  }

  params(): Float64Array[] { return [this.wx, this.wh, this.b]; }
  grads(): Float64Array[] { return [this.dwx, this.dwh, this.db]; }

  forward(input: Float64Array, rows: number): Float64Array {
    const h = this.outDim;
    const g4 = 4 * h;
    const gates: Float64Array[] = [];
    const cells: Float64Array[] = [];
    const tanhC: Float64Array[] = [];
    const hidden: Float64Array[] = [zeros(rows * h)];
    let prevC = zeros(rows * h);
    const z = zeros(rows * g4);

    for (let t = 0; t < this.seqLen; t++) {
      matmul(hidden[t], this.wh, z, rows, h, g4);
      addBiasRows(z, this.b, rows, g4);
      for (let b = 0; b < rows; b++) {
        const x = input[b * this.seqLen + t];
        const off = b * g4;
        for (let j = 0; j < g4; j++) z[off + j] += x * this.wx[j];
      }
      const gate = zeros(rows * g4);
      const c = zeros(rows * h);
      const tc = zeros(rows * h);
      const hOut = zeros(rows * h);
      for (let b = 0; b < rows; b++) {
        const zOff = b * g4;
        const sOff = b * h;
        for (let j = 0; j < h; j++) {
          const i = sigmoid(z[zOff + j]);
          const f = sigmoid(z[zOff + h + j]);
          const g = Math.tanh(z[zOff + 2 * h + j]);
          const o = sigmoid(z[zOff + 3 * h + j]);
          gate[zOff + j] = i;
          gate[zOff + h + j] = f;
          gate[zOff + 2 * h + j] = g;
          gate[zOff + 3 * h + j] = o;
          const cv = f * prevC[sOff + j] + i * g;
          const tv = Math.tanh(cv);
          c[sOff + j] = cv;
          tc[sOff + j] = tv;
          hOut[sOff + j] = o * tv;
        }
      }
      gates.push(gate);
      cells.push(c);
      tanhC.push(tc);
      hidden.push(hOut);
      prevC = c;
    }
    this.cache = { rows, input, gates, cells, tanhC, hidden };
    return hidden[this.seqLen];
  }

  backward(dOut: Float64Array, rows: number): Float64Array {
    const cache = this.cache!;
    const h = this.outDim;
    const g4 = 4 * h;
    const dInput = zeros(rows * this.seqLen);
    const dh = Float64Array.from(dOut);
    const dc = zeros(rows * h);
    const dz = zeros(rows * g4);

    for (let t = this.seqLen - 1; t >= 0; t--) {
      const gate = cache.gates[t];
      const tc = cache.tanhC[t];
      const prevC = t > 0 ? cache.cells[t - 1] : zeros(rows * h);
      for (let b = 0; b < rows; b++) {
        const zOff = b * g4;
        const sOff = b * h;
        for (let j = 0; j < h; j++) {
          const i = gate[zOff + j];
          const f = gate[zOff + h + j];
          const g = gate[zOff + 2 * h + j];
          const o = gate[zOff + 3 * h + j];
          const tv = tc[sOff + j];
          const dhv = dh[sOff + j];
          const dcv = dc[sOff + j] + dhv * o * (1 - tv * tv);
          dz[zOff + j] = dcv * g * i * (1 - i);
          dz[zOff + h + j] = dcv * prevC[sOff + j] * f * (1 - f);
          dz[zOff + 2 * h + j] = dcv * i * (1 - g * g);
          dz[zOff + 3 * h + j] = dhv * tv * o * (1 - o);
          dc[sOff + j] = dcv * f;
        }
      }
      // parameter gradients and propagation to h_{t-1} and x_t
      for (let b = 0; b < rows; b++) {
        const x = cache.input[b * this.seqLen + t];
        const zOff = b * g4;
        let dx = 0;
        for (let j = 0; j < g4; j++) {
          const d = dz[zOff + j];
          this.dwx[j] += x * d;
          dx += d * this.wx[j];
        }
        dInput[b * this.seqLen + t] = dx;
      }
      matmulGradWeight(cache.hidden[t], dz, this.dwh, rows, h, g4);
      biasGrad(dz, this.db, rows, g4);
      dh.fill(0);
      matmulGradInput(dz, this.wh, dh, rows, h, g4);
    }
    return dInput;
  }
}

export class DenseLayer implements Layer {
  readonly outDim: number;
  private readonly inDim: number;
  private readonly w: Float64Array;  // (inDim x outDim)
  private readonly b: Float64Array;
  private readonly dw: Float64Array;
  private readonly db: Float64Array;
  private input: Float64Array | null = null;

  constructor(inDim: number, outDim: number, rng: Rng) {
    this.inDim = inDim;
    this.outDim = outDim;
    this.w = glorot(rng, inDim, outDim, inDim * outDim);
    this.b = zeros(outDim);
    this.dw = zeros(this.w.length);
    this.db = zeros(outDim);
  }

  paramCount(): number { return this.outDim * (this.inDim + 1); }
  params(): Float64Array[] { return [this.w, this.b]; }
  grads(): Float64Array[] { return [this.dw, this.db]; }

  forward(input: Float64Array, rows: number): Float64Array {
    this.input = input;
    const out = zeros(rows * this.outDim);
    matmul(input, this.w, out, rows, this.inDim, this.outDim);
    addBiasRows(out, this.b, rows, this.outDim);
    return out;
  }

  backward(dOut: Float64Array, rows: number): Float64Array {
    matmulGradWeight(this.input!, dOut, this.dw, rows, this.inDim, this.outDim);
    biasGrad(dOut, this.db, rows, this.outDim);
    const dIn = zeros(rows * this.inDim);
    matmulGradInput(dOut, this.w, dIn, rows, this.inDim, this.outDim);
    return dIn;
  }
}

export class ReluLayer implements Layer {
  readonly outDim: number;
  private mask: Uint8Array | null = null;

  constructor(dim: number) {
    this.outDim = dim;
  }

  paramCount(): number { return 0; }
  params(): Float64Array[] { return []; }
  grads(): Float64Array[] { return []; }

  forward(input: Float64Array, rows: number): Float64Array {
    const n = rows * this.outDim;
    const out = zeros(n);
    this.mask = new Uint8Array(n);
    for (let i = 0; i < n; i++) {
      if (input[i] > 0) {
        out[i] = input[i];
        this.mask[i] = 1;
      }
    }
    return out;
  }

  backward(dOut: Float64Array, rows: number): Float64Array {
    const n = rows * this.outDim;
    const dIn = zeros(n);
    for (let i = 0; i < n; i++) {
      if (this.mask![i]) dIn[i] = dOut[i];
    }
    return dIn;
  }
}
