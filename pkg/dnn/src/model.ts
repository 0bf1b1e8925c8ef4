/** Detector network variants and the training loop. */

import { DenseLayer, Layer, LstmLayer, ReluLayer } from "./layers.js";
import { crossEntropy, softmaxCrossEntropyGrad, softmaxRows } from "./softmax.js";
import { Rng } from "./rng.js";
import { zeros } from "./ops.js";

export type Architecture = "DNN1" | "DNN2" | "DNN3" | "DNN4" | "MLP";

export interface ModelConfig {
  architecture: Architecture;
  inputBits: number;    // 2N received sign values per decision
  numClasses: number;   // |constellation|^K
  rho?: number;         // recurrent width of the large-LSTM variants
  seed?: number;
}

export class Classifier {
  readonly layers: Layer[];
  readonly config: Required<ModelConfig>;

  constructor(config: ModelConfig) {
    const cfg = { rho: 100, seed: 1, ...config };
    this.config = cfg;
    const rng = new Rng(cfg.seed);
    const c = cfg.numClasses;
    const stacks: Record<Architecture, () => Layer[]> = {
      // large recurrent width generally wins; extra dense layers overfit
      DNN1: () => {
        const lstm = new LstmLayer(cfg.inputBits, 50, rng);
        return [lstm, new DenseLayer(50, 30, rng), new ReluLayer(30), new DenseLayer(30, c, rng)];
      },
      DNN2: () => {
        const lstm = new LstmLayer(cfg.inputBits, cfg.rho, rng);
        return [lstm, new DenseLayer(cfg.rho, c, rng), new ReluLayer(c), new DenseLayer(c, c, rng)];
      },
      DNN3: () => {
        const lstm = new LstmLayer(cfg.inputBits, 50, rng);
        return [lstm, new ReluLayer(50), new DenseLayer(50, c, rng)];
      },
      DNN4: () => {
        const lstm = new LstmLayer(cfg.inputBits, cfg.rho, rng);
        return [lstm, new ReluLayer(cfg.rho), new DenseLayer(cfg.rho, c, rng)];
      },
      // recurrence-free ablation
      MLP: () => [new DenseLayer(cfg.inputBits, cfg.rho, rng), new ReluLayer(cfg.rho),
                  new DenseLayer(cfg.rho, c, rng)],
    };
    this.layers = stacks[cfg.architecture]();
  }

  paramCount(): number {
    return this.layers.reduce((acc, l) => acc + l.paramCount(), 0);
  }

  logits(input: Float64Array, rows: number): Float64Array {
    let cur = input;
    for (const layer of this.layers) cur = layer.forward(cur, rows);
    return cur;
  }

  /** Class probabilities for a batch of +/-1 rows, (rows x numClasses). */
  probabilities(input: Float64Array, rows: number): Float64Array {
    const c = this.config.numClasses;
    const probs = zeros(rows * c);
    softmaxRows(this.logits(input, rows), probs, rows, c);
    return probs;
  }

  /** Argmax class decisions, evaluated in fixed-size chunks. */
  predict(input: Float64Array, rows: number, chunk = 512): Int32Array {
    const c = this.config.numClasses;
    const out = new Int32Array(rows);
    for (let start = 0; start < rows; start += chunk) {
      const n = Math.min(chunk, rows - start);
      const logits = this.logits(input.subarray(start * this.config.inputBits,
                                                (start + n) * this.config.inputBits), n);
      for (let b = 0; b < n; b++) {
        let best = 0;
        for (let k = 1; k < c; k++) {
          if (logits[b * c + k] > logits[b * c + best]) best = k;
        }
        out[start + b] = best;
      }
    }
    return out;
  }
}

export interface TrainConfig {
  epochs?: number;
  batchSize?: number;
  learningRate?: number;
  seed?: number;
  holdoutFraction?: number;  // monitoring split, excluded from gradients
}

export interface TrainHistory {
  trainLoss: number[];
  holdoutLoss: number[];
}

class Adam {
  private readonly m: Float64Array[];
  private readonly v: Float64Array[];
  private t = 0;

  constructor(private readonly params: Float64Array[],
              private readonly gradsArr: Float64Array[],
              private readonly lr: number) {
    this.m = params.map((p) => zeros(p.length));
    this.v = params.map((p) => zeros(p.length));
  }

  step(): void {
    this.t++;
    const b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const corr1 = 1 - Math.pow(b1, this.t);
    const corr2 = 1 - Math.pow(b2, this.t);
    for (let k = 0; k < this.params.length; k++) {
      const p = this.params[k], g = this.gradsArr[k], m = this.m[k], v = this.v[k];
      for (let i = 0; i < p.length; i++) {
        m[i] = b1 * m[i] + (1 - b1) * g[i];
        v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
        p[i] -= this.lr * (m[i] / corr1) / (Math.sqrt(v[i] / corr2) + eps);
        g[i] = 0;
      }
    }
  }
}

/**
 * Minimize the softmax cross-entropy over the labeled rows with mini-batch
 * Adam. Deterministic for a fixed seed: initialization, shuffling, and
 * batching all come from the seeded generator.
 */
export function train(model: Classifier, inputs: Float64Array, labels: Int32Array,
                      rows: number, config: TrainConfig = {}): TrainHistory {
  const epochs = config.epochs ?? 150;
  const batchSize = config.batchSize ?? 32;
  const lr = config.learningRate ?? 0.01;
  const holdoutFraction = config.holdoutFraction ?? 0;
  const rng = new Rng(config.seed ?? 7);
  const dim = model.config.inputBits;
  const c = model.config.numClasses;

  const order = new Int32Array(rows);
  for (let i = 0; i < rows; i++) order[i] = i;
  rng.shuffle(order);
  const holdN = Math.floor(rows * holdoutFraction);
  const fitIdx = order.slice(holdN);
  const holdIdx = order.slice(0, holdN);

  const params: Float64Array[] = [];
  const gradsArr: Float64Array[] = [];
  for (const layer of model.layers) {
    params.push(...layer.params());
    gradsArr.push(...layer.grads());
  }
  const adam = new Adam(params, gradsArr, lr);

  const batchX = zeros(batchSize * dim);
  const batchY = new Int32Array(batchSize);
  const history: TrainHistory = { trainLoss: [], holdoutLoss: [] };

  const lossOn = (idx: Int32Array): number => {
    if (idx.length === 0) return NaN;
    const x = zeros(idx.length * dim);
    const y = new Int32Array(idx.length);
    gather(inputs, labels, idx, x, y, dim);
    const probs = model.probabilities(x, idx.length);
    return crossEntropy(probs, y, idx.length, c);
  };

  for (let epoch = 0; epoch < epochs; epoch++) {
    rng.shuffle(fitIdx);
    let epochLoss = 0;
    let batches = 0;
    for (let start = 0; start < fitIdx.length; start += batchSize) {
      const n = Math.min(batchSize, fitIdx.length - start);
      gather(inputs, labels, fitIdx.subarray(start, start + n), batchX, batchY, dim);
      const logits = model.logits(batchX.subarray(0, n * dim), n);
      const probs = zeros(n * c);
      softmaxRows(logits, probs, n, c);
      epochLoss += crossEntropy(probs, batchY, n, c);
      batches++;
      const dLogits = zeros(n * c);
      softmaxCrossEntropyGrad(probs, batchY, dLogits, n, c);
      let grad: Float64Array = dLogits;
      for (let li = model.layers.length - 1; li >= 0; li--) {
        grad = model.layers[li].backward(grad, n);
      }
      adam.step();
    }
    history.trainLoss.push(epochLoss / Math.max(batches, 1));
    if (holdN > 0) history.holdoutLoss.push(lossOn(holdIdx));
  }
  return history;
}

function gather(inputs: Float64Array, labels: Int32Array, idx: Int32Array,
                outX: Float64Array, outY: Int32Array, dim: number): void {
  for (let b = 0; b < idx.length; b++) {
    const src = idx[b] * dim;
    for (let j = 0; j < dim; j++) outX[b * dim + j] = inputs[src + j];
    outY[b] = labels[idx[b]];
  }
}

/** Expected LSTM weight count: 4 * ((d_in + 1) * rho + rho^2). */
export function lstmWeightCount(rho: number, inputDim = 1): number {
  return 4 * ((inputDim + 1) * rho + rho * rho);
}
