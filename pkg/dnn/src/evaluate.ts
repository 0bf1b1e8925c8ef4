/** Decision metrics: vector error rate, per-user symbol errors, confusion counts. */

import { Dataset, Split } from "./data.js";
import { Classifier } from "./model.js";

export interface Evaluation {
  svep: number;                 // joint-vector misclassification rate
  ser: number;                  // per-user symbol error rate
  vectorErrors: number;
  vectors: number;
  symbolErrors: number;
  symbols: number;
  confusion: Int32Array;        // (numClasses x numClasses), row = true class
}

/** Per-user constellation indices of a joint class label (user 0 most significant). */
export function classDigits(label: number, users: number, constellationSize: number): number[] {
  const digits = new Array<number>(users);
  for (let k = users - 1; k >= 0; k--) {
    digits[k] = label % constellationSize;
    label = Math.floor(label / constellationSize);
  }
  return digits;
}

export function evaluate(model: Classifier, split: Split, users: number,
                         constellationSize: number): Evaluation {
  const c = model.config.numClasses;
  const pred = model.predict(split.inputs, split.rows);
  const confusion = new Int32Array(c * c);
  let vectorErrors = 0;
  let symbolErrors = 0;
  for (let r = 0; r < split.rows; r++) {
    const truth = split.labels[r];
    confusion[truth * c + pred[r]]++;
    if (pred[r] !== truth) {
      vectorErrors++;
      const a = classDigits(truth, users, constellationSize);
      const b = classDigits(pred[r], users, constellationSize);
      for (let k = 0; k < users; k++) {
        if (a[k] !== b[k]) symbolErrors++;
      }
    }
  }
  const symbols = split.rows * users;
  return {
    svep: split.rows ? vectorErrors / split.rows : NaN,
    ser: symbols ? symbolErrors / symbols : NaN,
    vectorErrors,
    vectors: split.rows,
    symbolErrors,
    symbols,
    confusion,
  };
}

export function evaluateOnTest(model: Classifier, dataset: Dataset): Evaluation {
  const constellationSize = dataset.meta.spec.constellation === "8psk" ? 8 : 4;
  return evaluate(model, dataset.test, dataset.meta.spec.n_users, constellationSize);
}
