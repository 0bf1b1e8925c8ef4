/** Reader for the harness-exported labeled datasets. */

import * as fs from "node:fs";
import * as path from "node:path";

export interface DatasetMeta {
  snr_db: number[];
  num_classes: number;
  vector_length: number;
  train_rows: number;
  test_rows: number;
  reference: { detector: string; ser: number; svep: number; test_vectors: number };
  spec: { n_users: number; constellation: string; [key: string]: unknown };
}

export interface Split {
  inputs: Float64Array;  // (rows x vector_length), entries in {-1, +1}
  labels: Int32Array;
  rows: number;
}

export interface Dataset {
  meta: DatasetMeta;
  train: Split;
  test: Split;
}

export class DatasetFormatError extends Error {}

function parseSplit(file: string, width: number, numClasses: number): Split {
  const text = fs.readFileSync(file, "utf8");
  const lines = text.split("\n").filter((l) => l.length > 0);
  const header = "label," + Array.from({ length: width }, (_, i) => `b${i}`).join(",");
  if (lines[0] !== header) {
    throw new DatasetFormatError(`${file}: header does not match a width-${width} dataset`);
  }
  const rows = lines.length - 1;
  const inputs = new Float64Array(rows * width);
  const labels = new Int32Array(rows);
  for (let r = 0; r < rows; r++) {
    const parts = lines[r + 1].split(",");
    if (parts.length !== width + 1) {
      throw new DatasetFormatError(`${file}:${r + 2}: expected ${width + 1} fields`);
    }
    const label = Number(parts[0]);
    if (!Number.isInteger(label) || label < 0 || label >= numClasses) {
      throw new DatasetFormatError(`${file}:${r + 2}: label ${parts[0]} out of range`);
    }
    labels[r] = label;
    for (let j = 0; j < width; j++) {
      const v = Number(parts[j + 1]);
      if (v !== 1 && v !== -1) {
        throw new DatasetFormatError(`${file}:${r + 2}: entry ${parts[j + 1]} not in {-1, 1}`);
      }
      inputs[r * width + j] = v;
    }
  }
  return { inputs, labels, rows };
}

export function loadDataset(dir: string): Dataset {
  const meta = JSON.parse(fs.readFileSync(path.join(dir, "meta.json"), "utf8")) as DatasetMeta;
  const constellationSize = meta.spec.constellation === "8psk" ? 8 : 4;
  const expectedClasses = Math.pow(constellationSize, meta.spec.n_users);
  if (meta.num_classes !== expectedClasses) {
    throw new DatasetFormatError(
      `meta.json claims ${meta.num_classes} classes but the topology implies ${expectedClasses}`);
  }
  const train = parseSplit(path.join(dir, "train.csv"), meta.vector_length, meta.num_classes);
  const test = parseSplit(path.join(dir, "test.csv"), meta.vector_length, meta.num_classes);
  if (train.rows !== meta.train_rows || test.rows !== meta.test_rows) {
    throw new DatasetFormatError("row counts disagree with meta.json");
  }
  const seen = new Set<number>();
  for (const l of train.labels) seen.add(l);
  if (seen.size !== meta.num_classes) {
    throw new DatasetFormatError(
      `training split covers ${seen.size} of ${meta.num_classes} classes`);
  }
  return { meta, train, test };
}
