import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { afterAll, describe, expect, it } from "vitest";

import { DatasetFormatError, loadDataset } from "../src/data.js";
import { classDigits } from "../src/evaluate.js";

const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "dnn-data-"));
afterAll(() => fs.rmSync(tmp, { recursive: true, force: true }));

function writeDataset(dir: string, opts: { badWidth?: boolean; badLabel?: boolean;
                                           badClasses?: boolean; badValue?: boolean } = {}) {
  fs.mkdirSync(dir, { recursive: true });
  const width = 4;
  const classes = 4;
  const meta = {
    snr_db: [20.0, 15.0],
    num_classes: opts.badClasses ? 8 : classes,
    vector_length: width,
    train_rows: 8,
    test_rows: 2,
    reference: { detector: "AML", ser: 0.0, svep: 0.0, test_vectors: 2 },
    spec: { n_users: 1, constellation: "qpsk" },
  };
  fs.writeFileSync(path.join(dir, "meta.json"), JSON.stringify(meta));
  const header = opts.badWidth ? "label,b0,b1,b2" : "label,b0,b1,b2,b3";
  const rows: string[] = [header];
  for (let i = 0; i < 8; i++) {
    const label = opts.badLabel && i === 3 ? 9 : i % 4;
    const v = opts.badValue && i === 2 ? "0" : "1";
    rows.push([label, v, -1, 1, -1].slice(0, opts.badWidth ? 4 : 5).join(","));
  }
  fs.writeFileSync(path.join(dir, "train.csv"), rows.join("\n") + "\n");
  fs.writeFileSync(path.join(dir, "test.csv"),
    header + "\n" + "0,1,1,1,1\n" + "1,-1,-1,-1,-1\n");
}

describe("dataset loading", () => {
  it("round-trips a well-formed dataset", () => {
    const dir = path.join(tmp, "ok");
    writeDataset(dir);
    const ds = loadDataset(dir);
    expect(ds.train.rows).toBe(8);
    expect(ds.test.rows).toBe(2);
    expect(ds.meta.num_classes).toBe(4);
    expect(ds.train.inputs[0]).toBe(1);
    expect(ds.train.inputs[1]).toBe(-1);
  });

  it("rejects width mismatches against the sidecar", () => {
    const dir = path.join(tmp, "badwidth");
    writeDataset(dir, { badWidth: true });
    expect(() => loadDataset(dir)).toThrow(DatasetFormatError);
  });

  it("rejects out-of-range labels", () => {
    const dir = path.join(tmp, "badlabel");
    writeDataset(dir, { badLabel: true });
    expect(() => loadDataset(dir)).toThrow(DatasetFormatError);
  });

  it("rejects class counts that contradict the topology", () => {
    const dir = path.join(tmp, "badclasses");
    writeDataset(dir, { badClasses: true });
    expect(() => loadDataset(dir)).toThrow(DatasetFormatError);
  });

  it("rejects entries outside {-1, 1}", () => {
    const dir = path.join(tmp, "badvalue");
    writeDataset(dir, { badValue: true });
    expect(() => loadDataset(dir)).toThrow(DatasetFormatError);
  });
});

describe("class digit decomposition", () => {
  it("matches base-Q positional encoding with user 0 most significant", () => {
    expect(classDigits(0, 2, 4)).toEqual([0, 0]);
    expect(classDigits(11, 2, 4)).toEqual([2, 3]);
    expect(classDigits(15, 2, 4)).toEqual([3, 3]);
    expect(classDigits(63, 2, 8)).toEqual([7, 7]);
  });
});
