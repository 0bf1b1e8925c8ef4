/** Result rows in the harness CSV schema, so detector curves merge into one file. */

import { Evaluation } from "./evaluate.js";
import { DatasetMeta } from "./data.js";

export const CSV_HEADER = "detector,snr1_db,snr2_db,fdts,ser,svep,err,n,ci_lo,ci_hi,seconds";

export function wilsonInterval(errors: number, n: number, z = 1.96): [number, number] {
  if (n === 0) return [NaN, NaN];
  const p = errors / n;
  const denom = 1 + (z * z) / n;
  const center = (p + (z * z) / (2 * n)) / denom;
  const half = (z * Math.sqrt((p * (1 - p)) / n + (z * z) / (4 * n * n))) / denom;
  return [Math.max(0, center - half), Math.min(1, center + half)];
}

export function resultRow(detector: string, meta: DatasetMeta, ev: Evaluation): string {
  const [lo, hi] = wilsonInterval(ev.symbolErrors, ev.symbols);
  const snr1 = meta.snr_db[0];
  const snr2 = meta.snr_db.length > 1 ? meta.snr_db[1] : NaN;
  // `seconds` stays empty: the CSV carries only reproducible bytes
  return [detector, snr1, snr2, 0, ev.ser, ev.svep,
          ev.symbolErrors, ev.symbols, lo, hi, ""].join(",");
}

export function resultsCsv(rows: string[]): string {
  return [CSV_HEADER, ...rows].join("\n") + "\n";
}
