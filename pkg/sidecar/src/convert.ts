/**
 * Conversion of external model output into the pipeline's prediction
 * records.
 *
 * External scorers disagree about field names and label casing, so
 * this accepts the common variants (id/sample_id, label/prediction,
 * scores/probs; CamelCase or snake_case labels) and emits the strict
 * shape the pipeline reads: {sample_id, label, scores?}.
 */

import { DataFormatError, LABELS, Label, PredictionRecord } from "./records.js";

const ID_KEYS = ["sample_id", "id"] as const;
const LABEL_KEYS = ["label", "prediction"] as const;
const SCORE_KEYS = ["scores", "probs"] as const;

/** "CallToAction" / "PROBLEM_SOLUTION" / "intention" -> kebab-case. */
export function normalizeLabel(raw: string): Label {
  const kebab = raw
    .trim()
    .replace(/([a-z0-9])([A-Z])/g, "$1-$2")
    .replace(/[\s_]+/g, "-")
    .toLowerCase();
  if ((LABELS as readonly string[]).includes(kebab)) {
    return kebab as Label;
  }
  throw new DataFormatError(`unknown label ${JSON.stringify(raw)}`);
}

function firstPresent(
  record: Record<string, unknown>,
  keys: readonly string[],
): unknown {
  for (const key of keys) {
    if (key in record) return record[key];
  }
  return undefined;
}

export function convertPrediction(
  record: Record<string, unknown>,
  index: number,
): PredictionRecord {
  const where = `record ${index + 1}`;
  const id = firstPresent(record, ID_KEYS);
  if (typeof id !== "string" || id.length === 0) {
    throw new DataFormatError(`${where}: missing sample_id/id`);
  }
  const label = firstPresent(record, LABEL_KEYS);
  if (typeof label !== "string") {
    throw new DataFormatError(`${where}: missing label/prediction`);
  }
  const out: PredictionRecord = { sample_id: id, label: normalizeLabel(label) };
  const scores = firstPresent(record, SCORE_KEYS);
  if (scores !== undefined) {
    if (typeof scores !== "object" || scores === null || Array.isArray(scores)) {
      throw new DataFormatError(`${where}: scores must be an object`);
    }
    const cleaned: Record<string, number> = {};
    for (const [key, value] of Object.entries(scores)) {
      if (typeof value !== "number" || !Number.isFinite(value)) {
        throw new DataFormatError(
          `${where}: score ${JSON.stringify(key)} is not a finite number`,
        );
      }
      cleaned[key] = value;
    }
    out.scores = cleaned;
  }
  return out;
}

export function convertPredictions(
  records: Record<string, unknown>[],
): PredictionRecord[] {
  return records.map((record, i) => convertPrediction(record, i));
}
