/**
 * Line-delimited JSON records shared with the main pipeline.
 *
 * The shapes here mirror the pipeline's file formats exactly; nothing
 * in this package talks to it except through these files.
 */

import * as fs from "fs";

export interface Snippet {
  comment_id: string;
  community: string;
  thread_id: string;
  author_id: string;
  text: string;
  anchor_index: number;
  match_count: number;
}

export type Label =
  | "none"
  | "problem-solution"
  | "call-to-action"
  | "intention"
  | "execution";

export const LABELS: Label[] = [
  "none",
  "problem-solution",
  "call-to-action",
  "intention",
  "execution",
];

export interface LabeledSnippet extends Snippet {
  label: Label;
}

export const VALIDITY_FLAGS = [
  "semantic_similarity",
  "structure",
  "meaning",
  "intent",
  "key_details",
] as const;

export interface SyntheticCandidate extends Snippet {
  label: Label;
  anchor_id: string;
  semantic_similarity: boolean;
  structure: boolean;
  meaning: boolean;
  intent: boolean;
  key_details: boolean;
}

export interface PredictionRecord {
  sample_id: string;
  label: Label;
  scores?: Record<string, number>;
}

export class DataFormatError extends Error {}

export function parseRecords(content: string, what: string): Array<Record<string, unknown>> {
  const out: Array<Record<string, unknown>> = [];
  const lines = content.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = (lines[i] ?? "").trim();
    if (line === "") continue;
    let value: unknown;
    try {
      value = JSON.parse(line);
    } catch {
      throw new DataFormatError(`${what} line ${i + 1}: not valid JSON`);
    }
    if (typeof value !== "object" || value === null || Array.isArray(value)) {
      throw new DataFormatError(`${what} line ${i + 1}: expected a JSON object`);
    }
    out.push(value as Record<string, unknown>);
  }
  return out;
}

function requireString(rec: Record<string, unknown>, key: string, where: string): string {
  const v = rec[key];
  if (typeof v !== "string" || v === "") {
    throw new DataFormatError(`${where}: field ${key} must be a non-empty string`);
  }
  return v;
}

function optionalString(rec: Record<string, unknown>, key: string, where: string): string {
  const v = rec[key] ?? "";
  if (typeof v !== "string") {
    throw new DataFormatError(`${where}: field ${key} must be a string`);
  }
  return v;
}

export function parseLabel(raw: unknown, where: string): Label {
  if (typeof raw === "string" && (LABELS as string[]).includes(raw)) {
    return raw as Label;
  }
  throw new DataFormatError(`${where}: unknown label ${JSON.stringify(raw)}`);
}

export function toSnippet(rec: Record<string, unknown>, where: string): Snippet {
  const anchor = rec["anchor_index"];
  const matches = rec["match_count"];
  if (typeof anchor !== "number" || !Number.isInteger(anchor) || anchor < 0) {
    throw new DataFormatError(`${where}: anchor_index must be a non-negative integer`);
  }
  if (typeof matches !== "number" || !Number.isInteger(matches) || matches < 0) {
    throw new DataFormatError(`${where}: match_count must be a non-negative integer`);
  }
  return {
    comment_id: requireString(rec, "comment_id", where),
    community: optionalString(rec, "community", where),
    thread_id: optionalString(rec, "thread_id", where),
    author_id: optionalString(rec, "author_id", where),
    text: requireString(rec, "text", where),
    anchor_index: anchor,
    match_count: matches,
  };
}

export function readSnippets(path: string): Snippet[] {
  const content = fs.readFileSync(path, "utf-8");
  return parseRecords(content, path).map((rec, i) => toSnippet(rec, `${path} record ${i + 1}`));
}

export function readLabeledSnippets(path: string): LabeledSnippet[] {
  const content = fs.readFileSync(path, "utf-8");
  return parseRecords(content, path).map((rec, i) => {
    const where = `${path} record ${i + 1}`;
    const snippet = toSnippet(rec, where);
    return { ...snippet, label: parseLabel(rec["label"], where) };
  });
}

/** Compact one-line JSON, matching the pipeline's writer settings. */
export function dumpRecord(rec: object): string {
  return JSON.stringify(rec);
}

export function writeRecords(path: string, records: object[]): void {
  const body = records.map((r) => dumpRecord(r) + "\n").join("");
  fs.writeFileSync(path, body, "utf-8");
}
