/**
 * Seeded synthetic-candidate generation.
 *
 * For each anchor snippet this emits `count` variations that keep the
 * anchor's sentence structure but drift the topic: topic-bearing
 * tokens are swapped for drawn topics, with optional lead-in and tail
 * phrases. Temperature scales how aggressive the swapping is. All
 * five validity flags start false; candidates only enter training
 * after a review pass flips them, and the pipeline's loader filters
 * unreviewed records by default.
 *
 * Every candidate's randomness derives from (seed, anchor id, index),
 * so output is reproducible record for record regardless of batching.
 */

import { DataFormatError, LabeledSnippet, SyntheticCandidate } from "./records.js";
import { tokenize } from "./tokenize.js";

export interface SynthJob {
  count: number;
  seed: number;
  temperature: number;
}

export const DEFAULT_COUNT = 20;
export const DEFAULT_TEMPERATURE = 0.01;

const TOPICS = [
  "recycling drive",
  "tenant meeting",
  "school budget",
  "river cleanup",
  "food bank",
  "bike lanes",
  "library hours",
  "community garden",
  "bus route",
  "housing co-op",
  "noise ordinance",
  "tree planting",
];

const LEAD_INS = [
  "Honestly,",
  "Like others here,",
  "This week,",
  "For what it's worth,",
  "Same as last time,",
];

const TAILS = ["again", "for real this time", "starting today", "like we said"];

// Tokens that carry scaffolding rather than topic; never swapped.
const SCAFFOLD = new Set([
  "a", "an", "and", "are", "at", "be", "but", "can", "do", "for", "from",
  "has", "have", "i", "if", "in", "is", "it", "me", "my", "not", "of", "on",
  "or", "our", "so", "that", "the", "they", "this", "to", "us", "we",
  "with", "you", "your", "will",
]);

function fnv1a32(text: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return h >>> 0;
}

/** mulberry32: tiny seeded PRNG, plenty for template jitter. */
function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function pick<T>(rng: () => number, pool: T[]): T {
  return pool[Math.floor(rng() * pool.length) % pool.length]!;
}

function varyText(text: string, rng: () => number, temperature: number): string {
  const tokens = tokenize(text);
  const swapProbability = Math.min(1, 0.15 + temperature);
  const out: string[] = [];
  for (const token of tokens) {
    if (!SCAFFOLD.has(token) && token.length >= 4 && rng() < swapProbability) {
      out.push(pick(rng, TOPICS).split(" ")[rng() < 0.5 ? 0 : 1] ?? token);
    } else {
      out.push(token);
    }
  }
  let sentence = out.join(" ");
  if (rng() < 0.4) sentence = `${pick(rng, LEAD_INS)} ${sentence}`;
  if (rng() < 0.3) sentence = `${sentence} ${pick(rng, TAILS)}`;
  const first = sentence.charAt(0).toUpperCase();
  return `${first}${sentence.slice(1)}.`;
}

export function candidatesForAnchor(
  anchor: LabeledSnippet,
  job: SynthJob,
): SyntheticCandidate[] {
  if (anchor.label === "problem-solution") {
    throw new DataFormatError(
      `anchor ${JSON.stringify(anchor.comment_id)} is labeled problem-solution; ` +
        "the majority class is excluded from augmentation",
    );
  }
  if (job.count < 1) {
    throw new RangeError("per-anchor count must be >= 1");
  }
  const out: SyntheticCandidate[] = [];
  for (let i = 0; i < job.count; i++) {
    const rng = mulberry32(fnv1a32(`${job.seed}|${anchor.comment_id}|${i}`));
    out.push({
      comment_id: `${anchor.comment_id}-syn${i}`,
      community: anchor.community,
      thread_id: anchor.thread_id,
      author_id: anchor.author_id,
      text: varyText(anchor.text, rng, job.temperature),
      anchor_index: 0,
      match_count: anchor.match_count,
      label: anchor.label,
      anchor_id: anchor.comment_id,
      semantic_similarity: false,
      structure: false,
      meaning: false,
      intent: false,
      key_details: false,
    });
  }
  return out;
}

export function generateSynthetic(
  anchors: LabeledSnippet[],
  job: SynthJob,
): SyntheticCandidate[] {
  const out: SyntheticCandidate[] = [];
  for (const anchor of anchors) {
    out.push(...candidatesForAnchor(anchor, job));
  }
  return out;
}
