/**
 * Deterministic token-hash embeddings.
 *
 * Bit-for-bit compatible with the pipeline's fallback embedder: each
 * token is hashed with blake2b (16-byte digest), the first 8 digest
 * bytes little-endian pick a bucket, the low bit of the 9th picks the
 * sign, and the accumulated float64 vector is L2-normalized and cast
 * to float32. The arithmetic stays exact until normalization (sums of
 * small integers), so matching the reference is a matter of doing the
 * same operations, not of luck.
 */

import blake from "blakejs";

import { tokenize } from "./tokenize.js";

export class DegenerateInputError extends Error {}

export const MIN_DIMENSION = 8;

export function hashEmbedTokens(tokens: string[], dimension: number): Float32Array {
  if (dimension < MIN_DIMENSION) {
    throw new RangeError(`embedding dimension must be >= ${MIN_DIMENSION}`);
  }
  if (tokens.length === 0) {
    throw new DegenerateInputError("cannot embed a zero-token text");
  }
  const acc = new Float64Array(dimension);
  const dim = BigInt(dimension);
  for (const token of tokens) {
    const digest = blake.blake2b(Buffer.from(token, "utf-8"), undefined, 16);
    let value = 0n;
    for (let b = 7; b >= 0; b--) {
      value = (value << 8n) | BigInt(digest[b]!);
    }
    const bucket = Number(value % dim);
    acc[bucket]! += (digest[8]! & 1) === 0 ? 1.0 : -1.0;
  }
  let squares = 0;
  for (let i = 0; i < dimension; i++) {
    squares += acc[i]! * acc[i]!;
  }
  const norm = Math.sqrt(squares);
  if (norm === 0) {
    throw new DegenerateInputError("degenerate hash embedding: signs cancelled");
  }
  const out = new Float32Array(dimension);
  for (let i = 0; i < dimension; i++) {
    out[i] = Math.fround(acc[i]! / norm);
  }
  return out;
}

export function hashEmbed(text: string, dimension: number): Float32Array {
  return hashEmbedTokens(tokenize(text), dimension);
}

/** Componentwise float64 mean of window vectors, cast to float32. */
export function meanPool(windows: Float32Array[], dimension: number): Float32Array {
  if (windows.length === 0) {
    throw new DegenerateInputError("mean pooling over an empty window list");
  }
  const acc = new Float64Array(dimension);
  for (const w of windows) {
    if (w.length !== dimension) {
      throw new DegenerateInputError("window dimensions differ");
    }
    for (let i = 0; i < dimension; i++) {
      acc[i]! += w[i]!;
    }
  }
  const out = new Float32Array(dimension);
  for (let i = 0; i < dimension; i++) {
    out[i] = Math.fround(acc[i]! / windows.length);
  }
  return out;
}

/**
 * Embed a text with a rolling token window and mean pooling.
 *
 * Texts at or under the window length take the direct path, which is
 * what makes short-snippet stores bit-identical to the pipeline's own
 * fallback embedder. Longer texts are split into windows of `window`
 * tokens advancing by `stride` and the window vectors are mean-pooled.
 */
export function windowedEmbed(
  text: string,
  dimension: number,
  window: number,
  stride: number,
): Float32Array {
  if (window < 1 || stride < 1) {
    throw new RangeError("window and stride must be >= 1");
  }
  const tokens = tokenize(text);
  if (tokens.length <= window) {
    return hashEmbedTokens(tokens, dimension);
  }
  const vectors: Float32Array[] = [];
  for (let start = 0; start < tokens.length; start += stride) {
    vectors.push(hashEmbedTokens(tokens.slice(start, start + window), dimension));
    if (start + window >= tokens.length) break;
  }
  return meanPool(vectors, dimension);
}

export function cosine(a: Float32Array, b: Float32Array): number {
  if (a.length !== b.length) {
    throw new RangeError(`dimension mismatch: ${a.length} vs ${b.length}`);
  }
  let dot = 0;
  let na = 0;
  let nb = 0;
  for (let i = 0; i < a.length; i++) {
    dot += a[i]! * b[i]!;
    na += a[i]! * a[i]!;
    nb += b[i]! * b[i]!;
  }
  if (na === 0 || nb === 0) {
    throw new DegenerateInputError("cosine of a zero-norm vector");
  }
  return dot / (Math.sqrt(na) * Math.sqrt(nb));
}
