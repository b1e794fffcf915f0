import { describe, expect, it } from "vitest";

import {
  DegenerateInputError,
  cosine,
  hashEmbed,
  hashEmbedTokens,
  meanPool,
  windowedEmbed,
} from "../dist/hash.js";
import { tokenize } from "../dist/tokenize.js";
import { PARITY_TEXTS, py } from "./helpers";

describe("tokenize", () => {
  it("matches the pipeline tokenizer on mixed-script text", () => {
    const expected: string[][] = JSON.parse(
      py(
        `
import json, sys
from ca_harvest.kernels import tokenize
texts = json.load(sys.stdin)
print(json.dumps([tokenize(t) for t in texts]))
`,
        JSON.stringify(PARITY_TEXTS),
      ),
    );
    for (let i = 0; i < PARITY_TEXTS.length; i++) {
      expect(tokenize(PARITY_TEXTS[i]!), PARITY_TEXTS[i]).toEqual(expected[i]);
    }
  });

  it("keeps apostrophes inside tokens but rejects apostrophe-only runs", () => {
    expect(tokenize("don't stop")).toEqual(["don't", "stop"]);
    expect(tokenize("'' '' ''")).toEqual([]);
  });
});

describe("hashEmbed parity", () => {
  it("is bit-identical to the pipeline embedder across texts and dimensions", () => {
    const dims = [8, 16, 64, 256];
    const expected: number[][][] = JSON.parse(
      py(
        `
import json, sys
from ca_harvest.embeddings import fallback_hash_embed
job = json.load(sys.stdin)
out = []
for dim in job["dims"]:
    out.append([[float(x) for x in fallback_hash_embed(t, dim)] for t in job["texts"]])
print(json.dumps(out))
`,
        JSON.stringify({ dims, texts: PARITY_TEXTS }),
      ),
    );
    for (let d = 0; d < dims.length; d++) {
      for (let t = 0; t < PARITY_TEXTS.length; t++) {
        const ours = Array.from(hashEmbed(PARITY_TEXTS[t]!, dims[d]!));
        // Float32 values survive the JSON round trip exactly, so this
        // comparison is bitwise, not approximate.
        expect(ours, `dim=${dims[d]} text=${PARITY_TEXTS[t]}`).toEqual(expected[d]![t]);
      }
    }
  });

  it("rejects dimensions under the minimum", () => {
    expect(() => hashEmbed("hello", 7)).toThrow(RangeError);
  });

  it("raises DegenerateInputError when no tokens survive", () => {
    expect(() => hashEmbed("", 16)).toThrow(DegenerateInputError);
    expect(() => hashEmbed("!!! --- ...", 16)).toThrow(DegenerateInputError);
  });
});

describe("windowedEmbed", () => {
  it("takes the direct path for short texts (bit-equal to hashEmbed)", () => {
    const text = "we will march tomorrow at noon";
    const direct = hashEmbed(text, 32);
    const windowed = windowedEmbed(text, 32, 10, 5);
    expect(Array.from(windowed)).toEqual(Array.from(direct));
  });

  it("mean-pools a 3x-window text exactly as windows computed by hand", () => {
    const words: string[] = [];
    for (let i = 0; i < 30; i++) words.push(`word${i}`);
    const text = words.join(" ");
    const got = windowedEmbed(text, 32, 10, 5);

    const tokens = tokenize(text);
    expect(tokens.length).toBe(30);
    const manual: Float32Array[] = [];
    for (const start of [0, 5, 10, 15, 20]) {
      manual.push(hashEmbedTokens(tokens.slice(start, start + 10), 32));
    }
    const pooled = meanPool(manual, 32);
    for (let i = 0; i < 32; i++) {
      expect(Math.abs(got[i]! - pooled[i]!)).toBeLessThanOrEqual(1e-6);
      expect(Object.is(got[i], pooled[i])).toBe(true);
    }
  });

  it("rejects window or stride under 1", () => {
    expect(() => windowedEmbed("a b c", 32, 0, 1)).toThrow(RangeError);
    expect(() => windowedEmbed("a b c", 32, 4, 0)).toThrow(RangeError);
  });
});

describe("cosine", () => {
  it("is exactly 1.0 for a vector against itself", () => {
    const v = hashEmbed("identical text identical result", 64);
    expect(cosine(v, v)).toBe(1.0);
  });

  it("rejects mismatched dimensions", () => {
    expect(() => cosine(hashEmbed("a", 16), hashEmbed("a", 32))).toThrow(RangeError);
  });
});
