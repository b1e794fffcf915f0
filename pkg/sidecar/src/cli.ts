#!/usr/bin/env node
/**
 * ca-sidecar: companion tooling for the participation pipeline.
 *
 *   embed    snippet records -> CAES embedding store (hash model)
 *   synth    labeled anchors -> synthetic candidate records
 *   convert  external model output -> pipeline prediction records
 *
 * Exit codes match the pipeline CLI: 0 success, 1 usage, 2 data error.
 */

import { parseArgs } from "node:util";
import { pathToFileURL } from "node:url";
import { readFileSync } from "node:fs";

import {
  DataFormatError,
  SyntheticCandidate,
  parseRecords,
  readLabeledSnippets,
  readSnippets,
  writeRecords,
} from "./records.js";
import { DegenerateInputError, hashEmbed, windowedEmbed } from "./hash.js";
import { StoreEntry, StoreError, writeStore } from "./store.js";
import { convertPredictions } from "./convert.js";
import { DEFAULT_COUNT, DEFAULT_TEMPERATURE, candidatesForAnchor } from "./synth.js";
import { buildManifest, manifestPathFor, writeManifest } from "./manifest.js";

const PROG = "ca-sidecar";

class UsageError extends Error {}

const USAGE = `usage: ${PROG} <command> [options]

commands:
  embed    --input snippets.jsonl --output store.caes [--model hash[:dim]]
           [--window N [--stride N]]
  synth    --input anchors.jsonl --output candidates.jsonl [--count N]
           [--seed N] [--temperature X]
  convert  --input external.jsonl --output predictions.jsonl
`;

function parseModel(spec: string): number {
  if (spec === "hash") return 256;
  const match = /^hash:(\d+)$/.exec(spec);
  if (!match) {
    throw new UsageError(
      `unknown model ${JSON.stringify(spec)} (expected hash or hash:<dim>)`,
    );
  }
  return Number(match[1]);
}

function requirePath(value: string | undefined, flag: string): string {
  if (!value) throw new UsageError(`missing required ${flag}`);
  return value;
}

function parseIntFlag(value: string | undefined, flag: string, fallback: number): number {
  if (value === undefined) return fallback;
  const parsed = Number(value);
  if (!Number.isInteger(parsed)) {
    throw new UsageError(`${flag} must be an integer, got ${JSON.stringify(value)}`);
  }
  return parsed;
}

function parseFloatFlag(value: string | undefined, flag: string, fallback: number): number {
  if (value === undefined) return fallback;
  const parsed = Number(value);
  if (!Number.isFinite(parsed)) {
    throw new UsageError(`${flag} must be a number, got ${JSON.stringify(value)}`);
  }
  return parsed;
}

function cmdEmbed(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      input: { type: "string", short: "i" },
      output: { type: "string", short: "o" },
      model: { type: "string", default: "hash" },
      window: { type: "string" },
      stride: { type: "string" },
    },
  });
  const input = requirePath(values.input, "--input");
  const output = requirePath(values.output, "--output");
  const dimension = parseModel(values.model ?? "hash");
  const window = parseIntFlag(values.window, "--window", 0);
  if (window < 0) throw new UsageError("--window must be >= 0");
  const stride = parseIntFlag(
    values.stride,
    "--stride",
    window > 0 ? Math.max(1, Math.floor(window / 2)) : 0,
  );
  if (window > 0 && stride < 1) throw new UsageError("--stride must be >= 1");
  if (window === 0 && values.stride !== undefined) {
    throw new UsageError("--stride requires --window");
  }

  const snippets = readSnippets(input);
  if (snippets.length === 0) {
    throw new DataFormatError(`${input}: no snippet records to embed`);
  }
  const entries: StoreEntry[] = snippets.map((snippet) => ({
    id: snippet.comment_id,
    vector:
      window > 0
        ? windowedEmbed(snippet.text, dimension, window, stride)
        : hashEmbed(snippet.text, dimension),
  }));
  writeStore(output, dimension, entries);
  process.stderr.write(
    `${PROG}: embed: wrote ${entries.length} vectors (dimension=${dimension}) to ${output}\n`,
  );
  writeManifest(
    manifestPathFor(output),
    buildManifest(
      "embed",
      [input],
      { model: `hash:${dimension}`, window, stride },
      [output],
      entries.length,
    ),
  );
  return 0;
}

function cmdSynth(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      input: { type: "string", short: "i" },
      output: { type: "string", short: "o" },
      count: { type: "string" },
      seed: { type: "string" },
      temperature: { type: "string" },
    },
  });
  const input = requirePath(values.input, "--input");
  const output = requirePath(values.output, "--output");
  const count = parseIntFlag(values.count, "--count", DEFAULT_COUNT);
  if (count < 1) throw new UsageError("--count must be >= 1");
  const seed = parseIntFlag(values.seed, "--seed", 0);
  const temperature = parseFloatFlag(values.temperature, "--temperature", DEFAULT_TEMPERATURE);
  if (temperature < 0) throw new UsageError("--temperature must be >= 0");

  const anchors = readLabeledSnippets(input);
  const options = { count, seed, temperature };
  const written: SyntheticCandidate[] = [];
  try {
    for (const anchor of anchors) {
      written.push(...candidatesForAnchor(anchor, { count, seed, temperature }));
    }
  } catch (err) {
    // Keep whatever was generated before the bad anchor, but record the
    // failure in the manifest so the partial file is never trusted.
    writeRecords(output, written);
    const manifest = buildManifest("synth", [input], options, [output], written.length);
    manifest.status = "error";
    manifest.error = err instanceof Error ? err.message : String(err);
    writeManifest(manifestPathFor(output), manifest);
    throw err;
  }
  writeRecords(output, written);
  process.stderr.write(
    `${PROG}: synth: wrote ${written.length} candidates ` +
      `(${anchors.length} anchors x ${count}) to ${output}\n`,
  );
  writeManifest(
    manifestPathFor(output),
    buildManifest("synth", [input], options, [output], written.length),
  );
  return 0;
}

function cmdConvert(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      input: { type: "string", short: "i" },
      output: { type: "string", short: "o" },
    },
  });
  const input = requirePath(values.input, "--input");
  const output = requirePath(values.output, "--output");

  const raw = parseRecords(readFileSync(input, "utf-8"), input);
  const predictions = convertPredictions(raw);
  writeRecords(output, predictions);
  process.stderr.write(
    `${PROG}: convert: wrote ${predictions.length} prediction records to ${output}\n`,
  );
  writeManifest(
    manifestPathFor(output),
    buildManifest("convert", [input], {}, [output], predictions.length),
  );
  return 0;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    switch (command) {
      case "embed":
        return cmdEmbed(rest);
      case "synth":
        return cmdSynth(rest);
      case "convert":
        return cmdConvert(rest);
      case undefined:
      case "--help":
      case "-h":
        process.stderr.write(USAGE);
        return command === undefined ? 1 : 0;
      default:
        throw new UsageError(`unknown command ${JSON.stringify(command)}`);
    }
  } catch (err) {
    if (err instanceof UsageError) {
      process.stderr.write(`${PROG}: error: ${err.message}\n`);
      return 1;
    }
    if (
      err instanceof DataFormatError ||
      err instanceof StoreError ||
      err instanceof DegenerateInputError ||
      err instanceof RangeError ||
      (err instanceof Error && "code" in err && err.code === "ENOENT")
    ) {
      process.stderr.write(`${PROG}: error: ${err.message}\n`);
      return 2;
    }
    // parseArgs throws ERR_PARSE_ARGS_* TypeErrors for unknown flags.
    if (err instanceof TypeError && "code" in err && String(err.code).startsWith("ERR_PARSE_ARGS")) {
      process.stderr.write(`${PROG}: error: ${err.message}\n`);
      return 1;
    }
    throw err;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(process.argv[1]).href;

if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
