/**
 * Run manifests: one JSON file per CLI run recording the command, the
 * sha256 of each input, the resolved options, and the outcome. A run
 * that fails midway still writes its manifest (status "error" plus the
 * message) so partial outputs are never mistaken for complete ones.
 */

import { createHash } from "node:crypto";
import { readFileSync, writeFileSync } from "node:fs";

export interface Manifest {
  tool: string;
  command: string;
  status: "ok" | "error";
  error?: string;
  inputs: Record<string, string>;
  options: Record<string, unknown>;
  outputs: string[];
  records_written: number;
  created_at: string;
}

export function sha256File(path: string): string {
  return createHash("sha256").update(readFileSync(path)).digest("hex");
}

export function buildManifest(
  command: string,
  inputPaths: string[],
  options: Record<string, unknown>,
  outputs: string[],
  recordsWritten: number,
): Manifest {
  const inputs: Record<string, string> = {};
  for (const path of inputPaths) {
    inputs[path] = sha256File(path);
  }
  return {
    tool: "ca-sidecar",
    command,
    status: "ok",
    inputs,
    options,
    outputs,
    records_written: recordsWritten,
    created_at: new Date().toISOString(),
  };
}

export function writeManifest(path: string, manifest: Manifest): void {
  writeFileSync(path, `${JSON.stringify(manifest, null, 2)}\n`, "utf-8");
}

export function manifestPathFor(outputPath: string): string {
  return `${outputPath}.manifest.json`;
}
