import { execFileSync, spawnSync } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";

export const CLI_PATH = fileURLToPath(new URL("../dist/cli.js", import.meta.url));

/** Run an inline python script against the installed pipeline package. */
export function py(script: string, input?: string): string {
  return execFileSync("python3", ["-c", script], {
    input: input ?? "",
    encoding: "utf-8",
    maxBuffer: 64 * 1024 * 1024,
  });
}

export interface CliResult {
  status: number | null;
  stdout: string;
  stderr: string;
}

export function runCli(args: string[]): CliResult {
  const res = spawnSync("node", [CLI_PATH, ...args], {
    encoding: "utf-8",
    maxBuffer: 64 * 1024 * 1024,
  });
  return { status: res.status, stdout: res.stdout, stderr: res.stderr };
}

export function tempDir(prefix: string): string {
  return mkdtempSync(join(tmpdir(), `${prefix}-`));
}

/** Varied texts covering unicode letters, digits, apostrophes, punctuation. */
export const PARITY_TEXTS = [
  "We're organizing a river cleanup next Saturday, who's in?",
  "signed the petition!!! 100% worth it",
  "café déjà-vu at the o'clock rally, rock'n'roll",
  "中文社区 也在 行动 2024",
  "Ich werde nächste Woche beim Straßenfest mitmachen",
  "x² plus naïve résistance",
  "don't   just	talk --- DO something",
  "a",
  "12345 67890",
  "''quoted'' words and trailing apostrophes' here",
];

export function makeSnippet(id: string, text: string, extra: object = {}): object {
  return {
    comment_id: id,
    community: "c/test",
    thread_id: "t1",
    author_id: "u1",
    text,
    anchor_index: 0,
    match_count: 1,
    ...extra,
  };
}
