import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

/**
 * Resolve the interpreter running the core package.  Override with
 * OBBKIT_PYTHON when the CLI lives in a virtualenv.
 */
export function pythonCommand(): string {
  return process.env.OBBKIT_PYTHON ?? "python3";
}

/** Run one obbkit subcommand; throws with the CLI diagnostic on failure. */
export function runCli(args: string[]): void {
  const proc = spawnSync(pythonCommand(), ["-m", "obbkit", ...args], {
    encoding: "utf-8",
    maxBuffer: 256 * 1024 * 1024,
  });
  if (proc.error) {
    throw new Error(`failed to launch obbkit: ${proc.error.message}`);
  }
  if (proc.status !== 0) {
    const detail = (proc.stderr || proc.stdout || "").trim();
    throw new Error(`obbkit ${args[0]} exited with ${proc.status}: ${detail}`);
  }
}

/** Create a scratch directory, hand it to `fn`, and always clean up. */
export function withTempDir<T>(fn: (dir: string) => T): T {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "obbkit-"));
  try {
    return fn(dir);
  } finally {
    fs.rmSync(dir, { recursive: true, force: true });
  }
}

/** Write text with trailing-newline JSONL/plain-text conventions. */
export function writeLines(file: string, lines: string[]): void {
  fs.writeFileSync(file, lines.map((l) => l + "\n").join(""), "utf-8");
}

export function readLines(file: string): string[] {
  return fs
    .readFileSync(file, "utf-8")
    .split("\n")
    .filter((l) => l.length > 0);
}

/** Parse a comma-separated row of decimal numbers ("" means zero columns). */
export function parseCsvRow(row: string): number[] {
  if (row === "") {
    return [];
  }
  return row.split(",").map((v) => {
    const n = Number(v);
    if (Number.isNaN(n)) {
      throw new Error(`expected a number in CSV output, got ${JSON.stringify(v)}`);
    }
    return n;
  });
}
