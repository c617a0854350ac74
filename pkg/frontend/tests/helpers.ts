import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

// repo root: this file lives in frontend/tests/
const ROOT = new URL("../../", import.meta.url);

export function readRepoFile(relative: string): string {
  return readFileSync(fileURLToPath(new URL(relative, ROOT)), "utf8");
}

export function readGolden(name: string): string {
  return readRepoFile(`tests/golden/${name}`);
}

/** Deterministic PRNG so property failures reproduce. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}
