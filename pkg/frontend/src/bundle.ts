// Bundle loading and validation, plus the small numeric helpers that the
// ranking and rendering code share. Everything here is pure; fetching lives
// in main.ts.

import type { AngleBlock, Bundle, Report, View } from "./types.js";

export class BundleError extends Error {}

function isNumberArray(xs: unknown): xs is (number | null)[] {
  return Array.isArray(xs) && xs.every((v) => v === null || typeof v === "number");
}

function toRow(xs: (number | null)[]): number[] {
  return xs.map((v) => (v === null ? NaN : v));
}

function parseMatrix(raw: unknown, n: number, m: number, name: string): number[][] {
  if (!Array.isArray(raw) || raw.length !== n) {
    throw new BundleError(`${name}: expected ${n} rows`);
  }
  const out: number[][] = [];
  for (const row of raw) {
    if (!isNumberArray(row) || row.length !== m) {
      throw new BundleError(`${name}: expected rows of length ${m}`);
    }
    out.push(toRow(row));
  }
  return out;
}

/**
 * Validate a decoded bundle object and normalize nulls to NaN.
 * Throws BundleError with a human-readable reason on anything off-shape;
 * the caller turns that into the error banner.
 */
export function parseBundle(raw: unknown): Bundle {
  if (typeof raw !== "object" || raw === null) {
    throw new BundleError("bundle is not a JSON object");
  }
  const obj = raw as Record<string, unknown>;
  const ids = obj.ids;
  if (!Array.isArray(ids) || !ids.every((v) => typeof v === "string")) {
    throw new BundleError("bundle.ids must be an array of strings");
  }
  if (ids.length === 0) {
    throw new BundleError("bundle has no observations");
  }
  if (new Set(ids).size !== ids.length) {
    throw new BundleError("bundle.ids contains duplicates");
  }
  const grid = obj.delta_grid;
  if (!isNumberArray(grid) || grid.length === 0 || grid.some((v) => v === null)) {
    throw new BundleError("bundle.delta_grid must be a numeric array");
  }
  const deltaGrid = grid as number[];
  for (let i = 0; i < deltaGrid.length; i++) {
    if (!(deltaGrid[i] > 0 && deltaGrid[i] <= 1) || (i > 0 && deltaGrid[i] <= deltaGrid[i - 1])) {
      throw new BundleError("bundle.delta_grid must increase within (0, 1]");
    }
  }
  const rawAngles = obj.angles;
  if (!Array.isArray(rawAngles) || rawAngles.length === 0) {
    throw new BundleError("bundle.angles must be a non-empty array");
  }
  const n = ids.length;
  const m = deltaGrid.length;
  const angles: AngleBlock[] = rawAngles.map((a, k) => {
    const blk = a as Record<string, unknown>;
    if (typeof blk.alpha !== "number") {
      throw new BundleError(`angles[${k}].alpha missing`);
    }
    const zim = blk.zero_interval_mean;
    if (!isNumberArray(zim) || zim.length !== n) {
      throw new BundleError(`angles[${k}].zero_interval_mean: expected ${n} values`);
    }
    return {
      alpha: blk.alpha,
      q_bar: parseMatrix(blk.q_bar, n, m, `angles[${k}].q_bar`),
      q_tilde: parseMatrix(blk.q_tilde, n, m, `angles[${k}].q_tilde`),
      dq: parseMatrix(blk.dq, n, m, `angles[${k}].dq`),
      zero_interval_mean: toRow(zim),
    };
  });
  return {
    ids: ids as string[],
    delta_grid: deltaGrid,
    angles,
    config: (obj.config as Record<string, unknown>) ?? {},
    flags: (obj.flags as Record<string, unknown>) ?? {},
  };
}

export function parseBundleText(text: string): Bundle {
  let decoded: unknown;
  try {
    decoded = JSON.parse(text);
  } catch (e) {
    throw new BundleError(`bundle is not valid JSON: ${(e as Error).message}`);
  }
  return parseBundle(decoded);
}

export function parseReportText(text: string): Report {
  let decoded: unknown;
  try {
    decoded = JSON.parse(text);
  } catch (e) {
    throw new BundleError(`report is not valid JSON: ${(e as Error).message}`);
  }
  const obj = decoded as Record<string, unknown>;
  if (!Array.isArray(obj.ids) || !Array.isArray(obj.ranks) || typeof obj.delta_star !== "number") {
    throw new BundleError("report missing ids/ranks/delta_star");
  }
  return decoded as unknown as Report;
}

/** Index of the grid point nearest to delta; first index wins ties. */
export function nearestGridIndex(grid: number[], delta: number): number {
  let best = 0;
  let bestDist = Math.abs(grid[0] - delta);
  for (let i = 1; i < grid.length; i++) {
    const d = Math.abs(grid[i] - delta);
    if (d < bestDist) {
      best = i;
      bestDist = d;
    }
  }
  return best;
}

/**
 * Per-column z-score of a curve matrix: at each delta the column is centered
 * and scaled by its sample standard deviation over the rows that have a
 * value there. A constant column maps to zeros.
 */
export function zscoreColumns(matrix: number[][]): number[][] {
  const n = matrix.length;
  if (n === 0) return [];
  const m = matrix[0].length;
  const out: number[][] = matrix.map(() => new Array<number>(m).fill(NaN));
  for (let j = 0; j < m; j++) {
    let count = 0;
    let sum = 0;
    for (let i = 0; i < n; i++) {
      const v = matrix[i][j];
      if (!Number.isNaN(v)) {
        count += 1;
        sum += v;
      }
    }
    if (count === 0) continue;
    const mean = sum / count;
    let ss = 0;
    for (let i = 0; i < n; i++) {
      const v = matrix[i][j];
      if (!Number.isNaN(v)) ss += (v - mean) * (v - mean);
    }
    const sd = count > 1 ? Math.sqrt(ss / (count - 1)) : 0;
    for (let i = 0; i < n; i++) {
      const v = matrix[i][j];
      if (Number.isNaN(v)) continue;
      out[i][j] = sd === 0 ? 0 : (v - mean) / sd;
    }
  }
  return out;
}

/**
 * Matrix backing a panel. The standardized toggle swaps the q_tilde column
 * for the per-delta z-score of the averaged curve — the other reading of
 * "standardized" — leaving q_bar and dq untouched.
 */
export function viewMatrix(
  bundle: Bundle,
  angleIndex: number,
  view: View,
  standardized = false,
): number[][] {
  const block = bundle.angles[angleIndex];
  if (block === undefined) {
    throw new BundleError(`angle index ${angleIndex} out of range`);
  }
  if (view === "q_tilde" && standardized) return zscoreColumns(block.q_bar);
  return block[view];
}

/** SHA-256 of raw bytes as lowercase hex (matches the compute manifest). */
export async function sha256Hex(bytes: ArrayBuffer | Uint8Array): Promise<string> {
  const buf = bytes instanceof Uint8Array ? (bytes.buffer as ArrayBuffer).slice(bytes.byteOffset, bytes.byteOffset + bytes.byteLength) : bytes;
  const digest = await crypto.subtle.digest("SHA-256", buf);
  return Array.from(new Uint8Array(digest))
    .map((b) => b.toString(16).padStart(2, "0"))
    .join("");
}
