// Flag files: a small JSON snapshot of which observations the analyst
// marked, tied to the exact bundle bytes by hash so flags never silently
// migrate between datasets.

import type { FlagFile, SessionState, View } from "./types.js";

export class FlagImportError extends Error {}

export function exportFlags(state: SessionState, bundleHash: string, now?: Date): string {
  const file: FlagFile = {
    bundle_sha256: bundleHash,
    flagged_ids: [...state.flaggedIds],
    delta: state.delta,
    view: state.view,
    angle_index: state.angleIndex,
    timestamp: (now ?? new Date()).toISOString(),
  };
  return JSON.stringify(file, null, 2);
}

/**
 * Parse a flag file and check it belongs to the loaded bundle. Refuses with
 * a clear message on a hash mismatch rather than applying flags to the
 * wrong data.
 */
export function importFlags(text: string, bundleHash: string): FlagFile {
  let decoded: unknown;
  try {
    decoded = JSON.parse(text);
  } catch (e) {
    throw new FlagImportError(`flag file is not valid JSON: ${(e as Error).message}`);
  }
  const obj = decoded as Record<string, unknown>;
  if (
    typeof obj.bundle_sha256 !== "string" ||
    !Array.isArray(obj.flagged_ids) ||
    !obj.flagged_ids.every((v) => typeof v === "string") ||
    typeof obj.delta !== "number" ||
    typeof obj.view !== "string" ||
    typeof obj.angle_index !== "number" ||
    typeof obj.timestamp !== "string"
  ) {
    throw new FlagImportError("flag file is missing required fields");
  }
  if (obj.bundle_sha256 !== bundleHash) {
    throw new FlagImportError(
      `flag file was saved for a different bundle ` +
        `(${obj.bundle_sha256.slice(0, 12)}… vs ${bundleHash.slice(0, 12)}…); refusing to import`,
    );
  }
  return obj as unknown as FlagFile;
}

/** Apply an imported flag file to the session (hash already verified). */
export function applyFlags(state: SessionState, file: FlagFile): SessionState {
  for (const id of file.flagged_ids) {
    if (!state.bundle.ids.includes(id)) {
      throw new FlagImportError(`flag file references unknown id ${JSON.stringify(id)}`);
    }
  }
  return {
    ...state,
    flaggedIds: [...file.flagged_ids],
    delta: file.delta,
    view: file.view as View,
    angleIndex: file.angle_index,
  };
}
