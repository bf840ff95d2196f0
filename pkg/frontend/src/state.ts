// Session state transitions. All updates are copy-on-write so a render is a
// pure function of the state it is handed; the invariant that hovered,
// pinned, and flagged ids actually exist in the bundle is enforced here.

import type { Bundle, SessionState, View } from "./types.js";

export class UnknownIdError extends Error {
  constructor(id: string) {
    super(`id ${JSON.stringify(id)} is not in the bundle`);
  }
}

const PALETTE = [
  "#c5221f", "#1a73e8", "#188038", "#f29900", "#9334e6",
  "#007b83", "#d01884", "#b06000", "#3949ab", "#5f6368",
];

export function newSession(bundle: Bundle): SessionState {
  const colors: Record<string, string> = {};
  bundle.ids.forEach((id, i) => {
    colors[id] = PALETTE[i % PALETTE.length];
  });
  return {
    bundle,
    view: "q_tilde",
    angleIndex: 0,
    hoveredId: null,
    pinnedIds: [],
    flaggedIds: [],
    delta: 0.5,
    colors,
    standardized: false,
    sampleSeed: 1,
  };
}

function requireId(state: SessionState, id: string): void {
  if (!state.bundle.ids.includes(id)) throw new UnknownIdError(id);
}

/** Hover an observation (null clears the hover). */
export function hoverLink(state: SessionState, id: string | null): SessionState {
  if (id !== null) requireId(state, id);
  return { ...state, hoveredId: id };
}

export function togglePin(state: SessionState, id: string): SessionState {
  requireId(state, id);
  const pinned = state.pinnedIds.includes(id)
    ? state.pinnedIds.filter((p) => p !== id)
    : [...state.pinnedIds, id];
  return { ...state, pinnedIds: pinned };
}

export function toggleFlag(state: SessionState, id: string): SessionState {
  requireId(state, id);
  const flagged = state.flaggedIds.includes(id)
    ? state.flaggedIds.filter((f) => f !== id)
    : [...state.flaggedIds, id];
  return { ...state, flaggedIds: flagged };
}

export function setFlags(state: SessionState, ids: string[]): SessionState {
  for (const id of ids) requireId(state, id);
  return { ...state, flaggedIds: [...ids] };
}

export function setDelta(state: SessionState, delta: number): SessionState {
  const grid = state.bundle.delta_grid;
  const lo = grid[0];
  const hi = grid[grid.length - 1];
  return { ...state, delta: Math.min(hi, Math.max(lo, delta)) };
}

export function setView(state: SessionState, view: View): SessionState {
  return { ...state, view };
}

export function setAngle(state: SessionState, angleIndex: number): SessionState {
  if (angleIndex < 0 || angleIndex >= state.bundle.angles.length) {
    throw new RangeError(`angle index ${angleIndex} out of range`);
  }
  return { ...state, angleIndex };
}

export function setStandardized(state: SessionState, on: boolean): SessionState {
  return { ...state, standardized: on };
}
