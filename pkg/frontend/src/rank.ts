// The delta-slider ranking. This mirrors the scoring module on the server
// byte for byte: snap delta to the nearest grid point (first index wins
// ties), sort ascending by the active view's value there with a stable sort,
// and hand out ordinal ranks. Rows with no value at that delta stay
// unranked at the bottom.

import { nearestGridIndex, viewMatrix } from "./bundle.js";
import type { RankEntry, RankList, Report, SessionState } from "./types.js";

export function deltaRank(state: SessionState, report?: Report | null): RankList {
  const { bundle, view, angleIndex } = state;
  const gridIndex = nearestGridIndex(bundle.delta_grid, state.delta);
  const matrix = viewMatrix(bundle, angleIndex, view);

  const valued: { id: string; value: number }[] = [];
  const unranked: RankEntry[] = [];
  bundle.ids.forEach((id, i) => {
    const v = matrix[i][gridIndex];
    if (Number.isNaN(v)) {
      unranked.push({ id, value: null, rank: null });
    } else {
      valued.push({ id, value: v });
    }
  });
  // Array.prototype.sort is stable, so ties keep bundle order — the same
  // tie-break the server's stable argsort applies.
  valued.sort((a, b) => a.value - b.value);

  const entries: RankEntry[] = valued.map((e, k) => ({ id: e.id, value: e.value, rank: k + 1 }));
  entries.push(...unranked);

  const constant =
    valued.length > 0 && valued.every((e) => e.value === valued[0].value);
  const snapped = bundle.delta_grid[gridIndex];
  const isDeltaStar = report != null && snapped === report.delta_star;

  return {
    delta: snapped,
    gridIndex,
    view,
    angleIndex,
    entries,
    constant,
    isDeltaStar,
  };
}

/** Rank of one id at the current slider position, for the hover tooltip. */
export function rankOf(list: RankList, id: string): number | null {
  const entry = list.entries.find((e) => e.id === id);
  return entry ? entry.rank : null;
}
