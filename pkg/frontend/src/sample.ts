// Seeded down-sampling for big bundles. Above the curve budget we draw a
// deterministic subset so a re-render never shuffles the picture, and we
// always keep the ids the analyst is working with (pinned, flagged, hovered,
// top of the report).

export const CURVE_BUDGET = 2000;

/** The classic 32-bit mixer; good enough for a stable display subset. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/**
 * Choose which ids to draw. Everything in `keep` is always included; the
 * rest are sampled without replacement down to the budget, keyed by `seed`.
 * Output preserves the original id order.
 */
export function sampleIds(
  ids: string[],
  seed: number,
  keep: Set<string>,
  budget: number = CURVE_BUDGET,
): string[] {
  if (ids.length <= budget) return [...ids];
  const rand = mulberry32(seed);
  const keyed = ids.map((id, i) => ({ id, i, key: keep.has(id) ? -1 : rand() }));
  const chosen = new Set<string>();
  for (const e of keyed.filter((e) => e.key < 0)) chosen.add(e.id);
  const room = Math.max(budget - chosen.size, 0);
  keyed
    .filter((e) => e.key >= 0)
    .sort((a, b) => a.key - b.key || a.i - b.i)
    .slice(0, room)
    .forEach((e) => chosen.add(e.id));
  return ids.filter((id) => chosen.has(id));
}
