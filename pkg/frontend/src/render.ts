// SVG rendering. renderGrid is a pure function of (state, report): equal
// inputs produce the identical markup string, which is what the snapshot
// tests pin down. No client-side smoothing happens here — every vertex is a
// bundle number mapped through an affine scale.

import { BundleError, nearestGridIndex, viewMatrix } from "./bundle.js";
import { deltaRank, rankOf } from "./rank.js";
import { sampleIds } from "./sample.js";
import type { Bundle, Report, SessionState, View } from "./types.js";
import { VIEWS } from "./types.js";

export const PANEL_W = 280;
export const PANEL_H = 170;
const MARGIN = { top: 26, right: 10, bottom: 26, left: 46 };
const HEADER_H = 26;
const ROWLABEL_W = 20;
const TOP_K_KEPT = 20;

const BULK_COLOR = "#b08585"; // muted red-grey for the crowd
const FLAG_COLOR = "#188038"; // flagged curves read as green
const HOVER_COLOR = "#c5221f";

function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function px(x: number): string {
  return String(Math.round(x * 100) / 100);
}

function fmt(x: number): string {
  if (Number.isNaN(x)) return "–";
  return String(Math.round(x * 1000) / 1000);
}

function errorBanner(message: string): string {
  return `<div class="error-banner" role="alert">cannot render bundle: ${esc(message)}</div>`;
}

function assertRenderable(bundle: Bundle): void {
  if (!bundle || !Array.isArray(bundle.ids) || !Array.isArray(bundle.angles)) {
    throw new BundleError("bundle is malformed");
  }
  if (bundle.ids.length === 0) throw new BundleError("bundle has no observations");
  if (bundle.angles.length === 0) throw new BundleError("bundle has no angle blocks");
  const n = bundle.ids.length;
  const m = bundle.delta_grid.length;
  for (const blk of bundle.angles) {
    for (const view of VIEWS) {
      const mat = blk[view];
      if (!Array.isArray(mat) || mat.length !== n || mat.some((r) => r.length !== m)) {
        throw new BundleError(`curve matrix ${view} does not match ids × delta grid`);
      }
    }
  }
}

interface Scale {
  lo: number;
  hi: number;
  size: number;
  offset: number;
  flip: boolean;
}

function scalePos(s: Scale, v: number): number {
  const t = (v - s.lo) / (s.hi - s.lo);
  return s.offset + (s.flip ? 1 - t : t) * s.size;
}

function yDomain(matrix: number[][], allIds: string[], visible: Set<string>): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (let i = 0; i < allIds.length; i++) {
    if (!visible.has(allIds[i])) continue;
    for (const v of matrix[i]) {
      if (Number.isNaN(v)) continue;
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (lo === Infinity) return [0, 1];
  if (lo === hi) return [lo - 0.5, hi + 0.5];
  const pad = 0.05 * (hi - lo);
  return [lo - pad, hi + pad];
}

function curvePath(grid: number[], row: number[], xs: Scale, ys: Scale): string {
  const parts: string[] = [];
  let pen = false;
  for (let k = 0; k < grid.length; k++) {
    const v = row[k];
    if (Number.isNaN(v)) {
      pen = false;
      continue;
    }
    const cmd = pen ? "L" : "M";
    parts.push(`${cmd}${px(scalePos(xs, grid[k]))},${px(scalePos(ys, v))}`);
    pen = true;
  }
  return parts.join(" ");
}

function viewLabel(view: View, standardized: boolean): string {
  if (view === "q_bar") return "averaged curve";
  if (view === "q_tilde") return standardized ? "per-δ z-score" : "end-normalized";
  return "smoothed derivative";
}

interface CurveStyle {
  cls: string;
  color: string;
  width: number;
  opacity: number;
}

function styleFor(state: SessionState, id: string, hovered: boolean): CurveStyle {
  const flagged = state.flaggedIds.includes(id);
  const pinned = state.pinnedIds.includes(id);
  let cls = "curve";
  let color = BULK_COLOR;
  let width = 1;
  let opacity = 0.4;
  if (pinned) {
    cls += " pinned";
    color = state.colors[id] ?? HOVER_COLOR;
    width = 1.6;
    opacity = 1;
  }
  if (flagged) {
    cls += " flagged";
    color = FLAG_COLOR;
    width = 1.6;
    opacity = 1;
  }
  if (hovered) {
    cls += " hovered";
    if (!pinned && !flagged) color = HOVER_COLOR;
    width = 2.6;
    opacity = 1;
  }
  return { cls, color, width, opacity };
}

function panel(
  state: SessionState,
  angleIndex: number,
  view: View,
  visible: string[],
  x0: number,
  y0: number,
): string {
  const bundle = state.bundle;
  const grid = bundle.delta_grid;
  const matrix = viewMatrix(bundle, angleIndex, view, state.standardized);
  const visibleSet = new Set(visible);
  const [lo, hi] = yDomain(matrix, bundle.ids, visibleSet);
  const xs: Scale = {
    lo: 0,
    hi: 1,
    size: PANEL_W - MARGIN.left - MARGIN.right,
    offset: x0 + MARGIN.left,
    flip: false,
  };
  const ys: Scale = {
    lo,
    hi,
    size: PANEL_H - MARGIN.top - MARGIN.bottom,
    offset: y0 + MARGIN.top,
    flip: true,
  };

  const parts: string[] = [];
  parts.push(
    `<g class="panel" data-view="${view}" data-angle="${angleIndex}">`,
    `<rect class="frame" x="${px(x0 + MARGIN.left)}" y="${px(y0 + MARGIN.top)}" ` +
      `width="${px(xs.size)}" height="${px(ys.size)}" fill="none" stroke="#ccc"/>`,
  );
  // axis extremes are enough context for small multiples
  const axisX = px(x0 + MARGIN.left - 4);
  parts.push(
    `<text class="ytick" x="${axisX}" y="${px(scalePos(ys, hi))}" text-anchor="end" dominant-baseline="middle" font-size="9">${fmt(hi)}</text>`,
    `<text class="ytick" x="${axisX}" y="${px(scalePos(ys, lo))}" text-anchor="end" dominant-baseline="middle" font-size="9">${fmt(lo)}</text>`,
    `<text class="xtick" x="${px(scalePos(xs, 0))}" y="${px(y0 + PANEL_H - MARGIN.bottom + 12)}" text-anchor="middle" font-size="9">0</text>`,
    `<text class="xtick" x="${px(scalePos(xs, 1))}" y="${px(y0 + PANEL_H - MARGIN.bottom + 12)}" text-anchor="middle" font-size="9">1</text>`,
  );
  // slider position, so re-ranking has a visual anchor in every panel
  const sx = px(scalePos(xs, bundle.delta_grid[nearestGridIndex(bundle.delta_grid, state.delta)]));
  parts.push(
    `<line class="delta-marker" x1="${sx}" y1="${px(y0 + MARGIN.top)}" x2="${sx}" y2="${px(y0 + PANEL_H - MARGIN.bottom)}" stroke="#999" stroke-dasharray="3,3"/>`,
  );

  const index = new Map(bundle.ids.map((id, i) => [id, i] as const));
  const drawOne = (id: string, hovered: boolean) => {
    const row = matrix[index.get(id)!];
    const d = curvePath(grid, row, xs, ys);
    if (d === "") return;
    const st = styleFor(state, id, hovered);
    parts.push(
      `<path class="${st.cls}" data-id="${esc(id)}" d="${d}" fill="none" ` +
        `stroke="${st.color}" stroke-width="${st.width}" stroke-opacity="${st.opacity}"/>`,
    );
  };
  // paint order: bulk, then pinned/flagged, hovered always on top
  const hovered = state.hoveredId;
  const emphasized = new Set([...state.pinnedIds, ...state.flaggedIds]);
  for (const id of visible) {
    if (id === hovered || emphasized.has(id)) continue;
    drawOne(id, false);
  }
  for (const id of visible) {
    if (id === hovered || !emphasized.has(id)) continue;
    drawOne(id, false);
  }
  if (hovered !== null && visibleSet.has(hovered)) drawOne(hovered, true);
  parts.push("</g>");
  return parts.join("");
}

function tooltip(state: SessionState, report: Report | null | undefined, width: number): string {
  const id = state.hoveredId;
  if (id === null) return "";
  const bundle = state.bundle;
  const i = bundle.ids.indexOf(id);
  const block = bundle.angles[state.angleIndex];
  const qbarEnd = block.q_bar[i][bundle.delta_grid.length - 1];
  const zim = block.zero_interval_mean[i];
  const rank = rankOf(deltaRank(state, report), id);
  const flagged = state.flaggedIds.includes(id);
  const lines = [
    `id ${id}${flagged ? "  ⚑" : ""}`,
    `q̄(1) = ${fmt(qbarEnd)}`,
    `zero interval = ${fmt(zim)}`,
    `rank = ${rank === null ? "–" : rank}`,
  ];
  const x = width - 168;
  const rows = lines
    .map(
      (s, k) =>
        `<text x="${px(x + 8)}" y="${px(18 + 13 * k)}" font-size="10"${k === 0 ? ' font-weight="bold"' : ""}>${esc(s)}</text>`,
    )
    .join("");
  return (
    `<g class="tooltip">` +
    `<rect x="${px(x)}" y="4" width="160" height="58" rx="4" fill="#fffbe6" stroke="#999"${flagged ? ' class="flag-badge"' : ""}/>` +
    rows +
    `</g>`
  );
}

/**
 * Render the full panel grid: one column per view, one row per angle, a
 * polyline per (visible) observation in each panel. Returns markup; on a
 * malformed or empty bundle this degrades to an error banner instead of
 * throwing.
 */
export function renderGrid(state: SessionState, report?: Report | null): string {
  try {
    assertRenderable(state.bundle);
  } catch (e) {
    return errorBanner((e as Error).message);
  }
  const bundle = state.bundle;
  const nAngles = bundle.angles.length;
  const width = ROWLABEL_W + VIEWS.length * PANEL_W;
  const height = HEADER_H + nAngles * PANEL_H;

  const keep = new Set<string>([...state.pinnedIds, ...state.flaggedIds]);
  if (state.hoveredId !== null) keep.add(state.hoveredId);
  if (report) {
    report.ids.forEach((id, i) => {
      const r = report.ranks[i];
      if (r !== null && r <= TOP_K_KEPT) keep.add(id);
    });
  }
  const visible = sampleIds(bundle.ids, state.sampleSeed, keep);

  const parts: string[] = [];
  parts.push(
    `<svg class="dqf-grid" xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" ` +
      `width="${width}" height="${height}" font-family="sans-serif">`,
  );
  VIEWS.forEach((view, c) => {
    parts.push(
      `<text class="col-label" x="${px(ROWLABEL_W + c * PANEL_W + PANEL_W / 2)}" y="16" ` +
        `text-anchor="middle" font-size="11" font-weight="bold">${esc(viewLabel(view, state.standardized))}</text>`,
    );
  });
  for (let r = 0; r < nAngles; r++) {
    const yMid = HEADER_H + r * PANEL_H + PANEL_H / 2;
    parts.push(
      `<text class="row-label" x="10" y="${px(yMid)}" text-anchor="middle" font-size="10" ` +
        `transform="rotate(-90 10 ${px(yMid)})">α = ${fmt(bundle.angles[r].alpha)}</text>`,
    );
    VIEWS.forEach((view, c) => {
      parts.push(panel(state, r, view, visible, ROWLABEL_W + c * PANEL_W, HEADER_H + r * PANEL_H));
    });
  }
  parts.push(tooltip(state, report, width));
  parts.push("</svg>");
  return parts.join("");
}

/**
 * The ranking sidebar as an HTML list, ascending by value at the slider's
 * grid point. Marks delta* when the slider sits on the report's choice and
 * warns when the column is constant.
 */
export function renderSidebar(state: SessionState, report?: Report | null): string {
  let list;
  try {
    list = deltaRank(state, report);
  } catch (e) {
    return errorBanner((e as Error).message);
  }
  const parts: string[] = [];
  parts.push(`<div class="rank-header">δ = ${fmt(list.delta)}${list.isDeltaStar ? ' <span class="delta-star">δ*</span>' : ""}</div>`);
  if (list.constant) {
    parts.push(`<div class="rank-warning">all curves share one value at this δ — order is arbitrary</div>`);
  }
  parts.push(`<ol class="rank-list">`);
  for (const e of list.entries) {
    const cls = [
      state.pinnedIds.includes(e.id) ? "pinned" : "",
      state.flaggedIds.includes(e.id) ? "flagged" : "",
    ]
      .filter(Boolean)
      .join(" ");
    parts.push(
      `<li data-id="${esc(e.id)}"${cls ? ` class="${cls}"` : ""}>` +
        `<span class="rank">${e.rank === null ? "–" : e.rank}</span> ` +
        `<span class="id">${esc(e.id)}</span> ` +
        `<span class="value">${e.value === null ? "–" : fmt(e.value)}</span></li>`,
    );
  }
  parts.push(`</ol>`);
  return parts.join("");
}
