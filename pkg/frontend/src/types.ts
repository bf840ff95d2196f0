// Shared shapes for the explorer: the bundle/report JSON emitted by the
// dqfkit CLI, and the session state the panels are rendered from.

export type View = "q_bar" | "q_tilde" | "dq";

export const VIEWS: View[] = ["q_bar", "q_tilde", "dq"];

export interface AngleBlock {
  alpha: number;
  /** n x m curve matrices; missing values arrive as null and are kept as NaN. */
  q_bar: number[][];
  q_tilde: number[][];
  dq: number[][];
  zero_interval_mean: number[];
}

export interface Bundle {
  ids: string[];
  delta_grid: number[];
  angles: AngleBlock[];
  config: Record<string, unknown>;
  flags: Record<string, unknown>;
}

export interface Report {
  ids: string[];
  ranks: (number | null)[];
  scores: (number | null)[];
  delta_star: number;
  zero_interval_mean: (number | null)[];
  method: string;
  auc?: number;
  flags: Record<string, unknown>;
}

export interface SessionState {
  bundle: Bundle;
  view: View;
  angleIndex: number;
  hoveredId: string | null;
  pinnedIds: string[];
  flaggedIds: string[];
  /** delta-slider position; ranking snaps it to the nearest grid point */
  delta: number;
  /** observation id -> stroke color for pinned curves */
  colors: Record<string, string>;
  /** q_tilde column interpretation: false = end-normalized curve from the
      bundle, true = per-delta z-score of the averaged curve */
  standardized: boolean;
  /** seed for the large-n curve subset so re-renders stay identical */
  sampleSeed: number;
}

export interface RankEntry {
  id: string;
  value: number | null;
  rank: number | null;
}

export interface RankList {
  /** grid value actually used after snapping */
  delta: number;
  gridIndex: number;
  view: View;
  angleIndex: number;
  entries: RankEntry[];
  /** all ranked values identical: ordering is meaningless */
  constant: boolean;
  /** snapped delta coincides with the report's automatically chosen delta* */
  isDeltaStar: boolean;
}

export interface FlagFile {
  bundle_sha256: string;
  flagged_ids: string[];
  delta: number;
  view: View;
  angle_index: number;
  timestamp: string;
}
