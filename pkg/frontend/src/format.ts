/** Display formatting. Pure string shaping only: the console never
 * recomputes statistics on the client side. */

import type { IndicatorReportPayload } from "./types.js";

export function fmt(value: number | null | undefined, digits = 2): string {
  if (value === null || value === undefined || Number.isNaN(value)) return "-";
  return value.toFixed(digits);
}

export function fmtPair(alpha: number, beta: number): string {
  return `(${fmt(alpha)}, ${fmt(beta)})`;
}

export const MEASURE_LABELS = ["m1", "m2", "m3", "m4", "m5"] as const;
export const INDICATOR_LABELS = ["phi0", "phi1", "phi2", "phi3", "phi4"] as const;

export interface DiffRow {
  label: string;
  before: number;
  after: number;
}

/** Row-wise before/after for a what-if response, measures then indicators. */
export function indicatorDiff(
  before: IndicatorReportPayload,
  after: IndicatorReportPayload,
): DiffRow[] {
  const rows: DiffRow[] = [];
  MEASURE_LABELS.forEach((label, i) => {
    rows.push({ label, before: before.m[i], after: after.m[i] });
  });
  INDICATOR_LABELS.forEach((label, i) => {
    rows.push({ label, before: before.phi[i], after: after.phi[i] });
  });
  return rows;
}

/** Rows whose displayed (2-dp) value changes, for highlighting. */
export function changedRows(rows: DiffRow[], digits = 2): Set<string> {
  const changed = new Set<string>();
  for (const row of rows) {
    if (fmt(row.before, digits) !== fmt(row.after, digits)) changed.add(row.label);
  }
  return changed;
}

const STATE_PALETTE = [
  "#d9822b",
  "#c23b80",
  "#7b52ab",
  "#c0392b",
  "#5a6b7a",
  "#2980b9",
  "#27ae60",
];

export function stateColor(stateIndex: number): string {
  return STATE_PALETTE[stateIndex % STATE_PALETTE.length];
}

/** Tie stroke width from the posterior mean rate, clamped to sane pixels. */
export function edgeWidth(mean: number | null): number {
  if (mean === null || mean <= 0) return 1;
  return Math.min(1 + 1.4 * Math.sqrt(mean), 9);
}
