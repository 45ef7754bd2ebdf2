// Presentation-only formatting of server-computed numbers.  These helpers
// change units for display (fraction -> percent string); they never derive a
// statistic that the server did not send.

import type { FractionJson } from "./types.js";

export function fmtPercent(fraction: number | null | undefined): string {
  if (fraction === null || fraction === undefined) return "–";
  return `${Math.round(fraction * 1000) / 10}%`;
}

export function fmtLevel(level: FractionJson | null): string {
  if (level === null) return "no data yet";
  return `${fmtPercent(level.value)} (${level.exact})`;
}

export function fmtStars(mean: number, count: number): string {
  if (count === 0) return "not rated yet";
  return `${Math.round(mean * 10) / 10}★ (${count})`;
}

export const COMPETENCE_LABELS: Record<string, string> = {
  data_literacy: "Data literacy",
  representational_competence: "Representational competence",
  mathematical_literacy: "Mathematical literacy",
};
