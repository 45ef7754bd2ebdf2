// SVG chart builders: competence progression lines and live tally bars.
//
// Inputs are server-computed values (levels in [0,1], integer counts); the
// arithmetic below is coordinate geometry for drawing, never statistics.

import { COMPETENCE_LABELS, fmtPercent } from "./format.js";
import { escapeHtml } from "./markdown.js";
import type { PerRatStats, ProgressionPointJson } from "./types.js";

const WIDTH = 420;
const HEIGHT = 160;
const PAD = 28;

const SERIES_COLORS = ["#2a6fdb", "#d9822b", "#3f9d57"];

function x(attemptIndex: number, maxIndex: number): number {
  const span = Math.max(maxIndex - 1, 1);
  return PAD + ((attemptIndex - 1) / span) * (WIDTH - 2 * PAD);
}

function y(level: number): number {
  return HEIGHT - PAD - level * (HEIGHT - 2 * PAD);
}

export function progressionChart(
  progression: Record<string, ProgressionPointJson[]>,
): string {
  const names = Object.keys(progression);
  const maxIndex = Math.max(
    1,
    ...names.map((name) => progression[name]?.length ?? 0),
  );
  const lines: string[] = [];
  const legend: string[] = [];
  names.forEach((name, seriesIndex) => {
    const color = SERIES_COLORS[seriesIndex % SERIES_COLORS.length];
    const points = (progression[name] ?? [])
      .filter((p) => p.level !== null)
      .map((p) => `${x(p.attempt_index, maxIndex)},${y(p.level!.value)}`);
    if (points.length > 0) {
      lines.push(
        `<polyline fill="none" stroke="${color}" stroke-width="2" points="${points.join(" ")}"/>`,
      );
      const marks = (progression[name] ?? [])
        .filter((p) => p.level !== null)
        .map(
          (p) =>
            `<circle cx="${x(p.attempt_index, maxIndex)}" cy="${y(p.level!.value)}" r="3" fill="${color}"><title>${escapeHtml(name)} after attempt ${p.attempt_index}: ${escapeHtml(p.level!.exact)}</title></circle>`,
        );
      lines.push(...marks);
    }
    legend.push(
      `<tspan fill="${color}">●</tspan> ${escapeHtml(COMPETENCE_LABELS[name] ?? name)}`,
    );
  });
  const axes = `
    <line x1="${PAD}" y1="${y(0)}" x2="${WIDTH - PAD}" y2="${y(0)}" stroke="#999"/>
    <line x1="${PAD}" y1="${y(0)}" x2="${PAD}" y2="${y(1)}" stroke="#999"/>
    <text x="6" y="${y(1) + 4}" font-size="10">1</text>
    <text x="6" y="${y(0) + 4}" font-size="10">0</text>
    <text x="${WIDTH - PAD}" y="${HEIGHT - 8}" font-size="10" text-anchor="end">attempts</text>`;
  return `<svg class="progression" viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" aria-label="competence progression">
  ${axes}
  ${lines.join("\n  ")}
  <text x="${PAD}" y="14" font-size="11">${legend.join("   ")}</text>
</svg>`;
}

export function tallyBars(perRat: PerRatStats[], labels: Record<string, string> = {}): string {
  const blocks = perRat.map((entry) => {
    const keys = Object.keys(entry.tally).sort();
    const biggest = Math.max(1, ...keys.map((k) => entry.tally[k] ?? 0));
    const rows = keys.map((key) => {
      const count = entry.tally[key] ?? 0;
      const width = (count / biggest) * 220;
      return `<div class="bar-row" data-rat="${escapeHtml(entry.rat)}" data-key="${escapeHtml(key)}" data-count="${count}">
        <span class="bar-label">${escapeHtml(key)}</span>
        <svg width="230" height="16"><rect x="0" y="2" width="${width}" height="12" fill="#2a6fdb"></rect></svg>
        <span class="bar-count">${count}</span>
      </div>`;
    });
    const title = labels[entry.rat] ?? entry.rat;
    return `<section class="rat-tally" data-rat="${escapeHtml(entry.rat)}" data-n="${entry.n}">
      <h4>${escapeHtml(title)}</h4>
      <p>${entry.n} answers, correct: ${fmtPercent(entry.correct_fraction)}</p>
      ${rows.join("\n      ") || "<p class='empty'>no answers yet</p>"}
    </section>`;
  });
  return blocks.join("\n");
}

/** Sum of displayed bar counts, read back from rendered markup (test hook). */
export function displayedBarTotal(html: string): number {
  let total = 0;
  const pattern = /data-count="(\d+)"/g;
  let match;
  while ((match = pattern.exec(html)) !== null) {
    total += Number(match[1]);
  }
  return total;
}
