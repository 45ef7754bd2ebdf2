// Lecturer live console: tally bars per RAT and the whole-sheet aggregate,
// re-rendered from every stats push; closing freezes the view.

import { displayedBarTotal, tallyBars } from "../charts.js";
import { fmtPercent } from "../format.js";
import { escapeHtml } from "../markdown.js";
import type { ConsoleState } from "../live.js";

export function liveConsole(
  sessionId: string,
  state: ConsoleState,
  ratLabels: Record<string, string> = {},
): string {
  const stats = state.latest;
  const status = state.frozen
    ? "closed — data frozen"
    : state.connection === "open"
      ? "live"
      : state.connection;
  const body = stats
    ? `<p class="aggregate">
         ${stats.sheet.n_answers} answers so far,
         correct overall: ${fmtPercent(stats.sheet.correct_fraction)}
       </p>
       ${tallyBars(stats.per_rat, ratLabels)}`
    : "<p>waiting for the first answers…</p>";
  return `<h2>Live session <code>${escapeHtml(sessionId)}</code></h2>
  <p class="connection ${state.connection}">${status}</p>
  ${body}
  <p><button data-action="close-live" data-session="${sessionId}" ${state.frozen ? "disabled" : ""}>
    close session
  </button></p>`;
}

export { displayedBarTotal };
