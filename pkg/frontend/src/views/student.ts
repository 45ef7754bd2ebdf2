// Student screens: lecture picker, run chooser, question screen with answer
// form + scaffolds tab + stats tab, feedback panel, and the completion view
// with the competence charts.  Pure functions from server data to markup;
// numbers are interpolated, never computed.

import { progressionChart } from "../charts.js";
import { COMPETENCE_LABELS, fmtLevel, fmtPercent, fmtStars } from "../format.js";
import { escapeHtml, renderRichText } from "../markdown.js";
import type { Flow, RunContext } from "../state.js";
import { canSubmit, currentRat } from "../state.js";
import type {
  CompetenceView,
  GradedResult,
  LectureView,
  RatView,
  ScaffoldView,
  SheetView,
  StudentStats,
} from "../types.js";

export function lecturePicker(lectures: LectureView[], joined: string[]): string {
  const rows = lectures.map((lecture) => {
    const isMember = joined.includes(lecture.id);
    const action = isMember
      ? `<button data-action="pick-lecture" data-lecture="${lecture.id}">open</button>`
      : `<form data-form="join" data-lecture="${lecture.id}" class="inline">
           <input name="code" placeholder="lecture code" required>
           <button>join</button>
         </form>`;
    return `<tr>
      <td>${escapeHtml(lecture.name)}</td>
      <td>${escapeHtml(lecture.audience)}</td>
      <td>${escapeHtml(lecture.term)}</td>
      <td>${action}</td>
    </tr>`;
  });
  return `<h2>Lectures</h2>
  <table class="lectures">
    <thead><tr><th>name</th><th>audience</th><th>term</th><th></th></tr></thead>
    <tbody>${rows.join("")}</tbody>
  </table>
  <p><button data-action="cross-lecture">Cross-lecture questionnaire</button></p>`;
}

export function runChooser(lectureId: string, sheets: SheetView[]): string {
  const sheetRows = sheets.map(
    (sheet) => `<li>
      ${escapeHtml(sheet.name)} (${sheet.rat_ids.length} RATs, from ${escapeHtml(sheet.available_from)})
      <button data-action="start-sheet" data-sheet="${sheet.id}">work on it</button>
      <button data-action="join-live" data-sheet="${sheet.id}">live</button>
    </li>`,
  );
  return `<h2>Choose what to answer</h2>
  <p><button data-action="start-auto" data-lecture="${lectureId}">Automatically selected RATs</button>
     <label>topic filter <input id="topic-filter" placeholder="topic id"></label></p>
  <h3>RAT sheets</h3>
  <ul>${sheetRows.join("") || "<li>no sheets available yet</li>"}</ul>
  <p><a href="#/student" data-action="back-to-lectures">back to lectures</a></p>`;
}

function answerForm(rat: RatView, locked: boolean): string {
  const disabled = locked ? "disabled" : "";
  if (rat.kind === "multiple_choice") {
    const options = rat.options.map(
      (option) => `<label class="option">
        <input type="radio" name="choice" value="${option.id}" ${disabled} required>
        ${renderRichText(option.text)}
      </label>`,
    );
    return `${options.join("")}`;
  }
  if (rat.kind === "multi_true_false") {
    const rows = rat.options.map(
      (option) => `<div class="statement">
        ${renderRichText(option.text)}
        <label><input type="radio" name="tf-${option.id}" value="true" ${disabled} required> true</label>
        <label><input type="radio" name="tf-${option.id}" value="false" ${disabled} required> false</label>
      </div>`,
    );
    return rows.join("");
  }
  return `<input name="free-text" placeholder="your answer" ${disabled} required>`;
}

export function questionScreen(
  flow: Flow,
  scaffolds: ScaffoldView[] | null,
  stats: StudentStats | null,
): string {
  if (flow.screen !== "question") return "";
  const run = flow.run;
  const rat = currentRat(flow);
  if (!rat) return "<p>nothing to answer</p>";
  const locked = !canSubmit(flow, rat.id);
  const tabs = (["answer", "scaffolds", "stats"] as const)
    .map(
      (tab) =>
        `<button class="tab ${run.tab === tab ? "active" : ""}" data-action="tab" data-tab="${tab}">${tab}</button>`,
    )
    .join("");
  let body: string;
  if (run.tab === "answer") {
    body = `<form data-form="answer" data-rat="${rat.id}">
      ${answerForm(rat, locked)}
      <button ${locked ? "disabled" : ""}>submit</button>
      ${locked ? '<p class="notice">already answered — submitting again is disabled</p>' : ""}
    </form>`;
  } else if (run.tab === "scaffolds") {
    body = scaffoldsTab(scaffolds ?? []);
  } else {
    body = statsTab(stats);
  }
  return `<h2>RAT ${run.index + 1} of ${run.queue.length}</h2>
  <article class="question">${renderRichText(rat.question)}</article>
  <nav class="tabs">${tabs}</nav>
  <section class="tab-body">${body}</section>`;
}

export function scaffoldsTab(scaffolds: ScaffoldView[]): string {
  if (scaffolds.length === 0) {
    return `<p class="empty">No scaffolds for this RAT yet. After answering you can suggest one.</p>`;
  }
  const items = scaffolds.map(
    (scaffold) => `<li class="scaffold" data-scaffold="${scaffold.id}">
      <span class="kind">[${escapeHtml(scaffold.kind)}]</span>
      ${renderRichText(scaffold.body)}
      <span class="rating">${fmtStars(scaffold.mean_rating, scaffold.n_ratings)}</span>
      <span class="rate">
        ${[1, 2, 3, 4, 5]
          .map(
            (stars) =>
              `<button data-action="rate" data-scaffold="${scaffold.id}" data-stars="${stars}">${stars}★</button>`,
          )
          .join("")}
      </span>
    </li>`,
  );
  return `<ul class="scaffolds">${items.join("")}</ul>`;
}

export function statsTab(stats: StudentStats | null): string {
  if (!stats) return "<p>loading…</p>";
  const weeks = Object.entries(stats.per_week)
    .sort()
    .map(([week, count]) => `<tr><td>${escapeHtml(week)}</td><td>${count}</td></tr>`);
  return `<dl class="stats">
    <dt>answered correctly</dt><dd>${fmtPercent(stats.percent_correct?.value ?? null)}</dd>
    <dt>answered incorrectly</dt><dd>${fmtPercent(stats.percent_incorrect?.value ?? null)}</dd>
    <dt>total answered</dt><dd>${stats.n_attempts}</dd>
  </dl>
  <h4>RATs answered per week</h4>
  <table><thead><tr><th>week</th><th>answered</th></tr></thead>
  <tbody>${weeks.join("") || "<tr><td colspan=2>none yet</td></tr>"}</tbody></table>`;
}

export function feedbackPanel(result: GradedResult, ratId: string): string {
  const verdictClass = result.evaluative;
  const blocks = result.informative.map(
    (block) => `<div class="feedback-block ${block.kind}">${renderRichText(block.text)}</div>`,
  );
  return `<h2>Result</h2>
  <p class="verdict ${verdictClass}">${escapeHtml(result.evaluative)}</p>
  ${blocks.join("") || "<p class='empty'>no further feedback for this answer</p>"}
  <div class="reactions">
    <form data-form="suggest-scaffold" data-rat="${ratId}" class="inline">
      <select name="kind">
        <option value="text">text</option>
        <option value="video_link">video link</option>
        <option value="external_link">external link</option>
        <option value="book_reference">book reference</option>
      </select>
      <input name="body" placeholder="suggest a scaffold that helped you">
      <button>suggest</button>
    </form>
    <form data-form="comment" data-rat="${ratId}" class="inline">
      <input name="body" placeholder="leave a comment">
      <button>comment</button>
    </form>
    <form data-form="report-error" data-rat="${ratId}" class="inline">
      <input name="body" placeholder="point out a possible error">
      <button>report</button>
    </form>
  </div>
  <p>
    <button data-action="back-to-question">back to the question</button>
    <button data-action="next" class="primary">next</button>
  </p>`;
}

export function doneScreen(competence: CompetenceView | null, mode: string): string {
  if (!competence) {
    return `<h2>Finished</h2><p>All RATs answered.</p>
    <p><button data-action="back-to-lectures">back to lectures</button></p>`;
  }
  const levels = Object.entries(competence.levels)
    .map(
      ([name, level]) =>
        `<tr><td>${escapeHtml(COMPETENCE_LABELS[name] ?? name)}</td><td>${fmtLevel(level)}</td></tr>`,
    )
    .join("");
  return `<h2>Sheet finished — your updated competence levels</h2>
  <table class="levels"><tbody>${levels}</tbody></table>
  ${progressionChart(competence.progression)}
  <p class="hint">levels are the share of criterion points earned on correctly solved RATs (${escapeHtml(mode)} run)</p>
  <p><button data-action="back-to-lectures">back to lectures</button></p>`;
}
