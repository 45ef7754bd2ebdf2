// Authoring and review screens: the RAT editor with a rendered preview, the
// review queue with approve/comment, and the lecturer dashboard's error
// category tables.  Thin forms over the API; approvals reflect returned state.

import { fmtPercent } from "../format.js";
import { escapeHtml, renderRichText } from "../markdown.js";
import type { CatalogEntry, DashboardView, RatView, Violation } from "../types.js";

export function ratEditor(
  catalog: CatalogEntry[],
  draft: { question: string },
  violations: Violation[] = [],
): string {
  const criteria = catalog.map(
    (entry) => `<label class="criterion">
      <input type="checkbox" name="criteria" value="${entry.id}">
      ${entry.id}. ${escapeHtml(entry.description)}
      <small>${entry.competencies.map(escapeHtml).join(", ")}</small>
    </label>`,
  );
  const errors = violations.map(
    (violation) =>
      `<p class="violation" data-code="${escapeHtml(violation.code)}">
        <strong>${escapeHtml(violation.code)}</strong> (${escapeHtml(violation.fields)}): ${escapeHtml(violation.message)}
      </p>`,
  );
  return `<h2>New RAT</h2>
  ${errors.join("")}
  <form data-form="create-rat">
    <label>question (markdown + $math$)
      <textarea name="question" id="question-input" rows="4">${escapeHtml(draft.question)}</textarea>
    </label>
    <div class="preview" id="question-preview">${renderRichText(draft.question)}</div>
    <label>kind
      <select name="kind">
        <option value="multiple_choice">multiple choice</option>
        <option value="multi_true_false">multiple true/false</option>
        <option value="open_ended">open-ended</option>
      </select>
    </label>
    <fieldset id="options-editor">
      <legend>answer options (feedback required for incorrect ones)</legend>
      <div class="option-row">
        <input name="option-text-0" placeholder="option text">
        <label><input type="radio" name="correct" value="0" checked> correct</label>
        <input name="option-feedback-0" placeholder="feedback for this option">
      </div>
      <div class="option-row">
        <input name="option-text-1" placeholder="option text">
        <label><input type="radio" name="correct" value="1"> correct</label>
        <input name="option-feedback-1" placeholder="feedback for this option">
      </div>
    </fieldset>
    <label>general feedback <input name="general_feedback"></label>
    <label>lectures <input name="lectures" placeholder="lecture ids, comma separated"></label>
    <label>topics <input name="topics" placeholder="topic ids, comma separated"></label>
    <label>concepts <input name="concepts" placeholder="concept ids, comma separated"></label>
    <label><input type="checkbox" name="is_cross_lecture"> cross-lecture questionnaire item</label>
    <fieldset><legend>competence criteria</legend>${criteria.join("")}</fieldset>
    <button>save draft</button>
  </form>`;
}

export function reviewQueue(rats: RatView[], myPseudonym: string): string {
  const pending = rats.filter((rat) => rat.state === "draft" || rat.state === "in_review");
  const rows = pending.map((rat) => {
    const mine = rat.author === myPseudonym;
    const badge = `<span class="state ${rat.state}">${escapeHtml(rat.state)}</span>`;
    const approvals = `${rat.approvals?.length ?? 0} approval(s)`;
    return `<li data-rat="${rat.id}">
      ${badge} ${renderRichText(rat.question)} <small>${approvals}</small>
      ${mine ? "<em>your item</em>" : `<button data-action="approve" data-rat="${rat.id}">approve</button>`}
      <form data-form="review-comment" data-rat="${rat.id}" class="inline">
        <input name="body" placeholder="comment to the creator">
        <button>comment</button>
      </form>
    </li>`;
  });
  return `<h2>Review queue</h2>
  <ul class="review-queue">${rows.join("") || "<li>nothing waiting for review</li>"}</ul>`;
}

export function dashboardTables(dashboard: DashboardView, ratLabels: Record<string, string>): string {
  const report = dashboard.error_report;
  const categoryList = (ids: string[]) =>
    ids.length
      ? `<ul>${ids.map((id) => `<li>${escapeHtml(ratLabels[id] ?? id)}</li>`).join("")}</ul>`
      : "<p class='empty'>none</p>";
  const deceptiveRows = report.deceptive.map(
    (entry) => `<tr>
      <td>${escapeHtml(ratLabels[entry.rat] ?? entry.rat)}</td>
      <td class="highlight">${escapeHtml(entry.option)}</td>
      <td>${fmtPercent(entry.share.value)}</td>
    </tr>`,
  );
  const perRat = Object.entries(report.per_rat).map(
    ([ratId, row]) => `<tr>
      <td>${escapeHtml(ratLabels[ratId] ?? ratId)}</td>
      <td>${row.n}</td>
      <td>${fmtPercent(row.correct_fraction.value)}</td>
      <td>${escapeHtml(report.most_frequent_option[ratId] ?? "–")}</td>
    </tr>`,
  );
  return `<h2>Lecture dashboard</h2>
  <p>${dashboard.n_members} enrolled, ${dashboard.n_attempts} answers recorded</p>
  <h3>Always answered incorrectly</h3>${categoryList(report.always_incorrect)}
  <h3>Often answered incorrectly (correct under 40%)</h3>${categoryList(report.often_incorrect)}
  <h3>Deceptive answers (same wrong option over 30%)</h3>
  <table><thead><tr><th>RAT</th><th>option</th><th>share of all answers</th></tr></thead>
  <tbody>${deceptiveRows.join("") || "<tr><td colspan=3>none</td></tr>"}</tbody></table>
  <h3>Per-RAT overview</h3>
  <table><thead><tr><th>RAT</th><th>answers</th><th>correct</th><th>most chosen option</th></tr></thead>
  <tbody>${perRat.join("") || "<tr><td colspan=4>no data yet</td></tr>"}</tbody></table>`;
}
