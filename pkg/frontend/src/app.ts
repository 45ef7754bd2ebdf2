// Application shell: the only module that touches the DOM or the network
// directly.  It routes, feeds events into the pure flow reducer, calls the
// API client, and re-renders the view functions' markup.

import { ApiClient, ApiError } from "./api.js";
import { LiveChannel, applyMessage, connectionChanged, initialConsole } from "./live.js";
import type { ConsoleState } from "./live.js";
import * as flow from "./state.js";
import type { AnswerValue, CatalogEntry, CompetenceView, RatView } from "./types.js";
import { dashboardTables, ratEditor, reviewQueue } from "./views/authoring.js";
import { liveConsole } from "./views/console.js";
import { loginScreen, pageShell } from "./views/shell.js";
import type { Identity } from "./views/shell.js";
import {
  doneScreen,
  feedbackPanel,
  lecturePicker,
  questionScreen,
  runChooser,
} from "./views/student.js";

interface AppState {
  identity: Identity | null;
  flash: string;
  flow: flow.Flow;
  joined: string[];
  console: ConsoleState;
  consoleSession: string | null;
  catalog: CatalogEntry[];
  ratLabels: Record<string, string>;
  completion: CompetenceView | null;
}

const api = new ApiClient("");
const state: AppState = {
  identity: null,
  flash: "",
  flow: flow.initialFlow,
  joined: [],
  console: initialConsole,
  consoleSession: null,
  catalog: [],
  ratLabels: {},
  completion: null,
};
let channel: LiveChannel | null = null;

const root = document.getElementById("app") as HTMLElement;

function flash(message: string): void {
  state.flash = message;
  render();
}

async function render(): Promise<void> {
  if (!state.identity) {
    root.innerHTML = pageShell(null, loginScreen(), state.flash);
    return;
  }
  const route = location.hash || "#/student";
  let content = "";
  if (route.startsWith("#/console/") && state.consoleSession) {
    content = liveConsole(state.consoleSession, state.console, state.ratLabels);
  } else if (route.startsWith("#/authoring")) {
    content = ratEditor(state.catalog, { question: "" });
  } else if (route.startsWith("#/review")) {
    const rats = await api.searchRats({});
    content = reviewQueue(rats, state.identity.pseudonym);
  } else if (route.startsWith("#/dashboard")) {
    content = await dashboardContent();
  } else {
    content = await studentContent();
  }
  root.innerHTML = pageShell(state.identity, content, state.flash);
}

async function studentContent(): Promise<string> {
  const current = state.flow;
  if (current.screen === "lectures") {
    const lectures = await api.lectures();
    return lecturePicker(lectures, state.joined);
  }
  if (current.screen === "chooser") {
    const sheets = await api.sheets(current.lectureId);
    return runChooser(current.lectureId, sheets);
  }
  if (current.screen === "question") {
    const rat = flow.currentRat(current);
    const scaffolds = current.run.tab === "scaffolds" && rat ? await api.scaffolds(rat.id) : null;
    const stats =
      current.run.tab === "stats"
        ? await api.myStats(current.run.lectureId ?? undefined)
        : null;
    return questionScreen(current, scaffolds, stats);
  }
  if (current.screen === "feedback") {
    return feedbackPanel(current.result, current.ratId);
  }
  return doneScreen(state.completion, current.mode);
}

async function dashboardContent(): Promise<string> {
  const lectures = await api.lectures();
  const owned = lectures.filter((lecture) => lecture.join_code !== undefined);
  if (owned.length === 0) return "<p>you own no lectures</p>";
  const first = owned[0]!;
  const dashboard = await api.dashboard(first.id);
  return dashboardTables(dashboard, state.ratLabels);
}

function rememberLabels(rats: RatView[]): void {
  for (const rat of rats) {
    state.ratLabels[rat.id] = rat.question.slice(0, 60);
  }
}

async function refreshIdentity(): Promise<void> {
  const me = await api.me();
  state.identity = { email: me.email, role: me.role, pseudonym: me.pseudonym };
  state.joined = me.lectures;
  try {
    state.catalog = (await api.catalog()).entries;
  } catch {
    state.catalog = [];
  }
}

function readAnswer(form: HTMLFormElement, rat: RatView): AnswerValue {
  if (rat.kind === "multiple_choice") {
    const choice = form.querySelector<HTMLInputElement>("input[name=choice]:checked");
    return choice?.value ?? "";
  }
  if (rat.kind === "multi_true_false") {
    const response: Record<string, boolean> = {};
    for (const option of rat.options) {
      const picked = form.querySelector<HTMLInputElement>(
        `input[name="tf-${option.id}"]:checked`,
      );
      response[option.id] = picked?.value === "true";
    }
    return response;
  }
  return form.querySelector<HTMLInputElement>("input[name=free-text]")?.value ?? "";
}

async function submitAnswer(form: HTMLFormElement): Promise<void> {
  const current = state.flow;
  if (current.screen !== "question") return;
  const rat = flow.currentRat(current);
  const ratId = form.dataset.rat ?? "";
  if (!rat || !flow.canSubmit(current, ratId)) {
    flash("already answered — submitting again is disabled");
    return;
  }
  const response = readAnswer(form, rat);
  const run = current.run;
  try {
    const result =
      run.mode === "sheet" && run.sessionId
        ? await api.submitAnswer(run.sessionId, ratId, response)
        : run.mode === "live" && run.liveSessionId
          ? await api.liveAnswer(run.liveSessionId, ratId, response)
          : run.mode === "cross"
            ? await api.answerCrossLecture(ratId, response)
            : await api.answerLectureRat(run.lectureId ?? "", ratId, response);
    state.flow = flow.answered(current, ratId, result);
    if (state.flow.screen === "feedback" && state.flow.run.index + 1 >= state.flow.run.queue.length) {
      state.completion = await api.myCompetence(run.lectureId ?? undefined);
    }
    state.flash = "";
  } catch (error) {
    if (error instanceof ApiError && error.status === 409) {
      flash(`already answered (${error.code}) — nothing was changed`);
      return;
    }
    throw error;
  }
  await render();
}

async function handleAction(target: HTMLElement): Promise<void> {
  const action = target.dataset.action;
  if (!action) return;
  if (action === "logout") {
    api.token = null;
    state.identity = null;
  } else if (action === "pick-lecture") {
    state.flow = flow.pickLecture(target.dataset.lecture ?? "");
  } else if (action === "back-to-lectures") {
    state.flow = flow.initialFlow;
    state.completion = null;
  } else if (action === "tab") {
    state.flow = flow.switchTab(state.flow, target.dataset.tab as flow.Tab);
  } else if (action === "back-to-question") {
    state.flow = flow.backToQuestion(state.flow);
  } else if (action === "next") {
    state.flow = flow.next(state.flow);
  } else if (action === "start-sheet") {
    const session = await api.beginSession(target.dataset.sheet ?? "");
    const queue: RatView[] = [];
    for (const ratId of session.rat_ids) {
      queue.push(await api.rat(ratId));
    }
    rememberLabels(queue);
    const lectureId = state.flow.screen === "chooser" ? state.flow.lectureId : null;
    state.flow = flow.startRun({ lectureId, mode: "sheet", queue, sessionId: session.id });
  } else if (action === "start-auto") {
    const lectureId = target.dataset.lecture ?? "";
    const topic = (document.getElementById("topic-filter") as HTMLInputElement | null)?.value;
    const pool = await api.lectureRats(lectureId, topic || undefined);
    const queue = pool.filter((rat) => !rat.answered);
    rememberLabels(queue);
    state.flow = flow.startRun({ lectureId, mode: "auto", queue });
  } else if (action === "cross-lecture") {
    const next = await api.crossLectureNext();
    state.flow = flow.startRun({
      lectureId: null,
      mode: "cross",
      queue: next.rat ? [next.rat] : [],
    });
  } else if (action === "rate") {
    await api.rateScaffold(target.dataset.scaffold ?? "", Number(target.dataset.stars));
    flash("rating saved");
  } else if (action === "approve") {
    const out = await api.approveRat(target.dataset.rat ?? "");
    flash(`state now: ${out.state}`);
  } else if (action === "close-live") {
    const stats = await api.closeLive(target.dataset.session ?? "");
    state.console = applyMessage(state.console, stats);
  }
  await render();
}

async function handleForm(form: HTMLFormElement): Promise<void> {
  const kind = form.dataset.form;
  const data = new FormData(form);
  const text = (name: string) => String(data.get(name) ?? "");
  if (kind === "login") {
    await api.login(text("email"), text("password"));
    await refreshIdentity();
  } else if (kind === "signup") {
    await api.signup(text("email"), text("password"), text("role"), data.has("accept_terms"));
    flash("account created — check your inbox for the verification token");
    return;
  } else if (kind === "verify") {
    await api.verify(text("token"));
    flash("verified — you can log in now");
    return;
  } else if (kind === "join") {
    await api.joinLecture(form.dataset.lecture ?? "", text("code"));
    await refreshIdentity();
  } else if (kind === "answer") {
    await submitAnswer(form);
    return;
  } else if (kind === "suggest-scaffold") {
    await api.suggestScaffold(form.dataset.rat ?? "", text("kind"), text("body"));
    flash("scaffold suggested — it becomes visible after review");
    return;
  } else if (kind === "comment") {
    await api.commentOnRat(form.dataset.rat ?? "", text("body"));
    flash("comment sent");
    return;
  } else if (kind === "report-error") {
    await api.reportError(form.dataset.rat ?? "", text("body"));
    flash("report sent to the author");
    return;
  } else if (kind === "review-comment") {
    await api.commentOnRat(form.dataset.rat ?? "", text("body"));
    flash("comment sent to the creator");
    return;
  } else if (kind === "create-rat") {
    await createRatFromForm(form);
    return;
  }
  await render();
}

async function createRatFromForm(form: HTMLFormElement): Promise<void> {
  const data = new FormData(form);
  const list = (name: string) =>
    String(data.get(name) ?? "")
      .split(",")
      .map((part) => part.trim())
      .filter(Boolean);
  const options = [0, 1]
    .map((index) => ({
      id: `o${index}`,
      text: String(data.get(`option-text-${index}`) ?? ""),
      is_correct: data.get("correct") === String(index),
      feedback: String(data.get(`option-feedback-${index}`) ?? ""),
    }))
    .filter((option) => option.text.trim().length > 0);
  try {
    await api.createRat({
      question: String(data.get("question") ?? ""),
      kind: String(data.get("kind") ?? "multiple_choice"),
      options,
      topics: list("topics"),
      concepts: list("concepts"),
      lectures: list("lectures"),
      criteria: data.getAll("criteria").map(Number),
      is_cross_lecture: data.has("is_cross_lecture"),
      general_feedback: String(data.get("general_feedback") ?? ""),
    });
    flash("draft saved — it needs reviewer approvals before students see it");
  } catch (error) {
    if (error instanceof ApiError && error.violations.length > 0) {
      root.querySelector("main")!.innerHTML = ratEditor(
        state.catalog,
        { question: String(data.get("question") ?? "") },
        error.violations,
      );
      return;
    }
    throw error;
  }
}

function openConsole(sessionId: string): void {
  state.consoleSession = sessionId;
  state.console = initialConsole;
  channel?.stop();
  channel = new LiveChannel(
    api.liveChannelUrl(sessionId),
    (url) => new WebSocket(url) as unknown as import("./live.js").SocketLike,
    (message) => {
      state.console = applyMessage(state.console, message);
      void render();
    },
    (connection) => {
      state.console = connectionChanged(state.console, connection);
      void render();
    },
  );
  channel.connect();
  location.hash = `#/console/${sessionId}`;
}

document.addEventListener("click", (event) => {
  const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
  if (!target) return;
  event.preventDefault();
  if (target.dataset.action === "join-live") {
    // lecturers open the console; students join the live run
    void (async () => {
      const sheetId = target.dataset.sheet ?? "";
      if (state.identity && state.identity.role !== "student") {
        const live = await api.openLive(sheetId);
        openConsole(live.session);
        await render();
      } else {
        flash("ask your lecturer for the live session link");
      }
    })().catch(showError);
    return;
  }
  handleAction(target).catch(showError);
});

document.addEventListener("submit", (event) => {
  const form = event.target as HTMLFormElement;
  if (!form.dataset.form) return;
  event.preventDefault();
  handleForm(form).catch(showError);
});

window.addEventListener("hashchange", () => {
  render().catch(showError);
});

function showError(error: unknown): void {
  if (error instanceof ApiError) {
    flash(`${error.code}: ${error.detail}`);
  } else {
    flash(String(error));
  }
}

document.addEventListener("input", (event) => {
  const target = event.target as HTMLElement;
  if (target.id === "question-input") {
    const preview = document.getElementById("question-preview");
    if (preview) {
      void import("./markdown.js").then(({ renderRichText }) => {
        preview.innerHTML = renderRichText((target as HTMLTextAreaElement).value);
      });
    }
  }
});

render().catch(showError);
