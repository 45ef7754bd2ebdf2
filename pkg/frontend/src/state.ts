// Student-flow state machine: lecture picker -> run chooser -> question
// screen (answer form, scaffolds tab, stats tab) -> feedback panel -> next
// question -> competence charts when the run completes.
//
// The reducer is pure; the app shell feeds it events and renders the result.
// Back-navigation cannot resubmit: once a RAT id is in answeredIds the submit
// guard refuses it, so replays can only happen server-side (where they are
// rejected too).

import type { GradedResult, LevelsJson, RatView } from "./types.js";

export type RunMode = "sheet" | "auto" | "live" | "cross";

export type Tab = "answer" | "scaffolds" | "stats";

export interface RunContext {
  lectureId: string | null;
  mode: RunMode;
  sessionId: string | null; // sheet runs
  liveSessionId: string | null; // live runs
  queue: RatView[];
  index: number; // 0-based position in queue
  answeredIds: string[];
  tab: Tab;
}

export type Flow =
  | { screen: "lectures" }
  | { screen: "chooser"; lectureId: string }
  | { screen: "question"; run: RunContext }
  | { screen: "feedback"; run: RunContext; result: GradedResult; ratId: string }
  | { screen: "done"; lectureId: string | null; mode: RunMode; levels: LevelsJson | null };

export const initialFlow: Flow = { screen: "lectures" };

export function pickLecture(lectureId: string): Flow {
  return { screen: "chooser", lectureId };
}

export interface RunStart {
  lectureId: string | null;
  mode: RunMode;
  queue: RatView[];
  sessionId?: string;
  liveSessionId?: string;
}

export function startRun(start: RunStart): Flow {
  const run: RunContext = {
    lectureId: start.lectureId,
    mode: start.mode,
    sessionId: start.sessionId ?? null,
    liveSessionId: start.liveSessionId ?? null,
    queue: start.queue,
    index: 0,
    answeredIds: [],
    tab: "answer",
  };
  if (run.queue.length === 0) {
    return { screen: "done", lectureId: run.lectureId, mode: run.mode, levels: null };
  }
  return { screen: "question", run };
}

export function currentRat(flow: Flow): RatView | null {
  if (flow.screen === "question") return flow.run.queue[flow.run.index] ?? null;
  if (flow.screen === "feedback") return flow.run.queue[flow.run.index] ?? null;
  return null;
}

export function switchTab(flow: Flow, tab: Tab): Flow {
  if (flow.screen !== "question") return flow;
  return { screen: "question", run: { ...flow.run, tab } };
}

/** Submit guard: false when this RAT was already answered in this run. */
export function canSubmit(flow: Flow, ratId: string): boolean {
  if (flow.screen !== "question") return false;
  const rat = currentRat(flow);
  return rat !== null && rat.id === ratId && !flow.run.answeredIds.includes(ratId);
}

export function answered(flow: Flow, ratId: string, result: GradedResult): Flow {
  if (flow.screen !== "question") return flow;
  const run: RunContext = {
    ...flow.run,
    answeredIds: [...flow.run.answeredIds, ratId],
  };
  return { screen: "feedback", run, result, ratId };
}

/** Back from the feedback panel to the question (read-only; submit locked). */
export function backToQuestion(flow: Flow): Flow {
  if (flow.screen !== "feedback") return flow;
  return { screen: "question", run: { ...flow.run, tab: "answer" } };
}

export function next(flow: Flow): Flow {
  if (flow.screen !== "feedback") return flow;
  const { run, result } = flow;
  if (run.index + 1 < run.queue.length) {
    return {
      screen: "question",
      run: { ...run, index: run.index + 1, tab: "answer" },
    };
  }
  return {
    screen: "done",
    lectureId: run.lectureId,
    mode: run.mode,
    levels: result.updated_levels,
  };
}

export function progressLabel(flow: Flow): string {
  if (flow.screen === "question" || flow.screen === "feedback") {
    const run = flow.screen === "question" ? flow.run : flow.run;
    return `${run.index + 1} / ${run.queue.length}`;
  }
  return "";
}
