// Scripted end-to-end walkthrough against a running, seeded server:
// the full student flow (pick lecture, join by code, work an auto sheet,
// read feedback, fetch the competence chart data) and a lecturer live
// session whose console bars sum to the number of scripted answers.
//
// Gated: set RATS_WALKTHROUGH_URL (e.g. http://127.0.0.1:8733 after
// `rats migrate && rats seed --fixtures fixtures/demo && rats serve`).
// Uses the documented HTTP fallback for live answers because this runtime
// has no browser WebSocket; the channel logic is covered in live.test.ts.

import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { displayedBarTotal, tallyBars } from "../src/charts.js";
import { applyMessage, initialConsole } from "../src/live.js";
import { answered, canSubmit, currentRat, next, startRun } from "../src/state.js";
import type { Flow } from "../src/state.js";
import type { GradedResult, RatView } from "../src/types.js";

const BASE = process.env["RATS_WALKTHROUGH_URL"];

describe.skipIf(!BASE)("walkthrough against a seeded server", () => {
  const unique = Date.now().toString(36);

  it("runs the full student flow and a lecturer live session", async () => {
    const prof = new ApiClient(BASE!);
    await prof.login("prof.keller@example.edu", "lecture-hall-9");
    const creator = new ApiClient(BASE!);
    await creator.login("ta.jonas@example.edu", "tutor-password");
    const reviewer = new ApiClient(BASE!);
    await reviewer.login("ta.mira@example.edu", "tutor-password2");
    const student = new ApiClient(BASE!);
    await student.login("student.lena@example.edu", "lerne-gerne-1");

    // authoring + two-expert review
    const rat = await creator.createRat({
      question: `Walkthrough ${unique}: velocity is the derivative of…?`,
      kind: "multiple_choice",
      options: [
        { id: "a", text: "position", is_correct: true, feedback: "right" },
        { id: "b", text: "acceleration", is_correct: false, feedback: "other way around" },
      ],
      topics: ["t-kinematics"],
      concepts: ["c-velocity"],
      lectures: ["lec-mech"],
      criteria: [8],
      general_feedback: "see the definition of velocity",
    });
    await reviewer.approveRat(rat.id);
    const published = await prof.approveRat(rat.id);
    expect(published.state).toBe("published");

    // student picks the lecture and joins by code
    const lectures = await student.lectures();
    const mech = lectures.find((lecture) => lecture.id === "lec-mech");
    expect(mech).toBeDefined();
    await student.joinLecture("lec-mech", "mech-2023");

    // lecturer commits an auto-generated sheet for the first appointment
    const auto = await prof.createAutoSheet("lec-mech", "2023-10-16", `walkthrough-${unique}`);
    const committed = auto.sheet!;
    expect(committed.rat_ids).toContain(rat.id);

    // student session drives the Fig.-2 flow through the reducer
    const session = await student.beginSession(committed.id);
    const queue: RatView[] = [];
    for (const ratId of session.rat_ids) {
      queue.push(await student.rat(ratId));
    }
    let flow: Flow = startRun({
      lectureId: "lec-mech",
      mode: "sheet",
      queue,
      sessionId: session.id,
    });
    let lastResult: GradedResult | null = null;
    while (flow.screen === "question") {
      const current = currentRat(flow)!;
      expect(canSubmit(flow, current.id)).toBe(true);
      const choice =
        current.id === rat.id ? "b" : (current.options[0]?.id ?? ""); // our item: wrong on purpose
      lastResult = await student.submitAnswer(session.id, current.id, choice);
      flow = answered(flow, current.id, lastResult);
      if (current.id === rat.id) {
        expect(lastResult.evaluative).toBe("incorrect");
        const texts = lastResult.informative.map((block) => block.text);
        expect(texts).toContain("other way around"); // chosen option's feedback
      }
      flow = next(flow);
    }
    expect(flow.screen).toBe("done");
    expect(lastResult?.updated_levels).not.toBeNull();

    // competence chart data comes straight from the API
    const competence = await student.myCompetence("lec-mech");
    const points = competence.progression["mathematical_literacy"] ?? [];
    expect(points.length).toBeGreaterThan(0);
    for (const point of points) {
      if (point.level) expect(point.level.exact).toMatch(/^\d+\/\d+$/);
    }

    // lecturer live session: scripted answers, console bars sum to them
    const manual = await prof.createManualSheet(
      "lec-mech",
      `walkthrough-live-${unique}`,
      [rat.id],
      "2023-10-16",
    );
    const live = await prof.openLive(manual.id);
    const liveResult = await student.liveAnswer(live.session, rat.id, "a");
    expect(liveResult.evaluative).toBe("correct");

    // duplicate answer: 409, no tally change (the "already answered" notice)
    const duplicate = await student.liveAnswer(live.session, rat.id, "b").catch((e) => e);
    expect(duplicate).toBeInstanceOf(ApiError);
    expect((duplicate as ApiError).status).toBe(409);

    let consoleState = applyMessage(initialConsole, await prof.liveStats(live.session));
    const bars = tallyBars(consoleState.latest!.per_rat);
    expect(displayedBarTotal(bars)).toBe(1); // exactly the scripted answers
    expect(consoleState.latest!.per_rat[0]?.tally).toEqual({ a: 1 });

    const closed = await prof.closeLive(live.session);
    consoleState = applyMessage(consoleState, closed);
    expect(consoleState.frozen).toBe(true);
    expect(consoleState.latest!.sheet.n_answers).toBe(1);
  }, 30_000);
});
