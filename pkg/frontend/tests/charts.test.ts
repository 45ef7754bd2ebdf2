import { describe, expect, it } from "vitest";

import { displayedBarTotal, progressionChart, tallyBars } from "../src/charts.js";
import { liveConsole } from "../src/views/console.js";
import { applyMessage, initialConsole } from "../src/live.js";
import type { PerRatStats, StatsMessage } from "../src/types.js";

describe("progression chart", () => {
  it("renders one marker per data point with the exact server value", () => {
    const svg = progressionChart({
      data_literacy: [
        { attempt_index: 1, level: { value: 1, exact: "1/1" } },
        { attempt_index: 2, level: { value: 0.5, exact: "1/2" } },
      ],
      mathematical_literacy: [
        { attempt_index: 1, level: null },
        { attempt_index: 2, level: null },
      ],
    });
    expect(svg).toContain("polyline");
    expect(svg).toContain("1/2"); // exact fraction surfaces in the tooltip
    expect((svg.match(/<circle/g) ?? []).length).toBe(2); // nulls are skipped
  });

  it("renders axes even without data", () => {
    const svg = progressionChart({ data_literacy: [] });
    expect(svg).toContain("<svg");
    expect(svg).toContain("attempts");
  });
});

describe("tally bars", () => {
  const perRat: PerRatStats[] = [
    { rat: "r1", tally: { a: 3, b: 1 }, correct_fraction: 0.75, n: 4 },
    { rat: "r2", tally: {}, correct_fraction: null, n: 0 },
  ];

  it("bar counts are exactly the server tally", () => {
    const html = tallyBars(perRat);
    expect(html).toContain('data-key="a" data-count="3"');
    expect(html).toContain('data-key="b" data-count="1"');
    expect(html).toContain("75%");
  });

  it("displayed bars sum to the number of answers", () => {
    const html = tallyBars(perRat);
    expect(displayedBarTotal(html)).toBe(4);
  });
});

describe("live console view", () => {
  function stats(n: number, open = true): StatsMessage {
    return {
      type: "stats",
      session: "sess",
      open,
      per_rat: [{ rat: "r1", tally: { a: n }, correct_fraction: 1, n }],
      sheet: { n_answers: n, correct_fraction: 1 },
    };
  }

  it("always shows exactly the latest server message", () => {
    let state = applyMessage(initialConsole, stats(2));
    state = applyMessage(state, stats(7));
    const html = liveConsole("sess", state);
    expect(displayedBarTotal(html)).toBe(7);
    expect(html).toContain("7 answers so far");
  });

  it("freezes controls after close", () => {
    const state = applyMessage(initialConsole, stats(3, false));
    const html = liveConsole("sess", state);
    expect(html).toContain("closed — data frozen");
    expect(html).toMatch(/close session/);
    expect(html).toContain("disabled");
  });
});
