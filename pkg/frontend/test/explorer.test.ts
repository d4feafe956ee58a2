import { describe, expect, it } from "vitest";
import { RunExplorer } from "../src/explorer.js";
import graphsRun from "./fixtures/graphs-run.json";
import pendingRun from "./fixtures/pending-run.json";

describe("limit-run explorer", () => {
  it("walks stages with monotone board sizes", () => {
    const ex = RunExplorer.fromJson(graphsRun);
    expect(ex.stageCount).toBe(12);
    for (let i = 1; i < ex.stageSizes.length; i++) {
      expect(ex.stageSizes[i]!).toBeGreaterThanOrEqual(ex.stageSizes[i - 1]!);
    }
  });

  it("marks every badge met at the end of a completed run", () => {
    const ex = RunExplorer.fromJson(graphsRun);
    const badges = ex.badges(ex.lastStage);
    expect(badges.length).toBe(graphsRun.ledger.length);
    expect(badges.every((b) => b.status === "met")).toBe(true);
    expect(ex.unresolved()).toEqual([]);
    expect(ex.embedBanner(ex.lastStage)).toContain("embedded");
  });

  it("reveals requirements progressively along the slider", () => {
    const ex = RunExplorer.fromJson(graphsRun);
    const early = ex.badges(1);
    expect(early.length).toBeGreaterThan(0);
    expect(early.length).toBeLessThan(graphsRun.ledger.length);
    expect(early.every((b) => b.status === "met")).toBe(true);
    let previous = 0;
    for (let k = 0; k <= ex.lastStage; k++) {
      const count = ex.badges(k).length;
      expect(count).toBeGreaterThanOrEqual(previous);
      previous = count;
    }
  });

  it("keeps pending badges for a truncated run", () => {
    const ex = RunExplorer.fromJson(pendingRun);
    const final = ex.badges(ex.lastStage);
    expect(final.some((b) => b.status === "pending")).toBe(true);
    expect(ex.unresolved().length).toBeGreaterThan(0);
    expect(ex.embedBanner(ex.lastStage)).not.toBeNull();
  });

  it("labels badges by requirement kind", () => {
    const ex = RunExplorer.fromJson(graphsRun);
    const labels = new Set(ex.badges(ex.lastStage).map((b) => b.label.split(" ")[0]));
    expect(labels.has("embed")).toBe(true);
    expect(labels.has("realize")).toBe(true);
    expect(labels.has("extend")).toBe(true);
  });

  it("rejects files that are not limit runs", () => {
    expect(() => RunExplorer.fromJson({ schema: "structforge/check/1" })).toThrow(
      /not a limit run file/,
    );
    expect(() => RunExplorer.fromJson(42)).toThrow(/not a limit run file/);
    expect(() => RunExplorer.fromJson({ schema: "structforge/limit/1" })).toThrow(
      /missing stages or ledger/,
    );
  });
});
