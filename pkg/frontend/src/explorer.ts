/**
 * Read-only viewer for saved limit runs: a stage slider with per-stage
 * requirement badges. Works on the run file alone, no server involved.
 */

import { applyDelta } from "./board.js";
import type { LedgerEntry, LimitRunFile, StructureJson } from "./types.js";

export const RUN_SCHEMA = "structforge/limit/1";

export interface StageBadge {
  index: number;
  kind: LedgerEntry["kind"];
  label: string;
  /** Status as of the selected stage; final statuses only at the last stage. */
  status: LedgerEntry["status"];
  metAt: number | null;
}

function entryLabel(e: LedgerEntry): string {
  if (e.kind === "embed") {
    const t = e["target"] as StructureJson | undefined;
    return `embed member (${t?.size ?? "?"} elements)`;
  }
  if (e.kind === "realize") {
    const ext = e["extension"] as StructureJson | undefined;
    return `realize good extension (base ${e["a_size"]} into ${ext?.size ?? "?"})`;
  }
  return `extend partial map (base size ${e["a_size"]})`;
}

export class RunExplorer {
  readonly run: LimitRunFile;
  readonly stageSizes: number[];

  private constructor(run: LimitRunFile) {
    this.run = run;
    const sizes: number[] = [];
    let board = run.stages[0];
    sizes.push(board.size);
    for (const delta of run.stages.slice(1)) {
      board = applyDelta(
        board as StructureJson,
        (delta as { added_elements: number }).added_elements,
        (delta as { added_tuples: Record<string, number[][]> }).added_tuples,
      );
      sizes.push(board.size);
    }
    this.stageSizes = sizes;
  }

  static fromJson(payload: unknown): RunExplorer {
    if (typeof payload !== "object" || payload === null) {
      throw new Error("not a limit run file: expected a JSON object");
    }
    const run = payload as LimitRunFile;
    if (run.schema !== RUN_SCHEMA) {
      throw new Error(`not a limit run file: schema ${JSON.stringify(run.schema)}`);
    }
    if (!Array.isArray(run.stages) || run.stages.length === 0 || !Array.isArray(run.ledger)) {
      throw new Error("not a limit run file: missing stages or ledger");
    }
    return new RunExplorer(run);
  }

  get stageCount(): number {
    return this.stageSizes.length;
  }

  get lastStage(): number {
    return this.stageSizes.length - 1;
  }

  /**
   * Badges for the selected stage: requirements attempted by then, plus the
   * whole remaining ledger once the slider reaches the end of the run.
   */
  badges(stage: number): StageBadge[] {
    const atEnd = stage >= this.lastStage;
    return this.run.ledger
      .filter((e) => atEnd || (e.first_stage !== null && e.first_stage <= stage))
      .map((e) => ({
        index: e.index,
        kind: e.kind,
        label: entryLabel(e),
        status:
          e.status === "met" && e.stage !== null && e.stage <= stage
            ? "met"
            : atEnd
              ? e.status
              : "pending",
        metAt: e.stage,
      }));
  }

  /** Entries the run never resolved; empty exactly when the ledger is clean. */
  unresolved(): LedgerEntry[] {
    return this.run.ledger.filter(
      (e) => e.status !== "met" && e.status !== "inapplicable",
    );
  }

  /** Banner text once every member-embedding requirement is met. */
  embedBanner(stage: number): string | null {
    const embeds = this.badges(stage).filter((b) => b.kind === "embed");
    if (embeds.length === 0 || embeds.some((b) => b.status !== "met")) return null;
    const bound = this.run.bounds["req_bound"];
    return `all members up to ${bound} elements embedded`;
  }
}
