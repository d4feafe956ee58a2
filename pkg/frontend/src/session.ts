/**
 * Session console view-model.
 *
 * Holds exactly what the server said: the session view, the hint palette,
 * the latest refusal, and the adjudication panel. Zero game logic lives
 * here; legality, engine replies, and verdicts all come from responses.
 */

import { ApiError, ForgeClient } from "./api.js";
import { boardAt, diagram, type Diagram } from "./board.js";
import type {
  AdjudicationPayload,
  HintCommentary,
  MovePayload,
  NewSessionRequest,
  RefusalDetail,
  SessionView,
  StructureJson,
} from "./types.js";

export interface Refusal extends RefusalDetail {
  status: number;
}

export class SessionConsole {
  readonly client: ForgeClient;
  view: SessionView;
  palette: StructureJson[] = [];
  commentary: HintCommentary | null = null;
  refusal: Refusal | null = null;
  adjudication: AdjudicationPayload | null = null;

  private constructor(client: ForgeClient, view: SessionView) {
    this.client = client;
    this.view = view;
  }

  static async start(client: ForgeClient, req: NewSessionRequest): Promise<SessionConsole> {
    const view = await client.createSession(req);
    const console_ = new SessionConsole(client, view);
    await console_.refresh(view);
    return console_;
  }

  /** Post a move; on refusal keep the board and surface the reason inline. */
  async submitMove(payload: MovePayload): Promise<boolean> {
    try {
      const view = await this.client.postMove(this.view.id, payload);
      this.refusal = null;
      await this.refresh(view);
      return true;
    } catch (err) {
      if (err instanceof ApiError && (err.status === 409 || err.status === 422)) {
        this.refusal = { status: err.status, reason: err.reason, message: err.message };
        return false;
      }
      throw err;
    }
  }

  private async refresh(view: SessionView): Promise<void> {
    this.view = view;
    if (view.status === "active" && view.your_turn) {
      const hints = await this.client.getHints(view.id);
      this.palette = hints.candidate_moves;
      this.commentary = hints.commentary;
    } else {
      this.palette = [];
    }
    if (view.status !== "active" && this.adjudication === null) {
      this.adjudication = await this.client.getAdjudication(this.view.id);
    }
  }

  /** History scrubber: the diagram as of move `index`. */
  boardAt(index: number): Diagram {
    return diagram(boardAt(this.view.moves, index));
  }

  currentBoard(): Diagram | null {
    if (this.view.moves.length === 0) return null;
    return this.boardAt(this.view.moves.length - 1);
  }

  /** Engine bookkeeping overlay for a move (embedding, coverage, blocks). */
  moveNotes(index: number): Record<string, unknown> {
    return this.view.moves[index]?.notes ?? {};
  }

  /**
   * Tooltip for an engine opening, e.g. the spoiler explaining why it chose
   * an obstructed base. Pure passthrough of the recorded note.
   */
  whyOpening(): string | null {
    const notes = this.view.moves[0]?.notes;
    if (!notes || typeof notes["opening"] !== "string") return null;
    const strategy = typeof notes["strategy"] === "string" ? notes["strategy"] : "engine";
    return `${strategy}: ${notes["opening"]}`;
  }

  /** Move list in transcript form, for saving or comparison. */
  transcriptMoves(): Record<string, unknown>[] {
    return this.view.moves.map((m) => {
      const entry: Record<string, unknown> = {
        index: m.index,
        player: m.player,
        size: m.size,
      };
      if (m.full !== undefined) {
        entry.full = m.full;
      } else {
        entry.added_elements = m.added_elements ?? 0;
        entry.added_tuples = m.added_tuples ?? {};
      }
      return entry;
    });
  }
}
