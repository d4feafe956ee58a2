// JSON payload types for the structforge session API. The console is a pure
// client: every field here is produced by the server and rendered as-is.

export interface RelationEntry {
  name: string;
  arity: number;
}

export interface StructureJson {
  signature: RelationEntry[];
  size: number;
  relations: Record<string, number[][]>;
}

export interface GraphShorthand {
  graph: { vertices: number; edges?: number[][] };
}

/** A move as posted to the server: a whole structure or a delta on top. */
export type MovePayload =
  | { move: StructureJson | GraphShorthand }
  | { added_elements: number; added_tuples: Record<string, number[][]> };

export interface MoveEntry {
  index: number;
  player: "eve" | "odd";
  size: number;
  full?: StructureJson;
  added_elements?: number;
  added_tuples?: Record<string, number[][]>;
  notes?: Record<string, unknown>;
}

export interface SessionView {
  schema: string;
  id: string;
  class: Record<string, unknown>;
  oracle: string;
  human_role: "eve" | "odd";
  rounds: number;
  seed: number;
  status: "active" | "finished" | "stuck";
  turn: number;
  player_to_move: "eve" | "odd" | null;
  your_turn: boolean;
  moves: MoveEntry[];
  top: StructureJson | null;
  stuck: Record<string, unknown> | null;
}

export interface NewSessionRequest {
  class: string | Record<string, unknown>;
  oracle?: string;
  human_role: "eve" | "odd";
  rounds: number;
  seed?: number;
}

export interface HintCommentary {
  engine: string;
  odd_turns: number;
  generators_covered: number[];
  blocks: Record<string, unknown>[];
}

export interface HintsPayload {
  schema: string;
  id: string;
  growth_bound: number;
  truncated: boolean;
  candidate_moves: StructureJson[];
  commentary: HintCommentary;
}

export interface AdjudicationPayload {
  outcome: string;
  details: Record<string, unknown>;
}

export interface CatalogClass {
  name: string;
  [key: string]: unknown;
}

export interface OracleCatalog {
  oracles: { name: string }[];
  run_backed: string;
}

export interface RefusalDetail {
  reason: string;
  message: string;
}

// Limit-run files as written by `structforge limit -o`.

export interface StageDelta {
  added_elements: number;
  added_tuples: Record<string, number[][]>;
}

export interface LedgerEntry {
  index: number;
  kind: "embed" | "realize" | "weak-extend";
  status: "pending" | "met" | "unrealized" | "inapplicable" | "stuck";
  /** Stage of the first attempt; null when the run ended before one. */
  first_stage: number | null;
  /** Stage the requirement was resolved at; null while pending. */
  stage: number | null;
  [key: string]: unknown;
}

export interface LimitRunFile {
  schema: string;
  class: Record<string, unknown>;
  seed: number;
  bounds: Record<string, unknown>;
  stages: [StructureJson, ...StageDelta[]];
  ledger: LedgerEntry[];
}
