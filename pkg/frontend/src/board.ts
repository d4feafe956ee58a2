// Turns structure JSON into a plain diagram model and replays the move log
// into boards. Rendering bookkeeping only: every element and tuple shown
// here was confirmed by the server, the client never judges legality.

import type { MoveEntry, StructureJson } from "./types.js";

export interface Diagram {
  vertices: number[];
  /** Undirected pairs (u < v) for binary relations listing both directions. */
  edges: [number, number][];
  /** Remaining tuples, keyed by relation name, sorted. */
  tuples: Record<string, number[][]>;
}

function sortTuples(ts: number[][]): number[][] {
  return [...ts].sort((a, b) => {
    for (let i = 0; i < Math.min(a.length, b.length); i++) {
      const d = (a[i] ?? 0) - (b[i] ?? 0);
      if (d !== 0) return d;
    }
    return a.length - b.length;
  });
}

export function diagram(s: StructureJson): Diagram {
  const vertices = Array.from({ length: s.size }, (_, i) => i);
  const edges: [number, number][] = [];
  const tuples: Record<string, number[][]> = {};
  for (const rel of s.signature) {
    const ts = s.relations[rel.name] ?? [];
    if (rel.arity !== 2) {
      tuples[rel.name] = sortTuples(ts);
      continue;
    }
    const have = new Set(ts.map((t) => `${t[0]},${t[1]}`));
    const undirected: [number, number][] = [];
    const leftover: number[][] = [];
    const seen = new Set<string>();
    for (const t of ts) {
      const [u, v] = [t[0] ?? 0, t[1] ?? 0];
      if (have.has(`${v},${u}`) && u !== v) {
        const key = u < v ? `${u},${v}` : `${v},${u}`;
        if (!seen.has(key)) {
          seen.add(key);
          undirected.push(u < v ? [u, v] : [v, u]);
        }
      } else {
        leftover.push(t);
      }
    }
    edges.push(...undirected.sort((a, b) => a[0] - b[0] || a[1] - b[1]));
    if (leftover.length) tuples[rel.name] = sortTuples(leftover);
  }
  return { vertices, edges, tuples };
}

export function applyDelta(
  base: StructureJson,
  addedElements: number,
  addedTuples: Record<string, number[][]>,
): StructureJson {
  const relations: Record<string, number[][]> = {};
  for (const rel of base.signature) {
    relations[rel.name] = [
      ...(base.relations[rel.name] ?? []),
      ...(addedTuples[rel.name] ?? []),
    ];
  }
  return {
    signature: base.signature,
    size: base.size + addedElements,
    relations,
  };
}

/** The board after the move at `index`, rebuilt from the server's move log. */
export function boardAt(moves: MoveEntry[], index: number): StructureJson {
  const first = moves[0];
  if (!first || !first.full) {
    throw new Error("move log does not start with a full structure");
  }
  if (index < 0 || index >= moves.length) {
    throw new Error(`no move at index ${index}`);
  }
  let board = first.full;
  for (const entry of moves.slice(1, index + 1)) {
    board = applyDelta(board, entry.added_elements ?? 0, entry.added_tuples ?? {});
  }
  return board;
}
