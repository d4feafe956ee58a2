import { describe, expect, it } from "vitest";
import { applyDelta, boardAt, diagram } from "../src/board.js";
import type { MoveEntry, StructureJson } from "../src/types.js";

const SIG = [{ name: "E", arity: 2 }];

function graph(size: number, pairs: [number, number][]): StructureJson {
  const E = pairs.flatMap(([u, v]) => [
    [u, v],
    [v, u],
  ]);
  return { signature: SIG, size, relations: { E } };
}

describe("diagram", () => {
  it("collapses symmetric pairs into undirected edges", () => {
    const d = diagram(graph(3, [[2, 0], [1, 2]]));
    expect(d.vertices).toEqual([0, 1, 2]);
    expect(d.edges).toEqual([
      [0, 2],
      [1, 2],
    ]);
    expect(d.tuples).toEqual({});
  });

  it("keeps one-directional tuples as-is", () => {
    const s: StructureJson = {
      signature: [{ name: "R", arity: 2 }],
      size: 2,
      relations: { R: [[1, 0]] },
    };
    const d = diagram(s);
    expect(d.edges).toEqual([]);
    expect(d.tuples).toEqual({ R: [[1, 0]] });
  });
});

describe("move-log replay", () => {
  const moves: MoveEntry[] = [
    { index: 0, player: "eve", size: 1, full: graph(1, []) },
    { index: 1, player: "odd", size: 2, added_elements: 1, added_tuples: { E: [[0, 1], [1, 0]] } },
    { index: 2, player: "eve", size: 3, added_elements: 1, added_tuples: { E: [[1, 2], [2, 1]] } },
  ];

  it("accumulates deltas into boards", () => {
    expect(boardAt(moves, 0).size).toBe(1);
    expect(boardAt(moves, 2)).toEqual(graph(3, [[0, 1], [1, 2]]));
  });

  it("refuses out-of-range indices and logs without an opening", () => {
    expect(() => boardAt(moves, 3)).toThrow(/no move at index/);
    expect(() => boardAt(moves.slice(1), 0)).toThrow(/full structure/);
  });

  it("applyDelta leaves the base untouched", () => {
    const base = graph(2, [[0, 1]]);
    const grown = applyDelta(base, 1, { E: [[1, 2], [2, 1]] });
    expect(base.size).toBe(2);
    expect(base.relations.E!.length).toBe(2);
    expect(grown.size).toBe(3);
    expect(grown.relations.E!.length).toBe(4);
  });
});
