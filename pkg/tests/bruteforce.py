"""Independent reference implementations used to oracle the real code.

Everything here is deliberately naive: permutation scans, direct formula
evaluation, no shared code with the package beyond the data types.
"""

from __future__ import annotations

import itertools

from structforge import FinStructure


def brute_embeddings(source: FinStructure, target: FinStructure) -> set:
    """All induced embeddings source -> target by scanning injections."""
    out = set()
    rels = [(name, tuples) for name, tuples in source.relations.items()]
    names = {r.name for r in source.signature}
    for image in itertools.permutations(range(target.size), source.size):
        ok = True
        for name in names:
            src = source.relations.get(name, frozenset())
            tgt = target.relations.get(name, frozenset())
            arity = next(r.arity for r in source.signature if r.name == name)
            for tup in itertools.product(range(source.size), repeat=arity):
                if (tup in src) != (tuple(image[i] for i in tup) in tgt):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.add(image)
    return out


def all_labeled_graphs(size: int, signature) -> list[FinStructure]:
    """Every labeled graph on ``size`` vertices (symmetric irreflexive E)."""
    pairs = list(itertools.combinations(range(size), 2))
    out = []
    for bits in range(1 << len(pairs)):
        edges = set()
        for k, (u, v) in enumerate(pairs):
            if bits >> k & 1:
                edges.add((u, v))
                edges.add((v, u))
        out.append(FinStructure(signature, size, {"E": frozenset(edges)}))
    return out


def line_adjacent(i: int, j: int) -> bool:
    """Two-way infinite path via the alternating enumeration 0,1,-1,2,-2..."""
    def pos(k):
        return (k + 1) // 2 if k % 2 else -(k // 2)
    return abs(pos(i) - pos(j)) == 1


def ray_adjacent(i: int, j: int) -> bool:
    return abs(i - j) == 1


def rado_adjacent(i: int, j: int) -> bool:
    lo, hi = min(i, j), max(i, j)
    return i != j and bool(hi >> lo & 1)


def is_disjoint_union_of_paths(s: FinStructure) -> bool:
    """Degrees at most two and no cycles."""
    edges = {(u, v) for u, v in s.relations.get("E", frozenset())}
    if any((v, u) not in edges for u, v in edges):
        return False
    if any(u == v for u, v in edges):
        return False
    deg = [0] * s.size
    for u, v in edges:
        if u < v:
            deg[u] += 1
            deg[v] += 1
    if any(d > 2 for d in deg):
        return False
    seen = [False] * s.size
    for start in range(s.size):
        if seen[start]:
            continue
        component, frontier = {start}, [start]
        seen[start] = True
        count = 0
        while frontier:
            u = frontier.pop()
            for v in range(s.size):
                if (u, v) in edges:
                    count += 1
                    if v not in component:
                        component.add(v)
                        seen[v] = True
                        frontier.append(v)
        if count // 2 >= len(component):
            return False
    return True


def is_forest(s: FinStructure) -> bool:
    edges = {(u, v) for u, v in s.relations.get("E", frozenset())}
    if any((v, u) not in edges for u, v in edges) or any(u == v
                                                         for u, v in edges):
        return False
    parent = list(range(s.size))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        if u < v:
            ru, rv = find(u), find(v)
            if ru == rv:
                return False
            parent[ru] = rv
    return True
