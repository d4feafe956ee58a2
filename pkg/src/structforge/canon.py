"""Canonical forms via color refinement plus individualization.

Refinement is only a pruning device: the code is the least relabeled
serialization over all orderings explored, so two structures get the same
code exactly when they are isomorphic (respecting colors, if given).
Intended for the small structures this package traffics in; uncolored
highly symmetric inputs degenerate towards factorial branching.
"""

from __future__ import annotations

from typing import Sequence

from .structures import FinStructure, StructureError, relabel


def refine_colors(s: FinStructure, colors: Sequence[int]) -> list[int]:
    """Stable iterated refinement; new colors are dense ranks, so they are
    invariant under color-preserving isomorphisms."""
    cur = list(colors)
    ncls = len(set(cur))
    while True:
        keys = []
        for v in range(s.size):
            occ = []
            for sym in s.signature:
                pats = []
                for t in s.relations[sym.name]:
                    if v in t:
                        pats.append((tuple(i for i, x in enumerate(t) if x == v),
                                     tuple(cur[x] for x in t)))
                pats.sort()
                occ.append(tuple(pats))
            keys.append((cur[v], tuple(occ)))
        rank = {k: i for i, k in enumerate(sorted(set(keys)))}
        cur = [rank[k] for k in keys]
        n2 = len(set(cur))
        if n2 == ncls:
            return cur
        ncls = n2


def _encode(s: FinStructure, perm: Sequence[int], ordered_colors) -> bytes:
    r = relabel(s, perm)
    parts = [str(s.size)]
    for sym in s.signature:
        parts.append(repr(sorted(r.relations[sym.name])))
    if ordered_colors is not None:
        parts.append(repr(list(ordered_colors)))
    return "|".join(parts).encode()


def canonical_form(s: FinStructure, colors: Sequence[int] | None = None
                   ) -> tuple[bytes, tuple[int, ...]]:
    """Canonical code and a witnessing relabeling ``perm[old] = new``.

    With ``colors``, canonical under color-preserving isomorphism only; the
    original color sequence is folded into the code so differently colored
    structures never collide.
    """
    marks = colors
    if colors is None:
        colors = [0] * s.size
    elif len(colors) != s.size:
        raise StructureError("color vector length mismatch")
    if s.size == 0:
        return _encode(s, (), [] if marks is not None else None), ()

    best: list = [None, None]

    def walk(cur: list[int]) -> None:
        classes: dict[int, list[int]] = {}
        for v, c in enumerate(cur):
            classes.setdefault(c, []).append(v)
        target = None
        for c in sorted(classes):
            if len(classes[c]) > 1:
                if target is None or len(classes[c]) < len(classes[target]):
                    target = c
        if target is None:
            order = sorted(range(s.size), key=lambda v: cur[v])
            perm = [0] * s.size
            for pos, v in enumerate(order):
                perm[v] = pos
            oc = None if marks is None else [marks[v] for v in order]
            code = _encode(s, perm, oc)
            if best[0] is None or code < best[0]:
                best[0] = code
                best[1] = tuple(perm)
            return
        for v in classes[target]:
            # individualize v inside its class, then re-refine
            nxt = [2 * c for c in cur]
            nxt[v] -= 1
            walk(refine_colors(s, nxt))

    walk(refine_colors(s, colors))
    return best[0], best[1]


def canonical_code(s: FinStructure, colors: Sequence[int] | None = None) -> bytes:
    return canonical_form(s, colors)[0]
