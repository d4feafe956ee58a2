"""Embedding search kernels.

The backtracker assigns source elements in index order and tries target
elements in ascending order, so embeddings come out in lexicographic order
on the mapping vector.  Binary relations are propagated through candidate
bitmasks (both the edge and the non-edge direction, since embeddings are
induced); unary relations restrict the initial masks; higher arities are
verified at the leaves.
"""

from __future__ import annotations

from typing import Iterator, Mapping, Sequence

from .structures import Embedding, FinStructure, StructureError, check_induced


def _binary_tables(source: FinStructure, target: FinStructure):
    """Per-relation constraint masks and source edge patterns."""
    m = target.size
    full = (1 << m) - 1
    tables = []
    for sym in source.signature:
        if sym.arity != 2:
            continue
        s_succ, s_pred = source.adjacency(sym.name)
        t_succ, t_pred = target.adjacency(sym.name)
        t_succ_c = [full & ~x for x in t_succ]
        t_pred_c = [full & ~x for x in t_pred]
        tables.append((s_succ, s_pred, t_succ, t_pred, t_succ_c, t_pred_c))
    return tables


def _initial_candidates(source: FinStructure, target: FinStructure,
                        pin: Mapping[int, int] | None) -> list[int] | None:
    n, m = source.size, target.size
    full = (1 << m) - 1
    cand = [full] * n
    for sym in source.signature:
        if sym.arity == 1:
            s_in = {t[0] for t in source.relations[sym.name]}
            t_mask = 0
            for (x,) in target.relations[sym.name]:
                t_mask |= 1 << x
            for v in range(n):
                cand[v] &= t_mask if v in s_in else (full & ~t_mask)
        elif sym.arity == 2:
            # a target spot needs at least the source degrees
            s_succ, s_pred = source.adjacency(sym.name)
            t_succ, t_pred = target.adjacency(sym.name)
            sd = [x.bit_count() for x in t_succ]
            pd = [x.bit_count() for x in t_pred]
            for v in range(n):
                need_s, need_p = s_succ[v].bit_count(), s_pred[v].bit_count()
                mask = 0
                for t in range(m):
                    if sd[t] >= need_s and pd[t] >= need_p:
                        mask |= 1 << t
                cand[v] &= mask
    if pin:
        for s, t in pin.items():
            if not (0 <= s < n and 0 <= t < m):
                raise StructureError(f"pin ({s},{t}) out of range")
            cand[s] &= 1 << t
        if len(set(pin.values())) != len(pin):
            return None
    return cand


def embeddings_iter(source: FinStructure, target: FinStructure, *,
                    pin: Mapping[int, int] | None = None) -> Iterator[tuple[int, ...]]:
    """Yield mapping vectors of all induced embeddings, lexicographically."""
    if source.signature != target.signature:
        raise StructureError("signature mismatch")
    n, m = source.size, target.size
    if n > m:
        return
    if n == 0:
        yield ()
        return
    cand = _initial_candidates(source, target, pin)
    if cand is None or any(c == 0 for c in cand):
        return
    tables = _binary_tables(source, target)
    exact = all(sym.arity <= 2 for sym in source.signature)
    assign = [-1] * n

    def leaf_ok() -> bool:
        if exact:
            return True
        try:
            check_induced(source, target, assign)
        except StructureError:
            return False
        return True

    def descend(level: int, used: int, masks: list[int]) -> Iterator[tuple[int, ...]]:
        avail = masks[level] & ~used
        while avail:
            bit = avail & -avail
            avail ^= bit
            t = bit.bit_length() - 1
            assign[level] = t
            if level + 1 == n:
                if leaf_ok():
                    yield tuple(assign)
                continue
            nxt = masks[:]
            dead = False
            for s2 in range(level + 1, n):
                mk = nxt[s2]
                for s_succ, s_pred, t_succ, t_pred, t_succ_c, t_pred_c in tables:
                    mk &= t_succ[t] if (s_succ[level] >> s2) & 1 else t_succ_c[t]
                    mk &= t_pred[t] if (s_pred[level] >> s2) & 1 else t_pred_c[t]
                nxt[s2] = mk
                if mk & ~(used | bit) == 0:
                    dead = True
                    break
            if not dead:
                yield from descend(level + 1, used | bit, nxt)
        assign[level] = -1

    yield from descend(0, 0, cand)


def enumerate_embeddings(source: FinStructure, target: FinStructure,
                         pin: Mapping[int, int] | None = None) -> list[Embedding]:
    """All induced embeddings of ``source`` into ``target``, in lexicographic
    order on the mapping vector."""
    return [Embedding(source, target, v) for v in embeddings_iter(source, target, pin=pin)]


def find_embedding(source: FinStructure, target: FinStructure,
                   pin: Mapping[int, int] | None = None) -> Embedding | None:
    for v in embeddings_iter(source, target, pin=pin):
        return Embedding(source, target, v)
    return None


def count_embeddings(source: FinStructure, target: FinStructure) -> int:
    return sum(1 for _ in embeddings_iter(source, target))


def _iso_invariant(s: FinStructure):
    degs = []
    for sym in s.signature:
        if sym.arity == 2:
            succ, pred = s.adjacency(sym.name)
            degs.append(tuple(sorted((a.bit_count(), b.bit_count())
                                     for a, b in zip(succ, pred))))
    return (s.size, s.tuple_counts(), tuple(degs))


def are_isomorphic(a: FinStructure, b: FinStructure) -> Embedding | None:
    """Isomorphism witness, or None.  An injective induced map between
    equal-sized structures is automatically bijective."""
    if a.signature != b.signature or _iso_invariant(a) != _iso_invariant(b):
        return None
    return find_embedding(a, b)


def automorphisms(s: FinStructure) -> list[tuple[int, ...]]:
    return list(embeddings_iter(s, s))


def orbit_representative(mapping: Sequence[int],
                         auts: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Least mapping vector in the orbit under post-composition."""
    return min(tuple(a[x] for x in mapping) for a in auts)
