"""Amalgam search over a class and the goodness hierarchy built on it.

An amalgam of two embeddings f: Z -> X and g: Z -> Y is a member V with
embeddings f': X -> V and g': Y -> V that agree on a designated part of Z.
The search is exhaustive up to ``v_bound``: a `None` result with the
internal exhausted flag set means every candidate was either visited or
condemned by the class refuter (which rules out all extensions at once), so
nothing was merely skipped for size or budget.  Whenever a candidate region
is cut off without a refuter, the result degrades to not-exhausted and the
callers report Unknown rather than Fails.

Candidate amalgams are walked in three stages: the free gluing, then gluings
that identify private elements of X and Y, then completions of each gluing by
extra tuples and padding elements.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations, permutations, product

from . import verdict as vd
from .canon import canonical_code
from .classes import (ClassDescriptor, enumerate_members,
                      iter_pointed_extensions)
from .search import automorphisms, embeddings_iter, orbit_representative
from .structures import (Embedding, FinStructure, StructureError,
                         identity_embedding, induced_substructure,
                         structure_to_json)

DEFAULT_MEMBER_BOUND = 4
DEFAULT_EXT_BOUND = 7
DEFAULT_INSTANCE_BOUND = 6
DEFAULT_V_BOUND = 10

_PAD_CAP = 2
_NODE_BUDGET = 4000
_OPEN_CAP = 256


@dataclass
class _Gluing:
    structure: FinStructure
    fp: Embedding
    gp: Embedding


def _agreement_elements(source: FinStructure, agree_on: FinStructure | None,
                        agree_set: list[int] | None) -> list[int]:
    if agree_set is not None:
        out = sorted(set(agree_set))
        if out and (out[0] < 0 or out[-1] >= source.size):
            raise StructureError("agreement set outside the common source")
        return out
    if agree_on is None:
        return list(range(source.size))
    k = agree_on.size
    if k > source.size:
        raise StructureError("agreement part larger than the common source")
    prefix, _ = induced_substructure(source, range(k))
    if prefix != agree_on:
        raise StructureError("agreement part is not a prefix of the source")
    return list(range(k))


def _consistent(x: FinStructure, y: FinStructure, xy: dict[int, int]) -> bool:
    # the identified elements must carry exactly matching tuples on both sides
    yx = {b: a for a, b in xy.items()}
    for sym in x.signature:
        xts = x.relations[sym.name]
        yts = y.relations[sym.name]
        for t in xts:
            if all(c in xy for c in t):
                if tuple(xy[c] for c in t) not in yts:
                    return False
        for t in yts:
            if all(c in yx for c in t):
                if tuple(yx[c] for c in t) not in xts:
                    return False
    return True


def _build_gluing(x: FinStructure, y: FinStructure,
                  qmap: list[int]) -> FinStructure:
    sig = x.signature
    rels = {sym.name: set(x.relations[sym.name]) for sym in sig}
    n = x.size + sum(1 for v in qmap if v >= x.size)
    for sym in sig:
        for t in y.relations[sym.name]:
            rels[sym.name].add(tuple(qmap[c] for c in t))
    return FinStructure(sig, n, {k: frozenset(v) for k, v in rels.items()})


def _completion_moves(desc: ClassDescriptor, v: FinStructure,
                      xpart: frozenset[int], ypart: frozenset[int]):
    """Single tuples addable without breaking either induced copy."""
    for sym in desc.signature:
        present = v.relations[sym.name]
        if sym.arity == 2 and sym.name in desc.symmetric:
            for u in range(v.size):
                lo = u + 1 if sym.name in desc.irreflexive else u
                for w in range(lo, v.size):
                    cs = {u, w}
                    if cs <= xpart or cs <= ypart:
                        continue
                    if (u, w) not in present:
                        yield ((sym.name, (u, w)), (sym.name, (w, u)))
        else:
            for t in product(range(v.size), repeat=sym.arity):
                if sym.name in desc.irreflexive and len(set(t)) != len(t):
                    continue
                cs = set(t)
                if cs <= xpart or cs <= ypart:
                    continue
                if t not in present:
                    yield ((sym.name, t),)


def _apply_move(v: FinStructure, move) -> FinStructure:
    rels = {name: set(ts) for name, ts in v.relations.items()}
    for name, t in move:
        rels[name].add(t)
    return FinStructure(v.signature, v.size,
                        {k: frozenset(ts) for k, ts in rels.items()})


def _add_padding(v: FinStructure) -> FinStructure:
    return FinStructure(v.signature, v.size + 1, v.relations)


def _finish(desc: ClassDescriptor, v: FinStructure, x: FinStructure,
            y: FinStructure, qmap: list[int]) -> _Gluing | None:
    fp = Embedding(x, v, tuple(range(x.size)))
    gp = Embedding(y, v, tuple(qmap))
    if not (desc.member(v) and fp.is_valid() and gp.is_valid()):
        return None
    return _Gluing(v, fp, gp)


def _complete_branch(desc: ClassDescriptor, bare: FinStructure,
                     x: FinStructure, y: FinStructure, qmap: list[int],
                     v_bound: int, budget: list[int]) -> tuple[_Gluing | None, bool]:
    """Breadth-first completion of one gluing.  Second component reports
    whether the walk covered everything up to ``v_bound``."""
    xpart = frozenset(range(x.size))
    ypart = frozenset(qmap)
    base_size = bare.size
    colors0 = list(range(base_size))
    seen = {canonical_code(bare, colors0)}
    queue = deque([bare])
    complete = True
    while queue:
        if budget[0] <= 0:
            return None, False
        budget[0] -= 1
        node = queue.popleft()
        if desc.completer is not None:
            for cand in desc.completer(node):
                hit = _finish(desc, cand, x, y, qmap)
                if hit is not None:
                    return hit, True
        colors = colors0 + [base_size] * (node.size - base_size)
        for move in _completion_moves(desc, node, xpart, ypart):
            child = _apply_move(node, move)
            if desc.refuted(child):
                continue
            code = canonical_code(child, colors)
            if code in seen:
                continue
            seen.add(code)
            hit = _finish(desc, child, x, y, qmap)
            if hit is not None:
                return hit, True
            queue.append(child)
        if node.size >= v_bound or node.size - base_size >= _PAD_CAP:
            # a live node that may not grow leaves its whole upward
            # region unexplored
            complete = False
        else:
            child = _add_padding(node)
            code = canonical_code(child, colors + [base_size])
            if code not in seen:
                seen.add(code)
                hit = _finish(desc, child, x, y, qmap)
                if hit is not None:
                    return hit, True
                queue.append(child)
    return None, complete


def _search_amalgam(f: Embedding, g: Embedding, desc: ClassDescriptor,
                    v_bound: int, agree: list[int]
                    ) -> tuple[_Gluing | None, bool]:
    x, y = f.target, g.target
    forced = {g(s): f(s) for s in agree}
    yfree = [v for v in range(y.size) if v not in forced]
    xavail = [v for v in range(x.size) if v not in set(forced.values())]
    exhausted = True
    open_branches: list[tuple[FinStructure, list[int]]] = []
    for k in range(min(len(yfree), len(xavail)) + 1):
        if x.size + len(yfree) - k > v_bound:
            # candidates cut off by the size bound, not by a refuter
            exhausted = False
            continue
        for ys in combinations(yfree, k):
            for xs in permutations(xavail, k):
                ident = dict(forced)
                ident.update(zip(ys, xs))
                xy = {xv: yv for yv, xv in ident.items()}
                if not _consistent(x, y, xy):
                    continue
                qmap = []
                fresh = x.size
                for v in range(y.size):
                    if v in ident:
                        qmap.append(ident[v])
                    else:
                        qmap.append(fresh)
                        fresh += 1
                bare = _build_gluing(x, y, qmap)
                hit = _finish(desc, bare, x, y, qmap)
                if hit is not None:
                    return hit, True
                if desc.refuted(bare):
                    continue
                if len(open_branches) < _OPEN_CAP:
                    open_branches.append((bare, qmap))
                else:
                    exhausted = False
    budget = [_NODE_BUDGET]
    for bare, qmap in open_branches:
        hit, complete = _complete_branch(desc, bare, x, y, qmap, v_bound, budget)
        if hit is not None:
            return hit, True
        if not complete:
            exhausted = False
    return None, exhausted


def _validate_pair(f: Embedding, g: Embedding, desc: ClassDescriptor) -> None:
    if f.source != g.source:
        raise StructureError("embeddings must share their source")
    if not (f.is_valid() and g.is_valid()):
        raise StructureError("arguments must be induced embeddings")
    for s in (f.source, f.target, g.target):
        if not desc.member(s):
            raise StructureError("amalgamation arguments must be class members")


def find_amalgam(f: Embedding, g: Embedding, desc: ClassDescriptor,
                 v_bound: int = DEFAULT_V_BOUND,
                 agree_on: FinStructure | None = None,
                 *, agree_set: list[int] | None = None
                 ) -> tuple[FinStructure, Embedding, Embedding] | None:
    """Smallest-first amalgam of ``f`` and ``g`` over their common source.

    With ``agree_on`` (a prefix of the source) only that part must commute;
    by default the full source must.  Returns ``None`` when no amalgam with
    at most ``v_bound`` elements was found.
    """
    _validate_pair(f, g, desc)
    agree = _agreement_elements(f.source, agree_on, agree_set)
    hit, _ = _search_amalgam(f, g, desc, v_bound, agree)
    if hit is None:
        return None
    return hit.structure, hit.fp, hit.gp


# --- instance tables and goodness --------------------------------------------


def _instance_sides(desc: ClassDescriptor, zp: FinStructure,
                    instance_bound: int) -> list[tuple[FinStructure, tuple[int, ...]]]:
    """Embeddings of ``zp`` into members up to ``instance_bound``, one per
    orbit under target automorphisms.  Keyed by the labeled structure, not
    its canonical code: the maps are written in ``zp``'s own labeling."""
    key = ("sides", zp, instance_bound)
    cached = desc._cache.get(key)
    if cached is not None:
        return cached
    sides = []
    for m in enumerate_members(desc, instance_bound):
        if m.size < zp.size:
            continue
        auts = _auts(desc, m)
        reps = set()
        for emb in embeddings_iter(zp, m):
            rep = orbit_representative(emb, auts)
            if rep not in reps:
                reps.add(rep)
        for rep in sorted(reps):
            sides.append((m, rep))
    desc._cache[key] = sides
    return sides


def _auts(desc: ClassDescriptor, s: FinStructure) -> list[tuple[int, ...]]:
    # Permutations are labeling-specific, so the key must be too.
    key = ("auts", s)
    cached = desc._cache.get(key)
    if cached is None:
        cached = automorphisms(s)
        desc._cache[key] = cached
    return cached


def _pair_key(x: FinStructure, mx: tuple[int, ...], y: FinStructure,
              my: tuple[int, ...], agree: list[int], v_bound: int) -> tuple:
    """Instance identity: the two sides plus the agreement pairing, up to
    the side swap.  Exact keys only; canonicalizing the union costs more
    than re-running the search."""
    left = (x, tuple(mx[s] for s in agree))
    right = (y, tuple(my[s] for s in agree))
    if (right[0].size, right[1]) < (left[0].size, left[1]):
        left, right = right, left
    return (left, right, v_bound)


def _instance_json(x: FinStructure, mx: tuple[int, ...], y: FinStructure,
                   my: tuple[int, ...]) -> dict:
    return {"left": structure_to_json(x), "left_map": list(mx),
            "right": structure_to_json(y), "right_map": list(my)}


def is_good_pair(z: FinStructure, zp: FinStructure, inc: Embedding,
                 desc: ClassDescriptor,
                 instance_bound: int = DEFAULT_INSTANCE_BOUND,
                 v_bound: int = DEFAULT_V_BOUND) -> vd.Verdict:
    """Can every two embeddings of ``zp`` into members be amalgamated so the
    images of ``z`` (via ``inc``) commute?

    Holds comes with a replayable instance table.  Fails carries one pair of
    instances with no amalgam up to ``v_bound``, certified by exhaustion.
    Unknown means some instance search was truncated before exhaustion.
    """
    if inc.source != z or inc.target != zp or not inc.is_valid():
        raise StructureError("inclusion must embed the base into the extension")
    if not (desc.member(z) and desc.member(zp)):
        raise StructureError("goodness arguments must be class members")
    agree = [inc(i) for i in range(z.size)]
    colors = [z.size] * zp.size
    for i in range(z.size):
        colors[inc(i)] = i
    # Certificates carry maps in the callers' labeling, so share nothing
    # across relabelings: key by the exact pair, pinned by the color vector.
    meta_key = ("goodpair", zp, tuple(colors), instance_bound, v_bound)
    cached = desc._cache.get(meta_key)
    if cached is not None:
        return cached
    bounds = {"instance_bound": instance_bound, "v_bound": v_bound}

    if desc.unconstrained:
        verdict = _free_goodness(desc, z, zp, inc, bounds, v_bound)
        desc._cache[meta_key] = verdict
        return verdict

    sides = _instance_sides(desc, zp, instance_bound)
    pair_cache = desc._cache.setdefault("pairs", {})
    table = []
    unknown = None
    for i in range(len(sides)):
        for j in range(i, len(sides)):
            (x, mx), (y, my) = sides[i], sides[j]
            key = _pair_key(x, mx, y, my, agree, v_bound)
            status = pair_cache.get(key)
            if status is None:
                f = Embedding(zp, x, mx)
                g = Embedding(zp, y, my)
                hit, exhausted = _search_amalgam(f, g, desc, v_bound, agree)
                if hit is not None:
                    status = ("found", hit.structure.size)
                elif exhausted:
                    status = ("none", None)
                else:
                    status = ("truncated", None)
                pair_cache[key] = status
            if status[0] == "none":
                verdict = vd.fails(
                    bounds=bounds,
                    witness={"base": structure_to_json(z),
                             "extension": structure_to_json(zp),
                             "inclusion": list(inc.mapping),
                             **_instance_json(x, mx, y, my)},
                    reason="instance pair admits no amalgam within the bound")
                desc._cache[meta_key] = verdict
                return verdict
            if status[0] == "truncated" and unknown is None:
                unknown = _instance_json(x, mx, y, my)
            if status[0] == "found":
                table.append({"left": i, "right": j, "v_size": status[1]})
    if unknown is not None:
        verdict = vd.unknown(bounds=bounds, witness=unknown,
                             reason="an instance search was truncated")
    else:
        verdict = vd.holds(bounds=bounds, certificate={
            "base": structure_to_json(z),
            "extension": structure_to_json(zp),
            "inclusion": list(inc.mapping),
            "instances": [{"index": i, "member": structure_to_json(x),
                           "map": list(mx)}
                          for i, (x, mx) in enumerate(sides)],
            "amalgams": table})
    desc._cache[meta_key] = verdict
    return verdict


def _free_goodness(desc: ClassDescriptor, z: FinStructure, zp: FinStructure,
                   inc: Embedding, bounds: dict, v_bound: int) -> vd.Verdict:
    """For unconstrained classes the free gluing of any two instances is a
    member, so goodness holds wholesale; a sampled table keeps it checkable.
    A bound too small for even the samples degrades to Unknown."""
    agree = [inc(i) for i in range(z.size)]
    sides = _instance_sides(desc, zp, min(zp.size + 1, DEFAULT_INSTANCE_BOUND))
    samples = []
    for i, (x, mx) in enumerate(sides[:3]):
        for j in range(i, min(i + 2, len(sides))):
            y, my = sides[j]
            f = Embedding(zp, x, mx)
            g = Embedding(zp, y, my)
            hit, _ = _search_amalgam(f, g, desc, v_bound, agree)
            if hit is None:
                return vd.unknown(
                    bounds=bounds, witness=_instance_json(x, mx, y, my),
                    reason="bound too small to verify a sample amalgam")
            samples.append({"left": i, "right": j, "v_size": hit.structure.size})
    return vd.holds(bounds=bounds, certificate={
        "base": structure_to_json(z),
        "extension": structure_to_json(zp),
        "inclusion": list(inc.mapping),
        "rule": "free gluing stays in the class",
        "samples": samples})


def find_good_extension(z: FinStructure, desc: ClassDescriptor,
                        ext_bound: int = DEFAULT_EXT_BOUND,
                        instance_bound: int = DEFAULT_INSTANCE_BOUND,
                        v_bound: int = DEFAULT_V_BOUND,
                        *, self_good: bool = False
                        ) -> tuple[FinStructure, Embedding, vd.Verdict] | None:
    """Smallest extension of ``z`` whose copies can always be amalgamated.

    With ``self_good`` the amalgams must commute on the whole extension, not
    just on ``z``; such a witness is also good over every smaller base.
    """
    if not desc.member(z):
        raise StructureError("base must be a class member")
    selfgood = desc._cache.setdefault("selfgood", {})
    for zp in iter_pointed_extensions(desc, z, max(0, ext_bound - z.size)):
        inc = Embedding(z, zp, tuple(range(z.size)))
        code = (canonical_code(zp), instance_bound, v_bound)
        if self_good:
            verdict = is_good_pair(zp, zp, identity_embedding(zp), desc,
                                   instance_bound, v_bound)
            selfgood[code] = verdict.status
            if verdict.status == vd.HOLDS:
                return zp, inc, verdict
        else:
            if selfgood.get(code) == vd.HOLDS:
                verdict = is_good_pair(zp, zp, identity_embedding(zp), desc,
                                       instance_bound, v_bound)
                return zp, inc, verdict
            verdict = is_good_pair(z, zp, inc, desc, instance_bound, v_bound)
            if verdict.status == vd.HOLDS:
                return zp, inc, verdict
    return None


def check_jep(desc: ClassDescriptor, bound: int = DEFAULT_MEMBER_BOUND,
              join_bound: int = DEFAULT_V_BOUND) -> vd.Verdict:
    """Joint embedding for all member pairs up to ``bound``."""
    members = enumerate_members(desc, bound)
    empty = FinStructure(desc.signature, 0, {})
    bounds = {"bound": bound, "join_bound": join_bound}
    table = []
    unknown = None
    for i in range(len(members)):
        for j in range(i, len(members)):
            x, y = members[i], members[j]
            f = Embedding(empty, x, ())
            g = Embedding(empty, y, ())
            hit, exhausted = _search_amalgam(f, g, desc, join_bound, [])
            if hit is not None:
                table.append({"left": i, "right": j,
                              "v_size": hit.structure.size})
            elif exhausted:
                return vd.fails(bounds=bounds,
                                witness=_instance_json(x, (), y, ()),
                                reason="pair admits no joint embedding "
                                       "within the bound")
            elif unknown is None:
                unknown = _instance_json(x, (), y, ())
    if unknown is not None:
        return vd.unknown(bounds=bounds, witness=unknown,
                          reason="a joint embedding search was truncated")
    return vd.holds(bounds=bounds, certificate={
        "members": [structure_to_json(m) for m in members],
        "joins": table})


_MODES = ("AP", "CAP", "WAP")


def check_property(desc: ClassDescriptor, mode: str,
                   member_bound: int = DEFAULT_MEMBER_BOUND,
                   ext_bound: int = DEFAULT_EXT_BOUND,
                   instance_bound: int = DEFAULT_INSTANCE_BOUND,
                   v_bound: int = DEFAULT_V_BOUND) -> vd.Verdict:
    """Bounded check of an amalgamation property over all small bases.

    AP asks every base to be good over itself; CAP asks for an extension good
    over all of itself; WAP asks for an extension good over the base.  AP can
    certify Fails (a bad base is a counterexample); for CAP and WAP a fruitless
    bounded search only yields Unknown.
    """
    mode = mode.upper()
    if mode not in _MODES:
        raise StructureError(f"mode must be one of {_MODES}")
    bounds = {"mode": mode, "member_bound": member_bound,
              "ext_bound": ext_bound, "instance_bound": instance_bound,
              "v_bound": v_bound}
    entries = []
    statuses = []
    for z in enumerate_members(desc, member_bound):
        if mode == "AP":
            verdict = is_good_pair(z, z, identity_embedding(z), desc,
                                   instance_bound, v_bound)
            entries.append({"base": structure_to_json(z),
                            "verdict": verdict.to_json()})
            statuses.append(verdict.status)
            if verdict.status == vd.FAILS:
                return vd.fails(bounds=bounds, certificate=entries,
                                witness=verdict.witness,
                                reason="a base is not good over itself; "
                                       "later bases not scanned")
        else:
            found = find_good_extension(z, desc, ext_bound, instance_bound,
                                        v_bound, self_good=(mode == "CAP"))
            if found is None:
                entries.append({"base": structure_to_json(z),
                                "status": vd.UNKNOWN,
                                "reason": "no good extension up to the bound"})
                statuses.append(vd.UNKNOWN)
            else:
                zp, inc, verdict = found
                entries.append({"base": structure_to_json(z),
                                "extension": structure_to_json(zp),
                                "inclusion": list(inc.mapping),
                                "verdict": verdict.to_json()})
                statuses.append(vd.HOLDS)
    status = vd.combine(statuses) if statuses else vd.HOLDS
    if status == vd.HOLDS:
        return vd.holds(bounds=bounds, certificate=entries)
    first = next(e for e, s in zip(entries, statuses) if s == vd.UNKNOWN)
    return vd.unknown(bounds=bounds, certificate=entries,
                      witness=first.get("base"),
                      reason="some base could not be settled within bounds")
