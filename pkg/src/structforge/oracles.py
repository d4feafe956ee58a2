"""Countably generated target structures presented by growing fragments.

Each oracle names its generators 0, 1, 2, ... and answers adjacency between
generator indices; fragments are the induced structures on the first indices.
Embedding searches into the target are depth-bounded; absence of an embedding
is only certified when a finite obstruction rule (such as a degree cap)
applies, and is otherwise reported as depth-bounded absence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from . import verdict as vd
from .canon import canonical_code
from .classes import ClassDescriptor, enumerate_members, pointed_extensions
from .search import automorphisms, embeddings_iter
from .structures import (Embedding, FinStructure, GRAPH_SIGNATURE,
                         StructureError, induced_substructure,
                         structure_to_json)


class TargetOracle:
    """Deterministic presentation of a countable target structure."""

    name = "oracle"
    signature = GRAPH_SIGNATURE

    def __init__(self):
        self._fragments: dict[int, FinStructure] = {}

    def adjacent(self, i: int, j: int) -> bool:
        raise NotImplementedError

    def generator_count(self, k: int) -> int:
        return k

    def fragment(self, k: int) -> FinStructure:
        if k < 0:
            raise StructureError("stage must be non-negative")
        cached = self._fragments.get(k)
        if cached is not None:
            return cached
        n = self.generator_count(k) + 1
        edges = set()
        for i in range(n):
            for j in range(i + 1, n):
                if self.adjacent(i, j):
                    edges.add((i, j))
                    edges.add((j, i))
        frag = FinStructure(self.signature, n, {"E": frozenset(edges)})
        self._fragments[k] = frag
        return frag

    def degree_capacity(self, i: int) -> int | None:
        """Largest degree the target ever gives generator ``i`` (None for
        unbounded)."""
        return None

    def hull_hint(self, indices: list[int], depth: int) -> list[int] | None:
        """Optional enlargement of a generator set that pins the relative
        placement of its elements."""
        return None

    def search_horizon(self, depth: int) -> int:
        """Index range actually scanned when extending into the target at
        probe depth ``depth``."""
        return depth

    def candidate_indices(self, want: set[int], avoid: set[int],
                          horizon: int):
        """Generator indices adjacent to all of ``want`` and none of
        ``avoid``, ascending, bounded by ``horizon``."""
        for v in range(horizon + 1):
            if v in want or v in avoid:
                continue
            if all(self.adjacent(v, s) for s in want) and \
                    not any(self.adjacent(v, t) for t in avoid):
                yield v

    def extend_into_target(self, partial: dict[int, int], x: FinStructure,
                           depth: int) -> Embedding | None:
        """Complete ``partial`` (element -> generator index) to a full
        embedding of ``x`` using indices up to ``depth``; None means none
        found within the depth, not a proof of absence."""
        adj = x.adjacency("E")[0]
        for u, i in partial.items():
            if not 0 <= u < x.size:
                raise StructureError("partial map domain outside the structure")
            for v, j in partial.items():
                if u < v and (i == j or
                              bool(adj[u] & (1 << v)) != self.adjacent(i, j)):
                    return None
        images = dict(partial)
        order = [u for u in range(x.size) if u not in images]
        # most-constrained first: elements touching already placed ones
        order.sort(key=lambda u: (-(adj[u] & self._mask(images)).bit_count(), u))

        def place(idx: int) -> bool:
            if idx == len(order):
                return True
            u = order[idx]
            want = {images[v] for v in range(x.size)
                    if v in images and adj[u] & (1 << v)}
            avoid = {images[v] for v in range(x.size)
                     if v in images and not adj[u] & (1 << v)}
            for cand in self.candidate_indices(want, avoid, depth):
                images[u] = cand
                if place(idx + 1):
                    return True
                del images[u]
            return False

        if not place(0):
            return None
        frag = self.fragment(max(depth, max(images.values(), default=0)))
        return Embedding(x, frag, tuple(images[u] for u in range(x.size)))

    @staticmethod
    def _mask(images: dict[int, int]) -> int:
        m = 0
        for u in images:
            m |= 1 << u
        return m

    def place_extension(self, pins: dict[int, int], x: FinStructure,
                        stage_hint: int) -> dict[int, int] | None:
        """Best-effort mapping completion for game play; unlike
        ``extend_into_target`` it returns a raw element-to-generator map and
        may use target-specific arithmetic beyond any scan window."""
        emb = self.extend_into_target(pins, x, self.search_horizon(stage_hint))
        if emb is None:
            return None
        return {u: emb.mapping[u] for u in range(x.size)}

    def obstruction(self, x: FinStructure, pins: dict[int, int]) -> dict | None:
        """Finite certificate that no embedding of ``x`` can respect
        ``pins``: a pinned element needing more neighbours than its image
        ever has."""
        adj = x.adjacency("E")[0]
        for u, i in sorted(pins.items()):
            cap = self.degree_capacity(i)
            if cap is None:
                continue
            needed = adj[u].bit_count()
            if needed > cap:
                return {"rule": "degree", "element": u, "image": i,
                        "needed": needed, "capacity": cap}
        return None

    def to_json(self) -> dict:
        return {"name": self.name}


class LineOracle(TargetOracle):
    """The two-way infinite path: generators enumerate 0, 1, -1, 2, -2, ..."""

    name = "line"

    @staticmethod
    def position(i: int) -> int:
        return (i + 1) // 2 * (1 if i % 2 else -1)

    @staticmethod
    def index_of(pos: int) -> int:
        return 2 * pos - 1 if pos > 0 else -2 * pos

    def adjacent(self, i: int, j: int) -> bool:
        return abs(self.position(i) - self.position(j)) == 1

    def degree_capacity(self, i: int) -> int | None:
        return 2

    def search_horizon(self, depth: int) -> int:
        # room to place scattered components beyond the probe window
        return depth + 16

    def hull_hint(self, indices: list[int], depth: int) -> list[int] | None:
        # the interval between the outermost positions pins all distances
        ps = [self.position(i) for i in indices]
        hull = [self.index_of(p) for p in range(min(ps), max(ps) + 1)]
        if all(i <= depth for i in hull):
            return sorted(hull)
        return None


class RayOracle(TargetOracle):
    """The one-way infinite path on the naturals; generator i sits at i."""

    name = "ray"

    def adjacent(self, i: int, j: int) -> bool:
        return abs(i - j) == 1

    def degree_capacity(self, i: int) -> int | None:
        return 1 if i == 0 else 2

    def search_horizon(self, depth: int) -> int:
        return depth + 16

    def hull_hint(self, indices: list[int], depth: int) -> list[int] | None:
        return list(range(min(indices), max(indices) + 1))


class RadoOracle(TargetOracle):
    """The random graph under the bit rule: for i < j, i ~ j iff bit i of
    j is set."""

    name = "rado"

    def adjacent(self, i: int, j: int) -> bool:
        lo, hi = (i, j) if i < j else (j, i)
        if lo == hi:
            return False
        return bool((hi >> lo) & 1)

    def search_horizon(self, depth: int) -> int:
        # adjacency-from-above to index m needs a vertex of size ~ 2^m
        return max(depth, 1 << min(depth + 2, 20))

    def witness_above(self, want: set[int], avoid: set[int]) -> int:
        """Direct construction: the vertex whose bits are exactly ``want``
        plus one clean high bit, adjacent from above to all of ``want`` and
        none of ``avoid``."""
        v = sum(1 << s for s in want)
        ceiling = max(want | avoid, default=0) + 1
        if v <= max(avoid, default=-1) or v in avoid or v in want or v == 0:
            v += 1 << ceiling
        return v

    def place_extension(self, pins: dict[int, int], x: FinStructure,
                        stage_hint: int) -> dict[int, int] | None:
        # small images first if a window scan finds them; the arithmetic
        # fallback always succeeds but grows the indices exponentially
        if all(v < 4096 for v in pins.values()):
            emb = self.extend_into_target(pins, x, 4096)
            if emb is not None:
                return {u: emb.mapping[u] for u in range(x.size)}
        adj = x.adjacency("E")[0]
        for u, i in pins.items():
            for v, j in pins.items():
                if u < v and (i == j or
                              bool(adj[u] & (1 << v)) != self.adjacent(i, j)):
                    return None
        images = dict(pins)
        for u in range(x.size):
            if u in images:
                continue
            want = {images[v] for v in images if adj[u] & (1 << v)}
            avoid = {images[v] for v in images if not adj[u] & (1 << v)}
            images[u] = self.witness_above(want, avoid)
        return images


class LimitOracle(TargetOracle):
    """A finished limit run presented as a target; generators are the
    elements of the union in order of appearance."""

    name = "limit"

    def __init__(self, stages: list[FinStructure], label: str = "limit"):
        super().__init__()
        if not stages:
            raise StructureError("a limit oracle needs at least one stage")
        self.stages = list(stages)
        self.name = label
        self._final = stages[-1]
        self._adj = self._final.adjacency("E")[0]

    def adjacent(self, i: int, j: int) -> bool:
        n = self._final.size
        if not (0 <= i < n and 0 <= j < n):
            return False
        return bool(self._adj[i] & (1 << j))

    def generator_count(self, k: int) -> int:
        return self.stages[min(k, len(self.stages) - 1)].size - 1

    def fragment(self, k: int) -> FinStructure:
        if k < 0:
            raise StructureError("stage must be non-negative")
        return self.stages[min(k, len(self.stages) - 1)]

    def search_horizon(self, depth: int) -> int:
        return self._final.size - 1

    def hull_hint(self, indices: list[int], depth: int) -> list[int] | None:
        # union of shortest paths inside the fragment: pins distances in
        # path-like targets and saturates interior elements
        bound = self.fragment(depth).size
        hull = set(indices)
        for a, b in combinations(sorted(set(indices)), 2):
            path = self._shortest_path(a, b, bound)
            if path:
                hull.update(path)
        return sorted(hull) if hull != set(indices) else None

    def _shortest_path(self, a: int, b: int, bound: int) -> list[int] | None:
        if a >= bound or b >= bound:
            return None
        prev = {a: a}
        frontier = [a]
        while frontier and b not in prev:
            nxt = []
            for u in frontier:
                m = self._adj[u]
                while m:
                    bit = m & -m
                    m ^= bit
                    w = bit.bit_length() - 1
                    if w < bound and w not in prev:
                        prev[w] = u
                        nxt.append(w)
            frontier = nxt
        if b not in prev:
            return None
        path = [b]
        while path[-1] != a:
            path.append(prev[path[-1]])
        return path


def parse_oracle(selector: str) -> TargetOracle:
    """Build an oracle from a CLI/API selector string."""
    if selector == "line":
        return LineOracle()
    if selector == "ray":
        return RayOracle()
    if selector == "rado":
        return RadoOracle()
    if selector.startswith("limit:"):
        from .limits import load_run
        run = load_run(selector[len("limit:"):])
        return LimitOracle(run.stages, selector)
    raise StructureError(f"unknown oracle selector {selector!r}")


BUILTIN_ORACLES = ("line", "ray", "rado")


# --- weak-injectivity probes --------------------------------------------------


@dataclass
class ProbeReport:
    condition: str
    verdict: vd.Verdict
    witnesses: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"condition": self.condition,
                "verdict": self.verdict.to_json(),
                "witnesses": self.witnesses}


def _window_substructures(window: FinStructure, max_size: int):
    for size in range(1, min(max_size, window.size) + 1):
        for subset in combinations(range(window.size), size):
            yield list(subset)


def _pin_consistent(oracle: TargetOracle, b: FinStructure,
                    pins: dict[int, int]) -> bool:
    adj = b.adjacency("E")[0]
    for u, i in pins.items():
        for v, j in pins.items():
            if u < v and bool(adj[u] & (1 << v)) != oracle.adjacent(i, j):
                return False
    return True


def _fill_to_degree(desc: ClassDescriptor, b: FinStructure, u: int,
                    target_degree: int) -> FinStructure | None:
    """Extend ``b`` with fresh neighbours of ``u`` until it has the target
    degree, staying in the class."""
    cur = b
    adj = cur.adjacency("E")[0]
    while adj[u].bit_count() < target_degree:
        w = cur.size
        edges = set(cur.relations["E"]) | {(u, w), (w, u)}
        cur = FinStructure(cur.signature, w + 1, {"E": frozenset(edges)})
        if not desc.member(cur):
            return None
        adj = cur.adjacency("E")[0]
    return cur


def _blocked_or_works(oracle: TargetOracle, desc: ClassDescriptor,
                      b: FinStructure, pins: dict[int, int], x_bound: int,
                      horizon: int) -> tuple[str, dict]:
    """Resolve one candidate B: 'works' when every pointed extension embeds
    respecting the pins, 'blocked' with a certificate when some extension is
    finitely obstructed, else 'open'."""
    if not _pin_consistent(oracle, b, pins):
        # B itself contradicts the pinned adjacencies, so X = B already has
        # no extension; a finite, replayable refusal
        return "blocked", {"extension": structure_to_json(b),
                           "certificate": {"rule": "pin-mismatch"}}
    for u, i in pins.items():
        cap = oracle.degree_capacity(i)
        if cap is None:
            continue
        bad = _fill_to_degree(desc, b, u, cap + 1)
        if bad is not None:
            cert = oracle.obstruction(bad, pins)
            if cert is not None:
                return "blocked", {"extension": structure_to_json(bad),
                                   "certificate": cert}
    for x in pointed_extensions(desc, b, max(0, x_bound - b.size)):
        cert = oracle.obstruction(x, pins)
        if cert is not None:
            return "blocked", {"extension": structure_to_json(x),
                               "certificate": cert}
        emb = oracle.extend_into_target(dict(pins), x, horizon)
        if emb is None:
            return "open", {"extension": structure_to_json(x),
                            "reason": "no embedding found within depth"}
    return "works", {}


def _per_instance(oracle: TargetOracle, desc: ClassDescriptor,
                  b_candidates: list[tuple[FinStructure, dict[int, int]]],
                  x_bound: int, horizon: int) -> tuple[str, dict]:
    """One (A, pins) probe instance over its candidate B list: holds when
    some B works, fails when every B is blocked with a certificate."""
    blocks = []
    open_info = None
    for b, pins in b_candidates:
        status, info = _blocked_or_works(oracle, desc, b, pins, x_bound, horizon)
        if status == "works":
            return vd.HOLDS, {"b": structure_to_json(b),
                              "pins": sorted(pins.items())}
        if status == "blocked":
            blocks.append({"b": structure_to_json(b), **info})
        else:
            open_info = {"b": structure_to_json(b), **info}
    if open_info is None:
        return vd.FAILS, {"blocked": blocks}
    return vd.UNKNOWN, open_info


def _concrete_b_candidates(oracle: TargetOracle, window: FinStructure,
                           a_set: list[int], b_bound: int, depth: int):
    """Condition (a): concrete B with A <= B <= fragment(depth), the
    identity pins on A; tried as A itself, then the oracle hull, then the
    remaining window subsets."""
    tried = []
    seen = set()
    others = [i for i in range(window.size) if i not in a_set]
    hull = oracle.hull_hint(list(a_set), depth)
    ordered: list[list[int]] = [list(a_set)]
    if (hull is not None and len(hull) <= b_bound
            and all(i < window.size for i in hull)):
        ordered.append(sorted(hull))
    for extra in range(1, max(0, b_bound - len(a_set)) + 1):
        for add in combinations(others, extra):
            ordered.append(sorted(list(a_set) + list(add)))
    for b_set in ordered:
        key = tuple(b_set)
        if key in seen or len(b_set) > b_bound:
            continue
        seen.add(key)
        sub, _ = induced_substructure(window, b_set)
        pins = {idx: gen for idx, gen in enumerate(b_set) if gen in set(a_set)}
        tried.append((sub, pins))
    return tried


def _abstract_b_candidates(desc: ClassDescriptor, a_struct: FinStructure,
                           assignment: dict[int, int], b_bound: int):
    """Conditions (b)/(c): abstract B extending the A-copy kept as a prefix,
    pinned by the given assignment of A's elements to generator indices."""
    out = []
    for b in pointed_extensions(desc, a_struct, max(0, b_bound - a_struct.size)):
        out.append((b, dict(assignment)))
    return out


def weak_injectivity_probe(oracle: TargetOracle, desc: ClassDescriptor,
                           condition: str, a_bound: int, b_bound: int,
                           x_bound: int, depth: int,
                           horizon: int | None = None) -> ProbeReport:
    """Bounded test of the three equivalent injectivity conditions.

    (a) quantifies concrete B between A and the fragment; (b) additionally
    chooses an isomorphism from an abstract copy of A; (c) quantifies every
    embedding of A into the fragment.  Also checks that every class member
    up to ``x_bound`` embeds into a fragment at all.
    """
    if condition not in ("a", "b", "c"):
        raise StructureError("condition must be one of a, b, c")
    if min(a_bound, b_bound, x_bound) <= 0:
        raise StructureError("bounds must be positive")
    if horizon is None:
        horizon = oracle.search_horizon(depth)
    window = oracle.fragment(depth)
    witnesses = []
    statuses = []
    for m in enumerate_members(desc, x_bound):
        if m.size == 0:
            continue
        if oracle.extend_into_target({}, m, horizon) is None:
            witnesses.append({"universality": structure_to_json(m),
                              "status": vd.UNKNOWN,
                              "reason": "member not embedded within depth"})
            statuses.append(vd.UNKNOWN)
    seen_iso = set()
    for a_set in _window_substructures(window, a_bound):
        a_struct, _ = induced_substructure(window, a_set)
        if not desc.member(a_struct):
            continue
        if condition != "a":
            # (b) and (c) depend only on A's isomorphism type
            code = canonical_code(a_struct)
            if code in seen_iso:
                continue
            seen_iso.add(code)
        entry: dict = {"a": list(a_set)}
        if condition == "a":
            cands = _concrete_b_candidates(oracle, window, a_set, b_bound, depth)
            status, info = _per_instance(oracle, desc, cands, x_bound, horizon)
        else:
            status = vd.HOLDS
            info = {}
            per = []
            for assignment in _a_assignments(oracle, window, a_struct, a_set,
                                             condition, depth):
                cands = _abstract_b_candidates(desc, a_struct, assignment,
                                               b_bound)
                st, inf = _per_instance(oracle, desc, cands, x_bound, horizon)
                per.append({"pins": sorted(assignment.items()),
                            "status": st, **inf})
                status = vd.combine([status, st])
            info = {"instances": per}
        entry["status"] = status
        entry.update(info)
        witnesses.append(entry)
        statuses.append(status)
    verdict_status = vd.combine(statuses) if statuses else vd.HOLDS
    bounds = {"condition": condition, "a_bound": a_bound, "b_bound": b_bound,
              "x_bound": x_bound, "depth": depth, "horizon": horizon}
    if verdict_status == vd.HOLDS:
        verdict = vd.holds(bounds=bounds, certificate=witnesses)
    elif verdict_status == vd.FAILS:
        bad = next(w for w, s in zip(witnesses, statuses) if s == vd.FAILS)
        verdict = vd.fails(bounds=bounds, witness=bad, certificate=witnesses,
                           reason="every candidate B is finitely obstructed")
    else:
        bad = next(w for w, s in zip(witnesses, statuses) if s == vd.UNKNOWN)
        verdict = vd.unknown(bounds=bounds, witness=bad, certificate=witnesses,
                             reason="searches truncated by depth bounds")
    return ProbeReport(condition, verdict, witnesses)


def _a_assignments(oracle: TargetOracle, window: FinStructure,
                   a_struct: FinStructure, a_set: list[int], condition: str,
                   depth: int):
    """Pin assignments for conditions (b) and (c): (b) ranges over the
    isomorphisms onto the concrete copy, (c) over all embeddings of the
    abstract A into the fragment, each up to A's automorphisms."""
    auts = automorphisms(a_struct)
    seen = set()
    if condition == "b":
        targets = [list(p) for p in _bijections(len(a_set))]
        for perm in targets:
            mapping = tuple(a_set[perm[i]] for i in range(len(a_set)))
            emb = Embedding(a_struct, window, mapping)
            if not emb.is_valid():
                continue
            rep = min(tuple(mapping[t[i]] for i in range(len(a_set)))
                      for t in auts)
            if rep in seen:
                continue
            seen.add(rep)
            yield {i: mapping[i] for i in range(len(a_set))}
    else:
        for mapping in embeddings_iter(a_struct, window):
            rep = min(tuple(mapping[t[i]] for i in range(len(a_set)))
                      for t in auts)
            if rep in seen:
                continue
            seen.add(rep)
            yield {i: mapping[i] for i in range(len(a_set))}


def _bijections(n: int):
    from itertools import permutations
    return permutations(range(n))


def check_extension_axioms(oracle: TargetOracle, pair_bound: int,
                           base_range: int, depth: int) -> vd.Verdict:
    """For all disjoint S, T inside the base range with |S|+|T| up to
    ``pair_bound``, find a generator up to ``depth`` adjacent to all of S
    and none of T."""
    bounds = {"pair_bound": pair_bound, "base_range": base_range,
              "depth": depth}
    table = []
    base = list(range(base_range))
    for total in range(1, pair_bound + 1):
        for k in range(total + 1):
            for s in combinations(base, k):
                rest = [v for v in base if v not in s]
                for t in combinations(rest, total - k):
                    hit = next(oracle.candidate_indices(set(s), set(t), depth),
                               None)
                    if hit is None:
                        return vd.fails(
                            bounds=bounds, certificate=table,
                            witness={"adjacent_to": list(s),
                                     "avoiding": list(t)},
                            reason="no witness generator within depth")
                    table.append({"adjacent_to": list(s), "avoiding": list(t),
                                  "witness": hit})
    return vd.holds(bounds=bounds, certificate=table)
