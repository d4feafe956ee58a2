"""Catalog of structure classes: membership, enumeration, closure checks.

A class is given by a decidable membership predicate over well-formed
structures plus declared symmetry constraints.  Member enumeration works by
one-point augmentation with canonical deduplication; every built-in class
has the property that each non-empty member arises by extending a smaller
member by one element (hereditary classes trivially, the connected ones via
a removable leaf), so augmenting members only is complete.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable

from . import verdict as vd
from .canon import canonical_code
from .search import find_embedding
from .structures import (FinStructure, FormatError, GRAPH_SIGNATURE,
                         ORDER_SIGNATURE, Signature, StructureError,
                         structure_from_json, structure_to_json,
                         signature_from_json)


@dataclass(eq=False)
class ClassDescriptor:
    name: str
    signature: Signature
    membership: Callable[[FinStructure], bool]
    symmetric: frozenset[str] = frozenset()
    irreflexive: frozenset[str] = frozenset()
    # refuter(s) True means: no structure obtained from s by adding elements
    # and/or tuples is a member (monotone obstruction, e.g. a cycle)
    refuter: Callable[[FinStructure], bool] | None = None
    # membership is exactly well-formedness; free gluings stay members
    unconstrained: bool = False
    # completer(s): candidate members on the same universe extending s by
    # tuples only; callers re-verify, so over-approximation is fine
    completer: Callable[[FinStructure], list[FinStructure]] | None = None
    # finite class given by listing its members up to isomorphism
    explicit_members: tuple[FinStructure, ...] | None = None
    json_payload: dict | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def member(self, s: FinStructure) -> bool:
        return s.signature == self.signature and self.membership(s)

    def refuted(self, s: FinStructure) -> bool:
        return bool(self.refuter and self.refuter(s))

    def to_json(self) -> dict:
        if self.json_payload is not None:
            return dict(self.json_payload)
        return {"builtin": self.name}


# --- structural predicates --------------------------------------------------

def well_formed(s: FinStructure, symmetric: Iterable[str], irreflexive: Iterable[str]) -> bool:
    for name in symmetric:
        ts = s.relations[name]
        if any((b, a) not in ts for a, b in ts):
            return False
    for name in irreflexive:
        if any(len(set(t)) != len(t) for t in s.relations[name]):
            return False
    return True


def _undirected_masks(s: FinStructure) -> list[int]:
    masks = [0] * s.size
    for sym in s.signature:
        if sym.arity != 2:
            continue
        succ, pred = s.adjacency(sym.name)
        for v in range(s.size):
            masks[v] |= succ[v] | pred[v]
    for v in range(s.size):
        masks[v] &= ~(1 << v)
    return masks


def max_degree(s: FinStructure) -> int:
    return max((m.bit_count() for m in _undirected_masks(s)), default=0)


def has_undirected_cycle(s: FinStructure) -> bool:
    parent = list(range(s.size))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = set()
    for sym in s.signature:
        if sym.arity != 2:
            continue
        for a, b in s.relations[sym.name]:
            if a == b:
                return True
            edges.add((min(a, b), max(a, b)))
    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra == rb:
            return True
        parent[ra] = rb
    return False


def is_connected(s: FinStructure) -> bool:
    if s.size == 0:
        return False
    masks = _undirected_masks(s)
    seen = 1
    frontier = 1
    while frontier:
        nxt = 0
        m = frontier
        while m:
            bit = m & -m
            m ^= bit
            nxt |= masks[bit.bit_length() - 1]
        frontier = nxt & ~seen
        seen |= frontier
    return seen == (1 << s.size) - 1


def has_directed_cycle(s: FinStructure, name: str) -> bool:
    succ, _ = s.adjacency(name)
    color = [0] * s.size  # 0 new, 1 active, 2 done
    for root in range(s.size):
        if color[root]:
            continue
        stack = [(root, succ[root])]
        color[root] = 1
        while stack:
            v, rest = stack[-1]
            if rest == 0:
                color[v] = 2
                stack.pop()
                continue
            bit = rest & -rest
            stack[-1] = (v, rest ^ bit)
            w = bit.bit_length() - 1
            if color[w] == 1:
                return True
            if color[w] == 0:
                color[w] = 1
                stack.append((w, succ[w]))
    return False


def complete_to_total_order(s: FinStructure) -> list[FinStructure]:
    """Single candidate: the transitive closure of one topological extension.

    Any total order extending a chain restricts to that chain, so one
    candidate is enough for amalgam search over orders.
    """
    succ, pred = s.adjacency("<")
    if has_directed_cycle(s, "<"):
        return []
    order = []
    placed = 0
    while len(order) < s.size:
        v = next(v for v in range(s.size)
                 if not (1 << v) & placed and not pred[v] & ~placed)
        order.append(v)
        placed |= 1 << v
    rank = {v: i for i, v in enumerate(order)}
    tuples = frozenset((a, b) for a in range(s.size) for b in range(s.size)
                       if rank[a] < rank[b])
    return [FinStructure(s.signature, s.size, {"<": tuples})]


def is_strict_total_order(s: FinStructure) -> bool:
    ts = s.relations["<"]
    for a in range(s.size):
        if (a, a) in ts:
            return False
        for b in range(a + 1, s.size):
            if ((a, b) in ts) == ((b, a) in ts):
                return False
    return all((a, c) in ts for a, b in ts for b2, c in ts
               if b2 == b and a != c)


# --- built-in classes --------------------------------------------------------

def _graph_member(extra: Callable[[FinStructure], bool] | None = None):
    def member(s: FinStructure) -> bool:
        if not well_formed(s, ("E",), ("E",)):
            return False
        return extra(s) if extra else True
    return member


def builtin_class(name: str) -> ClassDescriptor:
    """Fresh descriptor for a catalog class."""
    g = GRAPH_SIGNATURE
    sym = frozenset({"E"})
    if name == "graphs":
        return ClassDescriptor(name, g, _graph_member(), sym, sym,
                               refuter=None, unconstrained=True)
    if name == "forests":
        return ClassDescriptor(
            name, g, _graph_member(lambda s: not has_undirected_cycle(s)),
            sym, sym, refuter=has_undirected_cycle)
    if name == "trees":
        return ClassDescriptor(
            name, g,
            _graph_member(lambda s: not has_undirected_cycle(s) and is_connected(s)),
            sym, sym, refuter=has_undirected_cycle)
    if name == "linear_graphs":
        return ClassDescriptor(
            name, g,
            _graph_member(lambda s: max_degree(s) <= 2 and not has_undirected_cycle(s)),
            sym, sym,
            refuter=lambda s: max_degree(s) > 2 or has_undirected_cycle(s))
    if name == "connected_linear_graphs":
        return ClassDescriptor(
            name, g,
            _graph_member(lambda s: max_degree(s) <= 2
                          and not has_undirected_cycle(s) and is_connected(s)),
            sym, sym,
            refuter=lambda s: max_degree(s) > 2 or has_undirected_cycle(s))
    if name == "linear_orders":
        return ClassDescriptor(
            "linear_orders", ORDER_SIGNATURE,
            lambda s: is_strict_total_order(s),
            frozenset(), frozenset({"<"}),
            refuter=lambda s: has_directed_cycle(s, "<"),
            completer=complete_to_total_order)
    raise FormatError(f"unknown builtin class {name!r}")


def explicit_class(name: str, structures: Iterable[FinStructure],
                   symmetric: Iterable[str] = (),
                   irreflexive: Iterable[str] = ()) -> ClassDescriptor:
    """Class whose members are exactly the listed structures up to
    isomorphism."""
    listed = tuple(structures)
    if not listed:
        raise StructureError("explicit class needs at least one member")
    sig = listed[0].signature
    if any(s.signature != sig for s in listed):
        raise StructureError("explicit class members must share a signature")
    codes = {canonical_code(s) for s in listed}
    max_size = max(s.size for s in listed)
    max_tuples = max(sum(s.tuple_counts()) for s in listed)

    def member(s: FinStructure) -> bool:
        return canonical_code(s) in codes

    def refuter(s: FinStructure) -> bool:
        # growing s only increases both quantities
        return s.size > max_size or sum(s.tuple_counts()) > max_tuples

    return ClassDescriptor(name, sig, member,
                           frozenset(map(str, symmetric)),
                           frozenset(map(str, irreflexive)),
                           refuter=refuter, explicit_members=listed)


BUILTIN_CLASSES = ("graphs", "linear_graphs", "connected_linear_graphs",
                   "forests", "trees", "linear_orders")


def descriptor_from_json(payload: object) -> ClassDescriptor:
    if not isinstance(payload, dict):
        raise FormatError("class descriptor must be an object")
    if "builtin" in payload:
        return builtin_class(str(payload["builtin"]))
    if "members" in payload:
        sig = signature_from_json(payload["signature"]) if "signature" in payload else None
        listed = [structure_from_json(p, sig) for p in payload["members"]]
        desc = explicit_class(str(payload.get("name", "explicit")), listed,
                              payload.get("symmetric", ()),
                              payload.get("irreflexive", payload.get("symmetric", ())))
        desc.json_payload = dict(payload)
        return desc
    if "signature" not in payload:
        raise FormatError("class descriptor needs a signature or builtin name")
    sig = signature_from_json(payload["signature"])
    symmetric = frozenset(str(x) for x in payload.get("symmetric", []))
    irreflexive = frozenset(str(x) for x in payload.get("irreflexive", symmetric))
    for n in symmetric | irreflexive:
        if n not in sig:
            raise FormatError(f"declared relation {n!r} not in signature")
    forbidden = [structure_from_json(p, sig) for p in payload.get("forbidden_induced", [])]
    for f in forbidden:
        if f.signature != sig:
            raise FormatError("forbidden structure signature mismatch")
    deg = payload.get("max_degree")
    if deg is not None and (not isinstance(deg, int) or deg < 0):
        raise FormatError("max_degree must be a non-negative integer")
    acyclic = bool(payload.get("acyclic", False))
    connected = bool(payload.get("connected", False))

    def member(s: FinStructure) -> bool:
        if not well_formed(s, symmetric, irreflexive):
            return False
        if deg is not None and max_degree(s) > deg:
            return False
        if acyclic and has_undirected_cycle(s):
            return False
        if connected and not is_connected(s):
            return False
        return all(find_embedding(f, s) is None for f in forbidden)

    def refuter(s: FinStructure) -> bool:
        if deg is not None and max_degree(s) > deg:
            return True
        return acyclic and has_undirected_cycle(s)

    unconstrained = not forbidden and deg is None and not acyclic and not connected
    name = str(payload.get("name", "custom"))
    clean = {k: v for k, v in payload.items()}
    return ClassDescriptor(name, sig, member, symmetric, irreflexive,
                           refuter=refuter if (deg is not None or acyclic) else None,
                           unconstrained=unconstrained, json_payload=clean)


# --- enumeration -------------------------------------------------------------

def extension_atoms(sig: Signature, old_size: int, symmetric: frozenset[str],
                    irreflexive: frozenset[str]) -> list[tuple[tuple[str, tuple[int, ...]], ...]]:
    """Atomic tuple groups involving element ``old_size`` (a symmetric pair
    counts as one atom)."""
    new = old_size
    atoms: list[tuple[tuple[str, tuple[int, ...]], ...]] = []
    for sym in sig:
        if sym.arity == 1:
            atoms.append(((sym.name, (new,)),))
        elif sym.arity == 2:
            if sym.name not in irreflexive:
                atoms.append(((sym.name, (new, new)),))
            for i in range(old_size):
                if sym.name in symmetric:
                    atoms.append(((sym.name, (i, new)), (sym.name, (new, i))))
                else:
                    atoms.append(((sym.name, (i, new)),))
                    atoms.append(((sym.name, (new, i)),))
        else:
            n2 = old_size + 1
            for t in _tuples_with(new, sym.arity, n2):
                atoms.append(((sym.name, t),))
    return atoms


def _tuples_with(x: int, arity: int, n: int):
    from itertools import product
    for t in product(range(n), repeat=arity):
        if x in t:
            yield t


def one_point_extensions(desc: ClassDescriptor, base: FinStructure,
                         prune_refuted: bool = True) -> list[FinStructure]:
    """All structures extending ``base`` by one element, no deduplication."""
    atoms = extension_atoms(desc.signature, base.size, desc.symmetric, desc.irreflexive)
    if len(atoms) > 24:
        raise StructureError("extension pattern space too large")
    out = []
    rels0 = {n: set(ts) for n, ts in base.relations.items()}
    for mask in range(1 << len(atoms)):
        rels = {n: set(ts) for n, ts in rels0.items()}
        m = mask
        while m:
            bit = m & -m
            m ^= bit
            for name, t in atoms[bit.bit_length() - 1]:
                rels[name].add(t)
        s = FinStructure(desc.signature, base.size + 1,
                         {n: frozenset(ts) for n, ts in rels.items()})
        if prune_refuted and desc.refuted(s):
            continue
        out.append(s)
    return out


def enumerate_members(desc: ClassDescriptor, max_size: int) -> list[FinStructure]:
    """Members up to ``max_size`` and up to isomorphism, ascending by size
    then canonical code; duplicate-free.

    Augments members only.  Complete because every expressible class is
    either hereditary or admits a removable non-cut element (connectivity is
    the sole non-hereditary constraint, and spanning-tree leaves survive it).
    """
    if desc.explicit_members is not None:
        found = {}
        for s in desc.explicit_members:
            if s.size <= max_size:
                found.setdefault((s.size, canonical_code(s)), s)
        return [s for _, s in sorted(found.items())]
    levels: list[list[FinStructure]] = desc._cache.setdefault("levels", [])
    if not levels:
        empty = FinStructure(desc.signature, 0, {})
        levels.append([empty] if desc.member(empty) else [])
    while len(levels) <= max_size:
        n = len(levels)
        seeds = levels[n - 1] if n > 1 else [FinStructure(desc.signature, 0, {})]
        found: dict[bytes, FinStructure] = {}
        for b in seeds:
            for s in one_point_extensions(desc, b):
                if not desc.member(s):
                    continue
                code = canonical_code(s)
                if code not in found:
                    found[code] = s
        levels.append([s for _, s in sorted(found.items())])
    return [s for lvl in levels[:max_size + 1] for s in lvl]


def iter_pointed_extensions(desc: ClassDescriptor, base: FinStructure,
                            extra: int):
    """Lazily yield members extending ``base`` (kept as the identity prefix)
    by up to ``extra`` elements, deduplicated up to isomorphisms fixing
    ``base`` pointwise, smaller extensions first."""
    if not desc.member(base):
        raise StructureError("base must be a class member")
    base_colors = list(range(base.size))
    seen = {canonical_code(base, base_colors)}
    yield base
    frontier = [base]
    for _ in range(extra):
        nxt = []
        for b in frontier:
            colors = base_colors + [base.size] * (b.size - base.size)
            for s in one_point_extensions(desc, b):
                if not desc.member(s):
                    continue
                code = canonical_code(s, colors + [base.size])
                if code not in seen:
                    seen.add(code)
                    nxt.append(s)
                    yield s
        frontier = nxt


def pointed_extensions(desc: ClassDescriptor, base: FinStructure,
                       extra: int) -> list[FinStructure]:
    """Eager form of :func:`iter_pointed_extensions`.  Complete for
    hereditary classes; connected classes may miss multi-point extensions
    whose intermediate stages leave the class."""
    return list(iter_pointed_extensions(desc, base, extra))


def member_codes(desc: ClassDescriptor, max_size: int) -> set[bytes]:
    key = ("codes", max_size)
    cache = desc._cache
    if key not in cache:
        cache[key] = {canonical_code(s) for s in enumerate_members(desc, max_size)}
    return cache[key]


@dataclass
class HereditaryReport:
    hereditary: bool
    closure: list[FinStructure]
    counterexample: tuple[FinStructure, FinStructure] | None
    bound: int


def hereditary_closure(desc: ClassDescriptor, bound: int) -> HereditaryReport:
    """Closure of the members up to ``bound`` under induced substructures."""
    members = enumerate_members(desc, bound)
    codes = {canonical_code(s): s for s in members}
    extra: dict[bytes, FinStructure] = {}
    counterexample = None
    from .structures import induced_substructure
    for s in members:
        for k in range(s.size):
            for subset in combinations(range(s.size), k):
                sub, _ = induced_substructure(s, subset)
                c = canonical_code(sub)
                if c not in codes and c not in extra:
                    extra[c] = sub
                    if counterexample is None:
                        counterexample = (s, sub)
    closure = sorted(list(codes.values()) + list(extra.values()),
                     key=lambda x: (x.size, canonical_code(x)))
    return HereditaryReport(not extra, closure, counterexample, bound)


def is_cofinal_subclass(sub: ClassDescriptor, sup: ClassDescriptor,
                        bound: int, target_bound: int) -> vd.Verdict:
    """Does every member of ``sup`` up to ``bound`` embed into some member
    of ``sub`` up to ``target_bound``?  Enumeration of ``sub`` is complete,
    so a miss is exhaustive."""
    if sub.signature != sup.signature:
        raise StructureError("signature mismatch")
    bounds = {"bound": bound, "target_bound": target_bound}
    targets = enumerate_members(sub, target_bound)
    cert = []
    for x in enumerate_members(sup, bound):
        hit = None
        for y in targets:
            if y.size < x.size:
                continue
            emb = find_embedding(x, y)
            if emb is not None:
                hit = (y, emb)
                break
        if hit is None:
            return vd.fails(bounds=bounds, witness=structure_to_json(x),
                            reason="member embeds into no target up to bound")
        cert.append({"member": structure_to_json(x),
                     "target": structure_to_json(hit[0]),
                     "mapping": list(hit[1].mapping)})
    return vd.holds(bounds=bounds, certificate=cert)
