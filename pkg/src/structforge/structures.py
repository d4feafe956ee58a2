"""Finite relational structures over finite signatures.

Conventions used across the package:

* universes are always initial segments ``0..size-1`` of the naturals;
* relations are stored as explicit tuple sets (a symmetric edge appears in
  both orientations);
* embeddings are injective and induced: they preserve and reflect every
  relation of the signature.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence


class StructureError(ValueError):
    """Malformed structure, embedding or extension."""


class FormatError(ValueError):
    """Unparseable serialized payload."""


@dataclass(frozen=True, order=True)
class RelationSymbol:
    name: str
    arity: int


@dataclass(frozen=True)
class Signature:
    relations: tuple[RelationSymbol, ...]

    def __post_init__(self) -> None:
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise StructureError("duplicate relation name in signature")
        for r in self.relations:
            if r.arity < 1:
                raise StructureError(f"relation {r.name!r} has arity < 1")

    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.relations)

    def arity(self, name: str) -> int:
        for r in self.relations:
            if r.name == name:
                return r.arity
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(r.name == name for r in self.relations)

    def __iter__(self):
        return iter(self.relations)


GRAPH_SIGNATURE = Signature((RelationSymbol("E", 2),))
ORDER_SIGNATURE = Signature((RelationSymbol("<", 2),))


@dataclass(frozen=True, eq=False)
class FinStructure:
    signature: Signature
    size: int
    relations: Mapping[str, frozenset[tuple[int, ...]]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.size < 0:
            raise StructureError("negative size")
        norm: dict[str, frozenset[tuple[int, ...]]] = {}
        for sym in self.signature:
            tuples = frozenset(tuple(t) for t in self.relations.get(sym.name, ()))
            for t in tuples:
                if len(t) != sym.arity:
                    raise StructureError(f"tuple {t} has wrong arity for {sym.name!r}")
                if any(not (0 <= x < self.size) for x in t):
                    raise StructureError(f"tuple {t} out of range for size {self.size}")
            norm[sym.name] = tuples
        for name in self.relations:
            if name not in self.signature:
                raise StructureError(f"relation {name!r} not in signature")
        object.__setattr__(self, "relations", norm)
        key = (self.size, tuple(tuple(sorted(norm[s.name])) for s in self.signature))
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))
        object.__setattr__(self, "_adj", {})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FinStructure):
            return NotImplemented
        return self.signature == other.signature and self._key == other._key  # type: ignore[attr-defined]

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]

    def __repr__(self) -> str:
        rels = {n: sorted(ts) for n, ts in self.relations.items() if ts}
        return f"FinStructure(size={self.size}, {rels})"

    def rel(self, name: str) -> frozenset[tuple[int, ...]]:
        return self.relations[name]

    def adjacency(self, name: str) -> tuple[list[int], list[int]]:
        """Per-element successor/predecessor bitmasks of a binary relation."""
        cache = self._adj  # type: ignore[attr-defined]
        if name not in cache:
            if self.signature.arity(name) != 2:
                raise StructureError(f"adjacency needs arity 2, {name!r} is not")
            succ = [0] * self.size
            pred = [0] * self.size
            for a, b in self.relations[name]:
                succ[a] |= 1 << b
                pred[b] |= 1 << a
            cache[name] = (succ, pred)
        return cache[name]

    def tuple_counts(self) -> tuple[int, ...]:
        return tuple(len(self.relations[s.name]) for s in self.signature)


@dataclass(frozen=True)
class PartialMap:
    """Partial function between element sets of two structures."""

    source: FinStructure
    target: FinStructure
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        seen_s: set[int] = set()
        seen_t: set[int] = set()
        for a, b in self.pairs:
            if not (0 <= a < self.source.size and 0 <= b < self.target.size):
                raise StructureError(f"pair ({a},{b}) out of range")
            if a in seen_s or b in seen_t:
                raise StructureError("partial map not injective")
            seen_s.add(a)
            seen_t.add(b)

    def as_dict(self) -> dict[int, int]:
        return dict(self.pairs)


@dataclass(frozen=True)
class Embedding:
    """Total injective induced map; ``mapping[i]`` is the image of ``i``."""

    source: FinStructure
    target: FinStructure
    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.mapping) != self.source.size:
            raise StructureError("mapping length differs from source size")
        if len(set(self.mapping)) != len(self.mapping):
            raise StructureError("mapping not injective")
        for x in self.mapping:
            if not (0 <= x < self.target.size):
                raise StructureError("mapping image out of range")

    def __call__(self, i: int) -> int:
        return self.mapping[i]

    def image(self) -> frozenset[int]:
        return frozenset(self.mapping)

    def is_valid(self) -> bool:
        try:
            check_induced(self.source, self.target, self.mapping)
        except StructureError:
            return False
        return True

    def compose(self, outer: "Embedding") -> "Embedding":
        """Return ``outer after self`` (source -> outer.target)."""
        if outer.source is not self.target and outer.source != self.target:
            raise StructureError("composition mismatch")
        return Embedding(self.source, outer.target,
                         tuple(outer.mapping[x] for x in self.mapping))

    def is_isomorphism(self) -> bool:
        return self.source.size == self.target.size and self.is_valid()


def check_induced(source: FinStructure, target: FinStructure,
                  mapping: Sequence[int]) -> None:
    """Raise unless ``mapping`` preserves and reflects every relation."""
    if source.signature != target.signature:
        raise StructureError("signature mismatch")
    img = set(mapping)
    inv = {t: s for s, t in enumerate(mapping)}
    for sym in source.signature:
        st = source.relations[sym.name]
        tt = target.relations[sym.name]
        for t in st:
            if tuple(mapping[x] for x in t) not in tt:
                raise StructureError(f"{sym.name} tuple {t} not preserved")
        for t in tt:
            if all(x in img for x in t):
                if tuple(inv[x] for x in t) not in st:
                    raise StructureError(f"{sym.name} tuple {t} not reflected")


def identity_embedding(s: FinStructure) -> Embedding:
    return Embedding(s, s, tuple(range(s.size)))


def induced_substructure(s: FinStructure, subset: Iterable[int]) -> tuple[FinStructure, Embedding]:
    """Substructure on ``subset``, re-indexed to 0..k-1, plus its inclusion."""
    elems = sorted(set(subset))
    for x in elems:
        if not (0 <= x < s.size):
            raise StructureError(f"element {x} out of range")
    pos = {x: i for i, x in enumerate(elems)}
    keep = set(elems)
    rels = {
        name: frozenset(tuple(pos[x] for x in t) for t in ts
                        if all(x in keep for x in t))
        for name, ts in s.relations.items()
    }
    sub = FinStructure(s.signature, len(elems), rels)
    return sub, Embedding(sub, s, tuple(elems))


def extend_structure(s: FinStructure, new_count: int,
                     added: Mapping[str, Iterable[tuple[int, ...]]] | None = None
                     ) -> tuple[FinStructure, Embedding]:
    """Append ``new_count`` fresh elements plus tuples touching them.

    Tuples entirely among old elements are rejected: they would break the
    inclusion being induced.
    """
    if new_count < 0:
        raise StructureError("negative extension")
    added = added or {}
    n2 = s.size + new_count
    rels = {name: set(ts) for name, ts in s.relations.items()}
    for name, ts in added.items():
        if name not in s.signature:
            raise StructureError(f"relation {name!r} not in signature")
        for t in ts:
            t = tuple(t)
            if all(x < s.size for x in t):
                raise StructureError(f"tuple {t} only touches old elements")
            if any(not (0 <= x < n2) for x in t):
                raise StructureError(f"tuple {t} out of range")
            rels.setdefault(name, set()).add(t)
    ext = FinStructure(s.signature, n2, {n: frozenset(ts) for n, ts in rels.items()})
    incl = Embedding(s, ext, tuple(range(s.size)))
    return ext, incl


def relabel(s: FinStructure, perm: Sequence[int]) -> FinStructure:
    """Rename elements; ``perm[old] = new`` must be a permutation."""
    if sorted(perm) != list(range(s.size)):
        raise StructureError("not a permutation")
    rels = {name: frozenset(tuple(perm[x] for x in t) for t in ts)
            for name, ts in s.relations.items()}
    return FinStructure(s.signature, s.size, rels)


def disjoint_union(a: FinStructure, b: FinStructure) -> tuple[FinStructure, Embedding, Embedding]:
    if a.signature != b.signature:
        raise StructureError("signature mismatch")
    off = a.size
    rels = {name: frozenset(ts) | frozenset(tuple(x + off for x in t) for t in b.relations[name])
            for name, ts in a.relations.items()}
    u = FinStructure(a.signature, a.size + b.size, rels)
    return u, Embedding(a, u, tuple(range(a.size))), Embedding(b, u, tuple(range(off, off + b.size)))


def lift_isomorphism(h: Embedding, incl: Embedding) -> tuple[FinStructure, Embedding, Embedding]:
    """Pull an extension back along an isomorphism.

    Given an isomorphism ``h: A -> B`` and an inclusion-style embedding
    ``incl: B -> Bp``, build ``Ap >= A`` (A kept as the first elements) with
    an isomorphism ``hp: Ap -> Bp`` extending ``incl . h``.  Fresh elements
    of ``Ap`` correspond, in ascending order, to elements of ``Bp`` outside
    the image of ``incl . h``.
    """
    if not h.is_isomorphism():
        raise StructureError("h is not an isomorphism")
    a, bp = h.source, incl.target
    head = [incl.mapping[h.mapping[i]] for i in range(a.size)]
    taken = set(head)
    tail = [x for x in range(bp.size) if x not in taken]
    hp_map = tuple(head + tail)
    inv = [0] * bp.size
    for i, x in enumerate(hp_map):
        inv[x] = i
    rels = {name: frozenset(tuple(inv[x] for x in t) for t in ts)
            for name, ts in bp.relations.items()}
    ap = FinStructure(a.signature, bp.size, rels)
    check_induced(a, ap, tuple(range(a.size)))
    return ap, Embedding(a, ap, tuple(range(a.size))), Embedding(ap, bp, hp_map)


# --- serialization ---------------------------------------------------------

def signature_to_json(sig: Signature) -> list[dict]:
    return [{"name": r.name, "arity": r.arity} for r in sig]


def signature_from_json(payload: object) -> Signature:
    if not isinstance(payload, list) or not payload:
        raise FormatError("signature must be a non-empty list")
    rels = []
    for item in payload:
        if not isinstance(item, dict) or "name" not in item or "arity" not in item:
            raise FormatError(f"bad relation entry {item!r}")
        if not isinstance(item["arity"], int):
            raise FormatError("arity must be an integer")
        rels.append(RelationSymbol(str(item["name"]), item["arity"]))
    try:
        return Signature(tuple(rels))
    except StructureError as exc:
        raise FormatError(str(exc)) from exc


def structure_to_json(s: FinStructure) -> dict:
    return {
        "signature": signature_to_json(s.signature),
        "size": s.size,
        "relations": {name: sorted([list(t) for t in ts])
                      for name, ts in s.relations.items()},
    }


def structure_from_json(payload: object, signature: Signature | None = None) -> FinStructure:
    """Read a structure; accepts the ``graph`` shorthand for simple graphs."""
    if not isinstance(payload, dict):
        raise FormatError("structure payload must be an object")
    if "graph" in payload:
        g = payload["graph"]
        if not isinstance(g, dict) or "vertices" not in g:
            raise FormatError("graph shorthand needs vertices")
        n = g["vertices"]
        if not isinstance(n, int) or n < 0:
            raise FormatError("vertices must be a non-negative integer")
        edges = set()
        for e in g.get("edges", []):
            if not (isinstance(e, (list, tuple)) and len(e) == 2):
                raise FormatError(f"bad edge {e!r}")
            a, b = e
            if not (isinstance(a, int) and isinstance(b, int)) or a == b:
                raise FormatError(f"bad edge {e!r}")
            edges.add((a, b))
            edges.add((b, a))
        try:
            return FinStructure(GRAPH_SIGNATURE, n, {"E": frozenset(edges)})
        except StructureError as exc:
            raise FormatError(str(exc)) from exc
    if "signature" in payload:
        signature = signature_from_json(payload["signature"])
    if signature is None:
        raise FormatError("missing signature")
    if "size" not in payload or not isinstance(payload["size"], int):
        raise FormatError("missing or bad size")
    rels_in = payload.get("relations", {})
    if not isinstance(rels_in, dict):
        raise FormatError("relations must be an object")
    rels = {}
    for name, ts in rels_in.items():
        if not isinstance(ts, list):
            raise FormatError(f"relation {name!r} must list tuples")
        out = set()
        for t in ts:
            if not isinstance(t, (list, tuple)) or not all(isinstance(x, int) for x in t):
                raise FormatError(f"bad tuple {t!r} in {name!r}")
            out.add(tuple(t))
        rels[name] = frozenset(out)
    try:
        return FinStructure(signature, payload["size"], rels)
    except StructureError as exc:
        raise FormatError(str(exc)) from exc


def dumps(s: FinStructure) -> str:
    return json.dumps(structure_to_json(s), sort_keys=True)


def loads(text: str, signature: Signature | None = None) -> FinStructure:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    return structure_from_json(payload, signature)
