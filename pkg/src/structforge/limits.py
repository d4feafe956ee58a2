"""Stagewise generic limits over a finite-structure class.

The builder grows a chain of members U_0 <= U_1 <= ... (universes initial
segments, each stage an induced prefix of the next) while meeting a
scheduled family of requirements:

* embed requirements: a fixed member must embed into some stage;
* realize requirements: the induced structure on a small set of existing
  positions is paired with a good extension, which is then realized on
  those positions;
* weak-extension requirements: once a good extension Ap is realized at
  concrete positions, each embedding f of Ap into a small member B must
  be answered by g: B -> U with g(f(x)) = x on the base positions.

Every requirement is met by direct search first, then by freely gluing
fresh elements, then by bounded amalgamation; a requirement that stays
out of reach is flagged in the ledger, never dropped.  Position sets
that admit no realization at all leave their extension family vacuous,
and the ledger says so.

The finished run re-verifies literally (``verify_run_ledger``), probes
as a target oracle (``verify_limit``), extends partial embeddings to
longer partial automorphisms by a back-and-forth argument
(``extend_to_automorphism``) and compares against other runs of the
same class (``compare_runs``).
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from random import Random

from . import verdict as vd
from .amalgamation import (DEFAULT_EXT_BOUND, DEFAULT_INSTANCE_BOUND,
                           DEFAULT_V_BOUND, check_property, find_amalgam,
                           find_good_extension, is_good_pair)
from .canon import canonical_code
from .classes import ClassDescriptor, descriptor_from_json, enumerate_members
from .oracles import LimitOracle, ProbeReport, weak_injectivity_probe
from .search import (automorphisms, embeddings_iter, find_embedding,
                     orbit_representative)
from .structures import (Embedding, FinStructure, FormatError,
                         StructureError, extend_structure,
                         identity_embedding, induced_substructure,
                         structure_from_json, structure_to_json)

RUN_SCHEMA = "structforge/limit/1"

SEARCH_DEFAULTS = {
    "ext_bound": DEFAULT_EXT_BOUND,
    "instance_bound": DEFAULT_INSTANCE_BOUND,
    "v_bound": DEFAULT_V_BOUND,
    "window": 6,
    "pair_window": None,  # None: follow window
    "weak_bound": None,  # None: follow req_bound
    "attempts": 3,
    "batch_floor": 8,
    "batch_cap": 32,
}


# --- run container ------------------------------------------------------------


@dataclass
class LimitRun:
    """A finished (possibly partial) construction: the stage chain plus the
    requirement ledger that justifies it."""

    desc: ClassDescriptor
    stages: list[FinStructure]
    ledger: list[dict]
    seed: int
    bounds: dict

    def final(self) -> FinStructure:
        return self.stages[-1]

    def unresolved(self) -> list[int]:
        """Ledger indices whose requirement is neither met nor vacuous."""
        bad = []
        for i, entry in enumerate(self.ledger):
            if entry["status"] not in ("met", "unrealized", "inapplicable"):
                bad.append(i)
        return bad

    def to_json(self) -> dict:
        return {"schema": RUN_SCHEMA,
                "class": self.desc.to_json(),
                "seed": self.seed,
                "bounds": self.bounds,
                "stages": _stage_deltas(self.stages),
                "ledger": self.ledger}

    @staticmethod
    def from_json(payload: dict) -> "LimitRun":
        if not isinstance(payload, dict) or payload.get("schema") != RUN_SCHEMA:
            raise FormatError(f"expected a {RUN_SCHEMA} payload")
        desc = descriptor_from_json(payload["class"])
        stages = _stages_from_deltas(payload["stages"], desc.signature)
        return LimitRun(desc, stages, list(payload["ledger"]),
                        int(payload["seed"]), dict(payload["bounds"]))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))


def load_run(path: str | Path) -> LimitRun:
    return LimitRun.from_json(json.loads(Path(path).read_text()))


def _stage_deltas(stages: list[FinStructure]) -> list[dict]:
    out: list[dict] = [structure_to_json(stages[0])]
    for prev, cur in zip(stages, stages[1:]):
        added: dict[str, list[list[int]]] = {}
        for name, tuples in cur.relations.items():
            fresh = sorted(t for t in tuples
                           if any(x >= prev.size for x in t))
            if fresh:
                added[name] = [list(t) for t in fresh]
        out.append({"added_elements": cur.size - prev.size,
                    "added_tuples": added})
    return out


def _stages_from_deltas(payload: list, signature) -> list[FinStructure]:
    if not payload:
        raise FormatError("a run needs at least one stage")
    stages = [structure_from_json(payload[0], signature)]
    for delta in payload[1:]:
        added = {name: [tuple(t) for t in ts]
                 for name, ts in delta.get("added_tuples", {}).items()}
        cur, _ = extend_structure(stages[-1], delta["added_elements"], added)
        stages.append(cur)
    return stages


def _empty(desc: ClassDescriptor) -> FinStructure:
    return FinStructure(desc.signature, 0,
                        {r.name: frozenset() for r in desc.signature})


# --- the builder --------------------------------------------------------------


def build_limit(desc: ClassDescriptor, stages: int, req_bound: int,
                search: dict | None = None, seed: int = 0) -> LimitRun:
    """Grow a chain of ``stages`` members meeting embed and weak-extension
    requirements for all types within ``req_bound``.

    Deterministic given the seed (it only shuffles the order in which the
    embed requirements enter the queue).  The class must not refute weak
    amalgamation at the search bounds: density of the extension
    requirements rests on it.
    """
    if stages < 1:
        raise StructureError("need at least one stage")
    if req_bound < 1:
        raise StructureError("requirement bound must be positive")
    opts = dict(SEARCH_DEFAULTS)
    opts.update(search or {})
    if opts["weak_bound"] is None:
        opts["weak_bound"] = req_bound
    if opts["pair_window"] is None:
        opts["pair_window"] = opts["window"]
    wap = check_property(desc, "WAP", member_bound=min(req_bound, 4),
                         ext_bound=opts["ext_bound"],
                         instance_bound=opts["instance_bound"],
                         v_bound=opts["v_bound"])
    if wap.status == vd.FAILS:
        raise StructureError(
            "the class refutes weak amalgamation at these bounds; the "
            "extension requirements are not dense")
    builder = _Builder(desc, stages, req_bound, opts, seed, wap)
    return builder.run()


class _Builder:
    def __init__(self, desc: ClassDescriptor, n_stages: int, req_bound: int,
                 opts: dict, seed: int, wap: vd.Verdict):
        self.desc = desc
        self.n_stages = n_stages
        self.req_bound = req_bound
        self.opts = opts
        self.seed = seed
        self.rng = Random(seed)
        self.u = self._initial()
        self.stages = [self.u]
        self.ledger: list[dict] = []
        self.queue: deque[int] = deque()
        self.abstract: dict[int, FinStructure] = {}
        self.good_cache: dict[FinStructure, tuple | None] = {}
        self.spawn_list = self._position_schedule()
        self.spawn_cursor = 0
        self.embeds_spawned = False
        self.wap = wap

    def _initial(self) -> FinStructure:
        empty = _empty(self.desc)
        if self.desc.member(empty):
            return empty
        members = enumerate_members(self.desc, self.req_bound)
        if not members:
            raise StructureError("no member to start the chain from")
        return members[0]

    def _position_schedule(self) -> list[tuple[int, ...]]:
        # singletons and pairs over the window, unlocked as the universe
        # reaches them; ordered by (largest position, size, positions)
        window = self.opts["window"]
        pair_window = min(self.opts["pair_window"], window)
        items: list[tuple[int, ...]] = []
        for top in range(window):
            items.append((top,))
            if top < pair_window:
                for low in range(top):
                    items.append((low, top))
        return items

    def run(self) -> LimitRun:
        for k in range(1, self.n_stages):
            self._pull(k)
            remaining = self.n_stages - k
            pending = len(self.queue)
            batch = min(self.opts["batch_cap"],
                        max(self.opts["batch_floor"],
                            -(-pending // remaining)))
            for _ in range(batch):
                if not self.queue:
                    break
                self._attempt(self.queue.popleft(), k)
            self._snapshot()
        bounds = {"stages": self.n_stages, "req_bound": self.req_bound,
                  "seed": self.seed, "wap_status": self.wap.status}
        bounds.update(self.opts)
        return LimitRun(self.desc, self.stages, self.ledger, self.seed,
                        bounds)

    def _snapshot(self) -> None:
        prev = self.stages[-1]
        if self.u is not prev:
            if not self.desc.member(self.u):
                raise StructureError("internal: stage left the class")
            cut, _ = induced_substructure(self.u, range(prev.size))
            if cut != prev:
                raise StructureError("internal: stage broke the chain")
        self.stages.append(self.u)

    def _pull(self, stage: int) -> None:
        if not self.embeds_spawned:
            self.embeds_spawned = True
            members = [m for m in enumerate_members(self.desc, self.req_bound)
                       if m.size > 0]
            self.rng.shuffle(members)
            for m in members:
                idx = self._add({"kind": "embed",
                                 "target": structure_to_json(m)})
                self.abstract[idx] = m
        while (self.spawn_cursor < len(self.spawn_list)
               and max(self.spawn_list[self.spawn_cursor]) < self.u.size):
            positions = self.spawn_list[self.spawn_cursor]
            self.spawn_cursor += 1
            self._add({"kind": "realize", "positions": list(positions)})

    def _add(self, entry: dict) -> int:
        idx = len(self.ledger)
        entry.update(index=idx, status="pending", attempts=0,
                     first_stage=None, stage=None)
        self.ledger.append(entry)
        self.queue.append(idx)
        return idx

    def _attempt(self, idx: int, stage: int) -> None:
        entry = self.ledger[idx]
        if entry["first_stage"] is None:
            entry["first_stage"] = stage
        entry["attempts"] += 1
        handler = {"embed": self._try_embed, "realize": self._try_realize,
                   "weak-extend": self._try_weak}[entry["kind"]]
        outcome = handler(entry, stage)
        if outcome == "retry":
            if entry["attempts"] >= self.opts["attempts"]:
                # realize items leave their extension family vacuous;
                # anything else is honestly stuck
                entry["status"] = ("unrealized" if entry["kind"] == "realize"
                                   else "stuck")
            else:
                self.queue.append(idx)

    def _amalgam_pad(self, entry: dict) -> int:
        return 2 + 2 * (entry["attempts"] - 1)

    # --- embed requirements ---

    def _try_embed(self, entry: dict, stage: int) -> str:
        target = self.abstract.get(entry["index"])
        if target is None:
            target = structure_from_json(entry["target"],
                                         self.desc.signature)
            self.abstract[entry["index"]] = target
        hit = next(embeddings_iter(target, self.u), None)
        if hit is None:
            hit = self._glue(target, {})
        if hit is None:
            empty = _empty(self.desc)
            pad = self._amalgam_pad(entry)
            got = find_amalgam(Embedding(empty, self.u, ()),
                               Embedding(empty, target, ()), self.desc,
                               v_bound=self.u.size + target.size + pad)
            if got is not None:
                joined, fp, gp = got
                if fp.mapping != tuple(range(self.u.size)):
                    raise StructureError("internal: amalgam moved the chain")
                self.u = joined
                hit = gp.mapping
        if hit is None:
            return "retry"
        entry.update(status="met", stage=stage, witness=list(hit))
        return "met"

    # --- realize requirements ---

    def _try_realize(self, entry: dict, stage: int) -> str:
        positions = tuple(entry["positions"])
        z, zinc = induced_substructure(self.u, positions)
        if not self.desc.member(z):
            entry.update(status="inapplicable", stage=stage,
                         reason="positions induce a non-member")
            return "met"
        entry["base"] = structure_to_json(z)
        entry["a_size"] = z.size
        good = self._good_extension(z)
        if good is None:
            entry.update(status="stuck", stage=stage,
                         reason="no good extension within bounds")
            return "met"
        zp, inc, cert = good
        entry["extension"] = structure_to_json(zp)
        entry["goodness"] = cert.to_json()
        ap_map = self._realize_at(z, zp, zinc, inc, entry)
        if ap_map is None:
            return "retry"
        entry.update(status="met", stage=stage, ap_map=list(ap_map))
        self._spawn_weak(entry, zp, list(ap_map), stage)
        return "met"

    def _good_extension(self, z: FinStructure):
        # keyed by the labeled base: same-type bases can be labeled
        # differently, and the extension keeps its base as the prefix
        if z not in self.good_cache:
            self.good_cache[z] = find_good_extension(
                z, self.desc, ext_bound=self.opts["ext_bound"],
                instance_bound=self.opts["instance_bound"],
                v_bound=self.opts["v_bound"])
        return self.good_cache[z]

    def _realize_at(self, z: FinStructure, zp: FinStructure, zinc: Embedding,
                    inc: Embedding, entry: dict):
        positions = tuple(entry["positions"])
        if zp.size == z.size:
            return positions
        pin = {i: positions[i] for i in range(z.size)}
        hit = next(embeddings_iter(zp, self.u, pin=pin), None)
        if hit is not None:
            return hit
        glued = self._glue(zp, pin)
        if glued is not None:
            return glued
        pad = self._amalgam_pad(entry)
        got = find_amalgam(zinc, inc, self.desc,
                           v_bound=self.u.size + zp.size + pad)
        if got is None:
            return None
        joined, fp, gp = got
        if fp.mapping != tuple(range(self.u.size)):
            raise StructureError("internal: amalgam moved the chain")
        self.u = joined
        return gp.mapping

    def _glue(self, shape: FinStructure, pin: dict[int, int]):
        """Append the unpinned part of ``shape`` as fresh elements wired by
        the shape's own tuples; valid only when the result stays a member."""
        mapping: dict[int, int] = dict(pin)
        fresh = 0
        for j in range(shape.size):
            if j not in mapping:
                mapping[j] = self.u.size + fresh
                fresh += 1
        added: dict[str, list[tuple[int, ...]]] = {}
        for name, tuples in shape.relations.items():
            moved = [tuple(mapping[x] for x in t) for t in tuples
                     if any(x not in pin for x in t)]
            if moved:
                added[name] = moved
        cand, _ = extend_structure(self.u, fresh, added)
        if not self.desc.member(cand):
            return None
        out = tuple(mapping[j] for j in range(shape.size))
        if not Embedding(shape, cand, out).is_valid():
            return None
        self.u = cand
        return out

    # --- weak-extension requirements ---

    def _spawn_weak(self, parent: dict, zp: FinStructure,
                    ap_map: list[int], stage: int) -> None:
        a_size = parent["a_size"]
        cap = max(self.opts["weak_bound"], zp.size)
        zp_json = structure_to_json(zp)
        for b in enumerate_members(self.desc, cap):
            if b.size < zp.size:
                continue
            auts = automorphisms(b)
            seen: set[tuple[int, ...]] = set()
            for fmap in embeddings_iter(zp, b):
                rep = orbit_representative(fmap, auts)
                if rep in seen:
                    continue
                seen.add(rep)
                idx = self._add({"kind": "weak-extend",
                                 "a_elements": ap_map[:a_size],
                                 "a_size": a_size,
                                 "ap_map": list(ap_map),
                                 "ap": zp_json,
                                 "f": list(rep),
                                 "b": structure_to_json(b),
                                 "parent": parent["index"]})
                self.abstract[idx] = b

    def _try_weak(self, entry: dict, stage: int) -> str:
        b = self.abstract.get(entry["index"])
        if b is None:
            b = structure_from_json(entry["b"], self.desc.signature)
            self.abstract[entry["index"]] = b
        fmap = entry["f"]
        a_elements = entry["a_elements"]
        pin = {fmap[i]: a_elements[i] for i in range(entry["a_size"])}
        hit = next(embeddings_iter(b, self.u, pin=pin), None)
        if hit is None:
            hit = self._glue(b, pin)
        if hit is None:
            zp = structure_from_json(entry["ap"], self.desc.signature)
            left = Embedding(zp, self.u, tuple(entry["ap_map"]))
            right = Embedding(zp, b, tuple(fmap))
            pad = self._amalgam_pad(entry)
            got = find_amalgam(left, right, self.desc,
                               v_bound=self.u.size + b.size + pad,
                               agree_set=list(range(entry["a_size"])))
            if got is not None:
                joined, fp, gp = got
                if fp.mapping != tuple(range(self.u.size)):
                    raise StructureError("internal: amalgam moved the chain")
                self.u = joined
                hit = gp.mapping
        if hit is None:
            return "retry"
        entry.update(status="met", stage=stage, witness=list(hit))
        return "met"


# --- literal re-verification ---------------------------------------------------


def verify_run_ledger(run: LimitRun) -> dict:
    """Re-check every met ledger entry against its recorded stage, the
    chain inclusions, class membership of every stage, and scheduling
    fairness (a requirement created as the i-th is first attempted no
    later than stage i+1)."""
    failures: list[dict] = []
    checked = 0
    for i, (prev, cur) in enumerate(zip(run.stages, run.stages[1:])):
        cut, _ = induced_substructure(cur, range(prev.size))
        if cut != prev:
            failures.append({"chain": i + 1, "reason": "not an induced prefix"})
        if not run.desc.member(cur):
            failures.append({"chain": i + 1, "reason": "stage not a member"})
    for entry in run.ledger:
        first = entry.get("first_stage")
        if first is not None and first > entry["index"] + 1:
            failures.append({"entry": entry["index"],
                             "reason": "scheduled unfairly late"})
        if entry["status"] != "met":
            continue
        checked += 1
        stage = run.stages[entry["stage"]]
        try:
            problem = _recheck(run.desc, entry, stage)
        except (StructureError, FormatError, KeyError, IndexError,
                TypeError, ValueError) as exc:
            problem = f"entry does not replay: {exc}"
        if problem is not None:
            failures.append({"entry": entry["index"], "reason": problem})
    return {"ok": not failures, "met_checked": checked,
            "entries": len(run.ledger), "failures": failures}


def _recheck(desc: ClassDescriptor, entry: dict, stage: FinStructure):
    sig = desc.signature
    kind = entry["kind"]
    if kind == "embed":
        target = structure_from_json(entry["target"], sig)
        if not Embedding(target, stage, tuple(entry["witness"])).is_valid():
            return "embed witness does not replay"
        return None
    if kind == "realize":
        zp = structure_from_json(entry["extension"], sig)
        ap_map = tuple(entry["ap_map"])
        if not Embedding(zp, stage, ap_map).is_valid():
            return "realized extension does not replay"
        if list(ap_map[:entry["a_size"]]) != list(entry["positions"]):
            return "realized copy moved off its base positions"
        return None
    if kind == "weak-extend":
        zp = structure_from_json(entry["ap"], sig)
        b = structure_from_json(entry["b"], sig)
        if not Embedding(zp, stage, tuple(entry["ap_map"])).is_valid():
            return "premise copy does not replay"
        g = tuple(entry["witness"])
        if not Embedding(b, stage, g).is_valid():
            return "weak-extension witness does not replay"
        fmap = entry["f"]
        for i in range(entry["a_size"]):
            if g[fmap[i]] != entry["a_elements"][i]:
                return "witness does not fix the base pointwise"
        return None
    return f"unknown ledger kind {kind!r}"


# --- probing the finished run ---------------------------------------------------


def prefix_oracle(run: LimitRun, label: str = "limit-run") -> LimitOracle:
    """The final stage presented with one fragment per initial segment, so
    probe windows can be cut at any size; requires a hereditary class if
    the fragments are to stay members (the oracle itself does not care)."""
    final = run.final()
    if final.size == 0:
        return LimitOracle([final], label)
    prefixes = [induced_substructure(final, range(m))[0]
                for m in range(1, final.size + 1)]
    return LimitOracle(prefixes, label)


def verify_limit(run: LimitRun, probe_bounds: dict | None = None) -> ProbeReport:
    """Probe the finished run as a target: weak-injectivity condition (a)
    over a window prefix, plus a bounded check that every induced
    substructure of the window embeds into a class member."""
    pb = {"condition": "a", "a_bound": 2, "b_bound": 3, "x_bound": 3,
          "depth": None}
    pb.update(probe_bounds or {})
    final = run.final()
    oracle = prefix_oracle(run)
    depth = pb["depth"]
    if depth is None:
        depth = max(0, min(run.bounds.get("window", SEARCH_DEFAULTS["window"]),
                           final.size) - 1)
    report = weak_injectivity_probe(oracle, run.desc, pb["condition"],
                                    pb["a_bound"], pb["b_bound"],
                                    pb["x_bound"], depth)
    window = oracle.fragment(depth)
    cof_entries, cof_statuses = _cofinal_age_entries(run.desc, window,
                                                     pb["x_bound"])
    statuses = [report.verdict.status] + cof_statuses
    combined = vd.combine(statuses)
    witnesses = report.witnesses + cof_entries
    bounds = dict(report.verdict.bounds or {})
    bounds["cofinal_size"] = pb["x_bound"]
    if combined == vd.HOLDS:
        verdict = vd.holds(bounds=bounds, certificate=witnesses)
    elif combined == vd.FAILS:
        verdict = vd.fails(bounds=bounds, certificate=witnesses,
                           witness=report.verdict.witness,
                           reason="a probe instance is finitely obstructed")
    else:
        bad = report.verdict.witness
        if bad is None:
            bad = next((w for w, s in zip(cof_entries, cof_statuses)
                        if s == vd.UNKNOWN), None)
        verdict = vd.unknown(bounds=bounds, certificate=witnesses,
                             witness=bad,
                             reason="searches truncated by depth bounds")
    return ProbeReport(pb["condition"], verdict, witnesses)


def _cofinal_age_entries(desc: ClassDescriptor, window: FinStructure,
                         size_cap: int) -> tuple[list[dict], list[str]]:
    entries: list[dict] = []
    statuses: list[str] = []
    checked = 0
    for size in range(1, min(size_cap, window.size) + 1):
        for subset in combinations(range(window.size), size):
            sub, _ = induced_substructure(window, list(subset))
            checked += 1
            if desc.member(sub):
                continue
            hosts = enumerate_members(desc, sub.size + 2)
            if any(find_embedding(sub, m) is not None for m in hosts):
                continue
            entries.append({"cofinal": list(subset), "status": vd.UNKNOWN,
                            "reason": "no small member hosts this "
                                      "substructure"})
            statuses.append(vd.UNKNOWN)
    entries.append({"cofinal_checked": checked, "status": vd.HOLDS})
    return entries, statuses


# --- back-and-forth extension ---------------------------------------------------


@dataclass
class ZigzagReport:
    """The two coherent embedding ladders produced by the back-and-forth
    argument, with the verified identities."""

    f_maps: list[dict[int, int]]
    g_maps: list[dict[int, int]]
    a_chain: list[list[int]]
    b_chain: list[list[int]]
    rounds: int
    coherent: bool
    image_of_base: dict[int, int]

    def final_map(self) -> dict[int, int]:
        return dict(self.f_maps[-1])

    def to_json(self) -> dict:
        return {"f_maps": [sorted(m.items()) for m in self.f_maps],
                "g_maps": [sorted(m.items()) for m in self.g_maps],
                "a_chain": self.a_chain,
                "b_chain": self.b_chain,
                "rounds": self.rounds,
                "coherent": self.coherent,
                "image_of_base": sorted(self.image_of_base.items())}


def extend_to_automorphism(run: LimitRun, a: FinStructure, ap: FinStructure,
                           good_cert: vd.Verdict, e: Embedding, rounds: int,
                           *, anchor: Embedding | None = None) -> ZigzagReport:
    """Back-and-forth extension of ``e`` towards an automorphism of the
    final stage.

    ``a`` must be an induced prefix of ``ap`` and ``good_cert`` a holding
    goodness verdict for the pair.  ``anchor`` places the base copy of
    ``ap`` inside the final stage (searched for when omitted); ``e``
    places the shifted copy.  Each round finds an inverse on the grown
    image side, then a forward map undoing it, both pinned so the
    round-trip identities hold; the pinwork is re-asserted pointwise and
    the final map still sends the anchored base exactly where ``e`` does.
    """
    if rounds < 0:
        raise StructureError("rounds must be non-negative")
    final = run.final()
    prefix, _ = induced_substructure(ap, range(a.size))
    if prefix != a:
        raise StructureError("the base must be an induced prefix of its "
                             "extension")
    if getattr(good_cert, "status", None) != vd.HOLDS:
        raise StructureError("the extension needs a holding goodness verdict")
    if e.source != ap or not Embedding(ap, final, e.mapping).is_valid():
        raise StructureError("the shift must embed the extension into the "
                             "final stage")
    if anchor is None:
        found = next(embeddings_iter(ap, final), None)
        if found is None:
            raise StructureError("the extension does not occur in the final "
                                 "stage")
        anchor = Embedding(ap, final, found)
    elif anchor.source != ap or not Embedding(ap, final,
                                              anchor.mapping).is_valid():
        raise StructureError("the anchor must embed the extension into the "
                             "final stage")

    oracle = LimitOracle(run.stages)
    depth = len(run.stages) - 1

    def hullclose(xs) -> list[int]:
        cur = sorted(set(xs))
        hint = oracle.hull_hint(cur, depth)
        return sorted(set(hint)) if hint is not None else cur

    instance_bound = run.bounds.get("instance_bound",
                                    DEFAULT_INSTANCE_BOUND)
    v_bound = run.bounds.get("v_bound", DEFAULT_V_BOUND)
    good_memo: dict[bytes, str] = {}

    def require_self_good(positions: list[int], label: str) -> list[int]:
        sub, _ = induced_substructure(final, positions)
        key = canonical_code(sub)
        if key not in good_memo:
            verdict = is_good_pair(sub, sub, identity_embedding(sub),
                                   run.desc, instance_bound, v_bound)
            good_memo[key] = verdict.status
        if good_memo[key] == vd.FAILS:
            raise StructureError(f"zig-zag stalled: the {label} side grew a "
                                 "set that is not good over itself")
        return positions

    a_chain = [sorted(anchor.mapping[:a.size]), sorted(anchor.mapping)]
    f_maps = [{anchor.mapping[i]: e.mapping[i] for i in range(ap.size)}]
    g_maps: list[dict[int, int]] = []
    b_chain: list[list[int]] = []
    coherent = True

    for n in range(1, rounds + 1):
        f_cur = f_maps[-1]
        a_dom = a_chain[-1]
        a_fix = a_chain[-2]
        want_b = set(b_chain[-1]) if b_chain else set()
        want_b |= set(f_cur.values())
        _add_least_missing(want_b, final.size)
        b_odd = hullclose(want_b)
        b_chain.append(b_odd)
        b_even = require_self_good(b_odd, "image")
        b_chain.append(b_even)
        pins_g = {f_cur[x]: x for x in a_fix}
        g_map = _pinned_embed(final, b_even, pins_g)
        if g_map is None:
            raise StructureError(f"zig-zag search exhausted at round {n} "
                                 "(backward)")
        for x in a_fix:
            if g_map[f_cur[x]] != x:
                raise StructureError("internal: inverse pin violated")
        g_maps.append(g_map)

        want_a = set(a_dom) | set(g_map.values())
        _add_least_missing(want_a, final.size)
        a_even = hullclose(want_a)
        a_chain.append(a_even)
        a_odd = require_self_good(a_even, "domain")
        a_chain.append(a_odd)
        pins_f = {g_map[y]: y for y in b_odd}
        f_map = _pinned_embed(final, a_odd, pins_f)
        if f_map is None:
            raise StructureError(f"zig-zag search exhausted at round {n} "
                                 "(forward)")
        for y in b_odd:
            if f_map[g_map[y]] != y:
                raise StructureError("internal: forward pin violated")
        for x in a_fix:
            if f_map[x] != f_cur[x]:
                coherent = False
        f_maps.append(f_map)

    base = a_chain[0]
    image_of_base = {x: f_maps[-1][x] for x in base}
    for i in range(a.size):
        if image_of_base[anchor.mapping[i]] != e.mapping[i]:
            raise StructureError("internal: the final map moved the base "
                                 "off its prescribed image")
    return ZigzagReport(f_maps, g_maps, a_chain, b_chain, rounds, coherent,
                        image_of_base)


def _add_least_missing(covered: set[int], size: int) -> None:
    for x in range(size):
        if x not in covered:
            covered.add(x)
            return


def _pinned_embed(final: FinStructure, positions: list[int],
                  pins_by_position: dict[int, int]):
    sub, incl = induced_substructure(final, positions)
    order = list(incl.mapping)
    rank = {p: i for i, p in enumerate(order)}
    pin = {rank[p]: t for p, t in pins_by_position.items() if p in rank}
    hit = next(embeddings_iter(sub, final, pin=pin), None)
    if hit is None:
        return None
    return {order[i]: hit[i] for i in range(len(order))}


# --- run against run ------------------------------------------------------------


def compare_runs(run1: LimitRun, run2: LimitRun, depth: int) -> dict:
    """Level-by-level back-and-forth between the two final stages: at
    level k every k-element induced substructure type of either side must
    be answered by an embedding search into the other, alternating sides.
    The answered pairs form a family of partial isomorphisms, one per
    type; a level with an unanswered type stops the descent.

    Exhaustive over subsets, so the cost grows binomially with depth;
    meant for small depths."""
    if run1.desc.to_json() != run2.desc.to_json():
        raise StructureError("runs built over different classes cannot be "
                             "compared")
    if depth < 0:
        raise StructureError("depth must be non-negative")
    finals = (run1.final(), run2.final())
    oracles = (LimitOracle(run1.stages, "left"),
               LimitOracle(run2.stages, "right"))
    names = ("left", "right")
    depth_reached = 0
    pairs: list[dict] = []
    counterexample = None
    for k in range(1, depth + 1):
        level: list[dict] = []
        for side in (0, 1):
            other = 1 - side
            if finals[side].size < k:
                continue
            seen: set[bytes] = set()
            for subset in combinations(range(finals[side].size), k):
                sub, _ = induced_substructure(finals[side], list(subset))
                code = canonical_code(sub)
                if code in seen:
                    continue
                seen.add(code)
                hit = oracles[other].place_extension({}, sub,
                                                     len(run1.stages))
                if hit is None:
                    counterexample = {"side": names[side],
                                      "positions": list(subset),
                                      "type": structure_to_json(sub)}
                    break
                level.append({names[side]: list(subset),
                              names[other]: [hit[i] for i in range(k)]})
            if counterexample is not None:
                break
        if counterexample is not None:
            break
        depth_reached = k
        pairs = level
    return {"depth_reached": depth_reached, "requested": depth,
            "pass": depth_reached >= depth, "pairs": pairs,
            "counterexample": counterexample,
            "sizes": [finals[0].size, finals[1].size]}
