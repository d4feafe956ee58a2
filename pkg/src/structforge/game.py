"""The alternating extension game between Eve and Odd.

Both players extend a single growing chain of class members; Eve moves at
even indices and opens the game.  Universes are initial segments of the
naturals, each move keeps the previous structure as an induced prefix, and
replaying the top is a legal stall.  Transcripts carry enough bookkeeping to
re-adjudicate a finished game without the strategy objects.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .amalgamation import find_amalgam, is_good_pair
from .classes import (ClassDescriptor, descriptor_from_json,
                      pointed_extensions)
from .oracles import TargetOracle, parse_oracle
from .structures import (Embedding, FinStructure, FormatError,
                         StructureError, induced_substructure,
                         structure_from_json, structure_to_json)

SCHEMA = "structforge/1"

EVE = "eve"
ODD = "odd"

ODD_CONSISTENT = "odd-consistent"
EVE_BLOCKING = "eve-blocking"
INCONCLUSIVE = "inconclusive"


class GameError(StructureError):
    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


class StrategyStuck(Exception):
    """A strategy has no certified move left at the current bounds."""

    def __init__(self, player: str, reason: str):
        super().__init__(f"{player}: {reason}")
        self.player = player
        self.reason = reason


class GoodnessError(StructureError):
    """A chain handed to the chain strategy fails its goodness precondition.

    Carries the failing link index and the is_good_pair verdict so callers
    can inspect the refuting instance."""

    def __init__(self, index: int, verdict):
        super().__init__(f"chain link {index} is not a good pair in the class")
        self.index = index
        self.verdict = verdict


def _empty(desc: ClassDescriptor) -> FinStructure:
    return FinStructure(desc.signature, 0,
                        {r.name: frozenset() for r in desc.signature})


@dataclass
class GameState:
    desc: ClassDescriptor
    oracle: TargetOracle | None
    chain: list[FinStructure] = field(default_factory=list)
    move_log: list[dict] = field(default_factory=list)

    @property
    def turn(self) -> int:
        return len(self.chain)

    @property
    def player_to_move(self) -> str:
        return EVE if self.turn % 2 == 0 else ODD

    def top(self) -> FinStructure | None:
        return self.chain[-1] if self.chain else None


def candidate_moves(state: GameState, growth_bound: int) -> list[FinStructure]:
    """Legal next structures growing the top by at most ``growth_bound``
    elements, the stall first, in the deterministic extension order."""
    base = state.top()
    if base is None:
        base = _empty(state.desc)
    return pointed_extensions(state.desc, base, growth_bound)


def validate_move(state: GameState, move: FinStructure) -> None:
    if move.signature != state.desc.signature:
        raise GameError("universe-convention", "signature mismatch")
    if not state.desc.member(move):
        raise GameError("not-a-member", "move is not a member of the class")
    base = state.top()
    if base is None:
        return
    if move.size < base.size:
        raise GameError("universe-convention",
                        "move must keep the current universe as a prefix")
    prefix, _ = induced_substructure(move, range(base.size))
    if prefix != base:
        raise GameError("not-induced",
                        "move must leave the current structure induced")


def apply_move(state: GameState, move: FinStructure,
               notes: dict | None = None) -> None:
    validate_move(state, move)
    base = state.top()
    entry = {"index": state.turn, "player": state.player_to_move,
             "size": move.size}
    if base is None:
        entry["full"] = structure_to_json(move)
    else:
        added = {}
        for name in sorted(move.relations):
            old = base.relations.get(name, frozenset())
            new = sorted(t for t in move.relations[name] if t not in old)
            if new:
                added[name] = [list(t) for t in new]
        entry["added_elements"] = move.size - base.size
        entry["added_tuples"] = added
    if notes:
        entry["notes"] = notes
    state.chain.append(move)
    state.move_log.append(entry)


class Strategy:
    name = "strategy"

    def propose(self, state: GameState,
                rng: random.Random) -> tuple[FinStructure, dict]:
        raise NotImplementedError


class RandomStrategy(Strategy):
    """Uniform choice among the bounded legal extensions; always has the
    stall available."""

    name = "random"

    def __init__(self, growth: int = 1):
        self.growth = growth

    def propose(self, state, rng):
        moves = candidate_moves(state, self.growth)
        return rng.choice(moves), {}


class OddGenericStrategy(Strategy):
    """Odd's winning recipe against an injectivity oracle: keep an embedding
    of the chain into the target, cover one fresh generator per turn, and
    answer with a structure whose target placement is pinned."""

    name = "generic-odd"

    def __init__(self, oracle: TargetOracle):
        self.oracle = oracle
        self.embedding: dict[int, int] = {}
        self.turns = 0

    def propose(self, state, rng):
        top = state.top()
        if top is None:
            raise StrategyStuck(ODD, "odd cannot open the game")
        oracle = self.oracle
        stage_hint = 4 * (len(state.chain) + 2)
        placed = oracle.place_extension(dict(self.embedding), top, stage_hint)
        if placed is None:
            raise StrategyStuck(
                ODD, "no embedding of the chain extends the previous one")
        self.turns += 1
        generator = self._next_generator(placed)
        move, mapping = self._covering_move(state.desc, top, placed, generator)
        if move is None:
            raise StrategyStuck(
                ODD, "no member realises the covering extension")
        self.embedding = mapping
        notes = {"embedding": sorted(mapping.items()),
                 "covered": self.turns}
        return move, notes

    def _next_generator(self, placed: dict[int, int]) -> int | None:
        want = self.turns - 1
        if want in placed.values():
            return None
        return want

    def _covering_move(self, desc, top, placed, generator):
        images = dict(placed)
        fresh_gens = []
        if generator is not None:
            fresh_gens.append(generator)
        hull = self.oracle.hull_hint(sorted(set(images.values()) | set(fresh_gens)),
                                     10 ** 9)
        if hull is not None:
            known = set(images.values()) | set(fresh_gens)
            fresh_gens.extend(g for g in hull if g not in known)
        if not fresh_gens:
            return top, images
        mapping = dict(images)
        order = sorted(fresh_gens)
        elems = {}
        for offset, g in enumerate(order):
            elems[g] = top.size + offset
            mapping[top.size + offset] = g
        edges = set(top.relations["E"])
        for u, i in mapping.items():
            for g in order:
                if u != elems[g] and self.oracle.adjacent(i, g):
                    edges.add((u, elems[g]))
                    edges.add((elems[g], u))
        move = FinStructure(top.signature, top.size + len(order),
                            {"E": frozenset(edges)})
        if not desc.member(move):
            return None, None
        return move, mapping


class EveSpoilerStrategy(Strategy):
    """Eve's refutation recipe: open with the obstructed base and then, one
    per turn, certify chain elements against the capacity-limited generators
    of the target."""

    name = "spoiler-eve"

    def __init__(self, oracle: TargetOracle, block_bound: int = 64):
        self.oracle = oracle
        self.block_bound = block_bound
        self.opened = False
        self.blocked: set[int] = set()

    def _scarce_generators(self) -> list[tuple[int, int]]:
        out = []
        for g in range(self.block_bound):
            cap = self.oracle.degree_capacity(g)
            if cap is not None:
                out.append((g, cap))
        caps = {c for _, c in out}
        # only generators rarer than the generic ones can be spoiled
        if len(caps) <= 1:
            return []
        floor = max(caps)
        return [(g, c) for g, c in out if c < floor]

    def propose(self, state, rng):
        desc = state.desc
        if not self.opened:
            self.opened = True
            single = FinStructure(desc.signature, 1,
                                  {r.name: frozenset()
                                   for r in desc.signature})
            if state.top() is not None:
                raise StrategyStuck(EVE, "spoiler must open the game")
            if not desc.member(single):
                raise StrategyStuck(EVE, "obstructed base is not a member")
            return single, {"opening": "obstructed-base"}
        top = state.top()
        scarce = self._scarce_generators()
        for element in range(top.size):
            if element in self.blocked:
                continue
            for g, cap in scarce:
                move = self._saturate(desc, top, element, cap + 1)
                if move is not None:
                    self.blocked.add(element)
                    cert = {"rule": "degree", "element": element,
                            "blocked_generator": g, "needed": cap + 1,
                            "capacity": cap}
                    return move, {"blocked": cert}
        raise StrategyStuck(EVE, "no certifiable block at these bounds")

    @staticmethod
    def _saturate(desc, top, element, degree):
        adj = top.adjacency("E")[0]
        have = adj[element].bit_count()
        if have >= degree:
            # the block already stands; certify it with a stall
            return top
        edges = set(top.relations["E"])
        size = top.size
        for _ in range(degree - have):
            edges.add((element, size))
            edges.add((size, element))
            size += 1
        move = FinStructure(top.signature, size, {"E": frozenset(edges)})
        if not desc.member(move):
            return None
        return move


class EveChainStrategy(Strategy):
    """Eve embeds a fixed good chain into the play: each turn amalgamates
    the next chain link over the previous one against the current top, so
    the running embeddings agree with all earlier ones."""

    name = "chain-eve"

    def __init__(self, chain: list[FinStructure], desc: ClassDescriptor,
                 instance_bound: int = 6, v_bound: int = 10):
        if not chain:
            raise StructureError("the chain must have at least one link")
        self.chain = list(chain)
        self.v_bound = v_bound
        for i in range(len(chain) - 1):
            small, big = chain[i], chain[i + 1]
            prefix, _ = induced_substructure(big, range(small.size))
            if prefix != small:
                raise StructureError("chain links must be induced prefixes")
            inc = Embedding(small, big, tuple(range(small.size)))
            verdict = is_good_pair(small, big, inc, desc,
                                   instance_bound=instance_bound,
                                   v_bound=v_bound)
            if verdict.status == "fails":
                raise GoodnessError(i, verdict)
        self.position = 0
        self.embedding: dict[int, int] | None = None

    def propose(self, state, rng):
        desc = state.desc
        if state.top() is None:
            first = self.chain[0]
            self.position = 1
            self.embedding = {u: u for u in range(first.size)}
            return first, {"chain_index": 0,
                           "embedding": sorted(self.embedding.items())}
        if self.position >= len(self.chain):
            return state.top(), {"stall": True}
        small = self.chain[self.position - 1]
        big = self.chain[self.position]
        top = state.top()
        into_top = Embedding(small, top,
                             tuple(self.embedding[u] for u in range(small.size)))
        inc = Embedding(small, big, tuple(range(small.size)))
        found = find_amalgam(into_top, inc, desc,
                             v_bound=max(self.v_bound, top.size + big.size))
        if found is None:
            raise StrategyStuck(EVE, "no amalgam joins the chain to the play")
        joined, top_inc, big_map = found
        if any(top_inc.mapping[u] != u for u in range(top.size)):
            raise StrategyStuck(EVE, "amalgam does not keep the top in place")
        self.position += 1
        self.embedding = {u: big_map.mapping[u] for u in range(big.size)}
        return joined, {"chain_index": self.position - 1,
                        "embedding": sorted(self.embedding.items())}


@dataclass
class Transcript:
    class_ref: dict
    oracle_ref: str | None
    seed: int
    bounds: dict
    moves: list[dict]
    stuck: dict | None = None

    def to_json(self) -> dict:
        return {"schema": SCHEMA, "class": self.class_ref,
                "oracle": self.oracle_ref, "seed": self.seed,
                "bounds": self.bounds, "moves": self.moves,
                "stuck": self.stuck}

    @staticmethod
    def from_json(payload: dict) -> "Transcript":
        if not isinstance(payload, dict) or payload.get("schema") != SCHEMA:
            raise FormatError("not a game transcript")
        return Transcript(payload["class"], payload.get("oracle"),
                          payload.get("seed", 0), payload.get("bounds", {}),
                          payload["moves"], payload.get("stuck"))

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=1)

    @staticmethod
    def load(path: str) -> "Transcript":
        with open(path, encoding="utf-8") as fh:
            return Transcript.from_json(json.load(fh))


def replay_chain(transcript: Transcript,
                 desc: ClassDescriptor | None = None) -> list[FinStructure]:
    """Rebuild the structure chain from the logged deltas, re-checking move
    legality as it goes."""
    if desc is None:
        desc = descriptor_from_json(transcript.class_ref)
    state = GameState(desc, None)
    for entry in transcript.moves:
        if "full" in entry:
            move = structure_from_json(entry["full"], desc.signature)
        else:
            base = state.top()
            if base is None:
                raise FormatError("delta move without an opening structure")
            added = {name: {tuple(t) for t in tuples}
                     for name, tuples in entry.get("added_tuples", {}).items()}
            relations = {name: frozenset(set(base.relations.get(name, frozenset()))
                                         | added.get(name, set()))
                         for name in {r.name for r in desc.signature}
                         | set(added)}
            move = FinStructure(desc.signature,
                                base.size + entry.get("added_elements", 0),
                                relations)
        apply_move(state, move, entry.get("notes"))
    return state.chain


def play(eve: Strategy, odd: Strategy, desc: ClassDescriptor,
         oracle: TargetOracle | None, rounds: int, seed: int = 0,
         class_ref: dict | None = None) -> Transcript:
    """Run ``rounds`` total moves, Eve first, with a shared seeded RNG; a
    stuck strategy ends the game early and is recorded on the transcript."""
    if rounds <= 0:
        raise StructureError("rounds must be positive")
    rng = random.Random(seed)
    state = GameState(desc, oracle)
    stuck = None
    for index in range(rounds):
        strategy = eve if index % 2 == 0 else odd
        try:
            move, notes = strategy.propose(state, rng)
        except StrategyStuck as exc:
            stuck = {"player": exc.player, "index": index,
                     "reason": exc.reason, "strategy": strategy.name}
            break
        notes = dict(notes or {})
        notes["strategy"] = strategy.name
        apply_move(state, move, notes)
    ref = class_ref if class_ref is not None else _class_ref(desc)
    oracle_ref = oracle.name if oracle is not None else None
    return Transcript(ref, oracle_ref, seed,
                      {"rounds": rounds, "eve": eve.name, "odd": odd.name},
                      state.move_log, stuck)


def _class_ref(desc: ClassDescriptor) -> dict:
    return desc.to_json()


def _resolve_class(ref: dict) -> ClassDescriptor:
    return descriptor_from_json(ref)


@dataclass
class Adjudication:
    outcome: str
    details: dict

    def to_json(self) -> dict:
        return {"outcome": self.outcome, "details": self.details}


def adjudicate(transcript: Transcript, depth: int = 64,
               oracle: TargetOracle | None = None) -> Adjudication:
    """Re-derive the standing of a finished game from the transcript alone:
    Odd stands when the last logged embedding is valid, extends the earlier
    ones and covers one generator per Odd turn; otherwise Eve stands when
    some logged block certificate replays against the final structure."""
    desc = _resolve_class(transcript.class_ref)
    try:
        chain = replay_chain(transcript, desc)
    except (StructureError, FormatError) as exc:
        return Adjudication(INCONCLUSIVE, {"reason": f"illegal chain: {exc}"})
    if oracle is None and transcript.oracle_ref:
        oracle = parse_oracle(transcript.oracle_ref)
    details: dict = {"moves": len(chain), "depth": depth}
    if oracle is None or not chain:
        return Adjudication(INCONCLUSIVE, details)
    final = chain[-1]
    odd_embeddings = [
        (entry, dict(tuple(p) for p in entry["notes"]["embedding"]))
        for entry in transcript.moves
        if entry["player"] == ODD and "embedding" in entry.get("notes", {})]
    odd_turns = sum(1 for e in transcript.moves if e["player"] == ODD)
    if odd_embeddings and odd_turns == len(odd_embeddings):
        final_entry, final_map = odd_embeddings[-1]
        structure = chain[final_entry["index"]]
        ok = _embedding_stands(oracle, structure, final_map)
        for _, earlier in odd_embeddings[:-1]:
            if any(final_map.get(u) != g for u, g in earlier.items()):
                ok = False
        covered = set(final_map.values())
        ok = ok and all(g in covered for g in range(odd_turns))
        # the witness must still extend over Eve's trailing additions
        if ok and oracle.place_extension(final_map, final, depth) is not None:
            details["coverage"] = odd_turns
            details["embedding"] = sorted(final_map.items())
            return Adjudication(ODD_CONSISTENT, details)
    blocks = []
    adj = final.adjacency("E")[0]
    for entry in transcript.moves:
        cert = entry.get("notes", {}).get("blocked")
        if not cert or cert.get("rule") != "degree":
            continue
        element = cert["element"]
        cap = oracle.degree_capacity(cert["blocked_generator"])
        if cap is None or element >= final.size:
            continue
        if adj[element].bit_count() > cap:
            blocks.append(cert)
    if blocks:
        details["blocks"] = blocks
        return Adjudication(EVE_BLOCKING, details)
    return Adjudication(INCONCLUSIVE, details)


def _embedding_stands(oracle: TargetOracle, structure: FinStructure,
                      mapping: dict[int, int]) -> bool:
    if set(mapping) != set(range(structure.size)):
        return False
    if len(set(mapping.values())) != structure.size:
        return False
    adj = structure.adjacency("E")[0]
    for u in range(structure.size):
        for v in range(u + 1, structure.size):
            if bool(adj[u] & (1 << v)) != oracle.adjacent(mapping[u],
                                                          mapping[v]):
                return False
    return True


def strategy_by_name(name: str, desc: ClassDescriptor,
                     oracle: TargetOracle | None,
                     growth: int = 1) -> Strategy:
    if name == "random":
        return RandomStrategy(growth)
    if name == "generic-odd":
        if oracle is None:
            raise StructureError("generic-odd needs a target oracle")
        return OddGenericStrategy(oracle)
    if name == "spoiler-eve":
        if oracle is None:
            raise StructureError("spoiler-eve needs a target oracle")
        return EveSpoilerStrategy(oracle)
    if name == "chain-eve":
        raise StructureError("chain-eve needs an explicit chain of members")
    raise StructureError(f"unknown strategy {name!r}")
