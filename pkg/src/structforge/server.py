"""HTTP session API: play the extension game against an engine strategy.

Sessions live in memory; each serialises its own mutations behind a lock, so
interleaved requests against different sessions never interact.  The server
is the only rule authority: clients submit candidate structures (or deltas)
and every legality judgment comes back as a typed refusal reason.  Finished
or stuck sessions persist their transcript to ``FORGE_DATA_DIR`` when set.
"""

from __future__ import annotations

import os
import random
import threading
import uuid

from fastapi import FastAPI, HTTPException

from .classes import (BUILTIN_CLASSES, ClassDescriptor, builtin_class,
                      descriptor_from_json)
from .game import (EVE, ODD, GameError, GameState, StrategyStuck, Transcript,
                   adjudicate, apply_move, candidate_moves, strategy_by_name)
from .oracles import BUILTIN_ORACLES, parse_oracle
from .structures import (FinStructure, FormatError, StructureError,
                         structure_from_json, structure_to_json)

SESSION_SCHEMA = "structforge/session/1"

# how many fresh elements a single human move may add
HUMAN_GROWTH_CAP = 3
# default growth bound for the hint palette
HINT_GROWTH = 2
HINT_LIMIT = 64


def _refuse(status: int, reason: str, message: str) -> HTTPException:
    return HTTPException(status, detail={"reason": reason, "message": message})


class Session:
    """One game between a human and an engine strategy, single-writer."""

    def __init__(self, sid: str, desc: ClassDescriptor, class_ref: dict,
                 oracle, oracle_ref: str | None, human_role: str,
                 rounds: int, seed: int, engine) -> None:
        self.id = sid
        self.desc = desc
        self.class_ref = class_ref
        self.oracle = oracle
        self.oracle_ref = oracle_ref
        self.human_role = human_role
        self.rounds = rounds
        self.seed = seed
        self.engine = engine
        self.rng = random.Random(seed)
        self.state = GameState(desc, oracle)
        self.status = "active"
        self.stuck: dict | None = None
        self.lock = threading.Lock()

    @property
    def player_to_move(self) -> str | None:
        if self.status != "active":
            return None
        return EVE if self.state.turn % 2 == 0 else ODD

    def _engine_to_move(self) -> bool:
        mover = self.player_to_move
        return mover is not None and mover != self.human_role

    def run_engine(self) -> None:
        """Let the engine take its turn (and close the game when over)."""
        while self.status == "active" and self.state.turn >= self.rounds:
            self.status = "finished"
        while self._engine_to_move():
            try:
                move, notes = self.engine.propose(self.state, self.rng)
            except StrategyStuck as exc:
                self.status = "stuck"
                self.stuck = {"player": exc.player, "index": self.state.turn,
                              "reason": exc.reason,
                              "strategy": self.engine.name}
                return
            notes = dict(notes or {})
            notes["strategy"] = self.engine.name
            apply_move(self.state, move, notes)
            if self.state.turn >= self.rounds:
                self.status = "finished"

    def transcript(self) -> Transcript:
        names = {self.human_role: "human",
                 EVE if self.human_role == ODD else ODD: self.engine.name}
        return Transcript(self.class_ref, self.oracle_ref, self.seed,
                          {"rounds": self.rounds,
                           "eve": names[EVE], "odd": names[ODD]},
                          list(self.state.move_log), self.stuck)

    def view(self) -> dict:
        top = self.state.top()
        return {"schema": SESSION_SCHEMA,
                "id": self.id,
                "class": self.class_ref,
                "oracle": self.oracle_ref,
                "human_role": self.human_role,
                "rounds": self.rounds,
                "seed": self.seed,
                "status": self.status,
                "turn": self.state.turn,
                "player_to_move": self.player_to_move,
                "your_turn": self.player_to_move == self.human_role,
                "moves": list(self.state.move_log),
                "top": structure_to_json(top) if top is not None else None,
                "stuck": self.stuck}


def _resolve_class(source) -> tuple[ClassDescriptor, dict]:
    if isinstance(source, dict):
        try:
            desc = descriptor_from_json(source)
        except (FormatError, StructureError) as exc:
            raise _refuse(422, "format", f"bad class descriptor: {exc}")
        return desc, source
    name = str(source)
    if name not in BUILTIN_CLASSES:
        raise HTTPException(404, detail=f"unknown class {name!r}")
    return builtin_class(name), {"builtin": name}


def _default_engine(human_role: str, oracle) -> str:
    if oracle is None:
        return "random"
    return "generic-odd" if human_role == EVE else "spoiler-eve"


def _move_from_payload(session: Session, payload: dict) -> FinStructure:
    top = session.state.top()
    if "move" in payload:
        try:
            return structure_from_json(payload["move"], session.desc.signature)
        except (FormatError, StructureError) as exc:
            raise _refuse(422, "format", str(exc))
    if "added_elements" in payload or "added_tuples" in payload:
        # delta form: fresh elements plus tuples touching them
        if top is None:
            raise _refuse(422, "format", "delta move needs an opening move")
        added = payload.get("added_tuples") or {}
        if not isinstance(added, dict):
            raise _refuse(422, "format", "added_tuples must be an object")
        try:
            relations = {name: frozenset(set(top.relations.get(name, frozenset()))
                                         | {tuple(t) for t in added.get(name, [])})
                         for name in {r.name for r in session.desc.signature}
                         | set(added)}
            return FinStructure(session.desc.signature,
                                top.size + int(payload.get("added_elements", 0)),
                                relations)
        except (FormatError, StructureError, TypeError, ValueError) as exc:
            raise _refuse(422, "format", f"bad delta move: {exc}")
    raise _refuse(422, "format", "payload needs a move or a delta")


def _hint_commentary(session: Session) -> dict:
    """Mirror the engine's bookkeeping: generator coverage and block list."""
    covered: list[int] = []
    odd_turns = 0
    blocks = []
    for entry in session.state.move_log:
        notes = entry.get("notes", {})
        if entry["player"] == ODD:
            odd_turns += 1
            if "embedding" in notes:
                covered = sorted({g for _, g in notes["embedding"]})
        if "blocked" in notes:
            blocks.append(notes["blocked"])
    return {"engine": session.engine.name,
            "odd_turns": odd_turns,
            "generators_covered": covered,
            "blocks": blocks}


def create_app(data_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="structforge session API")
    sessions: dict[str, Session] = {}
    store_lock = threading.Lock()
    persist_dir = data_dir if data_dir is not None \
        else os.environ.get("FORGE_DATA_DIR")

    def _get(sid: str) -> Session:
        with store_lock:
            session = sessions.get(sid)
        if session is None:
            raise HTTPException(404, detail=f"no session {sid!r}")
        return session

    def _persist(session: Session) -> None:
        if not persist_dir or session.status == "active":
            return
        os.makedirs(persist_dir, exist_ok=True)
        session.transcript().save(
            os.path.join(persist_dir, f"session-{session.id}.json"))

    @app.post("/sessions", status_code=201)
    def create_session(payload: dict) -> dict:
        desc, class_ref = _resolve_class(payload.get("class", "graphs"))
        human_role = str(payload.get("human_role", EVE))
        if human_role not in (EVE, ODD):
            raise _refuse(422, "format", "human_role must be eve or odd")
        try:
            rounds = int(payload.get("rounds", 10))
            seed = int(payload.get("seed", 0))
        except (TypeError, ValueError):
            raise _refuse(422, "format", "rounds and seed must be integers")
        if rounds <= 0:
            raise _refuse(422, "format", "rounds must be positive")
        selector = payload.get("oracle")
        oracle = None
        if selector:
            try:
                oracle = parse_oracle(str(selector))
            except (StructureError, FormatError, OSError) as exc:
                raise HTTPException(404, detail=f"unknown oracle: {exc}")
        engine_name = str(payload.get("engine")
                          or _default_engine(human_role, oracle))
        try:
            engine = strategy_by_name(engine_name, desc, oracle)
        except StructureError as exc:
            raise _refuse(422, "format", str(exc))
        sid = uuid.uuid4().hex[:12]
        session = Session(sid, desc, class_ref, oracle,
                          str(selector) if selector else None,
                          human_role, rounds, seed, engine)
        with store_lock:
            sessions[sid] = session
        with session.lock:
            if session._engine_to_move():
                session.run_engine()
            _persist(session)
            return session.view()

    @app.get("/sessions/{sid}")
    def get_session(sid: str) -> dict:
        session = _get(sid)
        with session.lock:
            return session.view()

    @app.post("/sessions/{sid}/moves")
    def post_move(sid: str, payload: dict) -> dict:
        session = _get(sid)
        with session.lock:
            if session.status != "active":
                raise HTTPException(
                    409, detail={"reason": "game-over",
                                 "message": f"session is {session.status}"})
            if session.player_to_move != session.human_role:
                raise HTTPException(
                    409, detail={"reason": "not-your-turn",
                                 "message": "the engine moves next"})
            move = _move_from_payload(session, payload)
            top = session.state.top()
            grown = move.size - (top.size if top is not None else 0)
            if grown > HUMAN_GROWTH_CAP:
                raise _refuse(422, "growth-cap",
                              f"a move may add at most {HUMAN_GROWTH_CAP} "
                              "elements")
            notes = {"strategy": "human"}
            if isinstance(payload.get("notes"), dict):
                notes.update(payload["notes"])
            try:
                apply_move(session.state, move, notes)
            except GameError as exc:
                raise _refuse(422, exc.reason, str(exc))
            if session.state.turn >= session.rounds:
                session.status = "finished"
            session.run_engine()
            _persist(session)
            return session.view()

    @app.get("/sessions/{sid}/hints")
    def get_hints(sid: str, growth: int = HINT_GROWTH) -> dict:
        session = _get(sid)
        with session.lock:
            bound = max(1, min(int(growth), HUMAN_GROWTH_CAP))
            moves = candidate_moves(session.state, bound)
            return {"schema": SESSION_SCHEMA,
                    "id": session.id,
                    "growth_bound": bound,
                    "candidate_moves": [structure_to_json(m)
                                        for m in moves[:HINT_LIMIT]],
                    "truncated": len(moves) > HINT_LIMIT,
                    "commentary": _hint_commentary(session)}

    @app.get("/sessions/{sid}/adjudication")
    def get_adjudication(sid: str) -> dict:
        session = _get(sid)
        with session.lock:
            verdict = adjudicate(session.transcript(), oracle=session.oracle)
            out = verdict.to_json()
            out["session_status"] = session.status
            return out

    @app.get("/catalog/classes")
    def catalog_classes() -> dict:
        return {"classes": [{"name": name} for name in BUILTIN_CLASSES]}

    @app.get("/catalog/oracles")
    def catalog_oracles() -> dict:
        return {"oracles": [{"name": name} for name in BUILTIN_ORACLES],
                "run_backed": "limit:<run-file>"}

    return app
