"""Three-valued outcomes of bounded searches.

``fails`` beats ``unknown`` beats ``holds`` when aggregating: a verified
counterexample stands regardless of unfinished searches elsewhere, and any
truncated search taints a would-be positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

HOLDS = "holds"
FAILS = "fails"
UNKNOWN = "unknown"

_RANK = {HOLDS: 0, UNKNOWN: 1, FAILS: 2}


@dataclass
class Verdict:
    status: str
    bounds: dict = field(default_factory=dict)
    certificate: object = None
    witness: object = None
    reason: str = ""

    def __post_init__(self) -> None:
        if self.status not in _RANK:
            raise ValueError(f"bad verdict status {self.status!r}")

    @property
    def is_holds(self) -> bool:
        return self.status == HOLDS

    @property
    def is_fails(self) -> bool:
        return self.status == FAILS

    @property
    def is_unknown(self) -> bool:
        return self.status == UNKNOWN

    def to_json(self) -> dict:
        out = {"status": self.status, "bounds": dict(self.bounds)}
        if self.reason:
            out["reason"] = self.reason
        if self.certificate is not None:
            out["certificate"] = _jsonable(self.certificate)
        if self.witness is not None:
            out["witness"] = _jsonable(self.witness)
        return out


def holds(*, bounds: dict | None = None, certificate: object = None,
          reason: str = "") -> Verdict:
    return Verdict(HOLDS, bounds or {}, certificate, None, reason)


def fails(*, bounds: dict | None = None, witness: object = None,
          certificate: object = None, reason: str = "") -> Verdict:
    return Verdict(FAILS, bounds or {}, certificate, witness, reason)


def unknown(*, bounds: dict | None = None, witness: object = None,
            certificate: object = None, reason: str = "") -> Verdict:
    return Verdict(UNKNOWN, bounds or {}, certificate, witness, reason)


def combine(statuses: Iterable[str]) -> str:
    worst = HOLDS
    for s in statuses:
        if _RANK[s] > _RANK[worst]:
            worst = s
    return worst


def _jsonable(obj: object):
    from .structures import Embedding, FinStructure, structure_to_json

    if isinstance(obj, FinStructure):
        return structure_to_json(obj)
    if isinstance(obj, Embedding):
        return {"mapping": list(obj.mapping)}
    if isinstance(obj, Verdict):
        return obj.to_json()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    if isinstance(obj, bytes):
        return obj.hex()
    if isinstance(obj, frozenset):
        return sorted(_jsonable(x) for x in obj)
    return repr(obj)
