"""structforge: a workbench for finite relational structures.

Checks amalgamation-style closure properties of structure classes, probes
countable targets for weak injectivity, plays the alternating-extension
game against those targets, and assembles generic limits from scheduled
requirement lists.
"""

from .amalgamation import (check_property, find_amalgam, find_good_extension,
                           is_good_pair)
from .classes import (BUILTIN_CLASSES, ClassDescriptor, builtin_class,
                      descriptor_from_json, enumerate_members, explicit_class)
from .game import (Adjudication, GameError, GameState, GoodnessError,
                   StrategyStuck, Transcript, adjudicate, candidate_moves,
                   play, replay_chain, strategy_by_name)
from .limits import (LimitRun, ZigzagReport, build_limit, compare_runs,
                     extend_to_automorphism, load_run, prefix_oracle,
                     verify_limit, verify_run_ledger)
from .oracles import (LimitOracle, LineOracle, ProbeReport, RadoOracle,
                      RayOracle, TargetOracle, check_extension_axioms,
                      parse_oracle, weak_injectivity_probe)
from .search import (are_isomorphic, automorphisms, count_embeddings,
                     embeddings_iter, enumerate_embeddings, find_embedding)
from .structures import (Embedding, FinStructure, FormatError, PartialMap,
                         RelationSymbol, Signature, StructureError,
                         induced_substructure, structure_from_json,
                         structure_to_json)
from .verdict import Verdict

__version__ = "0.1.0"

__all__ = [
    "Adjudication",
    "BUILTIN_CLASSES",
    "ClassDescriptor",
    "Embedding",
    "FinStructure",
    "FormatError",
    "GameError",
    "GameState",
    "GoodnessError",
    "LimitOracle",
    "LimitRun",
    "LineOracle",
    "PartialMap",
    "ProbeReport",
    "RadoOracle",
    "RayOracle",
    "RelationSymbol",
    "Signature",
    "StrategyStuck",
    "StructureError",
    "TargetOracle",
    "Transcript",
    "Verdict",
    "ZigzagReport",
    "__version__",
    "adjudicate",
    "are_isomorphic",
    "automorphisms",
    "build_limit",
    "builtin_class",
    "candidate_moves",
    "check_extension_axioms",
    "check_property",
    "compare_runs",
    "count_embeddings",
    "descriptor_from_json",
    "embeddings_iter",
    "enumerate_embeddings",
    "enumerate_members",
    "explicit_class",
    "extend_to_automorphism",
    "find_amalgam",
    "find_embedding",
    "find_good_extension",
    "induced_substructure",
    "is_good_pair",
    "load_run",
    "parse_oracle",
    "play",
    "prefix_oracle",
    "replay_chain",
    "strategy_by_name",
    "structure_from_json",
    "structure_to_json",
    "verify_limit",
    "verify_run_ledger",
    "weak_injectivity_probe",
]
