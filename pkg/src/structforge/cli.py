"""Command-line entry points: check, limit, play, serve.

Exit codes are a pure function of the verdict or adjudication:

* ``check``  0 all Holds / 1 any Fails / 2 any Unknown (none Fails)
* ``limit``  0 fully met ledger / 3 unresolved requirement left
* ``play``   0 odd-consistent / 1 eve-blocking / 2 inconclusive /
  4 a strategy got stuck (partial transcript still written)
* 64 for unusable input (flags, class sources, strategy names, bad bounds)
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .amalgamation import check_property
from .classes import BUILTIN_CLASSES, ClassDescriptor, builtin_class, \
    descriptor_from_json
from .game import (EveChainStrategy, GoodnessError, adjudicate, play,
                   strategy_by_name)
from .limits import build_limit, verify_limit, verify_run_ledger
from .oracles import parse_oracle
from .structures import FormatError, StructureError, structure_from_json

EXIT_HOLDS = 0
EXIT_FAILS = 1
EXIT_UNKNOWN = 2
EXIT_UNRESOLVED = 3
EXIT_STUCK = 4
EXIT_USAGE = 64

CHECK_SCHEMA = "structforge/check/1"

STRATEGY_NAMES = ("random", "generic-odd", "spoiler-eve", "chain-eve",
                  "human-via-serve")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # route argparse failures through the 64 exit path instead of sys.exit(2)
    def error(self, message):
        raise UsageError(message)


def _load_class(source: str) -> tuple[ClassDescriptor, dict]:
    """A class source is a builtin name or a path to a descriptor file."""
    if source in BUILTIN_CLASSES:
        return builtin_class(source), {"builtin": source}
    if os.path.exists(source):
        try:
            with open(source, encoding="utf-8") as fh:
                payload = json.load(fh)
            return descriptor_from_json(payload), payload
        except (OSError, ValueError, FormatError, StructureError) as exc:
            raise UsageError(f"cannot load class from {source!r}: {exc}")
    raise UsageError(f"unknown class {source!r} "
                     f"(builtins: {', '.join(BUILTIN_CLASSES)})")


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)


def cmd_check(args) -> int:
    desc, ref = _load_class(args.cls)
    props = [p.strip().upper() for p in args.props.split(",") if p.strip()]
    if not props:
        raise UsageError("no properties requested")
    for prop in props:
        if prop not in ("AP", "CAP", "WAP"):
            raise UsageError(f"unknown property {prop!r}")
    bounds = {"member_bound": args.member_bound, "ext_bound": args.ext_bound,
              "instance_bound": args.instance_bound, "v_bound": args.v_bound}
    results = {}
    for prop in props:
        verdict = check_property(desc, prop, **bounds)
        results[prop] = verdict.to_json()
        print(f"{prop}: {verdict.status}")
    _write_json(args.report, {"schema": CHECK_SCHEMA, "class": ref,
                              "bounds": bounds, "results": results})
    statuses = [r["status"] for r in results.values()]
    if "fails" in statuses:
        return EXIT_FAILS
    if "unknown" in statuses:
        return EXIT_UNKNOWN
    return EXIT_HOLDS


def cmd_limit(args) -> int:
    desc, _ = _load_class(args.cls)
    if args.stages < 1:
        raise UsageError("stages must be at least 1")
    search = {}
    for key in ("window", "pair_window", "weak_bound", "attempts"):
        value = getattr(args, key)
        if value is not None:
            search[key] = value
    try:
        run = build_limit(desc, args.stages, args.req_bound,
                          search=search or None, seed=args.seed)
    except StructureError as exc:
        raise UsageError(f"cannot build a limit run: {exc}")
    run.save(args.out)
    ledger = verify_run_ledger(run)
    print(f"stages: {len(run.stages)}  final size: {run.final().size}")
    print(f"ledger: {len(run.ledger)} entries, "
          f"{ledger['met_checked']} met re-verified, ok={ledger['ok']}")
    if run.final().size:
        report = verify_limit(run)
        print(f"probe({report.condition}): {report.verdict.status}")
    unresolved = run.unresolved()
    if not run.ledger or unresolved:
        if unresolved:
            flagged = run.ledger[unresolved[0]]
            print(f"unresolved requirement #{unresolved[0]}: "
                  f"{flagged['kind']} ({flagged['status']})")
        else:
            print("no requirements were scheduled")
        return EXIT_UNRESOLVED
    return EXIT_HOLDS


def _strategy(name: str, desc, oracle, args):
    if name not in STRATEGY_NAMES:
        raise UsageError(f"unknown strategy {name!r} "
                         f"(choose from {', '.join(STRATEGY_NAMES)})")
    if name == "human-via-serve":
        raise UsageError("human play runs through the session API: "
                         "start `structforge serve` and connect a console")
    if name == "chain-eve":
        if not args.chain:
            raise UsageError("chain-eve needs --chain <file> with a JSON "
                             "list of structures")
        try:
            with open(args.chain, encoding="utf-8") as fh:
                payload = json.load(fh)
            chain = [structure_from_json(item, desc.signature)
                     for item in payload]
        except (OSError, ValueError, FormatError, StructureError) as exc:
            raise UsageError(f"cannot load chain from {args.chain!r}: {exc}")
        return EveChainStrategy(chain, desc)
    try:
        return strategy_by_name(name, desc, oracle, growth=args.growth)
    except StructureError as exc:
        raise UsageError(str(exc))


def cmd_play(args) -> int:
    if args.rounds <= 0:
        raise UsageError("rounds must be positive")
    desc, ref = _load_class(args.cls)
    try:
        oracle = parse_oracle(args.oracle) if args.oracle else None
    except (StructureError, FormatError, OSError) as exc:
        raise UsageError(f"cannot build oracle {args.oracle!r}: {exc}")
    try:
        eve = _strategy(args.eve, desc, oracle, args)
    except GoodnessError as exc:
        raise UsageError(f"chain rejected: {exc} "
                         f"(witness: {exc.verdict.to_json()})")
    odd = _strategy(args.odd, desc, oracle, args)
    transcript = play(eve, odd, desc, oracle, args.rounds, seed=args.seed,
                      class_ref=ref)
    transcript.save(args.out)
    verdict = adjudicate(transcript, oracle=oracle)
    base, ext = os.path.splitext(args.out)
    adj_path = base + ".adjudication" + (ext or ".json")
    _write_json(adj_path, verdict.to_json())
    print(f"moves: {len(transcript.moves)}  outcome: {verdict.outcome}")
    if transcript.stuck is not None:
        print(f"stuck: {transcript.stuck['player']} at move "
              f"{transcript.stuck['index']}: {transcript.stuck['reason']}")
        return EXIT_STUCK
    return {"odd-consistent": EXIT_HOLDS,
            "eve-blocking": EXIT_FAILS}.get(verdict.outcome, EXIT_UNKNOWN)


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    app = create_app(args.data_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_HOLDS


def build_parser() -> _Parser:
    parser = _Parser(prog="structforge",
                     description="workbench for finite relational structures")
    sub = parser.add_subparsers(dest="command", metavar="command")

    def common(p):
        p.add_argument("--class", dest="cls", default="graphs",
                       help="builtin class name or descriptor file")
        p.add_argument("--seed", type=int, default=0)

    p_check = sub.add_parser("check", help="bounded AP/CAP/WAP verdicts")
    common(p_check)
    p_check.add_argument("--props", default="ap,cap,wap",
                         help="comma list from ap,cap,wap")
    p_check.add_argument("--member-bound", type=int, default=4)
    p_check.add_argument("--ext-bound", type=int, default=7)
    p_check.add_argument("--instance-bound", type=int, default=6)
    p_check.add_argument("--v-bound", type=int, default=10)
    p_check.add_argument("-o", "--report", default="check-report.json")
    p_check.set_defaults(func=cmd_check)

    p_limit = sub.add_parser("limit", help="build and verify a limit run")
    common(p_limit)
    p_limit.add_argument("--stages", type=int, default=20)
    p_limit.add_argument("--req-bound", type=int, default=3)
    p_limit.add_argument("--window", type=int, default=None)
    p_limit.add_argument("--pair-window", type=int, default=None)
    p_limit.add_argument("--weak-bound", type=int, default=None)
    p_limit.add_argument("--attempts", type=int, default=None)
    p_limit.add_argument("-o", "--out", default="limit-run.json")
    p_limit.set_defaults(func=cmd_limit)

    p_play = sub.add_parser("play", help="run a seeded game to adjudication")
    common(p_play)
    p_play.add_argument("--oracle", default=None,
                        help="line, ray, rado, or limit:<run-file>")
    p_play.add_argument("--eve", default="random", help="Eve's strategy")
    p_play.add_argument("--odd", default="random", help="Odd's strategy")
    p_play.add_argument("--rounds", type=int, default=10)
    p_play.add_argument("--growth", type=int, default=1,
                        help="growth bound for random moves")
    p_play.add_argument("--chain", default=None,
                        help="chain file for chain-eve")
    p_play.add_argument("-o", "--out", default="transcript.json")
    p_play.set_defaults(func=cmd_play)

    p_serve = sub.add_parser("serve", help="serve the game session API")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8431)
    p_serve.add_argument("--data-dir", default=None,
                         help="transcript directory (default FORGE_DATA_DIR)")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            raise UsageError("a command is required "
                             "(check, limit, play, serve)")
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
