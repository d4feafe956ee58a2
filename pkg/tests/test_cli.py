"""CLI: exit codes, report files, replay invariants."""

import json

from structforge import (Transcript, adjudicate, load_run, parse_oracle,
                         verify_run_ledger)
from structforge.cli import main


def run(*argv):
    return main(list(argv))


def test_check_exit_codes(tmp_path):
    report = str(tmp_path / "report.json")
    assert run("check", "--class", "graphs", "--props", "ap",
               "-o", report) == 0
    assert run("check", "--class", "forests", "-o", report) == 1
    assert run("check", "--class", "graphs", "--props", "ap",
               "--v-bound", "0", "-o", report) == 2
    assert run("check", "--class", "widgets", "-o", report) == 64
    assert run("check", "--class", "graphs", "--props", "zap",
               "-o", report) == 64


def test_check_report_file(tmp_path):
    report = str(tmp_path / "report.json")
    assert run("check", "--class", "forests", "-o", report) == 1
    payload = json.loads(open(report).read())
    assert payload["schema"] == "structforge/check/1"
    assert payload["results"]["AP"]["status"] == "fails"
    assert payload["results"]["CAP"]["status"] == "holds"
    assert payload["results"]["WAP"]["status"] == "holds"
    assert payload["results"]["AP"]["witness"]["base"]["size"] == 2


def test_check_descriptor_file_class(tmp_path):
    desc_path = tmp_path / "tiny.json"
    desc_path.write_text(json.dumps(
        {"name": "tiny", "signature": [{"name": "E", "arity": 2}],
         "symmetric": ["E"],
         "members": [{"size": 0, "relations": {"E": []}},
                     {"size": 1, "relations": {"E": []}},
                     {"size": 2, "relations": {"E": []}},
                     {"size": 2, "relations": {"E": [[0, 1], [1, 0]]}}]}))
    report = str(tmp_path / "report.json")
    assert run("check", "--class", str(desc_path), "--props", "ap",
               "-o", report) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("check", "--class", str(bad), "-o", report) == 64


def test_limit_exit_codes_and_run_file(tmp_path):
    out = str(tmp_path / "run.json")
    assert run("limit", "--class", "graphs", "--stages", "1",
               "-o", out) == 3
    assert run("limit", "--class", "graphs", "--stages", "12",
               "--seed", "1", "-o", out) == 0
    back = load_run(out)
    assert verify_run_ledger(back)["ok"]
    assert run("limit", "--class", "graphs", "--stages", "0",
               "-o", out) == 64


def test_limit_on_linear_graphs(tmp_path):
    out = str(tmp_path / "run.json")
    assert run("limit", "--class", "linear_graphs", "--stages", "20",
               "-o", out) == 0
    # too few stages leave scheduled requirements pending
    assert run("limit", "--class", "linear_graphs", "--stages", "10",
               "-o", out) == 3


def test_play_exit_codes(tmp_path):
    out = str(tmp_path / "game.json")
    assert run("play", "--class", "linear_graphs", "--oracle", "line",
               "--eve", "random", "--odd", "generic-odd",
               "--rounds", "10", "-o", out) == 0
    assert run("play", "--class", "linear_graphs", "--oracle", "ray",
               "--eve", "spoiler-eve", "--odd", "random",
               "--rounds", "10", "-o", out) == 1
    assert run("play", "--class", "linear_graphs", "--oracle", "line",
               "--eve", "spoiler-eve", "--odd", "random",
               "--rounds", "10", "-o", out) == 4
    assert run("play", "--rounds", "0", "-o", out) == 64
    assert run("play", "--oracle", "martian", "-o", out) == 64
    assert run("play", "--eve", "human-via-serve", "-o", out) == 64
    assert run("play", "--class", "graphs", "--eve", "minimax",
               "-o", out) == 64


def test_play_writes_replayable_transcript(tmp_path):
    out = str(tmp_path / "game.json")
    assert run("play", "--class", "linear_graphs", "--oracle", "line",
               "--eve", "random", "--odd", "generic-odd",
               "--rounds", "10", "--seed", "5", "-o", out) == 0
    transcript = Transcript.load(out)
    assert len(transcript.moves) == 10
    verdict = adjudicate(transcript, oracle=parse_oracle("line"))
    assert verdict.outcome == "odd-consistent"
    sidecar = json.loads(open(str(tmp_path / "game.adjudication.json")).read())
    assert sidecar["outcome"] == verdict.outcome


def test_play_is_deterministic_per_seed(tmp_path):
    a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    for out in (a, b):
        assert run("play", "--class", "linear_graphs", "--oracle", "line",
                   "--eve", "random", "--odd", "generic-odd",
                   "--rounds", "6", "-o", out) == 0
    assert Transcript.load(a).to_json() == Transcript.load(b).to_json()


def test_play_chain_eve(tmp_path):
    chain_path = tmp_path / "chain.json"
    chain_path.write_text(json.dumps(
        [{"size": 1, "relations": {"E": []}},
         {"size": 2, "relations": {"E": [[0, 1], [1, 0]]}},
         {"size": 3, "relations": {"E": [[0, 1], [1, 0], [1, 2], [2, 1]]}}]))
    out = str(tmp_path / "game.json")
    assert run("play", "--class", "linear_graphs", "--oracle", "line",
               "--eve", "chain-eve", "--chain", str(chain_path),
               "--odd", "generic-odd", "--rounds", "6", "-o", out) == 0
    # a chain whose first link is not good gets refused up front
    bad_chain = tmp_path / "bad.json"
    bad_chain.write_text(json.dumps(
        [{"size": 2, "relations": {"E": []}},
         {"size": 4, "relations": {"E": [[0, 2], [2, 0], [1, 3], [3, 1]]}}]))
    assert run("play", "--class", "linear_graphs", "--oracle", "line",
               "--eve", "chain-eve", "--chain", str(bad_chain),
               "--odd", "generic-odd", "--rounds", "6", "-o", out) == 64
    assert run("play", "--class", "linear_graphs", "--oracle", "line",
               "--eve", "chain-eve", "--odd", "generic-odd",
               "--rounds", "6", "-o", out) == 64


def test_no_command_is_usage_error():
    assert run() == 64
    assert run("conjure") == 64
