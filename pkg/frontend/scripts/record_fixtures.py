#!/usr/bin/env python3
"""Regenerate the recorded API fixtures under test/fixtures/.

Needs the structforge package installed (the CLI and server must be on
PATH). Plays a seeded game through the CLI, then replays the same moves
through a live server session exactly as the console would, recording
every request/response pair. Run from the frontend directory:

    python3 scripts/record_fixtures.py
"""

import json
import pathlib
import subprocess
import sys
import tempfile
import time

import httpx

PORT = 8447
BASE = f"http://127.0.0.1:{PORT}"
FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "test" / "fixtures"

GAME = {"class": "linear_graphs", "oracle": "line", "rounds": 6, "seed": 4}


class Recorder:
    """httpx wrapper that logs each exchange in console order."""

    def __init__(self, client):
        self.client = client
        self.exchanges = []

    def get(self, path):
        res = self.client.get(path)
        self.exchanges.append({"method": "GET", "path": path,
                               "status": res.status_code, "response": res.json()})
        return res

    def post(self, path, body):
        res = self.client.post(path, json=body)
        self.exchanges.append({"method": "POST", "path": path,
                               "status": res.status_code, "request_body": body,
                               "response": res.json()})
        return res


def eve_payloads(transcript):
    out = []
    for entry in transcript["moves"]:
        if entry["player"] != "eve":
            continue
        if "full" in entry:
            out.append({"move": entry["full"]})
        else:
            out.append({"added_elements": entry["added_elements"],
                        "added_tuples": entry["added_tuples"]})
    return out


def chord_move(top):
    """The board plus an edge between existing vertices. On a path top this
    closes a cycle, so the class membership check refuses it."""
    edges = [list(t) for t in top["relations"].get("E", [])]
    for u in range(top["size"]):
        for v in range(u + 1, top["size"]):
            if [u, v] not in edges:
                bad = dict(top)
                bad["relations"] = {"E": edges + [[u, v], [v, u]]}
                return {"move": bad}
    return None


def edge_drop_move(top):
    """The board minus one edge, same size: still a member, but the previous
    top is no longer induced in it."""
    edges = [list(t) for t in top["relations"].get("E", [])]
    if not edges:
        return None
    e0 = edges[0]
    kept = [t for t in edges if t != e0 and t != [e0[1], e0[0]]]
    bad = dict(top)
    bad["relations"] = {"E": kept}
    return {"move": bad}


def record_eve_session(rec, cli_transcript):
    """Drive the session the way SessionConsole does, recording exchanges."""
    create = {"class": GAME["class"], "oracle": GAME["oracle"],
              "human_role": "eve", "rounds": GAME["rounds"], "seed": GAME["seed"]}
    res = rec.post("/sessions", create)
    assert res.status_code == 201, res.text
    view = res.json()
    sid = view["id"]
    scenario = []

    def after_ok(view):
        if view["status"] == "active" and view["your_turn"]:
            rec.get(f"/sessions/{sid}/hints")
        if view["status"] != "active":
            rec.get(f"/sessions/{sid}/adjudication")

    after_ok(view)
    payloads = eve_payloads(cli_transcript)
    probed = set()
    for payload in payloads:
        top = view["top"]
        if top and top["size"] >= 3 and not probed:
            for reason, probe in [("not-a-member", chord_move(top)),
                                  ("not-induced", edge_drop_move(top))]:
                if probe is None:
                    continue
                res = rec.post(f"/sessions/{sid}/moves", probe)
                assert res.status_code == 422, res.text
                assert res.json()["detail"]["reason"] == reason, res.text
                scenario.append({"payload": probe, "expect": "refused",
                                 "reason": reason})
                probed.add(reason)
        res = rec.post(f"/sessions/{sid}/moves", payload)
        assert res.status_code == 200, res.text
        view = res.json()
        scenario.append({"payload": payload, "expect": "ok"})
        after_ok(view)
    assert probed == {"not-a-member", "not-induced"}, probed
    assert view["status"] == "finished", view["status"]
    return create, scenario


def record_spoiler_opening(rec):
    create = {"class": "linear_graphs", "oracle": "ray",
              "human_role": "odd", "rounds": 4, "seed": 3}
    res = rec.post("/sessions", create)
    assert res.status_code == 201, res.text
    view = res.json()
    assert view["moves"][0]["notes"].get("opening"), "expected an opening note"
    rec.get(f"/sessions/{view['id']}/hints")
    return create


def record_bad_class(rec):
    res = rec.post("/sessions", {"class": "no-such-class", "human_role": "eve",
                                 "rounds": 2})
    assert res.status_code == 404, res.text


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    tmp = pathlib.Path(tempfile.mkdtemp(prefix="forge-record-"))

    game = tmp / "cli-game.json"
    subprocess.run(
        ["structforge", "play", "--class", GAME["class"], "--oracle",
         GAME["oracle"], "--eve", "random", "--odd", "generic-odd",
         "--rounds", str(GAME["rounds"]), "--seed", str(GAME["seed"]),
         "-o", str(game)],
        check=True, capture_output=True)
    cli_transcript = json.loads(game.read_text())
    cli_adjudication = json.loads(
        (tmp / "cli-game.adjudication.json").read_text())

    for name, args in [
        ("graphs-run.json", ["--class", "graphs", "--stages", "12",
                             "--seed", "1"]),
        ("pending-run.json", ["--class", "graphs", "--stages", "3",
                              "--seed", "1"]),
    ]:
        out = FIXTURES / name
        proc = subprocess.run(["structforge", "limit", *args, "-o", str(out)],
                              capture_output=True)
        if proc.returncode not in (0, 3):
            sys.exit(f"limit run for {name} failed: {proc.stderr.decode()}")

    server = subprocess.Popen(
        ["structforge", "serve", "--port", str(PORT), "--data-dir", str(tmp)],
        stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    try:
        with httpx.Client(base_url=BASE, timeout=60) as client:
            for _ in range(50):
                try:
                    client.get("/catalog/classes")
                    break
                except httpx.TransportError:
                    time.sleep(0.2)
            rec = Recorder(client)
            create, scenario = record_eve_session(rec, cli_transcript)
            (FIXTURES / "eve-session.json").write_text(json.dumps({
                "create": create,
                "scenario": scenario,
                "exchanges": rec.exchanges,
                "cli": {"transcript": cli_transcript,
                        "adjudication": cli_adjudication},
            }, indent=1))

            rec2 = Recorder(client)
            create2 = record_spoiler_opening(rec2)
            record_bad_class(rec2)
            (FIXTURES / "spoiler-opening.json").write_text(json.dumps({
                "create": create2,
                "exchanges": rec2.exchanges,
            }, indent=1))
    finally:
        server.terminate()
        server.wait()
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
