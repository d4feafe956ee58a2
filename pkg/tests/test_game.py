"""Game engine: legality, transcripts, strategies, adjudication."""

import pytest

from structforge import (Embedding, GameError, GameState, GoodnessError,
                         StrategyStuck, Transcript, adjudicate, builtin_class,
                         candidate_moves, parse_oracle, play, replay_chain,
                         strategy_by_name)
from structforge.game import EveChainStrategy, apply_move, validate_move
from structforge.structures import GRAPH_SIGNATURE, FinStructure

LINEAR = builtin_class("linear_graphs")
GRAPHS = builtin_class("graphs")


def graph(size, edges):
    sym = {(u, v) for u, v in edges} | {(v, u) for u, v in edges}
    return FinStructure(GRAPH_SIGNATURE, size, {"E": frozenset(sym)})


def test_move_legality_reasons():
    state = GameState(GRAPHS, None)
    apply_move(state, graph(2, []))
    # shrinking the universe
    with pytest.raises(GameError) as exc:
        validate_move(state, graph(1, []))
    assert exc.value.reason == "universe-convention"
    # edge between old vertices: the prefix is no longer induced
    with pytest.raises(GameError) as exc:
        validate_move(state, graph(3, [(0, 1)]))
    assert exc.value.reason == "not-induced"
    # non-member against the linear class
    state = GameState(LINEAR, None)
    with pytest.raises(GameError) as exc:
        validate_move(state, graph(3, [(0, 1), (1, 2), (0, 2)]))
    assert exc.value.reason == "not-a-member"


def test_stalling_is_legal():
    state = GameState(GRAPHS, None)
    apply_move(state, graph(1, []))
    apply_move(state, graph(1, []))
    assert state.turn == 2
    assert state.chain[0] == state.chain[1]


def test_candidate_moves_stall_first():
    state = GameState(GRAPHS, None)
    apply_move(state, graph(1, []))
    moves = candidate_moves(state, 1)
    assert moves[0] == state.top()
    assert all(m.size <= 2 for m in moves)


def test_transcript_roundtrip_and_replay():
    line = parse_oracle("line")
    eve = strategy_by_name("random", LINEAR, line)
    odd = strategy_by_name("generic-odd", LINEAR, line)
    transcript = play(eve, odd, LINEAR, line, 6, seed=1)
    payload = transcript.to_json()
    back = Transcript.from_json(payload)
    assert back.to_json() == payload
    chain = replay_chain(back)
    assert len(chain) == len(transcript.moves)
    # deltas rebuild exactly the structures the strategies produced
    assert chain[-1].size == transcript.moves[-1]["size"]


def test_replay_rejects_tampered_chain():
    transcript = play(strategy_by_name("random", GRAPHS, None, growth=1),
                      strategy_by_name("random", GRAPHS, None, growth=1),
                      GRAPHS, None, 4, seed=2)
    bad = transcript.to_json()
    bad["moves"][0]["full"]["relations"]["E"] = [[0, 0]]
    tampered = Transcript.from_json(bad)
    assert adjudicate(tampered).outcome == "inconclusive"


def test_generic_odd_covers_one_generator_per_turn():
    line = parse_oracle("line")
    transcript = play(strategy_by_name("random", LINEAR, line),
                      strategy_by_name("generic-odd", LINEAR, line),
                      LINEAR, line, 10, seed=3)
    verdict = adjudicate(transcript, oracle=line)
    assert verdict.outcome == "odd-consistent"
    assert verdict.details["coverage"] == 5
    # transcripts re-adjudicate to the same verdict
    again = adjudicate(Transcript.from_json(transcript.to_json()),
                       oracle=line)
    assert again.outcome == verdict.outcome


def test_generic_odd_on_rado():
    rado = parse_oracle("rado")
    transcript = play(strategy_by_name("random", GRAPHS, rado),
                      strategy_by_name("generic-odd", GRAPHS, rado),
                      GRAPHS, rado, 10, seed=3)
    verdict = adjudicate(transcript, oracle=rado)
    assert verdict.outcome == "odd-consistent"
    assert verdict.details["coverage"] == 5


def test_spoiler_blocks_the_ray():
    ray = parse_oracle("ray")
    transcript = play(strategy_by_name("spoiler-eve", LINEAR, ray),
                      strategy_by_name("random", LINEAR, ray),
                      LINEAR, ray, 10, seed=3)
    verdict = adjudicate(transcript, oracle=ray)
    assert verdict.outcome == "eve-blocking"
    blocks = verdict.details["blocks"]
    assert len(blocks) == 4
    # every block is a degree obstruction that replays against the final top
    final = replay_chain(transcript)[-1]
    adj = final.adjacency("E")[0]
    for cert in blocks:
        assert cert["rule"] == "degree"
        cap = ray.degree_capacity(cert["blocked_generator"])
        assert adj[cert["element"]].bit_count() > cap


def test_spoiler_gets_stuck_on_the_line():
    line = parse_oracle("line")
    transcript = play(strategy_by_name("spoiler-eve", LINEAR, line),
                      strategy_by_name("random", LINEAR, line),
                      LINEAR, line, 10, seed=3)
    assert transcript.stuck is not None
    assert transcript.stuck["player"] == "eve"
    assert transcript.stuck["index"] == 2
    assert transcript.stuck["strategy"] == "spoiler-eve"


def test_chain_strategy_embeds_a_growing_path():
    chain = [graph(1, []),
             graph(2, [(0, 1)]),
             graph(3, [(0, 1), (1, 2)]),
             graph(4, [(0, 1), (1, 2), (2, 3)])]
    line = parse_oracle("line")
    eve = EveChainStrategy(chain, LINEAR)
    odd = strategy_by_name("generic-odd", LINEAR, line)
    transcript = play(eve, odd, LINEAR, line, 8, seed=0)
    assert transcript.stuck is None
    eve_notes = [m["notes"] for m in transcript.moves
                 if m["player"] == "eve"]
    indices = [n["chain_index"] for n in eve_notes if "chain_index" in n]
    assert indices == sorted(indices)
    assert indices[-1] == len(chain) - 1
    # the running chain embeddings agree with all earlier ones
    maps = [dict(n["embedding"]) for n in eve_notes if "embedding" in n]
    for earlier, later in zip(maps, maps[1:]):
        assert all(later[k] == v for k, v in earlier.items())


def test_chain_strategy_rejects_bad_chain_at_construction():
    # two disjoint paths growing in lockstep: the link over 2K1 is not good
    chain = [graph(2, []),
             graph(4, [(0, 2), (1, 3)])]
    with pytest.raises(GoodnessError) as exc:
        EveChainStrategy(chain, LINEAR)
    assert exc.value.index == 0
    assert exc.value.verdict.status == "fails"
    assert exc.value.verdict.witness is not None


def test_chain_strategy_requires_prefix_links():
    with pytest.raises(Exception) as exc:
        EveChainStrategy([graph(2, [(0, 1)]), graph(3, [(0, 2), (2, 1)])],
                         LINEAR)
    assert "prefix" in str(exc.value)


def test_strategy_by_name_errors():
    with pytest.raises(Exception):
        strategy_by_name("alpha-beta", GRAPHS, None)
    with pytest.raises(Exception):
        strategy_by_name("generic-odd", GRAPHS, None)


def test_odd_cannot_open():
    line = parse_oracle("line")
    odd = strategy_by_name("generic-odd", LINEAR, line)
    state = GameState(LINEAR, line)
    with pytest.raises(StrategyStuck):
        odd.propose(state, None)


def test_adjudicate_without_oracle_is_inconclusive():
    transcript = play(strategy_by_name("random", GRAPHS, None),
                      strategy_by_name("random", GRAPHS, None),
                      GRAPHS, None, 4, seed=0)
    assert adjudicate(transcript).outcome == "inconclusive"
