"""Amalgamation searches, good pairs, and the bounded property checker."""

import pytest

from structforge import (Embedding, builtin_class, check_property,
                         explicit_class, find_amalgam, find_good_extension,
                         is_good_pair)
from structforge.structures import GRAPH_SIGNATURE, FinStructure, \
    induced_substructure


def graph(size, edges):
    sym = {(u, v) for u, v in edges} | {(v, u) for u, v in edges}
    return FinStructure(GRAPH_SIGNATURE, size, {"E": frozenset(sym)})


K1 = graph(1, [])
K2 = graph(2, [(0, 1)])
E2 = graph(2, [])
E3 = graph(3, [])
P3_ENDS = graph(3, [(0, 2), (2, 1)])  # path with prefix {0, 1} at the ends


def test_find_amalgam_free_join_in_graphs():
    desc = builtin_class("graphs")
    f = Embedding(K1, K2, (0,))
    g = Embedding(K1, E2, (0,))
    found = find_amalgam(f, g, desc)
    assert found is not None
    joined, fp, gp = found
    assert fp.is_valid() and gp.is_valid()
    # the two images agree exactly on the shared base point
    assert fp.mapping[f.mapping[0]] == gp.mapping[g.mapping[0]]


def test_find_amalgam_keeps_left_as_prefix():
    desc = builtin_class("graphs")
    f = Embedding(K1, K2, (0,))
    g = Embedding(K1, E2, (0,))
    joined, fp, _ = find_amalgam(f, g, desc)
    assert fp.mapping == tuple(range(K2.size))
    prefix, _ = induced_substructure(joined, range(K2.size))
    assert prefix == K2


def test_find_amalgam_respects_v_bound():
    desc = builtin_class("graphs")
    f = Embedding(K1, K2, (0,))
    g = Embedding(K1, E2, (0,))
    assert find_amalgam(f, g, desc, v_bound=2) is None


def test_good_pair_exemplars_in_linear_graphs():
    desc = builtin_class("linear_graphs")
    inc = Embedding(E2, E3, (0, 1))
    # three isolated points over two: the two instances at distance two in a
    # long path force a short cycle, certified by the class refuter
    assert is_good_pair(E2, E3, inc, desc).status == "fails"
    # the connecting path is good over its endpoints
    inc = Embedding(E2, P3_ENDS, (0, 1))
    assert is_good_pair(E2, P3_ENDS, inc, desc).status == "holds"
    ident = Embedding(K1, K1, (0,))
    assert is_good_pair(K1, K1, ident, desc).status == "holds"


def test_good_pair_fails_carries_replayable_witness():
    desc = builtin_class("linear_graphs")
    inc = Embedding(E2, E3, (0, 1))
    verdict = is_good_pair(E2, E3, inc, desc)
    assert verdict.status == "fails"
    w = verdict.witness
    assert w is not None
    # the witness instances really embed the extension
    from structforge import structure_from_json
    left = structure_from_json(w["left"], GRAPH_SIGNATURE)
    right = structure_from_json(w["right"], GRAPH_SIGNATURE)
    assert Embedding(E3, left, tuple(w["left_map"])).is_valid()
    assert Embedding(E3, right, tuple(w["right_map"])).is_valid()
    assert desc.member(left) and desc.member(right)


def test_find_good_extension_returns_self_good_base():
    desc = builtin_class("linear_graphs")
    found = find_good_extension(K1, desc)
    assert found is not None
    ext, inc, verdict = found
    assert ext == K1
    assert inc.mapping == (0,)
    assert verdict.status == "holds"
    found = find_good_extension(K2, desc)
    assert found is not None
    assert found[0] == K2


def test_hierarchy_verdicts_frozen():
    expected = {"forests": {"AP": "fails", "CAP": "holds", "WAP": "holds"},
                "linear_graphs": {"AP": "fails", "CAP": "holds",
                                  "WAP": "holds"},
                "graphs": {"AP": "holds", "CAP": "holds", "WAP": "holds"}}
    for name, cells in expected.items():
        desc = builtin_class(name)
        for prop, status in cells.items():
            assert check_property(desc, prop).status == status, (name, prop)


def test_ap_failure_witness_is_two_isolated_points():
    desc = builtin_class("forests")
    verdict = check_property(desc, "AP")
    assert verdict.status == "fails"
    base = verdict.witness["base"]
    assert base["size"] == 2 and base["relations"]["E"] == []


def test_zero_budget_is_unknown_not_fails():
    desc = builtin_class("graphs")
    assert check_property(desc, "AP", v_bound=0).status == "unknown"


def test_explicit_class_ap_failure_is_certified():
    family = [graph(0, []), graph(1, []), graph(2, []), graph(2, [(0, 1)])]
    tiny = explicit_class("tiny-graphs", family, symmetric=("E",),
                          irreflexive=("E",))
    assert check_property(tiny, "AP").status == "fails"
    # the maximal members rescue CAP and WAP
    assert check_property(tiny, "CAP").status == "holds"
    assert check_property(tiny, "WAP").status == "holds"


def test_wap_never_certifies_fails_on_builtins():
    # a certified WAP failure needs an exhausted extension scan; builtins
    # cannot exhaust it and finite families always keep a maximal member
    for name in ("graphs", "linear_graphs", "forests"):
        desc = builtin_class(name)
        assert check_property(desc, "WAP").status in ("holds", "unknown")


def test_bad_mode_rejected():
    with pytest.raises(Exception):
        check_property(builtin_class("graphs"), "JEP")
