"""Class catalog: membership, enumeration, descriptors, extensions."""

import pytest

from structforge import (FormatError, builtin_class, descriptor_from_json,
                         enumerate_members, explicit_class)
from structforge.classes import BUILTIN_CLASSES, pointed_extensions
from structforge.structures import GRAPH_SIGNATURE, FinStructure

from bruteforce import (all_labeled_graphs, is_disjoint_union_of_paths,
                        is_forest)


def graph(size, edges):
    sym = {(u, v) for u, v in edges} | {(v, u) for u, v in edges}
    return FinStructure(GRAPH_SIGNATURE, size, {"E": frozenset(sym)})


def test_linear_graph_membership_matches_bruteforce():
    desc = builtin_class("linear_graphs")
    for n in range(5):
        for s in all_labeled_graphs(n, GRAPH_SIGNATURE):
            assert desc.member(s) == is_disjoint_union_of_paths(s)


def test_forest_membership_matches_bruteforce():
    desc = builtin_class("forests")
    for n in range(5):
        for s in all_labeled_graphs(n, GRAPH_SIGNATURE):
            assert desc.member(s) == is_forest(s)


def test_member_counts_up_to_four():
    # iso classes cumulative in the size bound
    expected = {"graphs": [1, 2, 4, 8, 19],
                "linear_graphs": [1, 2, 4, 7, 12],
                "forests": [1, 2, 4, 7, 13],
                "trees": [0, 1, 2, 3, 5],
                "linear_orders": [1, 2, 3, 4, 5],
                "connected_linear_graphs": [0, 1, 2, 3, 4]}
    for name, counts in expected.items():
        desc = builtin_class(name)
        assert [len(enumerate_members(desc, b)) for b in range(5)] == counts


def test_enumerate_members_are_members_and_distinct():
    desc = builtin_class("graphs")
    members = enumerate_members(desc, 3)
    assert all(desc.member(m) for m in members)
    assert len({id(m) for m in members}) == len(members)


def test_unknown_builtin_raises():
    with pytest.raises((KeyError, FormatError, ValueError)):
        builtin_class("widgets")


def test_explicit_class_membership_is_up_to_iso():
    # the listed family must already be closed under induced substructures;
    # the descriptor matches exactly those, up to isomorphism
    family = [graph(0, []), graph(1, []), graph(2, []),
              graph(2, [(0, 1)]), graph(3, [(0, 1), (1, 2)])]
    desc = explicit_class("p3-age", family, symmetric=("E",),
                          irreflexive=("E",))
    assert desc.member(graph(3, [(0, 1), (1, 2)]))
    # relabeled copies are members, strangers are not
    assert desc.member(graph(3, [(1, 0), (2, 1)]))
    assert not desc.member(graph(3, []))
    assert not desc.member(graph(3, [(0, 1), (1, 2), (0, 2)]))
    assert not desc.member(graph(4, []))
    assert len(enumerate_members(desc, 3)) == 5


def test_descriptor_json_roundtrip():
    for name in BUILTIN_CLASSES:
        desc = builtin_class(name)
        back = descriptor_from_json(desc.to_json())
        assert back.name == desc.name
    payload = {"name": "tiny",
               "signature": [{"name": "E", "arity": 2}],
               "symmetric": ["E"],
               "members": [{"size": 1, "relations": {"E": []}},
                           {"size": 2, "relations": {"E": [[0, 1], [1, 0]]}}]}
    explicit = descriptor_from_json(payload)
    assert explicit.member(graph(2, [(0, 1)]))
    back = descriptor_from_json(explicit.to_json())
    assert back.member(graph(2, [(0, 1)]))
    assert not back.member(graph(3, [(0, 1), (1, 2)]))


def test_descriptor_json_rejects_garbage():
    with pytest.raises(FormatError):
        descriptor_from_json(["not", "a", "descriptor"])
    with pytest.raises(FormatError):
        descriptor_from_json({"neither": True})


def test_pointed_extensions_start_with_the_base():
    desc = builtin_class("graphs")
    k1 = graph(1, [])
    exts = pointed_extensions(desc, k1, 1)
    assert exts[0] == k1
    assert all(e.size <= 2 for e in exts)
    assert len(exts) == 3
    # every extension keeps the base as induced prefix
    from structforge import induced_substructure
    for e in exts:
        prefix, _ = induced_substructure(e, range(1))
        assert prefix == k1
