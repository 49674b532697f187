import random

import pytest
from hypothesis import given, strategies as st

from dynforest.algebra import eval_vh_codes, to_vh_forest
from dynforest.cluster import (NIL, build_cluster_forest, check_valid, dump_clustering,
                               evaluate_cluster_forest, is_saturated, mergeable, saturate,
                               size_bound, trivial_clustering)
from dynforest.forest import Forest, line_forest, parse_forest, random_forest

from algebras import two_element
from oracles import forests


def test_chain_of_seven():
    F = line_forest(("a",), "a", 7)
    cl = saturate(F, 3)
    assert cl.clusters(F) == [[0], [1, 2, 3], [4, 5, 6]]
    cf = build_cluster_forest(F, cl)
    assert cf.forest.parent == [-1, 0, 1]
    assert dump_clustering(F, cl).splitlines()[1] == "repr=1 size=3 border=1 nodes=1,2,3"


def test_small_forest_is_one_cluster():
    F = parse_forest("a(b,c),d", ("a", "b", "c", "d"))
    assert saturate(F, 4).count(F) == 1
    assert saturate(F, 3).count(F) == 2


def test_k1_is_trivial():
    F = random_forest(30, "ab", random.Random(0))
    assert saturate(F, 1).count(F) == 30


def test_check_valid_rejects():
    F = parse_forest("a(b(c),d(e))", tuple("abcde"))
    assert not check_valid(F, 5, [[0, 1, 3], [2], [4]])          # border nodes 1 and 3
    assert not check_valid(F, 5, [[0, 2], [1], [3, 4]])          # 0 and 2 are not adjacent
    assert not check_valid(F, 2, [[0, 1, 2], [3, 4]])            # too large
    assert check_valid(F, 5, [[0, 1, 2], [3, 4]])


def test_mergeable_shapes():
    F = parse_forest("a(b,c)", ("a", "b", "c"))
    cl = trivial_clustering(F, 3)
    assert mergeable(F, cl, 1, 2)
    with pytest.raises(ValueError):
        mergeable(F, cl, 0, 2)


@given(forests(max_size=40), st.sampled_from([2, 3, 4, 8, 16]))
def test_saturated_valid_and_dense(F, k):
    cl = saturate(F, k)
    assert is_saturated(F, k, cl)
    if F.n >= k:
        assert cl.count(F) <= size_bound(F.n, k)
    assert cl.work == F.n


@given(forests(max_size=40), st.sampled_from([2, 3, 5]), st.integers(0, 10**6))
def test_cluster_forest_structure(F, k, seed):
    cl = saturate(F, k, random.Random(seed), p_merge=0.6)
    assert check_valid(F, k, cl.clusters(F))
    cf = build_cluster_forest(F, cl)
    for c, C in enumerate(cf.members):
        # a cluster's children clusters hang below its border node
        for d in range(len(cf.members)):
            if cf.forest.parent[d] == c:
                assert F.parent[cf.members[d][0]] == cf.border[c]
        assert len(cf.sub_parent[c]) == len(C) + (cf.hole_index[c] != NIL)
        for u in C:
            assert cf.cluster_of[u] == c


def _vh_forest(rec, F):
    return to_vh_forest(rec, F)


@given(forests(max_size=30), st.sampled_from([2, 3, 4]), st.integers(0, 10**6), st.integers(0, 1))
def test_evaluation_transfer(F, k, seed, which):
    rec = two_element()[which]
    alg = rec.algebra
    G = _vh_forest(rec, F)
    cl = saturate(G, k, random.Random(seed), p_merge=0.7)
    cf = build_cluster_forest(G, cl)
    top = evaluate_cluster_forest(alg, G, cf)
    assert eval_vh_codes(alg, top) == eval_vh_codes(alg, G)
