import random

import pytest
from hypothesis import given, strategies as st

from dynforest.forest import (NIL, Forest, ForestSyntaxError, UnknownLetterError, compute_timestamps,
                              concat, enumerate_forests, enumerate_shapes, is_ancestor, line_forest,
                              parikh, parse_context, parse_forest, plug_forest, project, random_forest,
                              serialize_forest)

from oracles import contexts, forests


def test_links_of_small_forest():
    F = parse_forest("a(b,c(d))")
    assert F.first_child == [1, -1, 3, -1]
    assert F.next_sibling == [-1, 2, -1, -1]
    assert F.parent == [-1, 0, 0, 2]
    assert F.roots() == [0]


def test_empty_forest():
    F = parse_forest("", ("a",))
    assert F.n == 0 and F.roots() == []
    assert serialize_forest(F) == ""


def test_roots_are_siblings():
    F = parse_forest("a,b(a),c")
    assert F.roots() == [0, 1, 3]


@pytest.mark.parametrize("text,pos", [("a(b", 3), ("a,", 2), ("a)", 1), ("(a)", 0), ("a b", 2)])
def test_syntax_errors_carry_position(text, pos):
    with pytest.raises(ForestSyntaxError) as exc:
        parse_forest(text)
    assert exc.value.position == pos


def test_unknown_letter():
    with pytest.raises(UnknownLetterError):
        parse_forest("a(z)", ("a", "b"))


def test_hole_only_in_contexts():
    with pytest.raises(UnknownLetterError):
        parse_forest("a(_)", ("a",))
    C = parse_context("a(_),b", ("a", "b"))
    assert C.hole() == 1
    with pytest.raises(ForestSyntaxError):
        parse_context("a(_,_)", ("a",))


def test_prefix_order_enforced():
    with pytest.raises(ValueError):
        Forest(("a",), [0, 0, 0], [-1, -1, 0])


def test_relabel_keeps_shape():
    F = parse_forest("a(b),b")
    F.relabel(0, "b")
    assert serialize_forest(F) == "b(b),b"
    with pytest.raises(IndexError):
        F.relabel(3, "a")
    with pytest.raises(UnknownLetterError):
        F.relabel(0, "z")


def test_projection_promotes_children():
    F = parse_forest("e(a,e(b))", ("a", "b", "e"))
    assert serialize_forest(project(F, ["a", "b"])) == "a,b"
    G = parse_forest("a(e(b),e)", ("a", "b", "e"))
    assert serialize_forest(project(G, ["a", "b"])) == "a(b)"


def test_catalan_shapes():
    assert [sum(1 for _ in enumerate_shapes(n)) for n in range(7)] == [1, 1, 2, 5, 14, 42, 132]
    assert sum(1 for _ in enumerate_forests("ab", 3)) == 1 + 2 + 2 * 4 + 5 * 8


def test_plug_and_concat():
    C = parse_context("a(b,_),b", ("a", "b"))
    X = parse_forest("b(a)", ("a", "b"))
    assert serialize_forest(plug_forest(C, X)) == "a(b,b(a)),b"
    assert serialize_forest(concat(X, X)) == "b(a),b(a)"
    assert serialize_forest(line_forest(("a", "b"), "a", 3)) == "a(a(a))"


@given(forests(("a", "b", "c"), 20))
def test_roundtrip(F):
    G = parse_forest(serialize_forest(F), F.alphabet)
    assert G == F
    assert Forest.from_nested(F.to_nested(), F.alphabet) == F


@given(contexts())
def test_context_roundtrip(C):
    assert parse_context(serialize_forest(C), C.alphabet) == C


@given(forests(max_size=25))
def test_timestamps_match_ancestry(F):
    ts = compute_timestamps(F)
    for v in range(F.n):
        anc = {v}
        p = F.parent[v]
        while p != NIL:
            anc.add(p)
            p = F.parent[p]
        for u in range(F.n):
            assert is_ancestor(ts, u, v) == (u in anc)


@given(forests(("a", "b", "c"), 20), st.sets(st.sampled_from("abc")))
def test_projection_keeps_counts_and_order(F, sub):
    P = project(F, sorted(sub))
    pk = parikh(P)
    for a, c in parikh(F).items():
        assert pk[a] == (c if a in sub else 0)
    assert [P.label(u) for u in range(P.n)] == [F.label(u) for u in range(F.n) if F.label(u) in sub]


def test_random_forest_is_deterministic():
    a = random_forest(200, "ab", random.Random(5))
    b = random_forest(200, "ab", random.Random(5))
    assert a == b
