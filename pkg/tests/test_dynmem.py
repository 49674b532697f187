import math
import random

import pytest
from hypothesis import given, strategies as st

from dynforest import CORPUS, corpus_automaton, corpus_text
from dynforest.algebra import syntactic_recognizer
from dynforest.automaton import accepts
from dynforest.cluster import size_bound
from dynforest.dynmem import (build_boolean, build_commutative, build_general, build_naive,
                              build_singleton, default_k, level_bound, parse_spec, spec_automaton)
from dynforest.forest import UnknownLetterError, line_forest, parse_forest, random_forest

from oracles import LANGUAGES, forests


def lockstep(a, b, F, rng, steps, check=None):
    n = F.n
    letters = a.alphabet
    for i in range(steps):
        u, x = rng.randrange(n), rng.choice(letters)
        assert a.update(u, x) == b.update(u, x), (i, u, x)
        if check is not None:
            check(i)


@pytest.mark.parametrize("name", CORPUS)
def test_general_matches_naive(name):
    A = corpus_automaton(name)
    rec = syntactic_recognizer(A)
    rng = random.Random(11)
    for n in (2, 3, 17, 300):
        F = random_forest(n, A.alphabet, rng, depth_bias=rng.random())
        gm, nm = build_general(A, F, rec=rec), build_naive(A, F)
        assert gm.member == nm.member == LANGUAGES[name](F)

        def check(i):
            assert gm.touched_levels == gm.depth
            if i % 100 == 0:
                assert gm.check_all_levels()
        lockstep(gm, nm, F, rng, 600, check)


@given(forests(("e", "m", "#"), 25, min_size=1), st.integers(0, 10**6), st.integers(2, 6))
def test_general_property(F, seed, k):
    A = corpus_automaton("marked_ancestor")
    gm = build_general(A, F, k=k)
    rng = random.Random(seed)
    for _ in range(30):
        u, x = rng.randrange(F.n), rng.choice("em#")
        F.relabel(u, x)
        assert gm.update(u, x) == LANGUAGES["marked_ancestor"](F)
    assert gm.check_all_levels()


def test_short_chain_has_one_level():
    A = corpus_automaton("parity")
    F = line_forest(A.alphabet, "a", 4)
    gm = build_general(A, F, k=4)
    assert gm.depth == 1 and gm.level_sizes() == [4, 1]


def test_degenerate_sizes():
    A = corpus_automaton("parity")
    gm = build_general(A, parse_forest("", A.alphabet))
    assert gm.depth == 0 and gm.member
    gm = build_general(A, parse_forest("a", A.alphabet))
    assert gm.depth == 0 and not gm.member
    assert gm.update(0, "b") and not gm.update(0, "a")


def test_marked_ancestor_unmark():
    A = corpus_automaton("marked_ancestor")
    F = parse_forest("e(m(e(#)),m)", A.alphabet)
    gm = build_general(A, F, k=2)
    assert gm.member
    assert not gm.update(1, "e")
    assert gm.update(1, "m")


def test_same_letter_still_touches_all_levels():
    A = corpus_automaton("antichain")
    F = random_forest(500, A.alphabet, random.Random(2))
    gm = build_general(A, F)
    before = gm.member
    assert gm.update(7, F.label(7)) == before
    assert gm.touched_levels == gm.depth > 0


def test_errors():
    A = corpus_automaton("parity")
    with pytest.raises(ValueError):
        build_general(A, parse_forest("a,a,a", A.alphabet), k=1)
    gm = build_general(A, parse_forest("a(b)", A.alphabet))
    with pytest.raises(IndexError):
        gm.update(2, "a")
    with pytest.raises(UnknownLetterError):
        gm.update(0, "z")


def test_default_k_and_levels():
    assert default_k(1, 2, 2) == 2
    assert default_k(2**40, 2, 2) == 10          # c = log2(16) = 4
    assert default_k(2**200, 1, 1) == 24         # clamped
    A = corpus_automaton("parity")
    for n in (10**3, 10**4, 10**5):
        F = random_forest(n, A.alphabet, random.Random(n))
        gm = build_general(A, F)
        assert gm.depth <= level_bound(n, gm.k)
        sizes = gm.level_sizes()
        for a, b in zip(sizes, sizes[1:]):
            assert b < a and (a < gm.k or b <= size_bound(a, gm.k))
        assert gm.build_work <= 10 * n


def test_naive_examples():
    A = corpus_automaton("leafword")
    F = parse_forest("1(1,1),#", A.alphabet)
    nm = build_naive(A, F)
    assert nm.member
    assert not nm.update(2, "0")            # a 1 leaf becomes 0: odd parity before #
    assert not nm.update(2, "0")
    assert nm.forest() == parse_forest("1(1,0),#", A.alphabet)


# -- constant-time maintainers ---------------------------------------------------------------

PARITY = parse_spec(corpus_text("parity.spec"))


def test_commutative_examples():
    F = parse_forest("a(b),a", ("a", "b"))
    m = build_commutative(F, PARITY.components["parity"])
    assert m.member
    assert not m.update(2, "b")
    three_b = parse_spec("alphabet: a b\ncomponent t commutative\nletter b threshold 3 modulus 1\naccept 3\n")
    m = build_commutative(parse_forest("b,b", ("a", "b")), three_b.components["t"])
    rng = random.Random(0)
    for _ in range(50):
        assert not m.update(rng.randrange(2), rng.choice("ab"))


def test_commutative_rejects_unknown_letter():
    m = build_commutative(parse_forest("a", ("a", "b")), PARITY.components["parity"])
    with pytest.raises(UnknownLetterError):
        m.update(0, "c")


SING = parse_spec("alphabet: a b e\ncomponent s singleton\nsubalphabet: a b\ntarget: a(b)\n")


def test_singleton_examples():
    F = parse_forest("e(a(e(b)))", ("a", "b", "e"))
    m = build_singleton(F, SING.components["s"])
    assert m.member
    assert not m.update(3, "e")
    assert m.update(3, "b")
    assert not m.update(0, "a")           # two a's: early exit, no reconstruction
    assert m.steps == 2 + 3


def test_singleton_order_matters():
    s = parse_spec("alphabet: a b e\ncomponent s singleton\nsubalphabet: a b\ntarget: a,b(a)\n").components["s"]
    m = build_singleton(parse_forest("e(b(a)),a", ("a", "b", "e")), s)
    assert not m.member
    m = build_singleton(parse_forest("a,e(b(e,a))", ("a", "b", "e")), s)
    assert m.member


def test_boolean_examples():
    spec = parse_spec("alphabet: a b e\ncomponent c commutative\nletter a threshold 0 modulus 1\naccept 0\n"
                      "component s singleton\nsubalphabet: a b\ntarget: a(b)\nformula: c & !s\n")
    F = parse_forest("e(a(e(b)))", ("a", "b", "e"))
    m = build_boolean(F, spec)
    s = build_singleton(F, spec.components["s"], spec.alphabet)
    rng = random.Random(5)
    for _ in range(300):
        u, x = rng.randrange(4), rng.choice("abe")
        assert m.update(u, x) == (not s.update(u, x))


def test_de_morgan():
    base = ("alphabet: a b e\ncomponent x commutative\nletter a threshold 1 modulus 2\naccept 2\n"
            "component y singleton\nsubalphabet: b\ntarget: b,b\n")
    p = parse_spec(base + "formula: !(x & y)")
    q = parse_spec(base + "formula: !x | !y")
    rng = random.Random(9)
    F = random_forest(40, ("a", "b", "e"), rng, weights=[2, 1, 6])
    m1, m2 = build_boolean(F, p), build_boolean(F, q)
    for _ in range(2000):
        u, x = rng.randrange(40), rng.choice("abeee")
        assert m1.update(u, x) == m2.update(u, x)


MIXED = parse_spec("""alphabet: a b e
component c commutative
letter a threshold 1 modulus 3
letter b threshold 2 modulus 1
accept 0 2
accept 1 0
accept 3 1
component s singleton
subalphabet: a b
target: a(b),b
formula: !c & s | c & !s
""")


@pytest.mark.parametrize("n", [5, 60, 600])
def test_o1_lockstep_with_equivalent_automaton(n):
    A = spec_automaton(MIXED)
    rng = random.Random(n)
    F = random_forest(n, MIXED.alphabet, rng, weights=[0, 0, 1])
    hot = [rng.randrange(n) for _ in range(6)]
    bm, nm = build_boolean(F, MIXED), build_naive(A, F)
    assert bm.member == nm.member
    hits = 0
    for _ in range(3000):
        u, x = rng.choice(hot), rng.choice("abee")
        b = bm.update(u, x)
        assert b == nm.update(u, x)
        hits += b
    assert hits > 0


def test_constant_steps_do_not_grow_with_n():
    maxima = set()
    for n in (10, 1000, 100000):
        rng = random.Random(1)
        F = random_forest(n, PARITY.alphabet, random.Random(n))
        m = build_boolean(F, PARITY)
        for _ in range(500):
            m.update(rng.randrange(n), rng.choice("ab"))
        maxima.add(m.max_steps)
    assert len(maxima) == 1
