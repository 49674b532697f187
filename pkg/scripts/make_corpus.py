"""Regenerate the checked-in corpus automata under src/dynforest/corpus/.

Each automaton is written by hand as small Python state functions and
serialized to the line-oriented text format.  Run from the repo root:

    python3 scripts/make_corpus.py
"""
from __future__ import annotations

from pathlib import Path

from dynforest.algebra import dump_algebra, syntactic_recognizer
from dynforest.automaton import automaton_from_functions, parse_automaton, serialize_automaton
from dynforest.zg import is_zg, render_report

OUT = Path(__file__).resolve().parents[1] / "src" / "dynforest" / "corpus"


def parity():
    # even number of a-nodes over {a, b}
    return automaton_from_functions(
        "ab", ["even", "odd"], ["p0", "p1"], "p0", ["p0"],
        lambda p, q: p if q == "even" else ("p1" if p == "p0" else "p0"),
        lambda p, a: ({"p0": "even", "p1": "odd"}[p] if a == "b"
                      else {"p0": "odd", "p1": "even"}[p]),
        name="parity")


def antichain():
    # a-nodes pairwise incomparable; states count a's along the worst branch
    order = ["none", "some", "bad"]
    join = lambda p, q: max(p, q, key=order.index)
    return automaton_from_functions(
        "ab", order, order, "none", ["none", "some"], join,
        lambda p, a: p if a == "b" else ("some" if p == "none" else "bad"),
        name="antichain")


def marked_ancestor():
    # a unique '#' node that has a strict ancestor labeled m
    S = ["n0", "n1u", "n1m", "n2"]

    def comb(p, q):
        if p == "n0":
            return q
        if q == "n0":
            return p
        return "n2"

    def wrap(p, a):
        if a == "e":
            return p
        if a == "m":
            return "n1m" if p == "n1u" else p
        return "n1u" if p == "n0" else "n2"

    return automaton_from_functions("em#", S, S, "n0", ["n1m"], comb, wrap, name="marked_ancestor")


def next_sibling():
    # some a-node whose next sibling is labeled b
    Q = [f"{x}{f}" for x in "abc" for f in "01"]
    P = [f"f{f}l{l}" for f in "01" for l in "01"]

    def comb(p, q):
        found = p[1] == "1" or q[1] == "1" or (p[3] == "1" and q[0] == "b")
        return f"f{int(found)}l{int(q[0] == 'a')}"

    return automaton_from_functions("abc", Q, P, "f0l0", ["f1l0", "f1l1"], comb,
                                    lambda p, x: f"{x}{p[1]}", name="next_sibling")


def leafword():
    # leaves in prefix order: a #, with an even number of 1s before the first one
    Q = ["E", "O", "HE", "HO"]
    P = ["start"] + Q

    def comb(p, q):
        if p == "start" or p == "E":
            return q
        if p in ("HE", "HO"):
            return p
        return {"E": "O", "O": "E", "HE": "HO", "HO": "HE"}[q]

    def wrap(p, a):
        if p != "start":
            return p
        return {"0": "E", "1": "O", "#": "HE"}[a]

    return automaton_from_functions("01#", Q, P, "start", ["HE"], comb, wrap, name="leafword")


def everything():
    return automaton_from_functions("ab", ["t"], ["s"], "s", ["s"],
                                    lambda p, q: "s", lambda p, a: "t", name="everything")


CORPUS = {
    "parity": (parity, "even number of a-nodes"),
    "antichain": (antichain, "a-nodes form an antichain"),
    "marked_ancestor": (marked_ancestor, "unique '#' with an ancestor labeled m"),
    "next_sibling": (next_sibling, "some a-node whose next sibling is a b"),
    "leafword": (leafword, "leaf word has a #, with an even number of 1s before the first #"),
    "everything": (everything, "all forests over {a, b}"),
}


PARITY_SPEC = """# even number of a-nodes, as a regular-commutative specification
alphabet: a b
component parity commutative
letter a threshold 0 modulus 2
accept 0
formula: parity
"""


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    for name, (build, desc) in CORPUS.items():
        text = f"# {desc}\n" + serialize_automaton(build())
        (OUT / f"{name}.aut").write_text(text)
        print(f"wrote {name}.aut")
    # golden syntactic algebra dumps, frozen from the tool's own output
    for name in CORPUS:
        A = parse_automaton((OUT / f"{name}.aut").read_text(), name=name)
        rec = syntactic_recognizer(A)
        text = dump_algebra(rec) + "\n" + render_report(rec, is_zg(rec.algebra))
        (OUT / f"{name}.algebra").write_text(text)
        print(f"wrote {name}.algebra")
    (OUT / "parity.spec").write_text(PARITY_SPEC)
    print("wrote parity.spec")


if __name__ == "__main__":
    main()
