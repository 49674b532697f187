"""Recursion depth, level bound and build work of the general maintainer.

    python scripts/level_counts.py --automata parity,next_sibling --max-exp 6
"""
import argparse
import random
import time

from dynforest import corpus_automaton
from dynforest.algebra import syntactic_recognizer
from dynforest.dynmem import build_general, level_bound
from dynforest.forest import random_forest


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--automata", default="parity,marked_ancestor,next_sibling")
    ap.add_argument("--max-exp", type=int, default=5)
    ap.add_argument("--k", type=int, default=None)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print(f"{'automaton':<16}{'n':>9}{'k':>4}{'levels':>8}{'bound':>8}{'work/n':>9}{'build s':>9}")
    for name in args.automata.split(","):
        A = corpus_automaton(name)
        rec = syntactic_recognizer(A)
        for e in range(2, args.max_exp + 1):
            n = 10**e
            F = random_forest(n, A.alphabet, random.Random(args.seed + e))
            t0 = time.perf_counter()
            gm = build_general(A, F, k=args.k, rec=rec)
            dt = time.perf_counter() - t0
            print(f"{name:<16}{n:>9}{gm.k:>4}{gm.depth:>8}{level_bound(n, gm.k):>8.1f}"
                  f"{gm.build_work / n:>9.2f}{dt:>9.2f}")


if __name__ == "__main__":
    main()
