"""Replay random updates through a maintainer and the naive oracle side by side.

    python scripts/lockstep.py marked_ancestor --n 10000 --updates 100000
    python scripts/lockstep.py parity --spec src/dynforest/corpus/parity.spec
"""
import argparse
import random
import sys
import time

from dynforest import corpus_automaton
from dynforest.dynmem import build_boolean, build_general, build_naive, parse_spec
from dynforest.forest import random_forest


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("automaton", help="corpus automaton name")
    ap.add_argument("--spec", help="run the constant-time maintainer for this spec instead")
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--updates", type=int, default=10000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--depth-bias", type=float, default=0.0)
    args = ap.parse_args()
    A = corpus_automaton(args.automaton)
    rng = random.Random(args.seed)
    F = random_forest(args.n, A.alphabet, rng, depth_bias=args.depth_bias)
    if args.spec:
        with open(args.spec) as fh:
            m = build_boolean(F, parse_spec(fh.read()), A.alphabet)
    else:
        m = build_general(A, F)
    ref = build_naive(A, F)
    t0 = time.perf_counter()
    for i in range(args.updates):
        u, a = rng.randrange(args.n), rng.choice(A.alphabet)
        if m.update(u, a) != ref.update(u, a):
            print(f"divergence at update {i}: relabel {u} {a}")
            return 1
    dt = time.perf_counter() - t0
    print(f"{m.strategy}: {args.updates} updates agree with the oracle "
          f"({dt:.2f}s, max steps {m.max_steps}, final member {m.member})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
