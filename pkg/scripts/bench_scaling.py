"""Per-update cost of each strategy as n grows, on a generated workload.

    python scripts/bench_scaling.py --kind marked-ancestor --max-exp 5
"""
import argparse

from dynforest import corpus_automaton
from dynforest.cli import bench_strategy, generate

AUTOMATON = {"marked-ancestor": "marked_ancestor", "prefix-parity": "leafword", "random": "parity"}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--kind", choices=sorted(AUTOMATON), default="marked-ancestor")
    ap.add_argument("--strategies", default="naive,general")
    ap.add_argument("--max-exp", type=int, default=5)
    ap.add_argument("--updates", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    A = corpus_automaton(AUTOMATON[args.kind])
    print(f"{'n':>9}  {'strategy':<9}{'updates/s':>12}{'steps max':>11}{'levels':>8}")
    for e in range(2, args.max_exp + 1):
        w = generate(args.kind, 10**e, args.updates, args.seed)
        for s in args.strategies.split(","):
            rep, _ = bench_strategy(s, A, None, w.forest, w.updates)
            print(f"{10**e:>9}  {s:<9}{rep['updates_per_sec']:>12}{rep['steps_max']:>11}{rep.get('levels', '-'):>8}")


if __name__ == "__main__":
    main()
