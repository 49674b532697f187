"""Command-line front end.

    dynforest check AUT FOREST
    dynforest algebra AUT [--syntactic] [--zg]
    dynforest maintain SOURCE FOREST UPDATES [--strategy S] [--verify] [--automaton AUT]
    dynforest gen KIND --n N --updates U --seed S [--out PREFIX]
    dynforest bench SOURCE FOREST UPDATES [--strategies naive,general,o1]

SOURCE is an automaton file or a language specification.  Errors exit with
status 2 and a one-line message on stderr.
"""
from __future__ import annotations

import argparse
import random
import sys
import time
import tracemalloc
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .algebra import AlgebraError, dump_algebra, name_elements, syntactic_recognizer, transition_algebra
from .automaton import AutomatonError, ForestAutomaton, accepts, parse_automaton
from .forest import (NIL, Forest, ForestSyntaxError, UnknownLetterError, parse_forest, random_shape,
                     serialize_forest)
from .tabulation import IndexBudgetError
from .zg import is_zg, render_report


class CliError(Exception):
    pass


# -- workloads ------------------------------------------------------------------------------

@dataclass
class Workload:
    forest: Forest
    updates: list[tuple[int, str]]
    meta: dict = field(default_factory=dict)

    def check(self) -> None:
        for u, a in self.updates:
            if not 0 <= u < self.forest.n:
                raise CliError(f"update addresses node {u}, the forest has {self.forest.n} nodes")


def parse_updates(text: str) -> list[tuple[int, str]]:
    # '#' is also a letter, so a comment is a line starting with '#' or any
    # text after the three fields
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0].startswith("#"):
            continue
        if len(parts) > 3 and parts[3].startswith("#"):
            parts = parts[:3]
        if len(parts) != 3 or parts[0] != "relabel":
            raise CliError(f"updates line {lineno}: expected 'relabel <node-id> <letter>'")
        try:
            u = int(parts[1])
        except ValueError:
            raise CliError(f"updates line {lineno}: bad node id {parts[1]!r}") from None
        out.append((u, parts[2]))
    return out


def serialize_updates(updates, meta: dict | None = None) -> str:
    head = ["# " + " ".join(f"{k}={v}" for k, v in meta.items())] if meta else []
    return "\n".join(head + [f"relabel {u} {a}" for u, a in updates]) + "\n"


def generate(kind: str, n: int, n_updates: int, seed: int, alphabet: str = "ab") -> Workload:
    """Deterministic workloads.

    marked-ancestor: letters e, m, #, exactly one # node; updates toggle
    other nodes between e and m.  prefix-parity: letters 0, 1, # with one #
    leaf; updates flip other nodes between 0 and 1.  random: uniform labels
    and updates over ``alphabet``."""
    if n < 0 or n_updates < 0:
        raise CliError("sizes must be non-negative")
    rng = random.Random(seed)
    parent = random_shape(n, rng)
    if kind == "random":
        letters = tuple(alphabet.split(",") if "," in alphabet else alphabet)
        labels = [rng.randrange(len(letters)) for _ in range(n)]
        ups = [(rng.randrange(n), letters[rng.randrange(len(letters))]) for _ in range(n_updates)] if n else []
    elif kind in ("marked-ancestor", "prefix-parity"):
        if n == 0:
            raise CliError(f"{kind} needs at least one node")
        if kind == "marked-ancestor":
            letters, flip, special = ("e", "m", "#"), ("e", "m"), 2
            labels = [1 if rng.random() < 0.1 else 0 for _ in range(n)]
            hash_node = rng.randrange(n)
        else:
            letters, flip, special = ("0", "1", "#"), ("0", "1"), 2
            labels = [rng.randrange(2) for _ in range(n)]
            is_leaf = [True] * n
            for p in parent:
                if p != NIL:
                    is_leaf[p] = False
            leaves = [u for u in range(n) if is_leaf[u]]
            hash_node = leaves[rng.randrange(len(leaves))]
        labels[hash_node] = special
        ups = []
        if n > 1:
            for _ in range(n_updates):
                u = rng.randrange(n - 1)
                u += u >= hash_node
                ups.append((u, flip[rng.randrange(2)]))
    else:
        raise CliError(f"unknown workload kind {kind!r}")
    F = Forest(letters, labels, parent)
    return Workload(F, ups, {"kind": kind, "n": n, "updates": n_updates, "seed": seed})


# -- loading ------------------------------------------------------------------------------------

def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def is_spec_text(text: str) -> bool:
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        return line.startswith(("component", "formula:")) or (
            line.startswith("alphabet:") and any(l.strip().startswith("component") for l in text.splitlines()))
    return False


def load_source(path: str):
    """(automaton or None, spec or None) from an automaton or spec file."""
    from .dynmem.specs import parse_spec
    text = _read(path)
    if is_spec_text(text):
        return None, parse_spec(text)
    return parse_automaton(text, name=Path(path).stem), None


def load_forest(path: str, alphabet=None) -> Forest:
    text = _read(path)
    try:
        return parse_forest(text, alphabet)
    except ForestSyntaxError as exc:
        raise CliError(f"{path}: {exc}") from None


# -- commands -----------------------------------------------------------------------------------

def cmd_check(args) -> int:
    A = parse_automaton(_read(args.automaton), name=Path(args.automaton).stem)
    F = load_forest(args.forest, A.alphabet)
    member = accepts(A, F)
    print("member" if member else "non-member")
    return 0 if member else 1


def cmd_algebra(args) -> int:
    A = parse_automaton(_read(args.automaton), name=Path(args.automaton).stem)
    if args.syntactic or args.zg:
        rec = syntactic_recognizer(A)
    else:
        rec = name_elements(transition_algebra(A))
    if not args.zg or args.syntactic:
        sys.stdout.write(dump_algebra(rec))
    if args.zg:
        if args.syntactic:
            print()
        sys.stdout.write(render_report(rec, is_zg(rec.algebra)))
    return 0


def _equivalence_gate(spec, A: ForestAutomaton, size: int) -> None:
    from .dynmem.specs import bounded_equivalence
    res = bounded_equivalence(spec, A, size)
    if not res.equivalent:
        raise CliError(f"specification and automaton disagree on {serialize_forest(res.counterexample)!r} "
                       f"(specification says {'member' if res.spec_says else 'non-member'}); "
                       f"checked {res.checked} forests up to size {size}")


def build_maintainer(strategy: str, A, spec, F: Forest):
    from .dynmem import build_boolean, build_general, build_naive, spec_automaton
    if strategy == "auto":
        strategy = "o1" if spec is not None else "general"
    if strategy == "o1":
        if spec is None:
            raise CliError("the o1 strategy needs a language specification")
        return build_boolean(F, spec)
    if A is None:
        A = spec_automaton(spec, spec.alphabet)
    if strategy == "naive":
        return build_naive(A, F)
    if strategy == "general":
        return build_general(A, F)
    raise CliError(f"unknown strategy {strategy!r}")


def _resolve(args):
    A, spec = load_source(args.source)
    if getattr(args, "automaton", None):
        if A is not None:
            raise CliError("--automaton only makes sense with a specification source")
        A = parse_automaton(_read(args.automaton), name=Path(args.automaton).stem)
        _equivalence_gate(spec, A, args.equiv_size)
    alphabet = A.alphabet if A is not None else spec.alphabet
    F = load_forest(args.forest, alphabet)
    ups = parse_updates(_read(args.updates))
    Workload(F, ups).check()
    return A, spec, F, ups


def cmd_maintain(args) -> int:
    A, spec, F, ups = _resolve(args)
    m = build_maintainer(args.strategy, A, spec, F)
    oracle = build_maintainer("naive", A, spec, F) if args.verify else None
    out = sys.stdout
    buf = []
    for i, (u, a) in enumerate(ups):
        bit = m.update(u, a)
        if oracle is not None and oracle.update(u, a) != bit:
            out.write("".join(buf))
            raise CliError(f"divergence at update {i} (relabel {u} {a}): "
                           f"{m.strategy} says {int(bit)}, naive says {int(not bit)}")
        buf.append("1\n" if bit else "0\n")
        if len(buf) >= 4096:
            out.write("".join(buf))
            buf.clear()
    out.write("".join(buf))
    return 0


def cmd_gen(args) -> int:
    w = generate(args.kind, args.n, args.updates, args.seed, args.alphabet)
    prefix = Path(args.out)
    Path(f"{prefix}.forest").write_text(serialize_forest(w.forest) + "\n")
    Path(f"{prefix}.updates").write_text(serialize_updates(w.updates, w.meta))
    print(f"wrote {prefix}.forest ({w.forest.n} nodes) and {prefix}.updates ({len(w.updates)} updates)")
    return 0


def bench_strategy(strategy: str, A, spec, F: Forest, ups) -> tuple[dict, list[bool]]:
    tracemalloc.start()
    t0 = time.perf_counter()
    m = build_maintainer(strategy, A, spec, F)
    build = time.perf_counter() - t0
    _, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    steps = np.zeros(len(ups), dtype=np.int64)
    touched_ok = True
    bits = []
    t0 = time.perf_counter()
    for i, (u, a) in enumerate(ups):
        bits.append(m.update(u, a))
        steps[i] = m.steps
        if strategy == "general" and m.touched_levels != m.depth:
            touched_ok = False
    elapsed = time.perf_counter() - t0
    rep = {"strategy": m.strategy, "n": F.n, "updates": len(ups),
           "build_seconds": f"{build:.4f}", "build_peak_bytes": peak,
           "updates_per_sec": f"{len(ups) / elapsed:.1f}" if elapsed > 0 and ups else "inf"}
    if len(ups):
        rep.update(steps_p50=int(np.percentile(steps, 50)), steps_p99=int(np.percentile(steps, 99)),
                   steps_max=int(steps.max()))
    if strategy == "general":
        rep.update(k=m.k, levels=m.depth, touched_levels_ok=int(touched_ok), build_work=m.build_work,
                   index_forests=m.index.interned, level_sizes=",".join(map(str, m.level_sizes())))
    rep["final_member"] = int(m.member)
    return rep, bits


def cmd_bench(args) -> int:
    A, spec, F, ups = _resolve(args)
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    if spec is None:
        strategies = [s for s in strategies if s != "o1"]
    reference = None
    ok = True
    for s in strategies:
        rep, bits = bench_strategy(s, A, spec, F, ups)
        for k, v in rep.items():
            print(f"{k}={v}")
        print()
        if reference is None:
            reference = (s, bits)
        elif bits != reference[1]:
            ok = False
    print(f"agreement={'yes' if ok else 'no'}")
    if not ok:
        raise CliError("strategies disagree on the membership bits")
    return 0


# -- entry point --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"dynforest: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dynforest", description="Dynamic membership for forest languages.")
    sub = p.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("check", help="test membership of one forest")
    c.add_argument("automaton")
    c.add_argument("forest")
    c.set_defaults(func=cmd_check)

    a = sub.add_parser("algebra", help="print the forest algebra of an automaton")
    a.add_argument("automaton")
    a.add_argument("--syntactic", action="store_true", help="minimize to the syntactic algebra")
    a.add_argument("--zg", action="store_true", help="report the ZG identities")
    a.set_defaults(func=cmd_algebra)

    for name, func in (("maintain", cmd_maintain), ("bench", cmd_bench)):
        m = sub.add_parser(name)
        m.add_argument("source", help="automaton file or language specification")
        m.add_argument("forest")
        m.add_argument("updates")
        m.add_argument("--automaton", help="with a specification: automaton it must agree with")
        m.add_argument("--equiv-size", type=int, default=7, help="size bound of the equivalence check")
        if name == "maintain":
            m.add_argument("--strategy", choices=("naive", "general", "o1", "auto"), default="auto")
            m.add_argument("--verify", action="store_true", help="run the naive oracle in lockstep")
        else:
            m.add_argument("--strategies", default="naive,general,o1")
        m.set_defaults(func=func)

    g = sub.add_parser("gen", help="write a deterministic workload")
    g.add_argument("kind", choices=("marked-ancestor", "prefix-parity", "random"))
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--updates", type=int, default=0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--alphabet", default="ab", help="letters for the random kind")
    g.add_argument("--out", default="workload", help="output prefix")
    g.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    from .dynmem.specs import SpecError
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, AlgebraError, AutomatonError, SpecError, ForestSyntaxError,
            UnknownLetterError, IndexBudgetError, IndexError, RuntimeError) as exc:
        print(f"dynforest: error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
