"""Language specifications for the constant-time maintainers.

A BooleanSpec combines named components with !, & and |.  Components are
regular-commutative (a threshold and modulus per letter plus an accepted set
of quotient tuples) or virtually-singleton (a subalphabet and the one forest
the projection must equal).

Text format::

    alphabet: a b c                  (optional)
    component even_a commutative
    letter a threshold 0 modulus 2
    accept 0
    component ab singleton
    subalphabet: a b
    target: a(b)
    formula: even_a & !ab
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Sequence, Union

from ..automaton import ForestAutomaton, accepts, automaton_from_closure
from ..forest import Forest, enumerate_forests, parikh, parse_forest, project, serialize_forest


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class CommutativeSpec:
    letters: tuple[str, ...]
    thresholds: tuple[int, ...]
    moduli: tuple[int, ...]
    accept: frozenset[tuple[int, ...]]
    name: str = ""

    def __post_init__(self):
        if not (len(self.letters) == len(self.thresholds) == len(self.moduli)):
            raise SpecError("one threshold and modulus per letter")
        for t, p in zip(self.thresholds, self.moduli):
            if t < 0 or p < 1:
                raise SpecError("thresholds must be >= 0 and moduli >= 1")
        sizes = self.quotient_sizes()
        for tup in self.accept:
            if len(tup) != len(self.letters) or any(not 0 <= x < s for x, s in zip(tup, sizes)):
                raise SpecError(f"accept tuple {tup} is outside the quotient")

    def quotient_sizes(self) -> tuple[int, ...]:
        return tuple(t + p for t, p in zip(self.thresholds, self.moduli))

    def coordinate(self, i: int, count: int) -> int:
        t = self.thresholds[i]
        return count if count < t else t + (count - t) % self.moduli[i]

    def coordinates(self, counts: dict[str, int]) -> tuple[int, ...]:
        return tuple(self.coordinate(i, counts.get(a, 0)) for i, a in enumerate(self.letters))

    def holds(self, F: Forest) -> bool:
        return self.coordinates(parikh(F)) in self.accept


@dataclass(frozen=True)
class SingletonSpec:
    subalphabet: tuple[str, ...]
    target: Forest
    name: str = ""

    def __post_init__(self):
        bad = set(self.target.label(u) for u in range(self.target.n)) - set(self.subalphabet)
        if bad:
            raise SpecError(f"target uses letters outside the subalphabet: {sorted(bad)}")

    def holds(self, F: Forest) -> bool:
        sub = [a for a in self.subalphabet if a in F.alphabet]
        P = project(F, sub)
        return _same_labeled(P, self.target)


def _same_labeled(a: Forest, b: Forest) -> bool:
    return a.parent == b.parent and all(a.label(u) == b.label(u) for u in range(a.n))


Expr = Union[tuple]


@dataclass(frozen=True)
class BooleanSpec:
    components: dict
    formula: tuple                        # ('var', name) | ('not', e) | ('and', a, b) | ('or', a, b)
    alphabet: tuple[str, ...]

    def holds(self, F: Forest) -> bool:
        bits = {name: c.holds(F) for name, c in self.components.items()}
        return evaluate_formula(self.formula, bits)


def evaluate_formula(e: tuple, bits: dict[str, bool]) -> bool:
    op = e[0]
    if op == "var":
        return bits[e[1]]
    if op == "not":
        return not evaluate_formula(e[1], bits)
    if op == "and":
        return evaluate_formula(e[1], bits) and evaluate_formula(e[2], bits)
    if op == "or":
        return evaluate_formula(e[1], bits) or evaluate_formula(e[2], bits)
    if op == "const":
        return e[1]
    raise SpecError(f"bad formula node {op!r}")


def formula_vars(e: tuple) -> set[str]:
    if e[0] == "var":
        return {e[1]}
    if e[0] == "const":
        return set()
    return set().union(*(formula_vars(x) for x in e[1:]))


# -- parsing ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z0-9_]+)|(?P<op>[!&|()]))")


def parse_formula(text: str) -> tuple:
    tokens: list[str] = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise SpecError(f"bad formula character at position {pos}: {text[pos]!r}")
        tokens.append(m.group("name") or m.group("op"))
        pos = m.end()
    i = 0

    def peek():
        return tokens[i] if i < len(tokens) else None

    def take(expected=None):
        nonlocal i
        t = peek()
        if t is None or (expected is not None and t != expected):
            raise SpecError(f"formula: expected {expected or 'a term'}, found {t or 'end of input'}")
        i += 1
        return t

    def disj():
        e = conj()
        while peek() == "|":
            take()
            e = ("or", e, conj())
        return e

    def conj():
        e = neg()
        while peek() == "&":
            take()
            e = ("and", e, neg())
        return e

    def neg():
        if peek() == "!":
            take()
            return ("not", neg())
        if peek() == "(":
            take()
            e = disj()
            take(")")
            return e
        t = take()
        if t in "!&|()":
            raise SpecError(f"formula: unexpected {t!r}")
        if t in ("true", "false"):
            return ("const", t == "true")
        return ("var", t)

    e = disj()
    if peek() is not None:
        raise SpecError(f"formula: trailing input at {peek()!r}")
    return e


def parse_spec(text: str) -> BooleanSpec:
    components: dict = {}
    current = None
    formula = None
    alphabet = None

    def finish():
        nonlocal current
        if current is None:
            return
        name, kind, data = current
        if kind == "commutative":
            if not data["letters"]:
                raise SpecError(f"component {name}: no letters declared")
            components[name] = CommutativeSpec(
                tuple(l for l, _, _ in data["letters"]), tuple(t for _, t, _ in data["letters"]),
                tuple(p for _, _, p in data["letters"]), frozenset(data["accept"]), name)
        else:
            if data.get("sub") is None or data.get("target") is None:
                raise SpecError(f"component {name}: needs 'subalphabet:' and 'target:' lines")
            try:
                target = parse_forest(data["target"], data["sub"])
            except ValueError as exc:
                raise SpecError(f"component {name}: bad target: {exc}") from None
            components[name] = SingletonSpec(tuple(data["sub"]), target, name)
        current = None

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip() if not raw.strip().startswith("target:") else raw.strip()
        if not line:
            continue
        words = line.split()
        try:
            if words[0] == "component":
                finish()
                if len(words) != 3 or words[2] not in ("commutative", "singleton"):
                    raise SpecError("expected 'component <name> commutative|singleton'")
                if words[1] in components:
                    raise SpecError(f"duplicate component {words[1]!r}")
                current = (words[1], words[2], {"letters": [], "accept": []})
            elif words[0] == "letter":
                if current is None or current[1] != "commutative":
                    raise SpecError("'letter' outside a commutative component")
                if len(words) != 6 or words[2] != "threshold" or words[4] != "modulus":
                    raise SpecError("expected 'letter <a> threshold <T> modulus <p>'")
                current[2]["letters"].append((words[1], int(words[3]), int(words[5])))
            elif words[0] == "accept":
                if current is None or current[1] != "commutative":
                    raise SpecError("'accept' outside a commutative component")
                current[2]["accept"].append(tuple(int(x) for x in words[1:]))
            elif line.startswith("subalphabet:"):
                if current is None or current[1] != "singleton":
                    raise SpecError("'subalphabet:' outside a singleton component")
                current[2]["sub"] = line.split(":", 1)[1].split()
            elif line.startswith("target:"):
                if current is None or current[1] != "singleton":
                    raise SpecError("'target:' outside a singleton component")
                current[2]["target"] = line.split(":", 1)[1].strip()
            elif line.startswith("formula:"):
                finish()
                formula = parse_formula(line.split(":", 1)[1])
            elif line.startswith("alphabet:"):
                alphabet = tuple(line.split(":", 1)[1].split())
            else:
                raise SpecError(f"unknown line {words[0]!r}")
        except SpecError as exc:
            raise SpecError(f"line {lineno}: {exc}") from None
        except ValueError as exc:
            raise SpecError(f"line {lineno}: {exc}") from None
    finish()
    if not components:
        raise SpecError("no components declared")
    if formula is None:
        if len(components) != 1:
            raise SpecError("a 'formula:' line is required with several components")
        formula = ("var", next(iter(components)))
    missing = formula_vars(formula) - set(components)
    if missing:
        raise SpecError(f"formula names unknown components: {sorted(missing)}")
    letters: list[str] = list(alphabet or ())
    for c in components.values():
        for a in (c.letters if isinstance(c, CommutativeSpec) else c.subalphabet):
            if a not in letters:
                if alphabet is not None:
                    raise SpecError(f"letter {a!r} is not in the declared alphabet")
                letters.append(a)
    return BooleanSpec(components, formula, tuple(letters))


def serialize_spec(spec: BooleanSpec) -> str:
    lines = [f"alphabet: {' '.join(spec.alphabet)}"]
    for name, c in spec.components.items():
        if isinstance(c, CommutativeSpec):
            lines.append(f"component {name} commutative")
            for a, t, p in zip(c.letters, c.thresholds, c.moduli):
                lines.append(f"letter {a} threshold {t} modulus {p}")
            for tup in sorted(c.accept):
                lines.append("accept " + " ".join(map(str, tup)))
        else:
            lines.append(f"component {name} singleton")
            lines.append("subalphabet: " + " ".join(c.subalphabet))
            lines.append("target: " + serialize_forest(c.target))
    lines.append("formula: " + render_formula(spec.formula))
    return "\n".join(lines) + "\n"


def render_formula(e: tuple) -> str:
    op = e[0]
    if op == "var":
        return e[1]
    if op == "const":
        return "true" if e[1] else "false"
    if op == "not":
        return "!" + render_formula(e[1]) if e[1][0] in ("var", "not", "const") else f"!({render_formula(e[1])})"
    sym = " & " if op == "and" else " | "
    parts = []
    for x in e[1:]:
        s = render_formula(x)
        parts.append(f"({s})" if x[0] == "or" and op == "and" else s)
    return sym.join(parts)


# -- equivalent automata ----------------------------------------------------------------

def commutative_automaton(spec: CommutativeSpec, alphabet: Sequence[str]) -> ForestAutomaton:
    idx = {a: i for i, a in enumerate(spec.letters)}

    def combine(p, q):
        return tuple(spec.coordinate(i, x + y) for i, (x, y) in enumerate(zip(p, q)))

    def wrap(p, a):
        if a not in idx:
            return p
        i = idx[a]
        return p[:i] + (spec.coordinate(i, p[i] + 1),) + p[i + 1:]

    zero = tuple(0 for _ in spec.letters)
    return automaton_from_closure(alphabet, zero, combine, wrap, lambda p: p in spec.accept,
                                  name=spec.name)


_OVER = "overflow"


def singleton_automaton(spec: SingletonSpec, alphabet: Sequence[str]) -> ForestAutomaton:
    """States are projected forests (nested tuples) that still fit inside the
    target's Parikh image, or a single overflow sink."""
    target = spec.target
    budget = parikh(target)
    sub = set(spec.subalphabet)

    def counts(t: tuple) -> dict:
        c: dict = {}
        stack = list(t)
        while stack:
            name, kids = stack.pop()
            c[name] = c.get(name, 0) + 1
            stack.extend(kids)
        return c

    def fits(t: tuple) -> bool:
        return all(v <= budget.get(k, 0) for k, v in counts(t).items())

    def combine(p, q):
        if p == _OVER or q == _OVER:
            return _OVER
        r = p + q
        return r if fits(r) else _OVER

    def wrap(p, a):
        if p == _OVER:
            return _OVER
        if a not in sub:
            return p
        r = ((a, p),)
        return r if fits(r) else _OVER

    want = target.to_nested()
    return automaton_from_closure(alphabet, (), combine, wrap, lambda p: p == want, name=spec.name)


def spec_automaton(spec: BooleanSpec, alphabet: Sequence[str] | None = None) -> ForestAutomaton:
    """Product automaton equivalent to the whole Boolean specification."""
    alphabet = tuple(alphabet or spec.alphabet)
    names = list(spec.components)
    parts = []
    for name in names:
        c = spec.components[name]
        A = (commutative_automaton(c, alphabet) if isinstance(c, CommutativeSpec)
             else singleton_automaton(c, alphabet))
        parts.append(A)
    wds = [A.horizontal.delta for A in parts]
    vds = [A.delta for A in parts]
    fins = [A.horizontal.final for A in parts]
    ai = {a: i for i, a in enumerate(alphabet)}
    init = tuple(A.horizontal.initial for A in parts)

    def combine(p, q):
        return tuple(wds[i][p[i]][q[i]] for i in range(len(parts)))

    def wrap(p, a):
        return tuple(vds[i][p[i]][ai[a]] for i in range(len(parts)))

    def is_final(p):
        return evaluate_formula(spec.formula, {n: p[i] in fins[i] for i, n in enumerate(names)})

    return automaton_from_closure(alphabet, init, combine, wrap, is_final, name="spec")


# -- bounded equivalence ------------------------------------------------------------------

@dataclass
class EquivalenceResult:
    equivalent: bool
    checked: int
    counterexample: Forest | None = None
    spec_says: bool | None = None


def bounded_equivalence(spec: BooleanSpec, A: ForestAutomaton, max_size: int = 7,
                        alphabet: Sequence[str] | None = None) -> EquivalenceResult:
    """Compare the specification with the automaton on every forest of at
    most ``max_size`` nodes; the first disagreement is returned."""
    alphabet = tuple(alphabet or A.alphabet)
    extra = set(spec.alphabet) - set(alphabet)
    if extra:
        raise SpecError(f"specification letters outside the automaton alphabet: {sorted(extra)}")
    checked = 0
    for F in enumerate_forests(alphabet, max_size):
        checked += 1
        s = spec.holds(F)
        if accepts(A, F) != s:
            return EquivalenceResult(False, checked, F, s)
    return EquivalenceResult(True, checked)
