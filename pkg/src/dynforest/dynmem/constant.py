"""Constant-time maintainers for almost-commutative languages.

Each update reports an elementary-step count that depends on the
specification only, never on the size of the forest.
"""
from __future__ import annotations

from typing import Sequence

from ..forest import NIL, Forest, UnknownLetterError, compute_timestamps
from .base import Maintainer, forest_letter_map
from .specs import BooleanSpec, CommutativeSpec, SingletonSpec, evaluate_formula, formula_vars


class CommutativeMaintainer(Maintainer):
    """Letter counts reduced to the threshold/modulus quotient; membership is
    one lookup in the accepted set."""

    strategy = "commutative"

    def __init__(self, F: Forest, spec: CommutativeSpec, alphabet: Sequence[str] | None = None):
        alphabet = tuple(alphabet or F.alphabet)
        super().__init__(alphabet, F.n)
        missing = set(spec.letters) - set(alphabet)
        if missing:
            raise UnknownLetterError(f"specification letters outside the alphabet: {sorted(missing)}")
        self.spec = spec
        slot = {a: i for i, a in enumerate(spec.letters)}
        self._slot = [slot.get(a, -1) for a in alphabet]       # -1 marks a neutral letter
        lm = forest_letter_map(F.alphabet, alphabet)
        self.labels = [lm[x] for x in F.labels]
        self.counts = [0] * len(spec.letters)
        for x in self.labels:
            i = self._slot[x]
            if i >= 0:
                self.counts[i] += 1
        self.coords = [spec.coordinate(i, c) for i, c in enumerate(self.counts)]
        self.member = tuple(self.coords) in spec.accept

    def update(self, u: int, a: str | int) -> bool:
        self.check_node(u)
        x = self.letter_id(a)
        old = self.labels[u]
        self.labels[u] = x
        i, j = self._slot[old], self._slot[x]
        spec = self.spec
        if i >= 0:
            self.counts[i] -= 1
            self.coords[i] = spec.coordinate(i, self.counts[i])
        if j >= 0:
            self.counts[j] += 1
            self.coords[j] = spec.coordinate(j, self.counts[j])
        self.member = tuple(self.coords) in self.spec.accept
        self._count(4)
        return self.member


class SingletonMaintainer(Maintainer):
    """Occurrence lists per letter of the subalphabet.

    After an update each list is walked for at most one more node than the
    target needs.  Only when every count matches exactly is the projection
    rebuilt from the collected nodes: prefix order gives the order, and the
    parent of a collected node is its deepest collected proper ancestor."""

    strategy = "singleton"

    def __init__(self, F: Forest, spec: SingletonSpec, alphabet: Sequence[str] | None = None):
        alphabet = tuple(alphabet or F.alphabet)
        super().__init__(alphabet, F.n)
        missing = set(spec.subalphabet) - set(alphabet)
        if missing:
            raise UnknownLetterError(f"specification letters outside the alphabet: {sorted(missing)}")
        self.spec = spec
        sub = {a: i for i, a in enumerate(spec.subalphabet)}
        self._slot = [sub.get(a, -1) for a in alphabet]
        T = spec.target
        self._need = [0] * len(sub)
        for x in T.labels:
            self._need[sub[T.alphabet[x]]] += 1
        self._target_labels = tuple(sub[T.alphabet[x]] for x in T.labels)
        self._target_parent = tuple(T.parent)
        self.ts = compute_timestamps(F)
        n = F.n
        self.head = [NIL] * len(sub)
        self.nxt = [NIL] * n
        self.prv = [NIL] * n
        lm = forest_letter_map(F.alphabet, alphabet)
        self.labels = [lm[x] for x in F.labels]
        for u in range(n - 1, -1, -1):
            if self._slot[self.labels[u]] >= 0:
                self._link(u, self._slot[self.labels[u]])
        self.member, _ = self._query()

    def _link(self, u: int, b: int) -> None:
        h = self.head[b]
        self.nxt[u] = h
        self.prv[u] = NIL
        if h != NIL:
            self.prv[h] = u
        self.head[b] = u

    def _unlink(self, u: int, b: int) -> None:
        p, q = self.prv[u], self.nxt[u]
        if p != NIL:
            self.nxt[p] = q
        else:
            self.head[b] = q
        if q != NIL:
            self.prv[q] = p
        self.nxt[u] = self.prv[u] = NIL

    def occurrences(self, b: str) -> list[int]:
        out = []
        u = self.head[self.spec.subalphabet.index(b)]
        while u != NIL:
            out.append(u)
            u = self.nxt[u]
        return out

    def _query(self) -> tuple[bool, int]:
        steps = 0
        nodes: list[int] = []
        for b, need in enumerate(self._need):
            count = 0
            u = self.head[b]
            while u != NIL and count <= need:
                nodes.append(u)
                count += 1
                steps += 1
                u = self.nxt[u]
            steps += 1
            if count != need:
                return False, steps
        m = len(nodes)
        enter, leave = self.ts.enter, self.ts.leave
        # rank by prefix position and deepest collected proper ancestor, both by
        # comparing all pairs so the cost only depends on the target size
        rank = [0] * m
        anc = [NIL] * m
        for i in range(m):
            ui = nodes[i]
            for j in range(m):
                uj = nodes[j]
                steps += 1
                if enter[uj] < enter[ui]:
                    rank[i] += 1
                    if leave[ui] <= leave[uj] and (anc[i] == NIL or enter[uj] > enter[nodes[anc[i]]]):
                        anc[i] = j
        labels = [0] * m
        parent = [NIL] * m
        for i in range(m):
            steps += 1
            labels[rank[i]] = self._slot[self.labels[nodes[i]]]
            parent[rank[i]] = rank[anc[i]] if anc[i] != NIL else NIL
        ok = tuple(labels) == self._target_labels and tuple(parent) == self._target_parent
        return ok, steps + m

    def update(self, u: int, a: str | int) -> bool:
        self.check_node(u)
        x = self.letter_id(a)
        old = self.labels[u]
        i, j = self._slot[old], self._slot[x]
        if i >= 0:
            self._unlink(u, i)
        self.labels[u] = x
        if j >= 0:
            self._link(u, j)
        self.member, steps = self._query()
        self._count(steps + 2)
        return self.member


class BooleanMaintainer(Maintainer):
    """One constituent maintainer per component; the bits are recombined
    through the formula after each update."""

    strategy = "o1"

    def __init__(self, F: Forest, spec: BooleanSpec, alphabet: Sequence[str] | None = None):
        alphabet = tuple(alphabet or spec.alphabet)
        super().__init__(alphabet, F.n)
        extra = set(F.alphabet) - set(alphabet)
        if extra:
            raise UnknownLetterError(f"forest letters outside the specification alphabet: {sorted(extra)}")
        self.spec = spec
        used = formula_vars(spec.formula)
        self.children: dict[str, Maintainer] = {}
        for name, c in spec.components.items():
            if name not in used:
                continue
            cls = CommutativeMaintainer if isinstance(c, CommutativeSpec) else SingletonMaintainer
            self.children[name] = cls(F, c, alphabet)
        self._formula_size = _size(spec.formula)
        self.member = self._combine()

    def _combine(self) -> bool:
        return evaluate_formula(self.spec.formula, {k: m.member for k, m in self.children.items()})

    def update(self, u: int, a: str | int) -> bool:
        self.check_node(u)
        x = self.letter_id(a)
        steps = self._formula_size
        for m in self.children.values():
            m.update(u, x)
            steps += m.steps
        self.member = self._combine()
        self._count(steps)
        return self.member


def _size(e: tuple) -> int:
    return 1 + sum(_size(x) for x in e[1:] if isinstance(x, tuple))


def build_commutative(F: Forest, spec: CommutativeSpec, alphabet=None) -> CommutativeMaintainer:
    return CommutativeMaintainer(F, spec, alphabet)


def build_singleton(F: Forest, spec: SingletonSpec, alphabet=None) -> SingletonMaintainer:
    return SingletonMaintainer(F, spec, alphabet)


def build_boolean(F: Forest, spec: BooleanSpec, alphabet=None) -> BooleanMaintainer:
    return BooleanMaintainer(F, spec, alphabet)


def cm_update(m: CommutativeMaintainer, u: int, a) -> bool:
    return m.update(u, a)


def sm_update(m: SingletonMaintainer, u: int, a) -> bool:
    return m.update(u, a)


def bm_update(m: BooleanMaintainer, u: int, a) -> bool:
    return m.update(u, a)
