"""Deterministic forest automata and the linear-time run.

A forest automaton has tree states Q, a word automaton over Q (the
horizontal part) and a vertical map delta: Q' x Sigma -> Q.  A node whose
children evaluate to the word q1...qk gets delta(p, label), p being the state
the word automaton reaches on q1...qk.  A forest is accepted when the word
of its roots' states is accepted.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .forest import NIL, Forest

try:  # numba is optional; the pure-Python path is always available
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None


class AutomatonError(ValueError):
    pass


@dataclass(frozen=True)
class WordAutomaton:
    states: tuple[str, ...]
    initial: int
    final: frozenset[int]
    inputs: tuple[str, ...]
    delta: tuple[tuple[int, ...], ...]      # delta[p][input] -> p'

    def step(self, p: int, x: int) -> int:
        return self.delta[p][x]

    def read(self, word: Sequence[int], p: int | None = None) -> int:
        p = self.initial if p is None else p
        for x in word:
            p = self.delta[p][x]
        return p


@dataclass(frozen=True)
class ForestAutomaton:
    alphabet: tuple[str, ...]
    tree_states: tuple[str, ...]
    horizontal: WordAutomaton
    delta: tuple[tuple[int, ...], ...]      # delta[p][letter] -> q
    name: str = ""
    _arrays: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def word_states(self) -> tuple[str, ...]:
        return self.horizontal.states

    def tables(self) -> tuple[np.ndarray, np.ndarray]:
        """(word-delta, vertical-delta) as int32 arrays, cached."""
        if not self._arrays:
            self._arrays["wd"] = np.array(self.horizontal.delta, dtype=np.int32).reshape(
                len(self.word_states), len(self.tree_states))
            self._arrays["vd"] = np.array(self.delta, dtype=np.int32).reshape(
                len(self.word_states), len(self.alphabet))
            self._arrays["fin"] = np.array(
                [p in self.horizontal.final for p in range(len(self.word_states))], dtype=np.bool_)
        return self._arrays["wd"], self._arrays["vd"]


@dataclass
class Run:
    rho: list[int]              # tree state per node
    chain_state: list[int]      # word state after reading each node's children
    root_state: int             # word state after reading the roots
    accepted: bool


# -- text format ---------------------------------------------------------------

_KEYS = ("alphabet", "tree-states", "word-states", "word-initial", "word-final")


def parse_automaton(text: str, name: str = "") -> ForestAutomaton:
    header: dict[str, list[str]] = {}
    word_rows: list[tuple[int, str, str, str]] = []
    vert_rows: list[tuple[int, str, str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, rest = line.partition(":")
        if not sep:
            raise AutomatonError(f"line {lineno}: expected 'key: value'")
        key = key.strip()
        if key in _KEYS:
            if key in header:
                raise AutomatonError(f"line {lineno}: repeated '{key}'")
            header[key] = rest.split()
        elif key in ("word-delta", "delta"):
            lhs, arrow, rhs = rest.partition("->")
            parts = lhs.split()
            if not arrow or len(parts) != 2 or len(rhs.split()) != 1:
                raise AutomatonError(f"line {lineno}: expected '{key}: <state> <input> -> <state>'")
            row = (lineno, parts[0], parts[1], rhs.strip())
            (word_rows if key == "word-delta" else vert_rows).append(row)
        else:
            raise AutomatonError(f"line {lineno}: unknown key '{key}'")
    for key in _KEYS:
        if key not in header and key != "word-final":
            raise AutomatonError(f"missing '{key}' line")
    if len(header["word-initial"]) != 1:
        raise AutomatonError("word-initial names exactly one state")

    alphabet = _unique(header["alphabet"], "letter")
    if "_" in alphabet:
        raise AutomatonError("'_' is reserved for context holes")
    Q = _unique(header["tree-states"], "tree state")
    P = _unique(header["word-states"], "word state")
    qi = {q: i for i, q in enumerate(Q)}
    pi = {p: i for i, p in enumerate(P)}
    ai = {a: i for i, a in enumerate(alphabet)}

    def lookup(table: dict, x: str, what: str, lineno: int | None = None) -> int:
        if x not in table:
            where = f"line {lineno}: " if lineno else ""
            raise AutomatonError(f"{where}undeclared {what} '{x}'")
        return table[x]

    p0 = lookup(pi, header["word-initial"][0], "word state")
    final = frozenset(lookup(pi, p, "word state") for p in header.get("word-final", []))

    wd = [[NIL] * len(Q) for _ in P]
    for lineno, p, q, r in word_rows:
        i, j = lookup(pi, p, "word state", lineno), lookup(qi, q, "tree state", lineno)
        if wd[i][j] != NIL:
            raise AutomatonError(f"line {lineno}: duplicate transition word-delta({p}, {q})")
        wd[i][j] = lookup(pi, r, "word state", lineno)
    vd = [[NIL] * len(alphabet) for _ in P]
    for lineno, p, a, r in vert_rows:
        i, j = lookup(pi, p, "word state", lineno), lookup(ai, a, "letter", lineno)
        if vd[i][j] != NIL:
            raise AutomatonError(f"line {lineno}: duplicate transition delta({p}, {a})")
        vd[i][j] = lookup(qi, r, "tree state", lineno)
    for i, p in enumerate(P):
        for j, q in enumerate(Q):
            if wd[i][j] == NIL:
                raise AutomatonError(f"missing transition word-delta({p}, {q})")
        for j, a in enumerate(alphabet):
            if vd[i][j] == NIL:
                raise AutomatonError(f"missing transition delta({p}, {a})")
    horizontal = WordAutomaton(P, p0, final, Q, tuple(map(tuple, wd)))
    return ForestAutomaton(alphabet, Q, horizontal, tuple(map(tuple, vd)), name)


def _unique(names: list[str], what: str) -> tuple[str, ...]:
    if not names:
        raise AutomatonError(f"no {what}s declared")
    if len(set(names)) != len(names):
        raise AutomatonError(f"duplicate {what} declaration")
    return tuple(names)


def serialize_automaton(A: ForestAutomaton) -> str:
    W = A.horizontal
    lines = [
        f"alphabet: {' '.join(A.alphabet)}",
        f"tree-states: {' '.join(A.tree_states)}",
        f"word-states: {' '.join(W.states)}",
        f"word-initial: {W.states[W.initial]}",
        f"word-final: {' '.join(W.states[p] for p in sorted(W.final))}",
    ]
    for i, p in enumerate(W.states):
        for j, q in enumerate(A.tree_states):
            lines.append(f"word-delta: {p} {q} -> {W.states[W.delta[i][j]]}")
    for i, p in enumerate(W.states):
        for j, a in enumerate(A.alphabet):
            lines.append(f"delta: {p} {a} -> {A.tree_states[A.delta[i][j]]}")
    return "\n".join(lines) + "\n"


def automaton_from_functions(alphabet: Sequence[str], tree_states: Sequence, word_states: Sequence,
                             initial, final, word_delta, delta, name: str = "") -> ForestAutomaton:
    """Build an automaton from Python callables over arbitrary hashable states."""
    Q = list(tree_states)
    P = list(word_states)
    qi = {q: i for i, q in enumerate(Q)}
    pi = {p: i for i, p in enumerate(P)}
    wd = tuple(tuple(pi[word_delta(p, q)] for q in Q) for p in P)
    vd = tuple(tuple(qi[delta(p, a)] for a in alphabet) for p in P)
    is_final = final if callable(final) else set(final).__contains__
    horizontal = WordAutomaton(tuple(map(str, P)), pi[initial],
                               frozenset(pi[p] for p in P if is_final(p)), tuple(map(str, Q)), wd)
    return ForestAutomaton(tuple(alphabet), tuple(map(str, Q)), horizontal, vd, name)


# -- evaluation ----------------------------------------------------------------

def _check_alphabet(A: ForestAutomaton, F: Forest) -> None:
    if F.alphabet != A.alphabet:
        if set(F.alphabet) <= set(A.alphabet):
            return
        raise AutomatonError("forest alphabet does not match the automaton")


def _letter_map(A: ForestAutomaton, F: Forest) -> list[int] | None:
    if F.alphabet == A.alphabet:
        return None
    index = {a: i for i, a in enumerate(A.alphabet)}
    return [index[a] for a in F.alphabet]


def run(A: ForestAutomaton, F: Forest) -> Run:
    _check_alphabet(A, F)
    lm = _letter_map(A, F)
    W = A.horizontal
    wd, vd, p0 = W.delta, A.delta, W.initial
    n = F.n
    rho = [0] * n
    chain = [p0] * n
    fc, ns, labels = F.first_child, F.next_sibling, F.labels
    # children carry larger ids, so a reverse sweep visits them first
    for u in range(n - 1, -1, -1):
        if labels[u] < 0:
            raise AutomatonError("contexts cannot be run; plug the hole first")
        p = p0
        c = fc[u]
        while c != NIL:
            p = wd[p][rho[c]]
            c = ns[c]
        chain[u] = p
        a = labels[u] if lm is None else lm[labels[u]]
        rho[u] = vd[p][a]
    p = p0
    c = 0 if n else NIL
    while c != NIL:
        p = wd[p][rho[c]]
        c = ns[c]
    return Run(rho, chain, p, p in W.final)


def accepts(A: ForestAutomaton, F: Forest) -> bool:
    if F.n >= 2000 and njit is not None and F.alphabet == A.alphabet:
        return bool(accepts_arrays(A, np.asarray(F.labels, dtype=np.int32),
                                   np.asarray(F.first_child, dtype=np.int32),
                                   np.asarray(F.next_sibling, dtype=np.int32)))
    return run(A, F).accepted


def _accept_kernel(labels, fc, ns, wd, vd, fin, p0, rho):
    n = labels.shape[0]
    for u in range(n - 1, -1, -1):
        p = p0
        c = fc[u]
        while c != -1:
            p = wd[p, rho[c]]
            c = ns[c]
        rho[u] = vd[p, labels[u]]
    p = p0
    c = 0 if n > 0 else -1
    while c != -1:
        p = wd[p, rho[c]]
        c = ns[c]
    return fin[p]


_kernel = njit(cache=True, nogil=True)(_accept_kernel) if njit is not None else _accept_kernel


def accepts_arrays(A: ForestAutomaton, labels: np.ndarray, fc: np.ndarray, ns: np.ndarray,
                   scratch: np.ndarray | None = None) -> bool:
    """Membership on raw int32 link arrays; the hot path of the naive oracle."""
    wd, vd = A.tables()
    if scratch is None:
        scratch = np.empty(labels.shape[0], dtype=np.int32)
    return bool(_kernel(labels, fc, ns, wd, vd, A._arrays["fin"], A.horizontal.initial, scratch))


def automaton_from_closure(alphabet: Sequence[str], initial, combine, wrap, is_final,
                           name: str = "", cap: int = 100_000) -> ForestAutomaton:
    """Automaton over the reachable part of an abstract state space.

    ``combine(p, q)`` reads tree state q in word state p and ``wrap(p, a)``
    is the tree state of an a-node whose children end in word state p.
    Word and tree states are discovered together as a fixpoint."""
    P: dict = {initial: 0}
    Q: dict = {}
    changed = True
    while changed:
        changed = False
        for p in list(P):
            for a in alphabet:
                q = wrap(p, a)
                if q not in Q:
                    Q[q] = len(Q)
                    changed = True
        for p in list(P):
            for q in list(Q):
                r = combine(p, q)
                if r not in P:
                    P[r] = len(P)
                    changed = True
        if len(P) + len(Q) > cap:
            raise AutomatonError(f"automaton exceeds {cap} states")
    Pl, Ql = list(P), list(Q)
    pn = tuple(f"p{i}" for i in range(len(Pl)))
    qn = tuple(f"q{i}" for i in range(len(Ql)))
    wd = tuple(tuple(P[combine(p, q)] for q in Ql) for p in Pl)
    vd = tuple(tuple(Q[wrap(p, a)] for a in alphabet) for p in Pl)
    horizontal = WordAutomaton(pn, 0, frozenset(i for i, p in enumerate(Pl) if is_final(p)), qn, wd)
    return ForestAutomaton(tuple(alphabet), qn, horizontal, vd, name)
