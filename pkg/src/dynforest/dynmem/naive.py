"""The oracle: relabel, then re-run the automaton on the whole forest."""
from __future__ import annotations

import numpy as np

from ..automaton import ForestAutomaton, accepts_arrays
from ..forest import Forest
from .base import Maintainer, forest_letter_map


class NaiveMaintainer(Maintainer):
    strategy = "naive"

    def __init__(self, A: ForestAutomaton, F: Forest):
        super().__init__(A.alphabet, F.n)
        self.automaton = A
        lm = forest_letter_map(F.alphabet, A.alphabet)
        self.labels = np.array([lm[x] for x in F.labels], dtype=np.int32)
        self.fc = np.array(F.first_child, dtype=np.int32)
        self.ns = np.array(F.next_sibling, dtype=np.int32)
        self._scratch = np.empty(F.n, dtype=np.int32)
        self.member = self._recompute()

    def _recompute(self) -> bool:
        return accepts_arrays(self.automaton, self.labels, self.fc, self.ns, self._scratch)

    def update(self, u: int, a: str | int) -> bool:
        self.check_node(u)
        self.labels[u] = self.letter_id(a)
        self.member = self._recompute()
        self._count(self.n)
        return self.member

    def forest(self) -> Forest:
        parent = [-1] * self.n
        for u in range(self.n):
            c = int(self.fc[u])
            while c != -1:
                parent[c] = u
                c = int(self.ns[c])
        return Forest(self.alphabet, [int(x) for x in self.labels], parent)


def build_naive(A: ForestAutomaton, F: Forest) -> NaiveMaintainer:
    return NaiveMaintainer(A, F)


def nm_update(m: NaiveMaintainer, u: int, a: str | int) -> bool:
    return m.update(u, a)
