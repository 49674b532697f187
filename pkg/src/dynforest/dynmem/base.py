"""Shared maintainer interface: build once, then ``update(u, a)`` relabels
node u with letter a and returns the new membership bit."""
from __future__ import annotations

from typing import Sequence

from ..forest import UnknownLetterError


class Maintainer:
    """Base class.  ``steps`` is the elementary-step count of the last
    update, ``max_steps`` the maximum seen so far."""

    strategy = "abstract"

    def __init__(self, alphabet: Sequence[str], n: int):
        self.alphabet = tuple(alphabet)
        self._letter = {a: i for i, a in enumerate(self.alphabet)}
        self.n = n
        self.member = False
        self.steps = 0
        self.max_steps = 0
        self.updates = 0

    def letter_id(self, a: str | int) -> int:
        if isinstance(a, str):
            try:
                return self._letter[a]
            except KeyError:
                raise UnknownLetterError(f"unknown letter {a!r}") from None
        if not 0 <= a < len(self.alphabet):
            raise UnknownLetterError(f"unknown letter id {a}")
        return a

    def check_node(self, u: int) -> None:
        if not 0 <= u < self.n:
            raise IndexError(f"node {u} out of range (forest has {self.n} nodes)")

    def _count(self, steps: int) -> None:
        self.steps = steps
        if steps > self.max_steps:
            self.max_steps = steps
        self.updates += 1

    def update(self, u: int, a: str | int) -> bool:
        raise NotImplementedError

    def run(self, updates) -> list[bool]:
        return [self.update(u, a) for u, a in updates]


def forest_letter_map(F_alphabet: Sequence[str], alphabet: Sequence[str]) -> list[int]:
    index = {a: i for i, a in enumerate(alphabet)}
    try:
        return [index[a] for a in F_alphabet]
    except KeyError as exc:
        raise UnknownLetterError(f"letter {exc.args[0]!r} is not in the alphabet") from None
