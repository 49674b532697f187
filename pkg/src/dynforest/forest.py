"""Ordered unranked forests in first-child / next-sibling array form.

Node ids enumerate nodes in prefix (document) order and never change: updates
relabel nodes, they do not touch the shape.  A missing link is ``NIL`` (-1).
"""
from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

NIL = -1
HOLE = -1            # label id of the context hole leaf
HOLE_NAME = "_"

_LABEL_RE = re.compile(r"[A-Za-z0-9_#]+")


class ForestSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownLetterError(ValueError):
    pass


class Forest:
    """A labeled ordered forest.

    ``labels[u]`` is a dense letter id into ``alphabet`` (or ``HOLE`` for the
    hole leaf of a context).  The link arrays are plain lists of ints.
    """

    __slots__ = ("alphabet", "labels", "parent", "first_child", "next_sibling",
                 "prev_sibling", "_index")

    def __init__(self, alphabet: Sequence[str], labels: list[int], parent: list[int]):
        self.alphabet = tuple(alphabet)
        self._index = {a: i for i, a in enumerate(self.alphabet)}
        n = len(labels)
        if len(parent) != n:
            raise ValueError("labels and parent arrays differ in length")
        self.labels = list(labels)
        self.parent = list(parent)
        self.first_child = [NIL] * n
        self.next_sibling = [NIL] * n
        self.prev_sibling = [NIL] * n
        last_child = [NIL] * n
        last_root = NIL
        for u in range(n):
            p = parent[u]
            if p >= u:
                raise ValueError("parent ids must precede their children (prefix order)")
            prev = last_root if p == NIL else last_child[p]
            if prev != NIL:
                self.next_sibling[prev] = u
                self.prev_sibling[u] = prev
            elif p != NIL:
                self.first_child[p] = u
            if p == NIL:
                last_root = u
            else:
                last_child[p] = u
        self._check_prefix_order()

    def _check_prefix_order(self) -> None:
        # prefix order <=> every node's successor is its first child, or else
        # the next sibling of itself or of its nearest ancestor that has one
        n = len(self.labels)
        for u in range(n - 1):
            v = u + 1
            if self.first_child[u] == v:
                continue
            w = u
            while w != NIL and self.next_sibling[w] == NIL:
                w = self.parent[w]
            if w == NIL or self.next_sibling[w] != v:
                raise ValueError("node ids are not in prefix order")

    # -- basic accessors -------------------------------------------------
    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n(self) -> int:
        return len(self.labels)

    def letter_id(self, a: str) -> int:
        try:
            return self._index[a]
        except KeyError:
            raise UnknownLetterError(f"unknown letter {a!r}") from None

    def label(self, u: int) -> str:
        x = self.labels[u]
        return HOLE_NAME if x == HOLE else self.alphabet[x]

    def is_leaf(self, u: int) -> bool:
        return self.first_child[u] == NIL

    def roots(self) -> list[int]:
        return self.siblings_from(0) if self.labels else []

    def children(self, u: int) -> list[int]:
        return self.siblings_from(self.first_child[u])

    def siblings_from(self, u: int) -> list[int]:
        out = []
        while u != NIL:
            out.append(u)
            u = self.next_sibling[u]
        return out

    def subtree_end(self) -> list[int]:
        """Largest prefix id inside each node's subtree."""
        n = len(self.labels)
        end = list(range(n))
        for u in range(n - 1, 0, -1):
            p = self.parent[u]
            if p != NIL and end[u] > end[p]:
                end[p] = end[u]
        return end

    def copy(self) -> "Forest":
        return self.with_labels(self.labels)

    def with_labels(self, labels: Sequence[int], alphabet: Sequence[str] | None = None) -> "Forest":
        """Same shape, new labels; link arrays are shared copies."""
        f = Forest.__new__(Forest)
        f.alphabet = self.alphabet if alphabet is None else tuple(alphabet)
        f._index = self._index if alphabet is None else {a: i for i, a in enumerate(f.alphabet)}
        f.labels = list(labels)
        f.parent = list(self.parent)
        f.first_child = list(self.first_child)
        f.next_sibling = list(self.next_sibling)
        f.prev_sibling = list(self.prev_sibling)
        return f

    def same_shape(self, other: "Forest") -> bool:
        return self.parent == other.parent

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Forest):
            return NotImplemented
        return (self.parent == other.parent
                and [self.label(u) for u in range(self.n)] == [other.label(u) for u in range(other.n)])

    def __hash__(self):
        return hash((tuple(self.parent), tuple(self.label(u) for u in range(self.n))))

    def __repr__(self) -> str:
        return f"Forest({serialize_forest(self)!r})"

    # -- updates ---------------------------------------------------------
    def relabel(self, u: int, a: str | int) -> None:
        if not 0 <= u < len(self.labels):
            raise IndexError(f"node {u} out of range")
        if isinstance(a, str):
            a = self.letter_id(a)
        elif not 0 <= a < len(self.alphabet):
            raise UnknownLetterError(f"unknown letter id {a}")
        self.labels[u] = a

    # -- nested form -----------------------------------------------------
    def to_nested(self) -> tuple:
        """Forest as a tuple of ``(label, children)`` trees, labels by name."""
        n = len(self.labels)
        built: list = [None] * n
        for u in range(n - 1, -1, -1):
            kids = []
            c = self.first_child[u]
            while c != NIL:
                kids.append(built[c])
                built[c] = None
                c = self.next_sibling[c]
            built[u] = (self.label(u), tuple(kids))
        return tuple(built[r] for r in self.roots())

    @classmethod
    def from_nested(cls, nested: Iterable, alphabet: Sequence[str]) -> "Forest":
        index = {a: i for i, a in enumerate(alphabet)}
        labels: list[int] = []
        parent: list[int] = []
        stack = [(t, NIL) for t in reversed(tuple(nested))]
        while stack:
            (name, kids), p = stack.pop()
            if name == HOLE_NAME:
                labels.append(HOLE)
            else:
                try:
                    labels.append(index[name])
                except KeyError:
                    raise UnknownLetterError(f"unknown letter {name!r}") from None
            parent.append(p)
            me = len(labels) - 1
            stack.extend((t, me) for t in reversed(kids))
        return cls(alphabet, labels, parent)

    def hole(self) -> int:
        """Node id of the hole leaf, or NIL for a plain forest."""
        try:
            return self.labels.index(HOLE)
        except ValueError:
            return NIL

    @property
    def is_context(self) -> bool:
        return HOLE in self.labels


# -- text format -----------------------------------------------------------

def parse_forest(text: str, alphabet: Sequence[str] | None = None, *,
                 allow_hole: bool = False) -> Forest:
    """Parse ``a(b,c(d)),e``.  With ``alphabet=None`` letters are collected
    in order of first occurrence."""
    labels_named: list[str] = []
    parent: list[int] = []
    pos = 0
    n = len(text)
    stack: list[int] = []          # open parents
    expect_tree = True             # after '(' or ',' or at start
    trailing_ok = True             # an empty forest is legal right here

    def skip_ws(i: int) -> int:
        while i < n and text[i].isspace():
            i += 1
        return i

    pos = skip_ws(pos)
    while pos < n:
        ch = text[pos]
        if expect_tree:
            if ch == ")" and trailing_ok and stack:
                stack.pop()
                pos += 1
                expect_tree = False
                trailing_ok = False
            else:
                m = _LABEL_RE.match(text, pos)
                if m is None:
                    raise ForestSyntaxError(f"expected a label, found {ch!r}", pos)
                labels_named.append(m.group())
                parent.append(stack[-1] if stack else NIL)
                pos = m.end()
                expect_tree = False
                trailing_ok = False
                q = skip_ws(pos)
                if q < n and text[q] == "(":
                    if m.group() == HOLE_NAME:
                        raise ForestSyntaxError("the hole must be a leaf", q)
                    stack.append(len(labels_named) - 1)
                    pos = q + 1
                    expect_tree = True
                    trailing_ok = True
        else:
            if ch == ",":
                expect_tree = True
                trailing_ok = False
                pos += 1
            elif ch == ")":
                if not stack:
                    raise ForestSyntaxError("unbalanced ')'", pos)
                stack.pop()
                pos += 1
            else:
                raise ForestSyntaxError(f"expected ',' or ')', found {ch!r}", pos)
        pos = skip_ws(pos)
    if stack:
        raise ForestSyntaxError("unclosed '('", n)
    if expect_tree and not trailing_ok:
        raise ForestSyntaxError("expected a label", n)

    if alphabet is None:
        alphabet = list(dict.fromkeys(x for x in labels_named if x != HOLE_NAME))
    index = {a: i for i, a in enumerate(alphabet)}
    labels: list[int] = []
    holes = 0
    for name in labels_named:
        if name == HOLE_NAME:
            if not allow_hole:
                raise UnknownLetterError("hole label '_' is only allowed in contexts")
            holes += 1
            labels.append(HOLE)
        elif name in index:
            labels.append(index[name])
        else:
            raise UnknownLetterError(f"unknown letter {name!r}")
    if holes > 1:
        raise ForestSyntaxError("a context has exactly one hole", 0)
    return Forest(alphabet, labels, parent)


def parse_context(text: str, alphabet: Sequence[str] | None = None) -> Forest:
    f = parse_forest(text, alphabet, allow_hole=True)
    if f.hole() == NIL:
        raise ForestSyntaxError("a context needs one hole leaf '_'", 0)
    return f


def serialize_forest(F: Forest) -> str:
    out: list[str] = []
    n = F.n
    for u in range(n):
        out.append(F.label(u))
        if F.first_child[u] != NIL:
            out.append("(")
            continue
        # close every subtree that ends at u
        w = u
        while w != NIL and F.next_sibling[w] == NIL:
            w = F.parent[w]
            if w != NIL:
                out.append(")")
        if w != NIL:
            out.append(",")
    return "".join(out)


def serialize_nested(nested: Iterable) -> str:
    parts = []
    for name, kids in nested:
        parts.append(name + (f"({serialize_nested(kids)})" if kids else ""))
    return ",".join(parts)


# -- static indices ----------------------------------------------------------

@dataclass(frozen=True)
class TimestampIndex:
    """``enter[u]`` is u's prefix rank and ``leave[u]`` the largest prefix
    rank in u's subtree; ancestry is interval containment."""
    enter: tuple[int, ...]
    leave: tuple[int, ...]


def compute_timestamps(F: Forest) -> TimestampIndex:
    return TimestampIndex(tuple(range(F.n)), tuple(F.subtree_end()))


def is_ancestor(ts: TimestampIndex, u: int, v: int) -> bool:
    """Reflexive ancestry test."""
    return ts.enter[u] <= ts.enter[v] and ts.leave[v] <= ts.leave[u]


def project(F: Forest, sub: Iterable[str]) -> Forest:
    """Remove every node whose label is outside ``sub`` (children promoted)."""
    keep = {F.letter_id(a) for a in sub}
    labels: list[int] = []
    parent: list[int] = []
    new_id = [NIL] * F.n
    # nearest kept ancestor; prefix order lets us resolve it top-down
    anchor = [NIL] * F.n
    for u in range(F.n):
        p = F.parent[u]
        up = NIL if p == NIL else (new_id[p] if new_id[p] != NIL else anchor[p])
        if F.labels[u] in keep:
            new_id[u] = len(labels)
            labels.append(F.labels[u])
            parent.append(up)
        anchor[u] = up
    return Forest(F.alphabet, labels, parent)


def parikh(F: Forest) -> dict[str, int]:
    counts = [0] * len(F.alphabet)
    holes = 0
    for x in F.labels:
        if x == HOLE:
            holes += 1
        else:
            counts[x] += 1
    return dict(zip(F.alphabet, counts))


# -- nested-term helpers (small terms only; recursive) ------------------------

def plug(context: tuple, item: tuple) -> tuple:
    """Substitute the forest or context ``item`` for the hole of ``context``."""
    out = []
    for name, kids in context:
        if name == HOLE_NAME:
            out.extend(item)
        else:
            out.append((name, plug(kids, item)))
    return tuple(out)


def line_tree(a: str, m: int) -> tuple:
    """The tree a(a(...a)) with ``m`` nodes, as a one-tree nested forest."""
    if m <= 0:
        return ()
    t = (a, ())
    for _ in range(m - 1):
        t = (a, (t,))
    return (t,)


# -- enumeration and generation ---------------------------------------------

def enumerate_shapes(n: int) -> Iterator[tuple[int, ...]]:
    """All forest shapes with ``n`` nodes as prefix-order parent arrays."""
    if n == 0:
        yield ()
        return

    def gen(size: int, offset: int, par: int) -> Iterator[list[int]]:
        # forests of `size` nodes whose roots hang under `par`
        if size == 0:
            yield []
            return
        for first in range(1, size + 1):
            for inner in gen(first - 1, offset + 1, offset):
                for rest in gen(size - first, offset + first, par):
                    yield [par] + inner + rest

    for p in gen(n, 0, NIL):
        yield tuple(p)


def enumerate_forests(alphabet: Sequence[str], max_size: int, min_size: int = 0) -> Iterator[Forest]:
    """Every forest over ``alphabet`` with ``min_size..max_size`` nodes."""
    k = len(alphabet)
    for n in range(min_size, max_size + 1):
        for shape in enumerate_shapes(n):
            base = Forest(alphabet, [0] * n, list(shape))
            for labels in itertools.product(range(k), repeat=n):
                yield base.with_labels(labels)


def random_shape(n: int, rng: random.Random, *, roots: int | None = None,
                 depth_bias: float = 0.0) -> list[int]:
    """Random prefix-order parent array.

    Nodes are attached along the current rightmost path, which is exactly the
    set of legal parents in prefix order.  ``depth_bias`` in [0, 1) favours
    deep attachment (0 gives bushy trees, values near 1 give long paths).
    """
    parent: list[int] = []
    path: list[int] = []          # rightmost path, root first
    for u in range(n):
        if not path:
            p = NIL
        else:
            # choose how far up the rightmost path to attach
            if depth_bias and rng.random() < depth_bias:
                j = len(path)
            else:
                j = rng.randint(0, len(path))
            p = path[j - 1] if j > 0 else NIL
            del path[j:]
        parent.append(p)
        path.append(u)
    return parent


def random_forest(n: int, alphabet: Sequence[str], rng: random.Random, *,
                  depth_bias: float = 0.0, weights: Sequence[float] | None = None) -> Forest:
    parent = random_shape(n, rng, depth_bias=depth_bias)
    k = len(alphabet)
    if weights is None:
        labels = [rng.randrange(k) for _ in range(n)]
    else:
        labels = rng.choices(range(k), weights=weights, k=n)
    return Forest(alphabet, labels, parent)


def plug_forest(C: Forest, X: Forest) -> Forest:
    """Substitute ``X`` (forest or context) for the hole of context ``C``."""
    hole = C.hole()
    if hole == NIL:
        raise ValueError("plug_forest needs a context")
    if X.n == 0:
        keep = [u for u in range(C.n) if u != hole]
        new = {u: i for i, u in enumerate(keep)}
        return Forest(C.alphabet, [C.labels[u] for u in keep],
                      [NIL if C.parent[u] == NIL else new[C.parent[u]] for u in keep])
    xmap = _relabel_map(X, C.alphabet)
    shift = X.n - 1
    labels, parent = [], []
    hp = C.parent[hole]
    for u in range(hole):
        labels.append(C.labels[u])
        parent.append(C.parent[u])
    for x in range(X.n):
        labels.append(xmap[X.labels[x]])
        parent.append(hp if X.parent[x] == NIL else X.parent[x] + hole)
    for u in range(hole + 1, C.n):
        p = C.parent[u]
        labels.append(C.labels[u])
        parent.append(p if p == NIL or p < hole else p + shift)
    return Forest(C.alphabet, labels, parent)


def concat(*parts: Forest) -> Forest:
    """Horizontal concatenation F1 + F2 + ...; the alphabet is the first one's."""
    if not parts:
        raise ValueError("concat needs at least one forest")
    alphabet = parts[0].alphabet
    labels, parent = [], []
    for F in parts:
        off = len(labels)
        m = _relabel_map(F, alphabet)
        labels.extend(m[x] for x in F.labels)
        parent.extend(NIL if p == NIL else p + off for p in F.parent)
    return Forest(alphabet, labels, parent)


def line_forest(alphabet: Sequence[str], a: str, m: int) -> Forest:
    """The line tree a(a(...a)) with ``m`` nodes (empty for m = 0)."""
    i = list(alphabet).index(a)
    return Forest(alphabet, [i] * m, [u - 1 for u in range(m)])


def _relabel_map(F: Forest, alphabet: Sequence[str]) -> dict[int, int]:
    index = {a: i for i, a in enumerate(alphabet)}
    m = {HOLE: HOLE}
    for i, a in enumerate(F.alphabet):
        if a not in index:
            raise UnknownLetterError(f"unknown letter {a!r}")
        m[i] = index[a]
    return m
