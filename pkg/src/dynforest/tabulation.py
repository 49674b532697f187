"""Constant-time evaluation of small VH-forests by tabulation.

The index stores labeled forests with at most k+1 nodes, interned by
(shape, label vector).  A shape is encoded as its balanced-parenthesis word
read as a binary number behind a sentinel bit.  Evaluations and relabel
transitions are memoized, so after a transition has been seen once it costs
a single dictionary lookup.  The eager mode builds the whole graph of forests
with add and relabel edges up front instead.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .algebra import AlgebraError, ForestAlgebra
from .forest import NIL, Forest, enumerate_shapes

DEFAULT_EAGER_BUDGET = 2_000_000


class IndexBudgetError(ValueError):
    pass


def shape_code(parent: Sequence[int]) -> int:
    """Balanced-parenthesis encoding of a prefix-order parent array."""
    code = 1
    stack: list[int] = []
    for u, p in enumerate(parent):
        while stack and stack[-1] != p:
            stack.pop()
            code <<= 1
        stack.append(u)
        code = (code << 1) | 1
    code <<= len(stack)
    return code


@dataclass
class _Shape:
    parent: tuple[int, ...]
    first_child: tuple[int, ...]
    next_sibling: tuple[int, ...]
    internal: tuple[bool, ...]


class Handle:
    __slots__ = ("fid", "perm", "hid")

    def __init__(self, fid: int, perm: tuple[int, ...] | None, hid: int):
        self.fid = fid
        self.perm = perm
        self.hid = hid

    def __repr__(self) -> str:
        return f"Handle({self.hid}, fid={self.fid})"


@dataclass
class IndexStats:
    interned: int = 0
    shapes: int = 0
    evals: int = 0
    relabel_hits: int = 0
    relabel_misses: int = 0
    adds: int = 0
    add_work: int = 0

    def lines(self) -> list[str]:
        return [f"{k}={v}" for k, v in self.__dict__.items()]


class SmallForestIndex:
    def __init__(self, alg: ForestAlgebra, k: int, eager: bool = False,
                 budget: int = DEFAULT_EAGER_BUDGET):
        if k < 1:
            raise ValueError("k must be at least 1")
        self.alg = alg
        self.k = k
        self.max_nodes = k + 1
        self.nV = alg.nV
        self.ncodes = alg.nV + alg.nH
        self._shape_ids: dict[int, int] = {}
        self._shapes: list[_Shape] = []
        self._ids: dict[tuple[int, tuple[int, ...]], int] = {}
        self._forests: list[tuple[int, tuple[int, ...]]] = []
        self._eval: list[int] = []                 # -1 when the forest is not well formed
        self._relabel: dict[tuple[int, int, int], int] = {}
        self._add_edges: dict[tuple[int, int, int], int] | None = None
        self.handles: list[Handle] = []
        self.stats = IndexStats()
        self.eager = eager
        if eager:
            bound = (4 * self.ncodes) ** self.max_nodes
            if bound > budget:
                raise IndexBudgetError(f"eager index would need up to {bound} forests (budget {budget})")
            self._build_eager()

    # -- interning ------------------------------------------------------------
    def _shape_id(self, parent: tuple[int, ...]) -> int:
        code = shape_code(parent)
        sid = self._shape_ids.get(code)
        if sid is None:
            n = len(parent)
            fc = [NIL] * n
            ns = [NIL] * n
            last: dict[int, int] = {}
            for u, p in enumerate(parent):
                prev = last.get(p, NIL)
                if prev == NIL:
                    if p != NIL:
                        fc[p] = u
                else:
                    ns[prev] = u
                last[p] = u
            sid = len(self._shapes)
            self._shape_ids[code] = sid
            self._shapes.append(_Shape(parent, tuple(fc), tuple(ns), tuple(x != NIL for x in fc)))
            self.stats.shapes += 1
        return sid

    def _intern(self, sid: int, labels: tuple[int, ...]) -> int:
        key = (sid, labels)
        fid = self._ids.get(key)
        if fid is None:
            fid = len(self._forests)
            self._ids[key] = fid
            self._forests.append(key)
            self._eval.append(self._evaluate(self._shapes[sid], labels))
            self.stats.interned += 1
        return fid

    def _well_formed(self, shape: _Shape, labels: tuple[int, ...]) -> bool:
        nV, dist = self.nV, 0
        for internal, c in zip(shape.internal, labels):
            if internal:
                if c >= nV:
                    return False
            elif c < nV:
                dist += 1
        return dist <= 1

    def _evaluate(self, shape: _Shape, labels: tuple[int, ...]) -> int:
        if not self._well_formed(shape, labels):
            return -1
        self.stats.evals += 1
        alg, nV = self.alg, self.nV
        hh, vv, vh, vph, hpv = alg.hh, alg.vv, alg.vh, alg.vph, alg.hpv
        n = len(labels)
        val = [0] * n
        fc, ns = shape.first_child, shape.next_sibling
        eps = nV + alg.eps

        def plus(x: int, y: int) -> int:
            if x >= nV:
                return nV + hh[x - nV][y - nV] if y >= nV else hpv[x - nV][y]
            return vph[x][y - nV]

        for u in range(n - 1, -1, -1):
            c = fc[u]
            if c == NIL:
                val[u] = labels[u]
                continue
            s = eps
            while c != NIL:
                s = plus(s, val[c])
                c = ns[c]
            v = labels[u]
            val[u] = nV + vh[v][s - nV] if s >= nV else vv[v][s]
        s = eps
        c = 0 if n else NIL
        while c != NIL:
            s = plus(s, val[c])
            c = ns[c]
        return s

    # -- public operations ----------------------------------------------------------
    def add(self, G: Forest, order: Sequence[int] | None = None) -> Handle:
        """Register a VH-forest (labels are algebra codes).  ``order`` lists
        the caller's node numbering: caller index i names node order[i]."""
        n = G.n
        if n > self.max_nodes:
            raise IndexBudgetError(f"forest has {n} nodes, the index holds at most {self.max_nodes}")
        labels = tuple(G.labels)
        for c in labels:
            if not 0 <= c < self.ncodes:
                raise AlgebraError(f"label code {c} is not an algebra element")
        self.stats.adds += 1
        self.stats.add_work += n
        if self._add_edges is not None:
            fid = self._follow_add_edges(G)
        else:
            fid = self._intern(self._shape_id(tuple(G.parent)), labels)
        if self._eval[fid] < 0:
            raise AlgebraError("malformed VH-forest: internal nodes need V labels and "
                               "at most one leaf may carry a V label")
        perm = None if order is None else tuple(order)
        h = Handle(fid, perm, len(self.handles))
        self.handles.append(h)
        return h

    def add_labels(self, parent: tuple[int, ...], labels: tuple[int, ...]) -> Handle:
        """Fast path for callers that already hold a prefix-order parent tuple."""
        if len(labels) > self.max_nodes:
            raise IndexBudgetError(f"forest has {len(labels)} nodes, the index holds at most {self.max_nodes}")
        self.stats.adds += 1
        self.stats.add_work += len(labels)
        fid = self._intern(self._shape_id(parent), labels)
        if self._eval[fid] < 0:
            raise AlgebraError("malformed VH-forest")
        h = Handle(fid, None, len(self.handles))
        self.handles.append(h)
        return h

    def relabel(self, h: Handle, i: int, code: int) -> None:
        j = h.perm[i] if h.perm is not None else i
        key = (h.fid, j, code)
        fid = self._relabel.get(key)
        if fid is not None:
            self.stats.relabel_hits += 1
            h.fid = fid
            return
        self.stats.relabel_misses += 1
        sid, labels = self._forests[h.fid]
        if not 0 <= j < len(labels):
            raise IndexBudgetError(f"node index {i} out of range")
        if not 0 <= code < self.ncodes:
            raise AlgebraError(f"label code {code} is not an algebra element")
        new = labels[:j] + (code,) + labels[j + 1:]
        fid = self._intern(sid, new)
        if self._eval[fid] < 0:
            kind = "internal" if self._shapes[sid].internal[j] else "leaf"
            raise AlgebraError(f"illegal label for {kind} node {i}")
        self._relabel[key] = fid
        h.fid = fid

    def eval(self, h: Handle) -> int:
        return self._eval[h.fid]

    def labels(self, h: Handle) -> tuple[int, ...]:
        return self._forests[h.fid][1]

    def forest_id(self, h: Handle) -> int:
        return h.fid

    @property
    def interned(self) -> int:
        return len(self._forests)

    # -- the eager construction ---------------------------------------------------------
    def _build_eager(self) -> None:
        """All labeled forests with at most k+1 nodes, linked by add edges
        (new last child of node i, or new last root) and relabel edges."""
        self._add_edges = {}
        codes = range(self.ncodes)
        empty = self._intern(self._shape_id(()), ())
        frontier = [empty]
        for size in range(self.max_nodes):
            nxt = []
            for fid in frontier:
                sid, labels = self._forests[fid]
                parent = self._shapes[sid].parent
                # legal attachment points keep prefix order: the rightmost path
                path = []
                u = len(parent) - 1
                while u != NIL:
                    path.append(u)
                    u = parent[u]
                for i in path + [len(parent)]:
                    p = i if i < len(parent) else NIL
                    nsid = self._shape_id(parent + (p,))
                    for c in codes:
                        before = len(self._forests)
                        nf = self._intern(nsid, labels + (c,))
                        self._add_edges[(fid, i, c)] = nf
                        if len(self._forests) > before:
                            nxt.append(nf)
            frontier = nxt
        # edges into malformed forests are left out so relabel reports them
        ev = self._eval
        for fid, (sid, labels) in enumerate(self._forests):
            for j in range(len(labels)):
                for c in codes:
                    target = self._ids[(sid, labels[:j] + (c,) + labels[j + 1:])]
                    if ev[target] >= 0:
                        self._relabel[(fid, j, c)] = target

    def _follow_add_edges(self, G: Forest) -> int:
        fid = self._ids[(self._shape_id(()), ())]
        n = 0
        for u in range(G.n):
            p = G.parent[u]
            fid = self._add_edges[(fid, p if p != NIL else n, G.labels[u])]
            n += 1
        return fid

    def graph_size(self) -> int:
        return len(self._forests)


def build_index(alg: ForestAlgebra, k: int, eager: bool = False,
                budget: int = DEFAULT_EAGER_BUDGET) -> SmallForestIndex:
    return SmallForestIndex(alg, k, eager, budget)


def enumerate_vh_forests(alg: ForestAlgebra, max_nodes: int):
    """Every well-formed VH-forest with at most ``max_nodes`` nodes."""
    nV = alg.nV
    alphabet = alg.code_alphabet()
    for n in range(max_nodes + 1):
        for shape in enumerate_shapes(n):
            base = Forest(alphabet, [0] * n, list(shape))
            choices = []
            for u in range(n):
                if base.first_child[u] != NIL:
                    choices.append(range(nV))
                else:
                    choices.append(range(nV + alg.nH))
            for labels in itertools.product(*choices):
                if sum(1 for u in range(n) if base.first_child[u] == NIL and labels[u] < nV) <= 1:
                    yield base.with_labels(labels)
