"""Finite forest algebras, recognizers and the syntactic algebra.

Elements are dense ids.  ``V`` is the vertical monoid (context values, with
neutral ``box``), ``H`` the horizontal monoid (forest values, neutral ``eps``).
The five tables are

    hh[h][g]   = h + g           (H x H -> H)
    vv[v][w]   = v . w           (V x V -> V, w plugged into the hole of v)
    vh[v][h]   = v applied to h  (V x H -> H)
    vph[v][h]  = v + h           (V x H -> V)
    hpv[h][v]  = h + v           (H x V -> V)

Every table is stored as a tuple of row tuples, rows indexed by the left
operand.  The dump prints them in the same orientation.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .automaton import ForestAutomaton
from .forest import HOLE, HOLE_NAME, NIL, Forest, enumerate_shapes, serialize_forest

DEFAULT_CAP = 20000

Table = tuple[tuple[int, ...], ...]


class AlgebraError(ValueError):
    pass


class CapExceeded(AlgebraError):
    pass


def size_cap() -> int:
    raw = os.environ.get("DYNFOREST_CAP")
    if raw is None:
        return DEFAULT_CAP
    try:
        return int(raw)
    except ValueError:
        raise AlgebraError(f"DYNFOREST_CAP must be an integer, got {raw!r}") from None


class Elem(NamedTuple):
    """An element of either sort: ``kind`` is 'V' or 'H'."""
    kind: str
    id: int


@dataclass(frozen=True, eq=False)
class ForestAlgebra:
    hh: Table
    vv: Table
    vh: Table
    vph: Table
    hpv: Table
    box: int = 0
    eps: int = 0
    v_names: tuple[str, ...] | None = None
    h_names: tuple[str, ...] | None = None

    @property
    def nV(self) -> int:
        return len(self.vv)

    @property
    def nH(self) -> int:
        return len(self.hh)

    def vname(self, v: int) -> str:
        return self.v_names[v] if self.v_names else f"v{v}"

    def hname(self, h: int) -> str:
        return self.h_names[h] if self.h_names else f"h{h}"

    def name(self, e: Elem) -> str:
        return self.vname(e.id) if e.kind == "V" else self.hname(e.id)

    # VH-forest label codes: V elements keep their id, H elements are shifted
    def code_v(self, v: int) -> int:
        return v

    def code_h(self, h: int) -> int:
        return self.nV + h

    def decode(self, code: int) -> Elem:
        return Elem("V", code) if code < self.nV else Elem("H", code - self.nV)

    def code_alphabet(self) -> tuple[str, ...]:
        return tuple(f"v{i}" for i in range(self.nV)) + tuple(f"h{i}" for i in range(self.nH))

    def arrays(self) -> dict[str, np.ndarray]:
        return {k: np.array(getattr(self, k), dtype=np.int64).reshape(
            len(getattr(self, k)), -1) for k in ("hh", "vv", "vh", "vph", "hpv")}

    def with_names(self, v_names, h_names) -> "ForestAlgebra":
        return ForestAlgebra(self.hh, self.vv, self.vh, self.vph, self.hpv, self.box, self.eps,
                             tuple(v_names), tuple(h_names))


@dataclass(frozen=True, eq=False)
class Recognizer:
    algebra: ForestAlgebra
    alphabet: tuple[str, ...]
    assign: tuple[int, ...]          # letter id -> V element
    accepting: frozenset[int]
    v_terms: tuple | None = None     # representative terms (nested form), if computed
    h_terms: tuple | None = None

    def leaf(self, a: int) -> int:
        """H value of a single leaf labeled with letter id ``a``."""
        return self.algebra.vh[self.assign[a]][self.algebra.eps]


# -- helpers on monoid tables ------------------------------------------------------

def idempotent_power(table: Table, x: int) -> int:
    """x^omega for the least omega >= 1 making the power idempotent."""
    return table_power(table, x, idempotent_omega(table, x))


def idempotent_omega(table: Table, x: int) -> int:
    p, k = x, 1
    while table[p][p] != p:
        p = table[p][x]
        k += 1
        if k > len(table) + 1:
            raise AlgebraError("table is not a finite monoid")
    return k


def idempotent_exponent(table: Table) -> int:
    m = 1
    for x in range(len(table)):
        m = math.lcm(m, idempotent_omega(table, x))
    return m


def table_power(table: Table, x: int, k: int, unit: int = 0) -> int:
    r = None
    for _ in range(k):
        r = x if r is None else table[r][x]
    return unit if r is None else r


# -- axioms ------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: tuple

    def __str__(self) -> str:
        return f"{self.axiom}: {self.witness}"


def _first(mask: np.ndarray) -> tuple | None:
    idx = np.argwhere(mask)
    return tuple(int(i) for i in idx[0]) if len(idx) else None


def validate_algebra(alg: ForestAlgebra) -> list[Violation]:
    """Every violated axiom with one witness; empty iff the algebra is valid."""
    out: list[Violation] = []
    try:
        t = alg.arrays()
    except ValueError:
        return [Violation("shape", ("ragged table",))]
    nV, nH = alg.nV, alg.nH
    shapes = {"hh": (nH, nH), "vv": (nV, nV), "vh": (nV, nH), "vph": (nV, nH), "hpv": (nH, nV)}
    for k, shp in shapes.items():
        if t[k].shape != shp:
            return [Violation("shape", (k, t[k].shape, shp))]
    for k, bound in (("hh", nH), ("vv", nV), ("vh", nH), ("vph", nV), ("hpv", nV)):
        if t[k].size and (t[k].min() < 0 or t[k].max() >= bound):
            return [Violation("range", (k,))]
    hh, vv, vh, vph, hpv = t["hh"], t["vv"], t["vh"], t["vph"], t["hpv"]
    b, e = alg.box, alg.eps

    def assoc(T: np.ndarray, name: str) -> None:
        n = T.shape[0]
        for x in range(n):
            # (x y) z vs x (y z) for all y, z
            lhs = T[T[x]]                 # rows: y, cols: z
            rhs = T[x][T]
            w = _first(lhs != rhs)
            if w is not None:
                out.append(Violation(f"{name} associativity", (x, *w)))
                return

    assoc(hh, "H")
    w = _first((hh[e] != np.arange(nH)) | (hh[:, e] != np.arange(nH)))
    if w is not None:
        out.append(Violation("H neutral", w))
    assoc(vv, "V")
    w = _first((vv[b] != np.arange(nV)) | (vv[:, b] != np.arange(nV)))
    if w is not None:
        out.append(Violation("V neutral", w))
    # (v w) h = v (w h)
    for v in range(nV):
        w = _first(vh[vv[v]] != vh[v][vh])
        if w is not None:
            out.append(Violation("action composition", (v, *w)))
            break
    w = _first(vh[b] != np.arange(nH))
    if w is not None:
        out.append(Violation("action neutral", w))
    # (v + h) g = v g + h   and   (h + v) g = h + v g
    for v in range(nV):
        lhs = vh[vph[v]]                  # rows h, cols g
        rhs = hh[vh[v]].T                 # [g][h] -> transpose to [h][g]
        w = _first(lhs != rhs)
        if w is not None:
            out.append(Violation("mixing (v+h)", (v, *w)))
            break
    for h in range(nH):
        lhs = vh[hpv[h]]                  # rows v, cols g
        rhs = hh[h][vh]
        w = _first(lhs != rhs)
        if w is not None:
            out.append(Violation("mixing (h+v)", (h, *w)))
            break
    _, first_idx, inv = np.unique(vh, axis=0, return_index=True, return_inverse=True)
    inv = np.asarray(inv).reshape(-1)
    if len(first_idx) != nV:
        for v in range(nV):
            if first_idx[inv[v]] != v:
                out.append(Violation("faithfulness", (int(first_idx[inv[v]]), v)))
                break
    return out


def check_recognizer(rec: Recognizer) -> None:
    bad = validate_algebra(rec.algebra)
    if bad:
        raise AlgebraError("invalid algebra: " + "; ".join(map(str, bad)))


# -- evaluation ---------------------------------------------------------------------

def _plus(alg: ForestAlgebra, x: int, y: int) -> int:
    nV = alg.nV
    if x >= nV:
        if y >= nV:
            return nV + alg.hh[x - nV][y - nV]
        return alg.hpv[x - nV][y]
    if y >= nV:
        return alg.vph[x][y - nV]
    raise AlgebraError("two distinguished leaves")


def _apply(alg: ForestAlgebra, v: int, s: int) -> int:
    nV = alg.nV
    if s >= nV:
        return nV + alg.vh[v][s - nV]
    return alg.vv[v][s]


def check_vh_forest(alg: ForestAlgebra, G: Forest) -> None:
    nV, total = alg.nV, alg.nV + alg.nH
    distinguished = 0
    for u in range(G.n):
        c = G.labels[u]
        if not 0 <= c < total:
            raise AlgebraError(f"node {u}: label code {c} is not an algebra element")
        if G.first_child[u] != NIL:
            if c >= nV:
                raise AlgebraError(f"node {u}: internal nodes carry V elements")
        elif c < nV:
            distinguished += 1
    if distinguished > 1:
        raise AlgebraError("more than one leaf carries a V element")


def eval_vh_codes(alg: ForestAlgebra, G: Forest, check: bool = True) -> int:
    """Evaluate a VH-forest; returns a label code (V id, or nV + H id)."""
    if check:
        check_vh_forest(alg, G)
    n = G.n
    val = [0] * n
    fc, ns, labels = G.first_child, G.next_sibling, G.labels
    eps_code = alg.nV + alg.eps
    for u in range(n - 1, -1, -1):
        c = fc[u]
        if c == NIL:
            val[u] = labels[u]
            continue
        s = eps_code
        while c != NIL:
            s = _plus(alg, s, val[c])
            c = ns[c]
        val[u] = _apply(alg, labels[u], s)
    s = eps_code
    c = 0 if n else NIL
    while c != NIL:
        s = _plus(alg, s, val[c])
        c = ns[c]
    return s


def eval_vh_forest(alg: ForestAlgebra, G: Forest) -> Elem:
    return alg.decode(eval_vh_codes(alg, G))


def make_vh_forest(alg: ForestAlgebra, shape: Forest, elems: Sequence[Elem]) -> Forest:
    """VH-forest with the shape of ``shape`` and the given element labels."""
    codes = [alg.code_v(e.id) if e.kind == "V" else alg.code_h(e.id) for e in elems]
    G = shape.with_labels(codes, alphabet=alg.code_alphabet())
    check_vh_forest(alg, G)
    return G


def to_vh_forest(rec: Recognizer, F: Forest) -> Forest:
    """Image of a forest or context under the letter assignment: internal
    nodes get assign(a), leaves assign(a) applied to eps, the hole box."""
    alg = rec.algebra
    lm = _letter_map(rec, F)
    codes = []
    for u in range(F.n):
        x = F.labels[u]
        if x == HOLE:
            if F.first_child[u] != NIL:
                raise AlgebraError("the hole must be a leaf")
            codes.append(alg.box)
            continue
        a = lm[x]
        if F.first_child[u] == NIL:
            codes.append(alg.nV + alg.vh[rec.assign[a]][alg.eps])
        else:
            codes.append(rec.assign[a])
    return F.with_labels(codes, alphabet=alg.code_alphabet())


def _letter_map(rec: Recognizer, F: Forest) -> list[int]:
    if F.alphabet == rec.alphabet:
        return list(range(len(rec.alphabet)))
    index = {a: i for i, a in enumerate(rec.alphabet)}
    try:
        return [index[a] for a in F.alphabet]
    except KeyError as exc:
        raise AlgebraError(f"letter {exc.args[0]!r} is not in the recognizer's alphabet") from None


def eval_morphism(rec: Recognizer, F: Forest) -> int:
    """H value of a forest."""
    if F.is_context:
        raise AlgebraError("eval_morphism takes a forest; use eval_context for contexts")
    alg = rec.algebra
    lm = _letter_map(rec, F)
    hh, vh, assign = alg.hh, alg.vh, rec.assign
    n = F.n
    val = [0] * n
    fc, ns, labels = F.first_child, F.next_sibling, F.labels
    for u in range(n - 1, -1, -1):
        s = alg.eps
        c = fc[u]
        while c != NIL:
            s = hh[s][val[c]]
            c = ns[c]
        val[u] = vh[assign[lm[labels[u]]]][s]
    s = alg.eps
    c = 0 if n else NIL
    while c != NIL:
        s = hh[s][val[c]]
        c = ns[c]
    return s


def eval_context(rec: Recognizer, C: Forest) -> int:
    """V value of a context (a forest with exactly one hole leaf)."""
    holes = sum(1 for x in C.labels if x == HOLE)
    if holes != 1:
        raise AlgebraError(f"a context has exactly one hole, found {holes}")
    code = eval_vh_codes(rec.algebra, to_vh_forest(rec, C), check=False)
    return code


def eval_any(rec: Recognizer, F: Forest) -> Elem:
    if F.is_context:
        return Elem("V", eval_context(rec, F))
    return Elem("H", eval_morphism(rec, F))


def recognizes(rec: Recognizer, F: Forest) -> bool:
    return eval_morphism(rec, F) in rec.accepting


# -- fast row interning for function tables -------------------------------------------

class _RowIndex:
    """Maps equal-length integer rows to dense ids, with vectorized lookup."""

    def __init__(self, width: int, seed: int = 12345):
        self.width = width
        rng = np.random.default_rng(seed)
        self.coef = rng.integers(1, 2**62, size=width, dtype=np.uint64) | np.uint64(1)
        self.rows: list[np.ndarray] = []
        self.ids: dict[bytes, int] = {}

    def key(self, row: np.ndarray) -> bytes:
        return np.ascontiguousarray(row, dtype=np.int32).tobytes()

    def add(self, row: np.ndarray) -> tuple[int, bool]:
        k = self.key(row)
        i = self.ids.get(k)
        if i is not None:
            return i, False
        i = len(self.rows)
        self.ids[k] = i
        self.rows.append(np.asarray(row, dtype=np.int32))
        return i, True

    def get(self, row: np.ndarray) -> int | None:
        return self.ids.get(self.key(row))

    def __len__(self) -> int:
        return len(self.rows)

    def lookup_many(self, rows: np.ndarray) -> np.ndarray:
        """Ids for a 2-D batch of rows; every row must already be present."""
        mat = np.stack(self.rows)
        hashes = (mat.astype(np.uint64) * self.coef).sum(axis=1, dtype=np.uint64)
        order = np.argsort(hashes, kind="stable")
        sorted_h = hashes[order]
        q = (rows.astype(np.uint64) * self.coef).sum(axis=1, dtype=np.uint64)
        pos = np.searchsorted(sorted_h, q)
        pos = np.minimum(pos, len(sorted_h) - 1)
        ids = order[pos]
        ok = (sorted_h[pos] == q) & np.all(mat[ids] == rows, axis=1)
        if not ok.all():
            # hash collision or absent row: resolve the stragglers exactly
            for j in np.flatnonzero(~ok):
                i = self.get(rows[j])
                if i is None:
                    raise AlgebraError("row not closed under the operation")
                ids[j] = i
        return ids.astype(np.int64)


# -- the transition algebra of an automaton -------------------------------------------

def transition_algebra(A: ForestAutomaton, cap: int | None = None) -> Recognizer:
    """Recognizer whose H are the word-state transformations induced by
    forests and whose V are the induced maps on H."""
    cap = size_cap() if cap is None else cap
    W = A.horizontal
    nP = len(W.states)
    wd = np.array(W.delta, dtype=np.int32).reshape(nP, len(A.tree_states))
    vd = np.array(A.delta, dtype=np.int32).reshape(nP, len(A.alphabet))
    p0 = W.initial

    # H: transformations p -> p' with composition (h + g)[p] = g[h[p]]
    H = _RowIndex(nP)
    H.add(np.arange(nP, dtype=np.int32))
    reached: dict[int, np.ndarray] = {}      # tree state -> its generator T_q
    while True:
        fresh = False
        for hid in range(len(H)):
            target = H.rows[hid][p0]
            for a in range(len(A.alphabet)):
                q = int(vd[target, a])
                if q not in reached:
                    reached[q] = wd[:, q].copy()
                    fresh = True
        if not fresh:
            break
        gens = list(reached.values())
        queue = list(range(len(H)))
        while queue:
            row = H.rows[queue.pop()]
            for g in gens:
                i, new = H.add(g[row])
                if new:
                    queue.append(i)
            if len(H) > cap:
                raise CapExceeded(f"horizontal monoid exceeds the size cap ({cap})")
    nH = len(H)
    Hm = np.stack(H.rows)                            # nH x nP
    # hh[h][g] = g[h[p]]
    hh = np.empty((nH, nH), dtype=np.int64)
    for h in range(nH):
        hh[h] = H.lookup_many(Hm[:, Hm[h]])
    Tq = {q: H.get(g) for q, g in reached.items()}

    # V: maps H -> H generated by left / right additions and letter wraps
    gens = []
    for q in sorted(Tq):
        gens.append(hh[Tq[q]].copy())                # x -> T_q + x
        gens.append(hh[:, Tq[q]].copy())             # x -> x + T_q
    wraps = []
    for a in range(len(A.alphabet)):
        # x -> T_{delta(x(p0), a)}
        w = np.array([Tq[int(vd[Hm[x][p0], a])] for x in range(nH)], dtype=np.int32)
        wraps.append(w)
        gens.append(w)
    V = _RowIndex(nH)
    V.add(np.arange(nH, dtype=np.int32))
    queue = [0]
    while queue:
        vid = queue.pop()
        row = V.rows[vid]
        for g in gens:
            i, new = V.add(row[g])                   # v . g
            if new:
                queue.append(i)
                if len(V) > cap:
                    raise CapExceeded(f"vertical monoid exceeds the size cap ({cap})")
    nV = len(V)
    Vm = np.stack(V.rows)                            # nV x nH
    vv = np.empty((nV, nV), dtype=np.int64)
    for v in range(nV):
        vv[v] = V.lookup_many(Vm[v][Vm])             # rows w: v(w(x))
    vh = Vm.astype(np.int64)
    vph = np.empty((nV, nH), dtype=np.int64)         # x -> v(x) + h
    for h in range(nH):
        vph[:, h] = V.lookup_many(hh[:, h][Vm])
    hpv = np.empty((nH, nV), dtype=np.int64)         # x -> h + v(x)
    for h in range(nH):
        hpv[h] = V.lookup_many(hh[h][Vm])
    alg = ForestAlgebra(_tup(hh), _tup(vv), _tup(vh), _tup(vph), _tup(hpv), 0, 0)
    assign = tuple(V.get(w) for w in wraps)
    accepting = frozenset(h for h in range(nH) if int(Hm[h][p0]) in W.final)
    return Recognizer(alg, A.alphabet, assign, accepting)


def _tup(a: np.ndarray) -> Table:
    return tuple(tuple(int(x) for x in row) for row in a)


# -- subalgebras, quotients and the syntactic algebra ----------------------------------

def generated_subalgebra(rec: Recognizer) -> Recognizer:
    """Restrict to the elements reachable from the letters (forest and context images)."""
    alg = rec.algebra
    t = alg.arrays()
    Vs = {alg.box, *rec.assign}
    Hs = {alg.eps}
    while True:
        vl, hl = sorted(Vs), sorted(Hs)
        nh = set(t["hh"][np.ix_(hl, hl)].ravel()) | set(t["vh"][np.ix_(vl, hl)].ravel())
        nv = (set(t["vv"][np.ix_(vl, vl)].ravel()) | set(t["vph"][np.ix_(vl, hl)].ravel())
              | set(t["hpv"][np.ix_(hl, vl)].ravel()))
        nh = {int(x) for x in nh} | Hs
        nv = {int(x) for x in nv} | Vs
        if nh == Hs and nv == Vs:
            break
        Hs, Vs = nh, nv
    vl = [alg.box] + sorted(Vs - {alg.box})
    hl = [alg.eps] + sorted(Hs - {alg.eps})
    if len(vl) == alg.nV and len(hl) == alg.nH and alg.box == 0 and alg.eps == 0:
        return rec
    vmap = {v: i for i, v in enumerate(vl)}
    hmap = {h: i for i, h in enumerate(hl)}
    sub = ForestAlgebra(
        tuple(tuple(hmap[alg.hh[a][b]] for b in hl) for a in hl),
        tuple(tuple(vmap[alg.vv[a][b]] for b in vl) for a in vl),
        tuple(tuple(hmap[alg.vh[a][b]] for b in hl) for a in vl),
        tuple(tuple(vmap[alg.vph[a][b]] for b in hl) for a in vl),
        tuple(tuple(vmap[alg.hpv[a][b]] for b in vl) for a in hl),
        0, 0)
    return Recognizer(sub, rec.alphabet, tuple(vmap[v] for v in rec.assign),
                      frozenset(hmap[h] for h in rec.accepting if h in hmap))


def syntactic_classes(rec: Recognizer) -> tuple[np.ndarray, np.ndarray]:
    """Class index per H and per V element under the syntactic congruence.

    h ~ h' iff every context value v sends both inside or both outside the
    accepting set; v ~ v' iff v h ~ v' h for every h.  With V ranging over
    all context images of a generated algebra both relations are already
    congruences, so a single round is the fixpoint."""
    alg = rec.algebra
    t = alg.arrays()
    acc = np.zeros(alg.nH, dtype=np.int8)
    acc[list(rec.accepting)] = 1
    _, hcls = np.unique(acc[t["vh"]].T, axis=0, return_inverse=True)
    hcls = np.asarray(hcls).reshape(-1)
    _, vcls = np.unique(hcls[t["vh"]], axis=0, return_inverse=True)
    vcls = np.asarray(vcls).reshape(-1)
    return hcls, vcls


def quotient(rec: Recognizer, hcls: np.ndarray, vcls: np.ndarray) -> Recognizer:
    alg = rec.algebra
    t = alg.arrays()
    # renumber so that the neutral elements come first, then in first-seen order
    def renumber(cls: np.ndarray, neutral: int) -> np.ndarray:
        order = {int(cls[neutral]): 0}
        for c in cls:
            order.setdefault(int(c), len(order))
        return np.array([order[int(c)] for c in cls], dtype=np.int64)

    hc, vc = renumber(hcls, alg.eps), renumber(vcls, alg.box)
    nh, nv = int(hc.max()) + 1, int(vc.max()) + 1
    hrep = np.array([int(np.flatnonzero(hc == c)[0]) for c in range(nh)])
    vrep = np.array([int(np.flatnonzero(vc == c)[0]) for c in range(nv)])
    q = {
        "hh": hc[t["hh"][np.ix_(hrep, hrep)]],
        "vv": vc[t["vv"][np.ix_(vrep, vrep)]],
        "vh": hc[t["vh"][np.ix_(vrep, hrep)]],
        "vph": vc[t["vph"][np.ix_(vrep, hrep)]],
        "hpv": vc[t["hpv"][np.ix_(hrep, vrep)]],
    }
    # congruence check: the induced tables must not depend on representatives
    checks = [
        (hc[t["hh"]], q["hh"][np.ix_(hc, hc)]),
        (vc[t["vv"]], q["vv"][np.ix_(vc, vc)]),
        (hc[t["vh"]], q["vh"][np.ix_(vc, hc)]),
        (vc[t["vph"]], q["vph"][np.ix_(vc, hc)]),
        (vc[t["hpv"]], q["hpv"][np.ix_(hc, vc)]),
    ]
    for name, (got, want) in zip(q, checks):
        if not np.array_equal(got, want):
            raise AlgebraError(f"quotient is not a congruence for the {name} table")
    acc = {int(hc[h]) for h in rec.accepting}
    if any(int(hc[h]) in acc for h in range(alg.nH) if h not in rec.accepting):
        raise AlgebraError("quotient merges accepting and rejecting elements")
    out = ForestAlgebra(*(_tup(q[k]) for k in ("hh", "vv", "vh", "vph", "hpv")), 0, 0)
    return Recognizer(out, rec.alphabet, tuple(int(vc[v]) for v in rec.assign), frozenset(acc))


def minimize_to_syntactic(rec: Recognizer, names: bool = True) -> Recognizer:
    sub = generated_subalgebra(rec)
    hcls, vcls = syntactic_classes(sub)
    out = quotient(sub, hcls, vcls)
    return name_elements(out) if names else out


def syntactic_recognizer(A: ForestAutomaton, cap: int | None = None) -> Recognizer:
    return minimize_to_syntactic(transition_algebra(A, cap))


def distinguishing_pair(rec: Recognizer, v1: int, v2: int) -> tuple[int, int] | None:
    """(r, s) with exactly one of r(v1 s), r(v2 s) accepting, or None if v1 ~ v2."""
    alg = rec.algebra
    for s in range(alg.nH):
        a, b = alg.vh[v1][s], alg.vh[v2][s]
        for r in range(alg.nV):
            if (alg.vh[r][a] in rec.accepting) != (alg.vh[r][b] in rec.accepting):
                return r, s
    return None


def h_to_v(alg: ForestAlgebra, h: int) -> int:
    """The embedding h -> h + box of H into V."""
    return alg.hpv[h][alg.box]


# -- element names ----------------------------------------------------------------------

def _term_key(text: str, nodes: int) -> tuple:
    # the hole sorts after every letter and punctuation mark
    return (nodes, len(text), text.replace(HOLE_NAME, "\x7f"))


def _enumerate_terms(alphabet: Sequence[str], size: int, contexts: bool) -> Iterable[Forest]:
    k = len(alphabet)
    for shape in enumerate_shapes(size):
        base = Forest(alphabet, [0] * size, list(shape))
        if not contexts:
            for labels in itertools.product(range(k), repeat=size):
                yield base.with_labels(labels)
        else:
            leaves = [u for u in range(size) if base.first_child[u] == NIL]
            for hole in leaves:
                for labels in itertools.product(range(k), repeat=size - 1):
                    lab = list(labels[:hole]) + [HOLE] + list(labels[hole:])
                    yield base.with_labels(lab)


def name_elements(rec: Recognizer, budget: int = 400_000) -> Recognizer:
    """Attach a shortest representative term to every element.

    Terms are compared by node count, then serialized length, then
    lexicographically with the hole sorting last.  Sizes are enumerated
    exhaustively while the budget lasts; anything still unnamed gets a term
    assembled from named parts (still a valid representative)."""
    alg = rec.algebra
    best_h: dict[int, tuple] = {alg.eps: ((0, 0, ""), ())}
    best_v: dict[int, tuple] = {}
    spent = 0
    size = 1
    k = len(rec.alphabet)
    while (len(best_h) < alg.nH or len(best_v) < alg.nV) and spent < budget:
        n_shapes = _catalan(size)
        cost = n_shapes * (k ** size + size * k ** (size - 1))
        if spent + cost > budget and size > 1:
            break
        spent += cost
        for ctx in (False, True):
            best = best_v if ctx else best_h
            for F in _enumerate_terms(rec.alphabet, size, ctx):
                e = eval_context(rec, F) if ctx else eval_morphism(rec, F)
                text = serialize_forest(F)
                key = _term_key(text, size)
                cur = best.get(e)
                if cur is None or (cur[0][0] == size and key < cur[0]):
                    best[e] = (key, F.to_nested())
        size += 1
    if len(best_h) < alg.nH or len(best_v) < alg.nV:
        _name_by_closure(rec, best_h, best_v)
    h_terms = tuple(best_h[h][1] for h in range(alg.nH))
    v_terms = tuple(best_v[v][1] for v in range(alg.nV))
    named = alg.with_names([display_term(t, True) for t in v_terms],
                           [display_term(t, False) for t in h_terms])
    return Recognizer(named, rec.alphabet, rec.assign, rec.accepting, v_terms, h_terms)


def _name_by_closure(rec: Recognizer, best_h: dict, best_v: dict) -> None:
    """Fill missing names by combining known terms until closed."""
    from .forest import serialize_nested
    alg = rec.algebra
    best_v.setdefault(alg.box, ((1, 1, "\x7f"), ((HOLE_NAME, ()),)))

    def offer(best: dict, e: int, term: tuple, nodes: int) -> bool:
        key = _term_key(serialize_nested(term), nodes)
        cur = best.get(e)
        if cur is None or key < cur[0]:
            best[e] = (key, term)
            return True
        return False

    changed = True
    while changed:
        changed = False
        hs, vs = list(best_h.items()), list(best_v.items())
        for a, name in enumerate(rec.alphabet):
            for v, (kv, tv) in vs:
                changed |= offer(best_v, alg.vv[rec.assign[a]][v], ((name, tv),), kv[0] + 1)
            for h, (kh, th) in hs:
                changed |= offer(best_h, alg.vh[rec.assign[a]][h], ((name, th),), kh[0] + 1)
        for h, (kh, th) in hs:
            for g, (kg, tg) in hs:
                changed |= offer(best_h, alg.hh[h][g], th + tg, kh[0] + kg[0])
            for v, (kv, tv) in vs:
                changed |= offer(best_v, alg.hpv[h][v], th + tv, kh[0] + kv[0])
                changed |= offer(best_v, alg.vph[v][h], tv + th, kh[0] + kv[0])
    if len(best_h) < alg.nH or len(best_v) < alg.nV:
        raise AlgebraError("some elements are not images of any forest or context")


def _catalan(n: int) -> int:
    return math.comb(2 * n, n) // (n + 1)


def display_term(nested: tuple, context: bool) -> str:
    from .forest import serialize_nested
    if not nested:
        return "ε"
    return serialize_nested(nested).replace(HOLE_NAME, "□")


# -- isomorphism and dumps -------------------------------------------------------------

def find_isomorphism(a: ForestAlgebra, b: ForestAlgebra) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
    """Bijections (V map, H map) carrying every table of ``a`` onto ``b``."""
    if a.nV != b.nV or a.nH != b.nH:
        return None
    for hp in itertools.permutations(range(a.nH)):
        if hp[a.eps] != b.eps:
            continue
        if any(hp[a.hh[x][y]] != b.hh[hp[x]][hp[y]] for x in range(a.nH) for y in range(a.nH)):
            continue
        for vp in itertools.permutations(range(a.nV)):
            if vp[a.box] != b.box:
                continue
            if _iso_ok(a, b, vp, hp):
                return vp, hp
    return None


def _iso_ok(a: ForestAlgebra, b: ForestAlgebra, vp, hp) -> bool:
    rV, rH = range(a.nV), range(a.nH)
    return (all(vp[a.vv[x][y]] == b.vv[vp[x]][vp[y]] for x in rV for y in rV)
            and all(hp[a.vh[x][y]] == b.vh[vp[x]][hp[y]] for x in rV for y in rH)
            and all(vp[a.vph[x][y]] == b.vph[vp[x]][hp[y]] for x in rV for y in rH)
            and all(vp[a.hpv[y][x]] == b.hpv[hp[y]][vp[x]] for x in rV for y in rH))


def dump_algebra(rec: Recognizer) -> str:
    """All five tables, rows = left operand, columns = right operand."""
    alg = rec.algebra
    V = [alg.vname(v) for v in range(alg.nV)]
    H = [alg.hname(h) for h in range(alg.nH)]
    out = [f"|V| = {alg.nV}", f"|H| = {alg.nH}",
           "V: " + " ".join(V), "H: " + " ".join(H),
           "accepting: " + " ".join(H[h] for h in sorted(rec.accepting)),
           "assign: " + " ".join(f"{a}->{V[v]}" for a, v in zip(rec.alphabet, rec.assign))]

    def matrix(title: str, rows: list[str], cols: list[str], body: Table, names: list[str]) -> None:
        width = max(len(x) for x in rows + cols + names + [title])
        out.append("")
        out.append(title)
        out.append(" " * width + " | " + " ".join(c.ljust(width) for c in cols))
        for r, row in zip(rows, body):
            out.append(r.ljust(width) + " | " + " ".join(names[x].ljust(width) for x in row))

    matrix("H + H", H, H, alg.hh, H)
    matrix("V . V", V, V, alg.vv, V)
    matrix("V (H)", V, H, alg.vh, H)
    matrix("V + H", V, H, alg.vph, V)
    matrix("H + V", H, V, alg.hpv, V)
    return "\n".join(line.rstrip() for line in out) + "\n"
