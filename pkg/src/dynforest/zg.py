"""The ZG equation, almost-commutativity, and the normal-form toolkit.

An algebra is ZG when v^(ω+1) w = w v^(ω+1) for all v, w in V, where
v^ω is the idempotent power: elements of subgroups are central.  A regular forest
language is almost-commutative exactly when its syntactic algebra is ZG.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .algebra import (AlgebraError, ForestAlgebra, Recognizer, eval_context, eval_morphism,
                      idempotent_exponent, idempotent_power, syntactic_recognizer)
from .automaton import ForestAutomaton
from .forest import HOLE, NIL, Forest, concat, line_forest, parikh, plug_forest, project

IDENTITIES = ("ZGh", "DISTv", "DISTh", "OUTh", "OUTv", "IDv", "FLAT")


@dataclass
class ZGReport:
    is_zg: bool
    witness: tuple[int, int] | None
    identity_results: dict[str, tuple[bool, tuple | None]] = field(default_factory=dict)

    def failures(self) -> list[str]:
        return [k for k, (ok, _) in self.identity_results.items() if not ok]


@dataclass
class Powers:
    """Idempotent powers x^ω and group parts x^(ω+1), per element."""
    v_idem: list[int]
    v_grp: list[int]
    h_idem: list[int]
    h_grp: list[int]


def powers(alg: ForestAlgebra) -> Powers:
    vi = [idempotent_power(alg.vv, v) for v in range(alg.nV)]
    hi = [idempotent_power(alg.hh, h) for h in range(alg.nH)]
    return Powers(vi, [alg.vv[vi[v]][v] for v in range(alg.nV)],
                  hi, [alg.hh[hi[h]][h] for h in range(alg.nH)])


def check_zg_equation(alg: ForestAlgebra, P: Powers | None = None) -> tuple[int, int] | None:
    P = P or powers(alg)
    vv = alg.vv
    for v in range(alg.nV):
        g = P.v_grp[v]
        for w in range(alg.nV):
            if vv[g][w] != vv[w][g]:
                return v, w
    return None


def check_identities(alg: ForestAlgebra, P: Powers | None = None) -> dict[str, tuple[bool, tuple | None]]:
    """Each derived identity, checked exhaustively, with a witness on failure."""
    P = P or powers(alg)
    hh, vv, vh = alg.hh, alg.vv, alg.vh
    eps = alg.eps
    rV, rH = range(alg.nV), range(alg.nH)

    def first(cases) -> tuple[bool, tuple | None]:
        for w in cases:
            return False, w
        return True, None

    return {
        "ZGh": first((h, g) for h in rH for g in rH
                     if hh[P.h_grp[h]][g] != hh[g][P.h_grp[h]]),
        "DISTv": first((v, w) for v in rV for w in rV
                       if P.v_idem[vv[v][w]] != vv[P.v_idem[v]][P.v_idem[w]]),
        "DISTh": first((h, g) for h in rH for g in rH
                       if P.h_idem[hh[h][g]] != hh[P.h_idem[h]][P.h_idem[g]]),
        "OUTh": first((v, h) for v in rV for h in rH
                      if vh[v][P.h_grp[h]] != hh[vh[v][eps]][P.h_grp[h]]),
        "OUTv": first((v, h) for v in rV for h in rH
                      if vh[P.v_grp[v]][h] != hh[vh[P.v_grp[v]][eps]][h]),
        "IDv": first((v,) for v in rV
                     if hh[vh[P.v_idem[v]][eps]][vh[P.v_idem[v]][eps]] != vh[P.v_idem[v]][eps]),
        "FLAT": first((v, h) for v in rV for h in rH
                      if P.h_idem[vh[v][h]] != hh[vh[P.v_idem[v]][eps]][P.h_idem[h]]),
    }


def is_zg(alg: ForestAlgebra) -> ZGReport:
    P = powers(alg)
    witness = check_zg_equation(alg, P)
    return ZGReport(witness is None, witness, check_identities(alg, P))


def is_almost_commutative(A: ForestAutomaton, cap: int | None = None) -> tuple[bool, ZGReport]:
    rec = syntactic_recognizer(A, cap)
    report = is_zg(rec.algebra)
    return report.is_zg, report


def render_report(rec: Recognizer, report: ZGReport) -> str:
    alg = rec.algebra
    lines = [f"ZG: {'yes' if report.is_zg else 'no'}"]
    if report.witness is not None:
        v, w = report.witness
        lines.append(f"witness: v = {alg.vname(v)}, w = {alg.vname(w)}"
                     f"  (v^(ω+1) w = {alg.vname(alg.vv[powers(alg).v_grp[v]][w])},"
                     f" w v^(ω+1) = {alg.vname(alg.vv[w][powers(alg).v_grp[v]])})")
    sorts = {"ZGh": "HH", "DISTv": "VV", "DISTh": "HH", "OUTh": "VH", "OUTv": "VH", "IDv": "V", "FLAT": "VH"}
    for name in IDENTITIES:
        ok, wit = report.identity_results[name]
        text = "pass" if ok else "fail"
        if wit is not None:
            names = [alg.vname(x) if s == "V" else alg.hname(x) for s, x in zip(sorts[name], wit)]
            text += "  witness: " + ", ".join(names)
        lines.append(f"{name:<6} {text}")
    return "\n".join(lines) + "\n"


# -- normal forms ----------------------------------------------------------------------

def xi_normal_form(F: Forest, m: int) -> Forest:
    """One line tree of ``m`` nodes per distinct letter of F, in first-occurrence order."""
    if m < 1:
        raise ValueError("m must be positive")
    seen = []
    for x in F.labels:
        if x != HOLE and x not in seen:
            seen.append(x)
    parts = [line_forest(F.alphabet, F.alphabet[x], m) for x in seen]
    return concat(*parts) if parts else Forest(F.alphabet, [], [])


def phi_normal_form(F: Forest, rec: Recognizer, N: int, m: int | None = None,
                    check: bool = True) -> Forest:
    """Frequent letters (count >= N) collapse to line trees of m + count mod m
    nodes; the rare letters keep their projection."""
    if N < 1:
        raise ValueError("N must be positive")
    if check and not is_zg(rec.algebra).is_zg:
        raise AlgebraError("phi_normal_form needs a ZG algebra")
    if m is None:
        m = idempotent_exponent(rec.algebra.vv)
    counts = parikh(F)
    frequent = [a for a in F.alphabet if counts[a] >= N]
    rare = [a for a in F.alphabet if counts[a] < N]
    parts = [line_forest(F.alphabet, a, m + counts[a] % m) for a in frequent]
    parts.append(project(F, rare))
    return concat(*parts)


# -- idempotent factors ------------------------------------------------------------------

@dataclass
class Decomposition:
    D: Forest          # outer context
    C: Forest          # the factor, a nonempty context with idempotent value
    G: Forest          # what C is applied to
    kind: str = ""     # 'wide' or 'path'

    def recompose(self) -> Forest:
        return plug_forest(self.D, plug_forest(self.C, self.G))


def _emit(F: Forest, top: Sequence, cut_children: int = NIL,
          block: tuple[int, int, int] | None = None) -> Forest:
    """Copy of the sub-forest spanned by the sibling list ``top``.

    Items of ``top`` are node ids or None for a hole.  The children of
    ``cut_children`` become a hole, and the sibling range ``block`` =
    (parent, first, last) collapses into a hole."""
    labels: list[int] = []
    parent: list[int] = []

    def siblings(p: int, nodes: list) -> list:
        if block is not None and block[0] == p:
            _, first, last = block
            i, j = nodes.index(first), nodes.index(last)
            return nodes[:i] + [None] + nodes[j + 1:]
        return nodes

    stack = [(x, NIL) for x in reversed(siblings(NIL, list(top)))]
    while stack:
        u, p = stack.pop()
        if u is None:
            labels.append(HOLE)
            parent.append(p)
            continue
        labels.append(F.labels[u])
        parent.append(p)
        me = len(labels) - 1
        kids = [None] if u == cut_children else siblings(u, F.children(u))
        stack.extend((c, me) for c in reversed(kids))
    return Forest(F.alphabet, labels, parent)


def _tree_values(rec: Recognizer, F: Forest) -> list[int]:
    alg = rec.algebra
    hh, vh, eps = alg.hh, alg.vh, alg.eps
    lm = {a: i for i, a in enumerate(rec.alphabet)}
    lmap = [lm[a] for a in F.alphabet]
    val = [0] * F.n
    for u in range(F.n - 1, -1, -1):
        s = eps
        c = F.first_child[u]
        while c != NIL:
            s = hh[s][val[c]]
            c = F.next_sibling[c]
        val[u] = vh[rec.assign[lmap[F.labels[u]]]][s]
    return val


def _idempotent_block(alg: ForestAlgebra, word: Sequence[int]) -> tuple[int, int] | None:
    vv = alg.vv
    for i in range(len(word)):
        p = alg.box
        for j in range(i, len(word)):
            p = vv[p][word[j]]
            if vv[p][p] == p:
                return i, j
    return None


def find_idempotent_factor(F: Forest, rec: Recognizer, t: int | None = None) -> Decomposition | None:
    """Search a sibling set wider than ``t`` for a block of trees whose
    context value is idempotent, then a root-leaf path longer than ``t``."""
    alg = rec.algebra
    if t is None:
        t = max(alg.nV, alg.nH)
    if F.n == 0:
        return None
    val = _tree_values(rec, F)
    box, hh = alg.box, alg.hh

    # wide case: C_i = G_i + box, blocks compose left to right
    groups = [(NIL, F.roots())] + [(u, F.children(u)) for u in range(F.n) if F.first_child[u] != NIL]
    for p, trees in groups:
        if len(trees) <= t:
            continue
        word = [alg.hpv[val[g]][box] for g in trees]
        found = _idempotent_block(alg, word)
        if found is None:
            continue
        i, j = found
        D = _emit(F, F.roots(), block=(p, trees[i], trees[j]))
        C = _emit(F, trees[i:j + 1] + [None])
        G = Forest(F.alphabet, [], [])
        return Decomposition(D, C, G, "wide")

    # path case: C_i = L_i + a_i(box) + R_i with L_i, R_i the siblings of u_i
    depth = [0] * F.n
    for u in range(F.n):
        depth[u] = 1 if F.parent[u] == NIL else depth[F.parent[u]] + 1
    leaves = sorted((u for u in range(F.n) if F.first_child[u] == NIL), key=lambda u: -depth[u])
    lm = {a: i for i, a in enumerate(rec.alphabet)}
    for leaf in leaves:
        if depth[leaf] <= t:
            break
        path = []
        u = leaf
        while u != NIL:
            path.append(u)
            u = F.parent[u]
        path.reverse()
        word = []
        for u in path:
            sibs = F.roots() if F.parent[u] == NIL else F.children(F.parent[u])
            k = sibs.index(u)
            left = right = alg.eps
            for s in sibs[:k]:
                left = hh[left][val[s]]
            for s in sibs[k + 1:]:
                right = hh[right][val[s]]
            a = rec.assign[lm[F.alphabet[F.labels[u]]]]
            word.append(alg.hpv[left][alg.vph[a][right]])
        found = _idempotent_block(alg, word)
        if found is None:
            continue
        i, j = found
        ui, uj = path[i], path[j]
        pi = F.parent[ui]
        sibs = F.roots() if pi == NIL else F.children(pi)
        D = _emit(F, F.roots(), block=(pi, sibs[0], sibs[-1]))
        C = _emit(F, sibs, cut_children=uj)
        G = _emit(F, F.children(uj))
        return Decomposition(D, C, G, "path")
    return None


def decomposition_ok(dec: Decomposition, F: Forest, rec: Recognizer) -> bool:
    if dec.C.n < 2:          # the bare hole is not a factor
        return False
    c = eval_context(rec, dec.C)
    return dec.recompose() == F and rec.algebra.vv[c][c] == c


def omega_h(alg: ForestAlgebra, h: int) -> int:
    return idempotent_power(alg.hh, h)


def xi_holds(rec: Recognizer, F: Forest, m: int | None = None) -> bool:
    """The idempotent normal-form lemma on one forest (vacuous unless mu(F) is idempotent)."""
    alg = rec.algebra
    m = idempotent_exponent(alg.vv) if m is None else m
    h = eval_morphism(rec, F)
    if alg.hh[h][h] != h:
        return True
    return eval_morphism(rec, xi_normal_form(F, m)) == h
