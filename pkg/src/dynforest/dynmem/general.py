"""The general maintainer: a tower of cluster forests over a tabulated index.

Level 0 is the input forest mapped into the syntactic forest algebra.  Each
level is clustered with a saturated k-clustering and contracted into its
forest of clusters, labeled by the evaluations of the induced subforests,
until a single node remains.  Every cluster's induced subforest is held by
one handle of a shared SmallForestIndex, so an update costs one relabel and
one lookup per level.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from ..algebra import Recognizer, eval_vh_codes, minimize_to_syntactic, transition_algebra
from ..automaton import ForestAutomaton
from ..cluster import Clustering, ClusterForest, build_cluster_forest, saturate
from ..forest import NIL, Forest
from ..tabulation import Handle, SmallForestIndex
from .base import Maintainer, forest_letter_map

K_MIN, K_MAX = 2, 24


def algebra_constant(nV: int, nH: int) -> int:
    return max(1, math.ceil(math.log2(4 * (nV + nH))))


def default_k(n: int, nV: int, nH: int) -> int:
    if n < 2:
        return K_MIN
    k = int(math.log2(n) // algebra_constant(nV, nH))
    return min(K_MAX, max(K_MIN, k))


def level_bound(n: int, k: int) -> float:
    """Allowed number of levels: 2 log n / log k + 3."""
    return 2 * math.log2(max(n, 2)) / math.log2(k) + 3


@dataclass
class Level:
    forest: Forest                 # VH-forest at this level (labels are codes)
    clustering: Clustering
    clusters: ClusterForest
    handles: list[Handle]


class GeneralMaintainer(Maintainer):
    strategy = "general"

    def __init__(self, A: ForestAutomaton, F: Forest, k: int | None = None,
                 rec: Recognizer | None = None, eager: bool = False):
        super().__init__(A.alphabet, F.n)
        if rec is None:
            rec = minimize_to_syntactic(transition_algebra(A), names=False)
        self.rec = rec
        alg = self.alg = rec.algebra
        nV = self.nV = alg.nV
        self.k = default_k(F.n, nV, alg.nH) if k is None else k
        if self.k < 2:
            raise ValueError("k must be at least 2, smaller clusters cannot shrink a level")
        lm = forest_letter_map(F.alphabet, rec.alphabet)
        self._internal_code = list(rec.assign)
        self._leaf_code = [nV + alg.vh[v][alg.eps] for v in rec.assign]
        self._is_leaf = [fc == NIL for fc in F.first_child]
        codes = [self._leaf_code[lm[x]] if self._is_leaf[u] else self._internal_code[lm[x]]
                 for u, x in enumerate(F.labels)]
        calpha = alg.code_alphabet()
        self.index = SmallForestIndex(alg, self.k, eager=eager)
        self.levels: list[Level] = []
        work = F.n
        cur = F.with_labels(codes, alphabet=calpha)
        box = alg.code_v(alg.box)
        add = self.index.add_labels
        while cur.n > 1:
            cl = saturate(cur, self.k)
            cf = build_cluster_forest(cur, cl)
            m = len(cf.members)
            if m >= cur.n:
                raise RuntimeError(f"clustering failed to shrink a level of {cur.n} nodes")
            lab = cur.labels
            handles = []
            nxt_codes = []
            for c, C in enumerate(cf.members):
                labels = [lab[u] for u in C]
                h = cf.hole_index[c]
                if h != NIL:
                    labels.insert(h, box)
                hd = add(tuple(cf.sub_parent[c]), tuple(labels))
                handles.append(hd)
                nxt_codes.append(self.index.eval(hd))
            work += cl.work + cf.work + cur.n
            self.levels.append(Level(cur, cl, cf, handles))
            cur = Forest(calpha, nxt_codes, cf.forest.parent)
        self.top = cur
        self.build_work = work
        self.touched_levels = 0
        self.member = self._top_bit()

    @property
    def depth(self) -> int:
        """Number of cluster levels (the recursion depth)."""
        return len(self.levels)

    def level_sizes(self) -> list[int]:
        return [lv.forest.n for lv in self.levels] + [self.top.n]

    def _top_bit(self) -> bool:
        if self.top.n == 0:
            return self.alg.eps in self.rec.accepting
        return self.top.labels[0] - self.nV in self.rec.accepting

    def update(self, u: int, a: str | int) -> bool:
        self.check_node(u)
        x = self.letter_id(a)
        code = self._leaf_code[x] if self._is_leaf[u] else self._internal_code[x]
        index = self.index
        touched = 0
        for lv in self.levels:
            lv.forest.labels[u] = code
            cf = lv.clusters
            c = cf.cluster_of[u]
            hd = lv.handles[c]
            index.relabel(hd, cf.local_index[u], code)
            code = index.eval(hd)
            u = c
            touched += 1
        self.top.labels[0] = code
        self.touched_levels = touched
        self.member = self._top_bit()
        self._count(touched)
        return self.member

    # -- checks ---------------------------------------------------------------------
    def check_level(self, i: int) -> bool:
        """Re-evaluate every induced subforest of level i from scratch and
        compare with the labels stored one level up."""
        lv = self.levels[i]
        above = self.levels[i + 1].forest if i + 1 < len(self.levels) else self.top
        box = self.alg.code_v(self.alg.box)
        for c in range(len(lv.clusters.members)):
            G = lv.clusters.induced(lv.forest, c, box)
            if eval_vh_codes(self.alg, G) != above.labels[c]:
                return False
        return True

    def check_all_levels(self) -> bool:
        return all(self.check_level(i) for i in range(len(self.levels)))


def build_general(A: ForestAutomaton, F: Forest, k: int | None = None, **kw) -> GeneralMaintainer:
    return GeneralMaintainer(A, F, k, **kw)


def gm_update(m: GeneralMaintainer, u: int, a: str | int) -> bool:
    return m.update(u, a)
