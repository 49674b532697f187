"""Saturated k-clusterings and the forest of clusters.

A k-clustering partitions the nodes into clusters that are connected for the
first-child / next-sibling adjacency, have at most k nodes and at most one
border node (a node with a child outside the cluster).  It is saturated when
no two clusters can be merged into a valid cluster.

The clustering is stored as two bits per node: merged with first child,
merged with next sibling.  Scratch fields (size, has-border, missing-sibling)
are only meaningful at cluster representatives, the first node of each
cluster in prefix order.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .forest import NIL, Forest

BOUND_CONSTANT = 14


@dataclass
class Clustering:
    k: int
    merged_fc: list[bool]
    merged_ns: list[bool]
    size: list[int]
    has_border: list[bool]
    missing_sibling: list[bool]
    work: int = 0

    @property
    def n(self) -> int:
        return len(self.size)

    def cluster_ids(self, F: Forest) -> tuple[list[int], list[int]]:
        """(cluster id per node, representative per cluster id); ids follow
        the prefix order of representatives."""
        cid = [0] * F.n
        reps: list[int] = []
        parent, prev = F.parent, F.prev_sibling
        for u in range(F.n):
            p, s = parent[u], prev[u]
            if s != NIL and self.merged_ns[s]:
                cid[u] = cid[s]
            elif s == NIL and p != NIL and self.merged_fc[p]:
                cid[u] = cid[p]
            else:
                cid[u] = len(reps)
                reps.append(u)
        return cid, reps

    def clusters(self, F: Forest) -> list[list[int]]:
        cid, reps = self.cluster_ids(F)
        out: list[list[int]] = [[] for _ in reps]
        for u in range(F.n):
            out[cid[u]].append(u)
        return out

    def count(self, F: Forest) -> int:
        return len(self.cluster_ids(F)[1])


def trivial_clustering(F: Forest, k: int = 1) -> Clustering:
    n = F.n
    return Clustering(k, [False] * n, [False] * n, [1] * n,
                      [F.first_child[u] != NIL for u in range(n)],
                      [F.next_sibling[u] != NIL for u in range(n)])


def mergeable(F: Forest, cl: Clustering, r1: int, r2: int) -> bool:
    """O(1) test for the two merge shapes the algorithm uses: r2 the first
    child of the singleton cluster {r1}, or r2 the next sibling of r1 with
    the cluster of r1 made of r1 and its descendants."""
    k = cl.k
    if F.first_child[r1] == r2:
        # the child cluster must hold every child of r1 when it has a border,
        # otherwise the merge would create a second border node
        return cl.size[r2] + cl.size[r1] <= k and not (cl.has_border[r2] and cl.missing_sibling[r2])
    if F.next_sibling[r1] == r2:
        return cl.size[r1] + cl.size[r2] <= k and not (cl.has_border[r1] and cl.has_border[r2])
    raise ValueError("mergeable is only defined for first-child and next-sibling pairs")


def saturate(F: Forest, k: int, rng: random.Random | None = None, p_merge: float = 1.0) -> Clustering:
    """Saturated k-clustering in one bottom-up pass.

    Every node is processed after all of its descendants and all of its
    later siblings (reverse prefix order); processing u tries to merge {u}
    with the cluster of its first child and then with the cluster of its
    next sibling.  With ``rng`` each merge is only attempted with
    probability ``p_merge``, which yields valid but unsaturated clusterings
    for testing."""
    if k < 1:
        raise ValueError("k must be at least 1")
    cl = trivial_clustering(F, k)
    fc, ns = F.first_child, F.next_sibling
    size, hb, ms = cl.size, cl.has_border, cl.missing_sibling
    mfc, mns = cl.merged_fc, cl.merged_ns
    work = 0
    for u in range(F.n - 1, -1, -1):
        work += 1
        c = fc[u]
        if c != NIL and size[c] + 1 <= k and not (hb[c] and ms[c]):
            if rng is None or rng.random() < p_merge:
                mfc[u] = True
                size[u] += size[c]
                hb[u] = hb[c] or ms[c]
        s = ns[u]
        if s != NIL and size[u] + size[s] <= k and not (hb[u] and hb[s]):
            if rng is None or rng.random() < p_merge:
                mns[u] = True
                size[u] += size[s]
                hb[u] = hb[u] or hb[s]
                ms[u] = ms[s]
    cl.work = work
    return cl


# -- checkers ---------------------------------------------------------------------------

@dataclass
class CheckResult:
    ok: bool
    reason: str = ""
    witness: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


def _border_nodes(F: Forest, members: set[int]) -> list[int]:
    out = []
    for x in members:
        c = F.first_child[x]
        while c != NIL:
            if c not in members:
                out.append(x)
                break
            c = F.next_sibling[c]
    return out


def _lcrs_connected(F: Forest, members: set[int]) -> bool:
    if not members:
        return True
    start = next(iter(members))
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for y in (F.first_child[x], F.next_sibling[x], F.prev_sibling[x],
                  F.parent[x] if F.prev_sibling[x] == NIL else NIL):
            if y != NIL and y in members and y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == len(members)


def check_valid(F: Forest, k: int, clusters: list[list[int]]) -> CheckResult:
    """Validity of a partition as a k-clustering, by direct definition."""
    covered = sorted(u for C in clusters for u in C)
    if covered != list(range(F.n)):
        return CheckResult(False, "not a partition of the nodes")
    for C in clusters:
        s = set(C)
        if len(C) > k:
            return CheckResult(False, "cluster too large", (min(C), len(C)))
        if not _lcrs_connected(F, s):
            return CheckResult(False, "cluster not LCRS-connected", (min(C),))
        b = _border_nodes(F, s)
        if len(b) > 1:
            return CheckResult(False, "two border nodes", (min(C), *sorted(b)))
    return CheckResult(True)


def is_saturated(F: Forest, k: int, cl: Clustering) -> CheckResult:
    """Validity plus non-mergeability of every LCRS-adjacent pair of clusters
    (quadratic; a test oracle)."""
    clusters = cl.clusters(F)
    res = check_valid(F, k, clusters)
    if not res:
        return res
    cid, _ = cl.cluster_ids(F)
    for u in range(F.n):
        for v in (F.first_child[u], F.next_sibling[u]):
            if v == NIL or cid[u] == cid[v]:
                continue
            union = set(clusters[cid[u]]) | set(clusters[cid[v]])
            if len(union) <= k and len(_border_nodes(F, union)) <= 1:
                return CheckResult(False, "mergeable pair", (clusters[cid[u]][0], clusters[cid[v]][0]))
    return CheckResult(True)


def size_bound(n: int, k: int) -> int:
    return -(-BOUND_CONSTANT * n // k)


# -- forest of clusters -------------------------------------------------------------------

@dataclass
class ClusterForest:
    forest: Forest                     # one node per cluster, ids = cluster ids
    cluster_of: list[int]              # node -> cluster id
    local_index: list[int]             # node -> index inside its induced subforest
    members: list[list[int]]           # cluster id -> nodes in prefix order
    border: list[int]                  # cluster id -> border node or NIL
    hole_index: list[int]              # cluster id -> index of the appended box leaf, or NIL
    sub_parent: list[list[int]]        # cluster id -> parent array of the induced subforest
    work: int = 0

    def induced(self, F: Forest, c: int, box_code: int) -> Forest:
        """Induced VH-subforest of cluster ``c`` with labels copied from F."""
        labels = [F.labels[u] for u in self.members[c]]
        h = self.hole_index[c]
        if h != NIL:
            labels.insert(h, box_code)
        return Forest(F.alphabet, labels, self.sub_parent[c])

    def node_of_cluster(self, c: int) -> int:
        return c


def build_cluster_forest(F: Forest, cl: Clustering) -> ClusterForest:
    cid, reps = cl.cluster_ids(F)
    m = len(reps)
    members: list[list[int]] = [[] for _ in range(m)]
    local = [0] * F.n
    for u in range(F.n):
        C = members[cid[u]]
        local[u] = len(C)
        C.append(u)
    parent = F.parent
    border = [NIL] * m
    cparent = [NIL] * m
    for c, r in enumerate(reps):
        p = parent[r]
        if p != NIL:
            pc = cid[p]
            if border[pc] != NIL and border[pc] != p:
                raise ValueError(f"cluster with representative {reps[pc]} has two border nodes")
            border[pc] = p
            cparent[c] = pc
    end = F.subtree_end()
    hole = [NIL] * m
    sub_parent: list[list[int]] = []
    work = F.n
    for c in range(m):
        C = members[c]
        b = border[c]
        h = NIL
        if b != NIL:
            i = local[b] + 1
            while i < len(C) and C[i] <= end[b]:
                i += 1
            h = i
        sp = []
        for u in C:
            p = parent[u]
            lp = local[p] if p != NIL and cid[p] == c else NIL
            if h != NIL and lp >= h:
                lp += 1
            sp.append(lp)
        if h != NIL:
            sp.insert(h, local[b])
        sub_parent.append(sp)
        hole[c] = h
        work += len(C)
    forest = Forest(("c",), [0] * m, cparent)
    local_idx = [local[u] + (1 if hole[cid[u]] != NIL and local[u] >= hole[cid[u]] else 0)
                 for u in range(F.n)]
    return ClusterForest(forest, cid, local_idx, members, border, hole, sub_parent, work)


def dump_clustering(F: Forest, cl: Clustering) -> str:
    cf = build_cluster_forest(F, cl)
    lines = []
    for c, C in enumerate(cf.members):
        lines.append(f"repr={C[0]} size={len(C)} border={int(cf.border[c] != NIL)} "
                     f"nodes={','.join(map(str, C))}")
    return "\n".join(lines) + ("\n" if lines else "")


def evaluate_cluster_forest(alg, F: Forest, cf: ClusterForest) -> Forest:
    """The cluster forest labeled by the evaluation of each induced subforest."""
    from .algebra import eval_vh_codes
    codes = [eval_vh_codes(alg, cf.induced(F, c, alg.code_v(alg.box)), check=False)
             for c in range(len(cf.members))]
    return cf.forest.with_labels(codes, alphabet=F.alphabet)
