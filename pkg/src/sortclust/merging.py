"""Group merging criteria and connected-component extraction.

Two groups merge either when their starting points are within ``scale * R``
of each other (distance criterion) or when the data density inside the
intersection of their R-balls is at least the density inside the union
(density criterion). Clusters are the connected components of the resulting
graph on groups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .aggregation import Group
from .geometry import overlap_fraction
from .prep import PreparedData

# Relative factor for the slack added to score windows so that float rounding
# of the scores can never exclude a point whose distance passes the ball test.
_WINDOW_PAD_REL = 1e-9


@dataclass(frozen=True)
class MergeGraph:
    """Undirected graph on group indices; edges are merge decisions."""

    num_groups: int
    edges: list[tuple[int, int]]   # i < j, unique, lexicographically sorted


@dataclass(frozen=True, eq=False)
class GroupClusterMap:
    """Assignment of groups to contiguous cluster ids.

    Cluster ids are ordered by descending total point count, ties broken by
    the smallest contained group index. `sizes[c]` is the number of points in
    cluster c. Entries of -1 in `cluster_of_group` mark outlier groups (only
    produced by the "separate" outlier mode).
    """

    cluster_of_group: np.ndarray
    k: int
    sizes: np.ndarray


class DisjointSet:
    """Union-find with path compression and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def relabel_by_size(raw_ids, group_sizes) -> tuple[np.ndarray, np.ndarray]:
    """Map arbitrary cluster ids to contiguous ones ordered by point count.

    Heaviest cluster becomes id 0; ties go to the cluster containing the
    smallest group index. Ids equal to -1 pass through unchanged (outliers).
    Returns (new id per group, point count per new cluster id).
    """
    totals: dict[int, int] = {}
    first_group: dict[int, int] = {}
    for g, rid in enumerate(raw_ids):
        rid = int(rid)
        if rid == -1:
            continue
        totals[rid] = totals.get(rid, 0) + int(group_sizes[g])
        first_group.setdefault(rid, g)
    order = sorted(totals, key=lambda rid: (-totals[rid], first_group[rid]))
    new_id = {rid: c for c, rid in enumerate(order)}
    out = np.array([new_id[int(r)] if int(r) != -1 else -1 for r in raw_ids],
                   dtype=np.int64)
    sizes = np.array([totals[rid] for rid in order], dtype=np.int64)
    return out, sizes


def connected_components(graph: MergeGraph, group_sizes=None) -> GroupClusterMap:
    """Clusters = connected components of the merge graph.

    `group_sizes` gives the point count of each group (defaults to 1 each)
    and only affects the ordering of the resulting cluster ids.
    """
    l = graph.num_groups
    sizes = np.ones(l, dtype=np.int64) if group_sizes is None \
        else np.asarray(group_sizes, dtype=np.int64)
    dsu = DisjointSet(l)
    for i, j in graph.edges:
        dsu.union(i, j)
    roots = [dsu.find(g) for g in range(l)]
    cluster_of_group, cluster_sizes = relabel_by_size(roots, sizes)
    return GroupClusterMap(cluster_of_group=cluster_of_group,
                           k=len(cluster_sizes), sizes=cluster_sizes)


def _check_positive(r: float, name: str = "R") -> None:
    if not (isinstance(r, (int, float)) and math.isfinite(r) and r > 0.0):
        raise ValueError(f"{name} must be a positive finite number, got {r!r}")


def distance_merge(starting_scores, starting_points, r: float, scale: float = 1.5) -> MergeGraph:
    """Edge (i, j) iff the two starting points are within ``scale * r``.

    Starting points must be listed in score order; the scan from each i stops
    at the first successor whose score gap exceeds scale * r, which cannot
    skip a true edge because score gaps never exceed distances.
    """
    _check_positive(r)
    if not 1.0 <= scale <= 2.0:
        raise ValueError(f"scale must lie in [1, 2], got {scale!r}")
    sc = np.asarray(starting_scores, dtype=np.float64)
    pts = np.asarray(starting_points, dtype=np.float64)
    l = sc.size
    threshold = scale * r
    t_sq = threshold * threshold
    edges: list[tuple[int, int]] = []
    for i in range(l):
        end = int(np.searchsorted(sc, sc[i] + threshold, side="right"))
        if end <= i + 1:
            continue
        js = np.arange(i + 1, end)
        diff = pts[js] - pts[i]
        dist_sq = np.einsum("ij,ij->i", diff, diff)
        edges.extend((i, int(j)) for j in js[dist_sq <= t_sq])
    return MergeGraph(num_groups=l, edges=edges)


def density_pair_test(count_union: int, count_inter: int, dist: float,
                      r: float, d: int) -> bool:
    """Density criterion for one candidate pair of groups.

    Decides count_union / vol(union) <= count_inter / vol(intersection) with
    the common ball volume cancelled out, which keeps the comparison exact in
    any dimension (the raw volumes underflow for large d; their ratio does
    not). An empty intersection count can never witness shared density.
    """
    if count_inter == 0:
        return False
    frac = overlap_fraction(dist, r, d)
    return count_union * frac <= count_inter * (2.0 - frac)


def _ball_member_sets(centers, center_scores, prepared: PreparedData, r: float):
    """For each center, the sorted point indices within distance r of it.

    Candidate points are located through a padded score window before the
    exact distance check; the padding guarantees the window is a superset of
    the true ball membership despite float rounding of the scores.
    """
    scores = prepared.scores
    X = prepared.centered
    r_sq = r * r
    pad = _WINDOW_PAD_REL * (1.0 + float(np.max(np.abs(scores))) + r)
    members = []
    for c in range(centers.shape[0]):
        lo = int(np.searchsorted(scores, center_scores[c] - r - pad, side="left"))
        hi = int(np.searchsorted(scores, center_scores[c] + r + pad, side="right"))
        diff = X[lo:hi] - centers[c]
        dist_sq = np.einsum("ij,ij->i", diff, diff)
        members.append(lo + np.nonzero(dist_sq <= r_sq)[0])
    return members


def density_merge(groups: list[Group], prepared: PreparedData, r: float,
                  members_only: bool = False) -> MergeGraph:
    """Edge (i, j) iff the intersection of the two R-balls is at least as
    dense in data points as their union.

    Candidate pairs are limited to starting points whose score gap is at most
    2r (a larger gap proves the balls cannot overlap) and whose center
    distance is strictly below 2r. By default the point counts range over the
    whole dataset restricted geometrically to the union/intersection regions;
    `members_only=True` restricts them to the two groups' own members.
    """
    _check_positive(r)
    scores = prepared.scores
    X = prepared.centered
    l = len(groups)
    starts = np.array([g.start for g in groups], dtype=np.int64)
    centers = X[starts]
    cscores = scores[starts]
    four_r_sq = 4.0 * (r * r)
    r_sq = r * r

    if not members_only:
        in_ball = _ball_member_sets(centers, cscores, prepared, r)

    edges: list[tuple[int, int]] = []
    for i in range(l):
        end = int(np.searchsorted(cscores, cscores[i] + 2.0 * r, side="right"))
        if end <= i + 1:
            continue
        js = np.arange(i + 1, end)
        diff = centers[js] - centers[i]
        cdist_sq = np.einsum("ij,ij->i", diff, diff)
        for j, dsq in zip(js, cdist_sq):
            if not dsq < four_r_sq:
                continue
            j = int(j)
            if members_only:
                own = np.concatenate((groups[i].members, groups[j].members))
                di = np.einsum("ij,ij->i", X[own] - centers[i], X[own] - centers[i])
                dj = np.einsum("ij,ij->i", X[own] - centers[j], X[own] - centers[j])
                inside_i = di <= r_sq
                inside_j = dj <= r_sq
                count_union = int(np.count_nonzero(inside_i | inside_j))
                count_inter = int(np.count_nonzero(inside_i & inside_j))
            else:
                bi, bj = in_ball[i], in_ball[j]
                count_inter = np.intersect1d(bi, bj, assume_unique=True).size
                count_union = bi.size + bj.size - count_inter
            if density_pair_test(count_union, count_inter, math.sqrt(dsq), r, prepared.d):
                edges.append((i, j))
    return MergeGraph(num_groups=l, edges=edges)
