"""Cluster-level post-processing and the fitted model artifact.

`fit` runs the whole pipeline (prepare, aggregate, merge, minimum-cluster-size
rule) and returns an immutable :class:`ClusterModel`. The model supports
out-of-sample prediction, explanation queries, and JSON round-tripping.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .aggregation import Group, aggregate
from .merging import (GroupClusterMap, connected_components, density_merge,
                      distance_merge, relabel_by_size)
from .prep import PreparedData, prepare

MODEL_FORMAT_VERSION = 1

MERGE_MODES = ("distance", "density")
OUTLIER_MODES = ("reassign", "separate")

_PREDICT_CHUNK = 2048


@dataclass(frozen=True)
class FitConfig:
    """User-chosen parameters of a fit."""

    radius: float = 0.5
    minpts: int = 0
    scale: float = 1.5
    merge_mode: str = "distance"
    outlier_mode: str = "reassign"

    def validate(self) -> None:
        if not (isinstance(self.radius, (int, float)) and math.isfinite(self.radius)
                and self.radius > 0.0):
            raise ValueError(f"radius must be positive and finite, got {self.radius!r}")
        if int(self.minpts) != self.minpts or self.minpts < 0:
            raise ValueError(f"minpts must be a nonnegative integer, got {self.minpts!r}")
        if not 1.0 <= self.scale <= 2.0:
            raise ValueError(f"scale must lie in [1, 2], got {self.scale!r}")
        if self.merge_mode not in MERGE_MODES:
            raise ValueError(f"merge_mode must be one of {MERGE_MODES}")
        if self.outlier_mode not in OUTLIER_MODES:
            raise ValueError(f"outlier_mode must be one of {OUTLIER_MODES}")


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """Everything a fit produced, frozen.

    Geometry is stored in centered coordinates; `mean` recovers raw space.
    `group_members` lists original row indices per group (ascending), and
    `labels` is the per-point cluster assignment in original row order, with
    -1 marking outliers in "separate" mode.
    """

    config: FitConfig
    mean: np.ndarray
    v1: np.ndarray
    mext: float
    r: float                              # effective aggregation radius
    starting_points: np.ndarray           # (l, d) centered coordinates
    starting_scores: np.ndarray           # (l,)
    group_members: list[np.ndarray]       # original row ids per group
    group_cluster: np.ndarray             # (l,) cluster id per group, -1 = outlier
    cluster_sizes: np.ndarray             # (k,) point counts per cluster id
    merge_edges: list[tuple[int, int]]
    point_group: np.ndarray               # (n,) original row -> group id
    dist_count: int
    n: int
    d: int

    @property
    def num_groups(self) -> int:
        return len(self.group_members)

    @property
    def num_clusters(self) -> int:
        return int(self.cluster_sizes.size)

    @property
    def labels(self) -> np.ndarray:
        return self.group_cluster[self.point_group]

    @property
    def avg_dist_pp(self) -> float:
        return self.dist_count / self.n


def effective_radius(radius: float, mext: float) -> float:
    """Absolute aggregation radius; falls back to the raw radius when the
    data is degenerate (mext = 0)."""
    return radius * mext if mext > 0.0 else radius


def apply_minpts(cluster_map: GroupClusterMap, groups: list[Group],
                 starting_points, minpts: int,
                 mode: str = "reassign") -> tuple[GroupClusterMap, np.ndarray]:
    """Apply the minimum-cluster-size rule.

    reassign: every group in a cluster with fewer than `minpts` points moves
    to the cluster of the nearest starting point (ties: smallest group index)
    whose cluster has at least `minpts` points; eligibility uses the sizes
    before any reassignment. If no cluster is large enough, nothing changes.

    separate: points of too-small clusters are labelled -1 and surviving
    clusters are renumbered contiguously.

    Returns the updated map and a per-point label vector in the index space
    used by the groups' member lists.
    """
    if mode not in OUTLIER_MODES:
        raise ValueError(f"mode must be one of {OUTLIER_MODES}")
    group_sizes = np.array([g.size for g in groups], dtype=np.int64)
    assignment = cluster_map.cluster_of_group

    def labels_for(ids: np.ndarray) -> np.ndarray:
        labels = np.empty(int(group_sizes.sum()), dtype=np.int64)
        for g, grp in enumerate(groups):
            labels[grp.members] = ids[g]
        return labels

    small = cluster_map.sizes < minpts
    if minpts <= 1 or not small.any():
        return cluster_map, labels_for(assignment)

    if mode == "reassign":
        eligible_clusters = ~small
        if not eligible_clusters.any():
            return cluster_map, labels_for(assignment)
        pts = np.asarray(starting_points, dtype=np.float64)
        eligible_groups = np.nonzero(eligible_clusters[assignment])[0]
        eligible_pts = pts[eligible_groups]
        raw = assignment.copy()
        for g in np.nonzero(small[assignment])[0]:
            diff = eligible_pts - pts[g]
            dist_sq = np.einsum("ij,ij->i", diff, diff)
            target = eligible_groups[int(np.argmin(dist_sq))]
            raw[g] = assignment[target]
        new_ids, sizes = relabel_by_size(raw, group_sizes)
    else:
        raw = assignment.copy()
        raw[small[assignment]] = -1
        new_ids, sizes = relabel_by_size(raw, group_sizes)

    new_map = GroupClusterMap(cluster_of_group=new_ids, k=len(sizes), sizes=sizes)
    return new_map, labels_for(new_ids)


def fit(data, radius: float = 0.5, minpts: int = 0, scale: float = 1.5,
        merge_mode: str = "distance", outlier_mode: str = "reassign",
        extent: str = "norms") -> ClusterModel:
    """Cluster `data` (n x d matrix) and return the fitted model.

    `radius` is unit-free; the absolute grouping threshold is
    radius * median extend of the data.
    """
    config = FitConfig(radius=float(radius), minpts=int(minpts), scale=float(scale),
                       merge_mode=merge_mode, outlier_mode=outlier_mode)
    config.validate()
    prepared = prepare(data, extent=extent)
    return _fit_prepared(prepared, config)


def _fit_prepared(prepared: PreparedData, config: FitConfig) -> ClusterModel:
    r = effective_radius(config.radius, prepared.mext)
    groups, stats = aggregate(prepared, r)
    starts = np.array([g.start for g in groups], dtype=np.int64)
    starting_points = prepared.centered[starts]
    starting_scores = prepared.scores[starts]

    if config.merge_mode == "distance":
        graph = distance_merge(starting_scores, starting_points, r, config.scale)
    else:
        graph = density_merge(groups, prepared, r)

    group_sizes = [g.size for g in groups]
    merged = connected_components(graph, group_sizes)
    final_map, labels_sorted = apply_minpts(merged, groups, starting_points,
                                            config.minpts, config.outlier_mode)

    n = prepared.n
    point_group_sorted = np.empty(n, dtype=np.int64)
    for gid, g in enumerate(groups):
        point_group_sorted[g.members] = gid
    point_group = np.empty(n, dtype=np.int64)
    point_group[prepared.perm] = point_group_sorted
    group_members = [np.sort(prepared.perm[g.members]) for g in groups]

    return ClusterModel(
        config=config,
        mean=prepared.mean.copy(),
        v1=prepared.v1.copy(),
        mext=prepared.mext,
        r=r,
        starting_points=starting_points.copy(),
        starting_scores=starting_scores.copy(),
        group_members=group_members,
        group_cluster=final_map.cluster_of_group,
        cluster_sizes=final_map.sizes,
        merge_edges=list(graph.edges),
        point_group=point_group,
        dist_count=stats.dist_count,
        n=n,
        d=prepared.d,
    )


def predict(model: ClusterModel, new_points) -> np.ndarray:
    """Assign each query point the cluster of its nearest starting point.

    Queries are centered with the model's stored mean; the model's scaling is
    frozen, no statistic is re-estimated. Distance ties go to the smallest
    group index. Groups marked as outliers (separate mode) are skipped unless
    the model has no surviving cluster at all, in which case -1 is returned.
    """
    q = np.asarray(new_points, dtype=np.float64)
    if q.ndim != 2:
        raise ValueError("query points must form a 2-D matrix")
    if q.shape[1] != model.d:
        raise ValueError(f"query dimension {q.shape[1]} != model dimension {model.d}")
    if not np.all(np.isfinite(q)):
        raise ValueError("query contains non-finite values")
    centered = q - model.mean
    eligible = np.nonzero(model.group_cluster >= 0)[0]
    if eligible.size == 0:
        return np.full(q.shape[0], -1, dtype=np.int64)
    pts = model.starting_points[eligible]
    out = np.empty(q.shape[0], dtype=np.int64)
    for lo in range(0, q.shape[0], _PREDICT_CHUNK):
        chunk = centered[lo:lo + _PREDICT_CHUNK]
        dist_sq = (np.einsum("ij,ij->i", chunk, chunk)[:, None]
                   - 2.0 * chunk @ pts.T
                   + np.einsum("ij,ij->i", pts, pts)[None, :])
        nearest = eligible[np.argmin(dist_sq, axis=1)]
        out[lo:lo + _PREDICT_CHUNK] = model.group_cluster[nearest]
    return out


def to_json(model: ClusterModel) -> str:
    """Serialize the model to a single JSON document.

    Floats are written with full round-trip precision. `merge_edges` is an
    extension field beyond the minimum schema so that pair explanations work
    on reloaded density-merged models, where the graph cannot be recomputed
    without the training data.
    """
    doc = {
        "version": MODEL_FORMAT_VERSION,
        "config": {
            "radius": model.config.radius,
            "minPts": model.config.minpts,
            "scale": model.config.scale,
            "merge_mode": model.config.merge_mode,
            "outlier_mode": model.config.outlier_mode,
        },
        "mean": model.mean.tolist(),
        "v1": model.v1.tolist(),
        "mext": model.mext,
        "starting_points": model.starting_points.tolist(),
        "starting_scores": model.starting_scores.tolist(),
        "group_members": [m.tolist() for m in model.group_members],
        "group_cluster": model.group_cluster.tolist(),
        "cluster_sizes": model.cluster_sizes.tolist(),
        "merge_edges": [list(e) for e in model.merge_edges],
        "stats": {"dist_count": model.dist_count, "n": model.n, "d": model.d},
    }
    return json.dumps(doc)


def from_json(text: str) -> ClusterModel:
    """Rebuild a model from its JSON document."""
    doc = json.loads(text)
    if doc.get("version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')!r}")
    cfg = doc["config"]
    config = FitConfig(radius=float(cfg["radius"]), minpts=int(cfg["minPts"]),
                       scale=float(cfg["scale"]), merge_mode=cfg["merge_mode"],
                       outlier_mode=cfg["outlier_mode"])
    config.validate()
    stats = doc["stats"]
    n, d = int(stats["n"]), int(stats["d"])
    group_members = [np.asarray(m, dtype=np.int64) for m in doc["group_members"]]
    group_cluster = np.asarray(doc["group_cluster"], dtype=np.int64)
    point_group = np.empty(n, dtype=np.int64)
    for gid, members in enumerate(group_members):
        point_group[members] = gid
    mext = float(doc["mext"])
    return ClusterModel(
        config=config,
        mean=np.asarray(doc["mean"], dtype=np.float64),
        v1=np.asarray(doc["v1"], dtype=np.float64),
        mext=mext,
        r=effective_radius(config.radius, mext),
        starting_points=np.asarray(doc["starting_points"], dtype=np.float64),
        starting_scores=np.asarray(doc["starting_scores"], dtype=np.float64),
        group_members=group_members,
        group_cluster=group_cluster,
        cluster_sizes=np.asarray(doc["cluster_sizes"], dtype=np.int64),
        merge_edges=[(int(i), int(j)) for i, j in doc["merge_edges"]],
        point_group=point_group,
        dist_count=int(stats["dist_count"]),
        n=n,
        d=d,
    )


def save_model(model: ClusterModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(to_json(model))
        fh.write("\n")


def load_model(path) -> ClusterModel:
    with open(path, "r", encoding="utf-8") as fh:
        return from_json(fh.read())
