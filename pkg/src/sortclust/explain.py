"""Textual explanations of a fitted clustering.

Three report kinds: a fit summary, the assignment of one point, and the
group path connecting two points. Each report carries a machine-readable
payload; the text is rendered from that payload alone, so identical payloads
always produce byte-identical text. Templates are versioned through
TEXT_VERSION.
"""

from __future__ import annotations

import heapq
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .postprocess import ClusterModel

TEXT_VERSION = 1


@dataclass(frozen=True, eq=False)
class ExplainReport:
    kind: str          # "summary" | "point" | "pair"
    text: str
    structured: dict


def _check_index(model: ClusterModel, index: int, name: str = "index") -> int:
    if int(index) != index or not 0 <= index < model.n:
        raise ValueError(f"{name} must be an integer in [0, {model.n - 1}], got {index!r}")
    return int(index)


def _cluster_phrase(cluster: int) -> str:
    return f"cluster #{cluster}" if cluster >= 0 else "the outliers"


def explain_summary(model: ClusterModel) -> ExplainReport:
    """Summary of the whole fit: parameters, work counters, groups, clusters."""
    raw_starts = model.starting_points + model.mean
    ncoord = min(model.d, 2)
    group_rows = [{
        "group": g,
        "num_points": int(model.group_members[g].size),
        "cluster": int(model.group_cluster[g]),
        "coordinates": [round(float(c), 2) for c in raw_starts[g, :ncoord]],
    } for g in range(model.num_groups)]
    outlier_points = int(model.n - model.cluster_sizes.sum())
    payload = {
        "kind": "summary",
        "text_version": TEXT_VERSION,
        "n": model.n,
        "d": model.d,
        "radius": model.config.radius,
        "minpts": model.config.minpts,
        "mext": model.mext,
        "r": model.r,
        "dist_count": model.dist_count,
        "avg_dist_pp": model.avg_dist_pp,
        "num_groups": model.num_groups,
        "num_clusters": model.num_clusters,
        "cluster_sizes": [int(s) for s in model.cluster_sizes],
        "outlier_points": outlier_points,
        "groups": group_rows,
    }
    return ExplainReport(kind="summary", text=_render_summary(payload),
                         structured=payload)


def _render_summary(p: dict) -> str:
    lines = [
        f"A clustering of {p['n']} data points with {p['d']} features has been performed.",
        f"The radius parameter was set to {p['radius']:.2f} and minPts was set to {p['minpts']}.",
    ]
    if p["mext"] > 0.0:
        lines.append(
            f"As the provided data has been scaled by a factor of 1/{p['mext']:.2f}, "
            f"data points within a radius of R={p['radius']:.2f}*{p['mext']:.2f}={p['r']:.2f} "
            f"were aggregated into groups."
        )
    else:
        lines.append(
            f"The data has no spread along its principal direction, so data points "
            f"within a radius of R={p['r']:.2f} were aggregated into groups."
        )
    lines.append(
        f"In total {p['dist_count']} comparisons were required "
        f"({p['avg_dist_pp']:.2f} comparisons per data point)."
    )
    lines.append(
        f"This resulted in {p['num_groups']} groups, each uniquely associated "
        f"with a starting point."
    )
    lines.append(
        f"These {p['num_groups']} groups were subsequently merged into "
        f"{p['num_clusters']} clusters with the following sizes:"
    )
    for c, size in enumerate(p["cluster_sizes"]):
        lines.append(f"* cluster {c} : {size}")
    if p["outlier_points"]:
        lines.append(f"* outliers : {p['outlier_points']}")
    lines.append("A list of all starting points is shown below.")
    lines.append("-----")
    lines.append(" Group  NrPts  Cluster  Coordinates")
    for row in p["groups"]:
        coords = " ".join(f"{c:.2f}" for c in row["coordinates"])
        lines.append(f"{row['group']:>6d} {row['num_points']:>6d} "
                     f"{row['cluster']:>8d}  {coords}")
    lines.append("-----")
    lines.append("In order to explain the clustering of individual data points, "
                 "use explain(index) or explain(index1, index2) with indices of "
                 "the data points.")
    return "\n".join(lines)


def explain_point(model: ClusterModel, index: int) -> ExplainReport:
    """Which group and cluster one data point belongs to."""
    index = _check_index(model, index)
    group = int(model.point_group[index])
    cluster = int(model.group_cluster[group])
    payload = {
        "kind": "point",
        "text_version": TEXT_VERSION,
        "index": index,
        "group": group,
        "cluster": cluster,
    }
    text = (f"The data point {index} is in group {group}, which has been merged "
            f"into {_cluster_phrase(cluster)}.")
    return ExplainReport(kind="point", text=text, structured=payload)


def _shortest_group_path(model: ClusterModel, start: int, goal: int):
    """Minimum-weight group path in the merge graph (weights = starting-point
    distances); among equal-weight paths the lexicographically smallest
    sequence of group ids wins."""
    if start == goal:
        return [start]
    adjacency = defaultdict(list)
    pts = model.starting_points
    for i, j in model.merge_edges:
        w = float(math.sqrt(np.sum((pts[i] - pts[j]) ** 2)))
        adjacency[i].append((j, w))
        adjacency[j].append((i, w))
    heap = [(0.0, (start,))]
    settled: set[int] = set()
    while heap:
        dist, path = heapq.heappop(heap)
        node = path[-1]
        if node == goal:
            return list(path)
        if node in settled:
            continue
        settled.add(node)
        for nxt, w in adjacency[node]:
            if nxt not in settled:
                heapq.heappush(heap, (dist + w, path + (nxt,)))
    return None


def explain_pair(model: ClusterModel, first: int, second: int) -> ExplainReport:
    """Why two points share a cluster (via a group path) or do not."""
    first = _check_index(model, first, "first index")
    second = _check_index(model, second, "second index")
    g1 = int(model.point_group[first])
    g2 = int(model.point_group[second])
    c1 = int(model.group_cluster[g1])
    c2 = int(model.group_cluster[g2])
    same = c1 == c2 and c1 >= 0
    path = _shortest_group_path(model, g1, g2) if same else None
    path_text = " <-> ".join(str(g) for g in path) if path is not None else None
    payload = {
        "kind": "pair",
        "text_version": TEXT_VERSION,
        "first_index": first,
        "second_index": second,
        "first_group": g1,
        "second_group": g2,
        "first_cluster": c1,
        "second_cluster": c2,
        "same_cluster": same,
        "path": path,
        "path_text": path_text,
    }
    if same:
        text = (f"The data point {first} is in group {g1} and the data point "
                f"{second} is in group {g2}, both of which were merged into "
                f"cluster #{c1}. These two groups are connected via groups "
                f"{path_text}.")
    else:
        text = (f"The data point {first} is in group {g1}, which belongs to "
                f"{_cluster_phrase(c1)}. The data point {second} is in group "
                f"{g2}, which belongs to {_cluster_phrase(c2)}. There is no "
                f"connection between them.")
    return ExplainReport(kind="pair", text=text, structured=payload)


def fit_stats_text(model: ClusterModel) -> str:
    """Short fit report: group and cluster counts plus the comparison counters."""
    lines = [
        f"The {model.n} data points with {model.d} features were aggregated "
        f"into {model.num_groups} groups.",
        f"In total {model.dist_count} comparisons were required "
        f"({model.avg_dist_pp:.2f} comparisons per data point).",
        f"The {model.num_groups} groups were merged into {model.num_clusters} "
        f"clusters with the following sizes:",
    ]
    for c, size in enumerate(model.cluster_sizes):
        lines.append(f"* cluster {c} : {int(size)}")
    outliers = int(model.n - model.cluster_sizes.sum())
    if outliers:
        lines.append(f"* outliers : {outliers}")
    return "\n".join(lines)
