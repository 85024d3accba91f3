"""Data preparation: centering, leading principal direction, score sorting.

The output of :func:`prepare` is the canonical input of the aggregation
phase: rows reordered by their projection onto the top principal direction,
together with the scale statistic (median extend) that makes the user-facing
radius parameter unit-free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_POWER_TOL = 1e-10
_POWER_MAX_ITER = 1000


@dataclass(frozen=True, eq=False)
class PreparedData:
    """Centered data in score-sorted order plus the statistics derived from it.

    Attributes
    ----------
    centered : (n, d) array
        Mean-centered points, rows ordered by nondecreasing score.
    mean : (d,) array
        Column means of the raw input.
    v1 : (d,) array
        Unit top principal direction (sign fixed: largest-magnitude entry
        is positive).
    scores : (n,) array
        Projections ``centered @ v1``, nondecreasing.
    perm : (n,) array
        Sorted position -> original row index.
    sigma1, sigma2 : float
        First and second singular values of the centered matrix.
    mext : float
        Median extend: smallest value such that ceil(n/2) scores lie in
        [-mext, mext].
    """

    centered: np.ndarray
    mean: np.ndarray
    v1: np.ndarray
    scores: np.ndarray
    perm: np.ndarray
    sigma1: float
    sigma2: float
    mext: float

    @property
    def n(self) -> int:
        return self.centered.shape[0]

    @property
    def d(self) -> int:
        return self.centered.shape[1]


def center(raw) -> tuple[np.ndarray, np.ndarray]:
    """Subtract the per-column mean. Returns (centered matrix, mean vector)."""
    pts = np.asarray(raw, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError("input must be a 2-D matrix of points")
    if pts.shape[0] < 1 or pts.shape[1] < 1:
        raise ValueError("input must have at least one row and one column")
    if not np.all(np.isfinite(pts)):
        raise ValueError("input contains non-finite values")
    mean = pts.mean(axis=0)
    return pts - mean, mean


def _power_iteration(sym: np.ndarray) -> tuple[float, np.ndarray]:
    """Dominant eigenpair of a small symmetric PSD matrix.

    Deterministic start vector (largest-norm column) so results are
    reproducible across platforms.
    """
    d = sym.shape[0]
    col_norms = np.linalg.norm(sym, axis=0)
    k = int(np.argmax(col_norms))
    if col_norms[k] == 0.0:
        v = np.zeros(d)
        v[0] = 1.0
        return 0.0, v
    v = sym[:, k] / col_norms[k]
    for _ in range(_POWER_MAX_ITER):
        w = sym @ v
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            break
        w = w / norm_w
        if float(w @ v) < 0.0:
            w = -w
        converged = np.linalg.norm(w - v) <= _POWER_TOL
        v = w
        if converged:
            break
    lam = float(v @ sym @ v)
    return lam, v


def _top_two(gram: np.ndarray) -> tuple[float, np.ndarray, float, np.ndarray]:
    """Top two eigenpairs of the Gram matrix via power iteration + deflation."""
    lam1, v1 = _power_iteration(gram)
    d = gram.shape[0]
    if lam1 <= 0.0:
        # All-zero data: every direction is principal; fix the first axis.
        v1 = np.zeros(d)
        v1[0] = 1.0
        return 0.0, v1, 0.0, np.zeros(d)
    if d == 1:
        return lam1, v1, 0.0, np.zeros(1)
    deflated = gram - lam1 * np.outer(v1, v1)
    lam2, v2 = _power_iteration(deflated)
    return lam1, v1, max(lam2, 0.0), v2


def _fix_sign(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return -v if v[k] < 0.0 else v


def first_principal_component(centered) -> tuple[np.ndarray, float, float]:
    """Top right-singular direction and leading two singular values.

    Works on the d x d Gram matrix, so the cost is O(n d^2) to form it plus
    an n-independent iteration. Sign convention: the entry of v1 with the
    largest magnitude is positive.
    """
    X = np.asarray(centered, dtype=np.float64)
    gram = X.T @ X
    lam1, v1, lam2, _ = _top_two(gram)
    v1 = _fix_sign(np.asarray(v1, dtype=np.float64))
    return v1, float(np.sqrt(lam1)), float(np.sqrt(lam2))


def principal_plane(centered) -> tuple[np.ndarray, np.ndarray]:
    """First two principal directions (for 2-D plot projections).

    In one dimension the second direction is the zero vector.
    """
    X = np.asarray(centered, dtype=np.float64)
    gram = X.T @ X
    _, v1, lam2, v2 = _top_two(gram)
    v1 = _fix_sign(np.asarray(v1, dtype=np.float64))
    if lam2 <= 0.0:
        return v1, np.zeros_like(v1)
    return v1, _fix_sign(np.asarray(v2, dtype=np.float64))


def score_and_sort(centered, v1) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Project onto v1 and reorder rows by nondecreasing score (stable)."""
    X = np.asarray(centered, dtype=np.float64)
    v = np.asarray(v1, dtype=np.float64)
    if abs(np.linalg.norm(v) - 1.0) > 1e-6:
        raise ValueError("v1 must have unit norm")
    raw_scores = X @ v
    perm = np.argsort(raw_scores, kind="stable")
    return X[perm], raw_scores[perm], perm


def median_extend(scores) -> float:
    """Smallest m such that ceil(n/2) of the scores lie in [-m, m].

    O(n); equals the ceil(n/2)-th smallest absolute score.
    """
    s = np.asarray(scores, dtype=np.float64)
    n = s.size
    if n < 1:
        raise ValueError("scores must be nonempty")
    m = (n + 1) // 2
    return float(np.partition(np.abs(s), m - 1)[m - 1])


def prepare(raw, extent: str = "norms") -> PreparedData:
    """Run the full preparation pipeline on raw points.

    `extent` selects the scale statistic: "norms" (default, the median row
    norm of the centered data) or "scores" (the score-interval median extend,
    cheaper but much smaller on multi-modal data whose modes straddle the
    origin, which starves the radius).
    """
    centered, mean = center(raw)
    v1, sigma1, sigma2 = first_principal_component(centered)
    ordered, scores, perm = score_and_sort(centered, v1)
    if extent == "scores":
        mext = median_extend(scores)
    elif extent == "norms":
        mext = float(np.median(np.linalg.norm(ordered, axis=1)))
    else:
        raise ValueError(f"unknown extent mode {extent!r}")
    return PreparedData(centered=ordered, mean=mean, v1=v1, scores=scores,
                        perm=perm, sigma1=sigma1, sigma2=sigma2, mext=mext)
