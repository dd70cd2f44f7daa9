"""k-means in the indicator-matrix formulation, plus NMI evaluation.

Both the Lloyd heuristic and an exhaustive oracle are provided: the oracle
realizes the best-possible objective on small instances, the heuristic is the
practical solver.  Tie-breaking is by lowest index everywhere so runs are
reproducible from their seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataio import RngStream
from .errors import (
    DegenerateClusteringError,
    ParameterError,
    ShapeError,
    SizeGuardError,
)
from .linalg import as_matrix

_BRUTEFORCE_MAX_ASSIGNMENTS = 10_000


@dataclass
class Clustering:
    """Length-n label vector with values in [0, k)."""

    labels: np.ndarray
    k: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.ndim != 1:
            raise ShapeError("labels must be a 1-D integer vector")
        if self.k < 1:
            raise ParameterError("k must be at least 1")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.k):
            raise ParameterError(f"labels must lie in [0, {self.k})")

    @property
    def n(self) -> int:
        return self.labels.size


@dataclass
class IndicatorMatrix:
    """n x k matrix with entries 1/sqrt(s_j) marking membership; X^T X = I."""

    x: np.ndarray


@dataclass
class KmeansResult:
    clustering: Clustering
    objective: float
    iterations: int
    replicate_index: int


def _cluster_sizes(c: Clustering) -> np.ndarray:
    sizes = np.bincount(c.labels, minlength=c.k)
    if (sizes == 0).any():
        empty = int(np.argmin(sizes))
        raise DegenerateClusteringError(f"cluster {empty} is empty")
    return sizes


def indicator_from_labels(c: Clustering) -> IndicatorMatrix:
    sizes = _cluster_sizes(c)
    x = np.zeros((c.n, c.k))
    x[np.arange(c.n), c.labels] = 1.0 / np.sqrt(sizes[c.labels])
    return IndicatorMatrix(x=x)


def _centroid_objective(data: np.ndarray, c: Clustering) -> float:
    sizes = _cluster_sizes(c)
    sums = np.zeros((c.k, data.shape[1]))
    np.add.at(sums, c.labels, data)
    centroids = sums / sizes[:, None]
    diffs = data - centroids[c.labels]
    return float((diffs * diffs).sum())


def kmeans_objective(data, c: Clustering) -> float:
    """Sum of squared distances of points to their cluster centroid.

    Cross-checked on every call against the equivalent indicator form
    ||Y - X X^T Y||_F^2; a disagreement beyond 1e-9 indicates a numerical
    fault and raises.
    """
    data = as_matrix(data, "data")
    if data.shape[0] != c.n:
        raise ShapeError("data row count does not match clustering length")
    centroid_form = _centroid_objective(data, c)
    x = indicator_from_labels(c).x
    residual = data - x @ (x.T @ data)
    indicator_form = float((residual * residual).sum())
    if abs(centroid_form - indicator_form) > 1e-9 * max(1.0, abs(centroid_form)):
        raise ParameterError(
            f"objective forms disagree: centroid {centroid_form!r} vs "
            f"indicator {indicator_form!r}"
        )
    return centroid_form


def _assign(data: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = ((data[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def _repair_empty(data: np.ndarray, labels: np.ndarray, centroids: np.ndarray, k: int):
    """Move the point farthest from its centroid into each empty cluster."""
    dist = ((data - centroids[labels]) ** 2).sum(axis=1)
    sizes = np.bincount(labels, minlength=k)
    for j in range(k):
        if sizes[j] > 0:
            continue
        donor = int(np.argmax(dist))
        sizes[labels[donor]] -= 1
        labels[donor] = j
        sizes[j] = 1
        dist[donor] = -1.0
    return labels


def _lloyd_single(
    data: np.ndarray,
    k: int,
    stream: RngStream,
    max_iter: int,
    init: str,
) -> tuple[np.ndarray, int, list[float]]:
    n = data.shape[0]
    if init == "sample":
        seeds = stream.sample_distinct(n, k)
    elif init == "d2":
        seeds = [stream.integer(n)]
        d2 = ((data - data[seeds[0]]) ** 2).sum(axis=1)
        for _ in range(k - 1):
            total = d2.sum()
            if total <= 0.0:
                remaining = [i for i in range(n) if i not in seeds]
                seeds.append(remaining[stream.integer(len(remaining))])
                continue
            r = stream.uniform() * total
            pick = int(np.searchsorted(np.cumsum(d2), r, side="right"))
            pick = min(pick, n - 1)
            seeds.append(pick)
            d2 = np.minimum(d2, ((data - data[pick]) ** 2).sum(axis=1))
    else:
        raise ParameterError(f"unknown init {init!r}")
    centroids = data[seeds].copy()
    labels = None
    history: list[float] = []
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        new_labels = _assign(data, centroids)
        new_labels = _repair_empty(data, new_labels, centroids, k)
        clust = Clustering(labels=new_labels, k=k)
        history.append(_centroid_objective(data, clust))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        sizes = np.bincount(labels, minlength=k)
        sums = np.zeros((k, data.shape[1]))
        np.add.at(sums, labels, data)
        centroids = sums / sizes[:, None]
    return labels, iterations, history


def lloyd_kmeans(
    data,
    k: int,
    replicates: int = 10,
    max_iter: int = 100,
    seed: int = 0,
    init: str = "sample",
) -> KmeansResult:
    """Best-of-replicates Lloyd iteration.

    Each replicate seeds centroids as k distinct data rows drawn uniformly
    (init="d2" switches to distance-weighted seeding), assigns points to the
    nearest centroid with ties to the lowest cluster index, repairs empty
    clusters by donating the farthest point, and stops when labels repeat.
    Replicates use child streams of (seed, replicate), so the result is
    independent of scheduling; ties across replicates go to the lowest index.
    """
    data = as_matrix(data, "data")
    n = data.shape[0]
    if k > n:
        raise ParameterError(f"k={k} exceeds the number of points {n}")
    if k < 1:
        raise ParameterError("k must be at least 1")
    if replicates < 1 or max_iter < 1:
        raise ParameterError("replicates and max_iter must be positive")
    master = RngStream(seed)
    best: KmeansResult | None = None
    for r in range(replicates):
        labels, iterations, _ = _lloyd_single(data, k, master.child(r), max_iter, init)
        clust = Clustering(labels=labels, k=k)
        objective = kmeans_objective(data, clust)
        if best is None or objective < best.objective:
            best = KmeansResult(
                clustering=clust,
                objective=objective,
                iterations=iterations,
                replicate_index=r,
            )
    return best


def _stirling2(n: int, k: int) -> int:
    """Number of partitions of n items into k nonempty unlabeled blocks."""
    if k > n or k < 1:
        return 0
    row = [0] * (k + 1)
    row[min(1, k)] = 1
    for _ in range(1, n):
        new = [0] * (k + 1)
        for j in range(1, k + 1):
            new[j] = j * row[j] + row[j - 1]
        row = new
    return row[k]


def bruteforce_capacity_ok(n: int, k: int) -> bool:
    """Whether bruteforce_kmeans accepts an (n, k) instance."""
    return 1 <= k <= n and _stirling2(n, k) <= _BRUTEFORCE_MAX_ASSIGNMENTS


def _iter_canonical_labelings(n: int, k: int):
    """Yield label vectors in lex order, first-appearance canonical, k blocks."""
    labels = np.zeros(n, dtype=np.int64)

    def rec(i: int, used: int):
        if i == n:
            if used == k:
                yield labels
            return
        # Pruning: remaining points must be able to introduce missing labels.
        if used + (n - i) < k:
            return
        for lab in range(min(used + 1, k)):
            labels[i] = lab
            yield from rec(i + 1, used + 1 if lab == used else used)

    yield from rec(1, 1)


def bruteforce_kmeans(data, k: int) -> KmeansResult:
    """Globally optimal k-means by enumerating all set partitions.

    Hard-guarded by the partition count (at most 10000 canonical labelings,
    which admits n <= 14 at k = 2 and n <= 10 at k = 3).  Ties are broken by
    the lexicographically smallest canonical labeling.
    """
    data = as_matrix(data, "data")
    n = data.shape[0]
    if k < 1 or k > n:
        raise ParameterError(f"need 1 <= k <= {n}, got k={k}")
    count = _stirling2(n, k)
    if count > _BRUTEFORCE_MAX_ASSIGNMENTS:
        raise SizeGuardError(
            f"{count} candidate clusterings exceed the cap of "
            f"{_BRUTEFORCE_MAX_ASSIGNMENTS} (n={n}, k={k})"
        )
    best_labels = None
    best_objective = math.inf
    for labels in _iter_canonical_labelings(n, k):
        clust = Clustering(labels=labels.copy(), k=k)
        objective = _centroid_objective(data, clust)
        if objective < best_objective:
            best_objective = objective
            best_labels = labels.copy()
    clust = Clustering(labels=best_labels, k=k)
    return KmeansResult(
        clustering=clust,
        objective=kmeans_objective(data, clust),
        iterations=0,
        replicate_index=0,
    )


def nmi(a: Clustering, b: Clustering) -> float:
    """Normalized mutual information in [0, 1], natural-log based.

    Probabilities are maximum-likelihood cell frequencies; 0 log 0 is 0.  If
    both clusterings are trivial (zero entropy) the score is 1 by convention;
    if exactly one is trivial it is 0.
    """
    if a.n != b.n:
        raise ShapeError(f"clusterings disagree on n: {a.n} vs {b.n}")
    if a.n == 0:
        raise ParameterError("clusterings must be nonempty")
    n = a.n
    counts = np.zeros((a.k, b.k))
    np.add.at(counts, (a.labels, b.labels), 1.0)
    p_joint = counts / n
    p_a = p_joint.sum(axis=1)
    p_b = p_joint.sum(axis=0)

    def entropy(p: np.ndarray) -> float:
        nz = p[p > 0.0]
        return float(-(nz * np.log(nz)).sum())

    h_a = entropy(p_a)
    h_b = entropy(p_b)
    if h_a == 0.0 and h_b == 0.0:
        return 1.0
    if h_a == 0.0 or h_b == 0.0:
        return 0.0
    mutual = 0.0
    for i in range(a.k):
        for j in range(b.k):
            pij = p_joint[i, j]
            if pij > 0.0:
                mutual += pij * math.log(pij / (p_a[i] * p_b[j]))
    return float(min(1.0, max(0.0, mutual / (0.5 * (h_a + h_b)))))
