"""Similarity graphs, their normalized matrices, and graph-cut oracles.

The normalized adjacency is D^{-1/2} W D^{-1/2} and the normalized Laplacian
is its complement from the identity; both live on a SimilarityGraph together
with lazily cached eigendecompositions (the Laplacian spectrum is computed
independently, never derived from the adjacency one, so the two can be
cross-checked).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BandwidthError,
    DegeneratePartitionError,
    GapError,
    IsolatedVertexError,
    ParameterError,
    ShapeError,
    SizeGuardError,
)
from .linalg import EighResult, as_matrix, frobenius_norm, jacobi_eigh

_BRUTEFORCE_MAX_N = 20


@dataclass(frozen=True)
class FixedBandwidth:
    """Heat kernel exp(-||x_i - x_j||^2 / sigma) with one global sigma."""

    sigma: float


@dataclass(frozen=True)
class SelfTuningBandwidth:
    """Per-pair bandwidth s_i * s_j, where s_i is the distance from point i
    to its neighbors-th nearest other point (ties broken by index)."""

    neighbors: int = 7


SigmaMode = FixedBandwidth | SelfTuningBandwidth


@dataclass
class SimilarityGraph:
    """Edge weights W, degrees, normalized adjacency and normalized Laplacian."""

    w: np.ndarray
    degrees: np.ndarray
    w_norm: np.ndarray
    l_norm: np.ndarray
    _w_eigh: EighResult | None = field(default=None, repr=False, compare=False)
    _l_eigh: EighResult | None = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.w.shape[0]

    def wnorm_eigh(self) -> EighResult:
        """Cached eigendecomposition of the normalized adjacency."""
        if self._w_eigh is None:
            self._w_eigh = jacobi_eigh(self.w_norm)
        return self._w_eigh

    def lnorm_eigh(self) -> EighResult:
        """Cached eigendecomposition of the normalized Laplacian (computed
        independently of wnorm_eigh so the spectra can be cross-checked)."""
        if self._l_eigh is None:
            self._l_eigh = jacobi_eigh(self.l_norm)
        return self._l_eigh


@dataclass
class Bipartition:
    """Boolean membership vector; True marks side A.  Both sides nonempty."""

    membership: np.ndarray

    def __post_init__(self):
        self.membership = np.asarray(self.membership, dtype=bool)
        if self.membership.ndim != 1:
            raise ShapeError("membership must be a 1-D boolean vector")
        size_a = int(self.membership.sum())
        if size_a == 0 or size_a == self.membership.size:
            raise DegeneratePartitionError("both sides of a bipartition must be nonempty")


def _pairwise_sq_dists(points: np.ndarray) -> np.ndarray:
    sq = (points * points).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (points @ points.T)
    np.clip(d2, 0.0, None, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2


def build_similarity(points, bandwidth: SigmaMode) -> np.ndarray:
    """Heat-kernel similarity matrix: symmetric, zero diagonal, entries in (0, 1]."""
    points = as_matrix(points, "points")
    n = points.shape[0]
    if n < 2:
        raise ParameterError(f"need at least 2 points, got {n}")
    d2 = _pairwise_sq_dists(points)
    if isinstance(bandwidth, FixedBandwidth):
        if bandwidth.sigma <= 0.0:
            raise ParameterError("fixed bandwidth sigma must be positive")
        w = np.exp(-d2 / bandwidth.sigma)
    elif isinstance(bandwidth, SelfTuningBandwidth):
        ell = bandwidth.neighbors
        if ell < 1:
            raise ParameterError("self-tuning neighbor count must be >= 1")
        if ell > n - 1:
            raise ParameterError(
                f"self-tuning neighbor count {ell} exceeds available {n - 1} other points"
            )
        dists = np.sqrt(d2)
        np.fill_diagonal(dists, np.inf)
        scales = np.partition(dists, ell - 1, axis=1)[:, ell - 1]
        zero = np.nonzero(scales == 0.0)[0]
        if zero.size:
            raise BandwidthError(
                f"point {int(zero[0])} has a duplicate within its {ell} nearest "
                f"neighbors, giving a zero self-tuning scale"
            )
        w = np.exp(-d2 / (scales[:, None] * scales[None, :]))
    else:
        raise ParameterError(f"unknown bandwidth mode {bandwidth!r}")
    w = (w + w.T) / 2.0
    np.fill_diagonal(w, 0.0)
    return w


def build_graph(w) -> SimilarityGraph:
    """Validate an explicit weight matrix and derive its normalized matrices."""
    w = as_matrix(w, "w")
    n, m = w.shape
    if n != m:
        raise ShapeError(f"weight matrix must be square, got {n}x{m}")
    scale = max(frobenius_norm(w), 1e-300)
    if frobenius_norm(w - w.T) > 1e-12 * scale:
        raise ShapeError("weight matrix is not symmetric")
    if (w < 0.0).any():
        raise ParameterError("weight matrix has negative entries")
    if np.abs(np.diag(w)).max(initial=0.0) > 0.0:
        raise ParameterError("weight matrix must have a zero diagonal")
    degrees = w.sum(axis=1)
    if (degrees <= 0.0).any():
        bad = int(np.argmin(degrees))
        raise IsolatedVertexError(
            f"vertex {bad} has zero degree; the normalization D^(-1/2) is "
            f"undefined (pre-filter isolated vertices)"
        )
    inv_sqrt = 1.0 / np.sqrt(degrees)
    w_norm = inv_sqrt[:, None] * w * inv_sqrt[None, :]
    w_norm = (w_norm + w_norm.T) / 2.0
    l_norm = np.eye(n) - w_norm
    return SimilarityGraph(w=w, degrees=degrees, w_norm=w_norm, l_norm=l_norm)


def _side_weights(g: SimilarityGraph, part: Bipartition):
    member = part.membership
    if member.size != g.n:
        raise ShapeError("partition length does not match graph size")
    cut = float(g.w[member][:, ~member].sum())
    assoc_a = float(g.degrees[member].sum())
    assoc_b = float(g.degrees[~member].sum())
    if assoc_a <= 0.0 or assoc_b <= 0.0:
        raise DegeneratePartitionError("a side has zero association weight")
    return cut, assoc_a, assoc_b


def ncut(g: SimilarityGraph, part: Bipartition) -> float:
    """Normalized cut: cut(A,B) * (1/assoc(A,V) + 1/assoc(B,V))."""
    cut, assoc_a, assoc_b = _side_weights(g, part)
    return cut * (1.0 / assoc_a + 1.0 / assoc_b)


def rayleigh_ncut(g: SimilarityGraph, part: Bipartition) -> float:
    """Ncut as a generalized Rayleigh quotient.

    With y_i = 1 on side A and y_i = -b on side B, where b is the ratio of
    the degree masses of A and B, the quotient y^T (D - W) y / (y^T D y)
    equals ncut(g, part) exactly.
    """
    cut, assoc_a, assoc_b = _side_weights(g, part)
    b = assoc_a / assoc_b
    y = np.where(part.membership, 1.0, -b)
    dy = g.degrees * y
    numerator = float(y @ dy - y @ (g.w @ y))
    denominator = float(y @ dy)
    if denominator <= 0.0:
        raise DegeneratePartitionError("degenerate Rayleigh denominator")
    return numerator / denominator


def _mask_to_partition(mask: int, n: int) -> Bipartition:
    member = np.zeros(n, dtype=bool)
    for i in range(n - 1):
        if mask & (1 << i):
            member[i] = True
    return Bipartition(membership=member)


def min_ncut_bruteforce(g: SimilarityGraph) -> tuple[Bipartition, float]:
    """Exhaustive minimum normalized cut over all 2^(n-1) - 1 bipartitions.

    Vertex n-1 is pinned to side B, so each unordered bipartition is visited
    exactly once; ties go to the smallest membership bitmask.
    """
    n = g.n
    if n > _BRUTEFORCE_MAX_N:
        raise SizeGuardError(
            f"exhaustive Ncut is capped at n <= {_BRUTEFORCE_MAX_N}, got {n}"
        )
    if n < 2:
        raise ParameterError("need at least 2 vertices to bipartition")
    best_value = np.inf
    best_mask = None
    for mask in range(1, 1 << (n - 1)):
        part = _mask_to_partition(mask, n)
        value = ncut(g, part)
        if value < best_value:
            best_value = value
            best_mask = mask
    return _mask_to_partition(best_mask, n), float(best_value)


def connected_components(g: SimilarityGraph, edge_threshold: float = 0.0) -> int:
    """Number of components when edges are weights strictly above the threshold."""
    if edge_threshold < 0.0:
        raise ParameterError("edge_threshold must be nonnegative")
    adjacency = g.w > edge_threshold
    n = g.n
    seen = np.zeros(n, dtype=bool)
    count = 0
    for start in range(n):
        if seen[start]:
            continue
        count += 1
        stack = [start]
        seen[start] = True
        while stack:
            v = stack.pop()
            for u in np.nonzero(adjacency[v])[0]:
                if not seen[u]:
                    seen[u] = True
                    stack.append(int(u))
    return count


def cheeger_bounds(g: SimilarityGraph) -> tuple[float, float, float]:
    """Sandwich the optimal Ncut between spectral bounds.

    Returns (lam/2, min Ncut, 2*sqrt(2*lam)) where lam is the second-smallest
    eigenvalue of the normalized Laplacian.  Requires a connected graph small
    enough for the exhaustive oracle.
    """
    if connected_components(g) != 1:
        raise GapError("Cheeger bounds need a connected graph")
    lam = float(max(g.lnorm_eigh().eigenvalues[-2], 0.0))
    _, opt = min_ncut_bruteforce(g)
    return 0.5 * lam, opt, 2.0 * np.sqrt(2.0 * lam)
