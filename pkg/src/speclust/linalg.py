"""Dense real linear algebra used by every other module.

Matrices are plain float64 numpy arrays of shape (rows, cols); ``as_matrix``
is the single entry point that enforces finiteness.  The eigensolver is a
cyclic Jacobi iteration, adequate for the desk-scale problems this package
targets (n up to a few thousand).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceError,
    DegenerateRankError,
    RankError,
    ShapeError,
)

# Relative off-diagonal mass at which the Jacobi sweep stops.
_JACOBI_TOL = 1e-12
_JACOBI_MAX_SWEEPS = 100

# Singular values below this fraction of the largest are treated as zero.
_SVD_RANK_TOL = 1e-10

# Pivot columns smaller than this fraction of ||B||_F are rank failures.
_GS_RANK_TOL = 1e-12


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and convert input to a finite float64 2-D array."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={m.ndim}")
    if m.size and not np.isfinite(m).all():
        raise ShapeError(f"{name} contains non-finite entries")
    return m


@dataclass
class EighResult:
    """Symmetric eigendecomposition, eigenvalues sorted descending.

    Column j of ``eigenvectors`` pairs with ``eigenvalues[j]``; columns are
    orthonormal and sign-fixed so the entry of largest magnitude in each
    column is positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass
class ThinSvdResult:
    """Left singular factor of a tall matrix, computed through its Gram matrix.

    ``left_vectors`` always has as many columns as the input; directions whose
    singular value falls below the rank cutoff are filled by completing to an
    orthonormal set, and ``rank_used`` counts the genuine directions.
    """

    left_vectors: np.ndarray
    singular_values: np.ndarray
    rank_used: int


def matmul(a, b) -> np.ndarray:
    """Matrix product with an explicit conformability check."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}"
        )
    return a @ b


def frobenius_norm(a) -> float:
    a = as_matrix(a)
    return float(np.sqrt((a * a).sum()))


def _fix_column_signs(v: np.ndarray) -> np.ndarray:
    """Flip column signs so the largest-magnitude entry of each is positive."""
    if v.size == 0:
        return v
    idx = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[idx, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    return v * signs


def jacobi_eigh(a) -> EighResult:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    The input must be symmetric to within 1e-12 relative tolerance; it is
    symmetrized as (A + A^T)/2 before iterating.  Convergence is declared when
    the off-diagonal Frobenius mass drops below 1e-12 * ||A||_F; more than 100
    sweeps raises ConvergenceError with the residual.
    """
    a = as_matrix(a)
    n, m = a.shape
    if n != m:
        raise ShapeError(f"eigendecomposition needs a square matrix, got {n}x{m}")
    norm_a = frobenius_norm(a)
    asym = frobenius_norm(a - a.T)
    if asym > 1e-12 * max(norm_a, 1e-300):
        raise ShapeError(
            f"matrix is not symmetric: ||A - A^T||_F = {asym:.3e} "
            f"exceeds 1e-12 * ||A||_F"
        )

    work = (a + a.T) / 2.0
    vecs = np.eye(n)
    stop = _JACOBI_TOL * norm_a
    # If every pivot is below stop/n the total off-diagonal mass is below stop,
    # so skipping pivots under this threshold cannot mask non-convergence.
    skip = stop / max(n, 1)

    def _off_norm(mat: np.ndarray) -> float:
        # Zeroing the diagonal elementwise avoids the catastrophic
        # cancellation of computing total minus diagonal mass.
        od = mat.copy()
        np.fill_diagonal(od, 0.0)
        return float(np.sqrt((od * od).sum()))

    converged = False
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = _off_norm(work)
        if off <= stop:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                if abs(apq) <= skip:
                    continue
                tau = (work[q, q] - work[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c

                col_p = work[:, p].copy()
                col_q = work[:, q].copy()
                work[:, p] = c * col_p - s * col_q
                work[:, q] = s * col_p + c * col_q
                row_p = work[p, :].copy()
                row_q = work[q, :].copy()
                work[p, :] = c * row_p - s * row_q
                work[q, :] = s * row_p + c * row_q
                work[p, q] = 0.0
                work[q, p] = 0.0

                vec_p = vecs[:, p].copy()
                vec_q = vecs[:, q].copy()
                vecs[:, p] = c * vec_p - s * vec_q
                vecs[:, q] = s * vec_p + c * vec_q
    if not converged:
        off = _off_norm(work)
        if off > stop:
            raise ConvergenceError(
                f"Jacobi sweep limit ({_JACOBI_MAX_SWEEPS}) reached with "
                f"off-diagonal residual {off:.3e} > {stop:.3e}"
            )

    values = np.diag(work).copy()
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vecs = _fix_column_signs(vecs[:, order])
    return EighResult(eigenvalues=values, eigenvectors=vecs)


def spectral_norm(a) -> float:
    """Largest singular value, via the top eigenvalue of A^T A."""
    a = as_matrix(a)
    if a.size == 0:
        return 0.0
    gram = a.T @ a
    gram = (gram + gram.T) / 2.0
    top = jacobi_eigh(gram).eigenvalues[0]
    return float(math.sqrt(max(top, 0.0)))


def gram_schmidt(b) -> np.ndarray:
    """Orthonormalize the columns of ``b`` in place of span(b).

    Modified Gram-Schmidt with one re-orthogonalization pass.  A pivot column
    whose residual norm falls below 1e-12 * ||B||_F raises RankError naming
    the column.
    """
    b = as_matrix(b)
    n, m = b.shape
    if m == 0:
        return b.copy()
    norm_b = frobenius_norm(b)
    q = b.copy()
    for j in range(m):
        v = q[:, j].copy()
        for _ in range(2):
            for i in range(j):
                v -= (q[:, i] @ v) * q[:, i]
        norm_v = float(np.linalg.norm(v))
        if norm_v < _GS_RANK_TOL * norm_b:
            raise RankError(
                f"column {j} is linearly dependent on earlier columns "
                f"(residual norm {norm_v:.3e})"
            )
        q[:, j] = v / norm_v
    return q


def _complete_column(u: np.ndarray, filled: int) -> np.ndarray:
    """First canonical basis vector with a usable residual against u[:, :filled]."""
    n = u.shape[0]
    for i in range(n):
        v = np.zeros(n)
        v[i] = 1.0
        for _ in range(2):
            for jj in range(filled):
                v -= (u[:, jj] @ v) * u[:, jj]
        norm_v = float(np.linalg.norm(v))
        if norm_v > 1e-6:
            return v / norm_v
    raise RankError("could not complete an orthonormal basis")


def thin_svd_via_gram(b) -> ThinSvdResult:
    """Left singular vectors of a tall matrix from its small Gram matrix.

    Eigendecomposing B^T B (k x k) gives right vectors V and squared singular
    values; left vectors follow as B V / sigma.  Directions whose singular
    value is below 1e-10 of the largest are replaced by completing to an
    orthonormal set against the accepted columns; ``rank_used`` reports how
    many genuine directions were kept.
    """
    b = as_matrix(b)
    n, m = b.shape
    if n < m:
        raise ShapeError(f"need rows >= cols, got {n}x{m}")
    if m == 0:
        raise ShapeError("matrix has no columns")
    if not b.any():
        raise DegenerateRankError("all-zero matrix has no singular directions")

    gram = b.T @ b
    gram = (gram + gram.T) / 2.0
    eig = jacobi_eigh(gram)
    sigmas = np.sqrt(np.clip(eig.eigenvalues, 0.0, None))
    cutoff = _SVD_RANK_TOL * sigmas[0]

    u = np.zeros((n, m))
    rank_used = 0
    for j in range(m):
        # Singular values are sorted, so accepted directions precede the
        # completions; either way columns 0..j-1 are already orthonormal.
        if sigmas[j] >= cutoff and sigmas[j] > 0.0:
            col = b @ eig.eigenvectors[:, j] / sigmas[j]
            # One re-orthogonalization pass keeps the factor clean when B is
            # ill-conditioned and the Gram route has lost accuracy.
            for jj in range(j):
                col -= (u[:, jj] @ col) * u[:, jj]
            norm_col = float(np.linalg.norm(col))
            if norm_col < 0.5:
                col = _complete_column(u, j)
            else:
                col = col / norm_col
            u[:, j] = col
            rank_used += 1
        else:
            u[:, j] = _complete_column(u, j)
    return ThinSvdResult(
        left_vectors=_fix_column_signs(u),
        singular_values=sigmas,
        rank_used=rank_used,
    )
