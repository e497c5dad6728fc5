"""Dense real-matrix primitives shared by the rest of the package.

Matrices are plain 2-D ``float64`` numpy arrays. Activation matrices follow
the convention ``rows = neurons, cols = datapoints``.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import (
    AllEigenvaluesNegligible,
    ColumnMismatch,
    ConvergenceFailure,
    InvalidArgument,
    NonFiniteValue,
    NotSymmetric,
)

DEFAULT_EPS = 1e-10


class SvdResult(NamedTuple):
    u: np.ndarray
    singular_values: np.ndarray
    vt: np.ndarray


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Validate ``m`` as a finite, non-empty 2-D float64 array."""
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidArgument(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidArgument(f"{name} must have at least one row and column")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f"{name} contains NaN or Inf")
    return arr


def center_rows(m) -> np.ndarray:
    m = as_matrix(m)
    return m - m.mean(axis=1, keepdims=True)


def covariance_blocks(l1, l2):
    """Return ``(sigma11, sigma22, sigma12)`` with divisor ``n - 1``.

    Inputs are centered here, so callers may pass raw activations.
    """
    l1 = as_matrix(l1, "l1")
    l2 = as_matrix(l2, "l2")
    if l1.shape[1] != l2.shape[1]:
        raise ColumnMismatch(f"datapoint counts differ: {l1.shape[1]} vs {l2.shape[1]}")
    n = l1.shape[1]
    if n < 2:
        raise InvalidArgument("covariance needs at least 2 datapoints")
    c1 = center_rows(l1)
    c2 = center_rows(l2)
    s11 = c1 @ c1.T / (n - 1)
    s22 = c2 @ c2.T / (n - 1)
    s12 = c1 @ c2.T / (n - 1)
    # exact symmetry helps eigh downstream
    s11 = 0.5 * (s11 + s11.T)
    s22 = 0.5 * (s22 + s22.T)
    return s11, s22, s12


def _check_symmetric(m: np.ndarray, tol: float = 1e-10) -> None:
    if m.shape[0] != m.shape[1]:
        raise NotSymmetric(f"matrix is not square: {m.shape}")
    scale = max(np.abs(m).max(), np.finfo(float).tiny)
    if np.abs(m - m.T).max() > tol * scale:
        raise NotSymmetric("matrix is not symmetric")


def psd_whitener(m, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Reduced whitening map ``diag(lam**-0.5) @ V.T`` on the retained eigenspace.

    Rows of the result span the retained eigenspace; ``W @ m @ W.T`` is the
    identity of size ``retained_rank``. The full inverse square root is
    ``V @ W``.
    """
    m = as_matrix(m)
    _check_symmetric(m)
    evals, evecs = np.linalg.eigh(0.5 * (m + m.T))
    top = evals.max()
    if top <= 0:
        raise AllEigenvaluesNegligible("matrix has no positive eigenvalue")
    keep = evals > eps * top
    if not keep.any():
        raise AllEigenvaluesNegligible("every eigenvalue is below eps * max")
    # eigh returns ascending order; report directions by decreasing eigenvalue
    idx = np.flatnonzero(keep)[::-1]
    return evecs[:, idx].T / np.sqrt(evals[idx])[:, None]


def inv_sqrt_psd(m, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Symmetric pseudo inverse square root of a PSD matrix.

    Eigenvalues below ``eps * max_eigenvalue`` are treated as zero and their
    directions are excluded.
    """
    m = as_matrix(m)
    _check_symmetric(m)
    evals, evecs = np.linalg.eigh(0.5 * (m + m.T))
    top = evals.max()
    keep = evals > eps * top if top > 0 else np.zeros_like(evals, dtype=bool)
    if not keep.any():
        raise AllEigenvaluesNegligible("every eigenvalue is below eps * max")
    v = evecs[:, keep]
    out = (v / np.sqrt(evals[keep])) @ v.T
    return 0.5 * (out + out.T)


def svd(m) -> SvdResult:
    """Thin SVD with singular values sorted nonincreasing."""
    m = as_matrix(m)
    try:
        u, s, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:  # LAPACK gesdd did not converge
        raise ConvergenceFailure(str(exc)) from exc
    return SvdResult(u, s, vt)


def gram_schmidt(vectors, tol: float = 1e-10):
    """Orthonormalize the rows of ``vectors`` with modified Gram-Schmidt.

    Each row gets a second orthogonalization pass. Rows whose residual norm
    drops below ``tol`` times their original norm are linearly dependent on
    earlier rows and are dropped.

    Returns
    -------
    basis : ndarray
        Orthonormal rows, in input order with dropped rows removed.
    dropped : list of int
        Indices of the input rows that were dropped.
    """
    v = as_matrix(vectors, "vectors")
    if v.shape[0] > v.shape[1]:
        raise InvalidArgument("more vectors than dimensions")
    basis: list[np.ndarray] = []
    dropped: list[int] = []
    for i, row in enumerate(v):
        norm0 = np.linalg.norm(row)
        w = row.copy()
        for _ in range(2):
            for q in basis:
                w -= (q @ w) * q
        norm = np.linalg.norm(w)
        if norm0 == 0 or norm < tol * norm0:
            dropped.append(i)
            continue
        basis.append(w / norm)
    if basis:
        out = np.vstack(basis)
    else:
        out = np.zeros((0, v.shape[1]))
    return out, dropped


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix (determinant may be +1 or -1)."""
    if dim < 1:
        raise InvalidArgument("dim must be >= 1")
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def random_rotation(dim: int, seed: int) -> np.ndarray:
    """Seeded random rotation: orthogonal with determinant +1."""
    q = random_orthogonal(dim, np.random.default_rng(seed))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


# --- chi-squared survival function -----------------------------------------

_CF_TINY = 1e-300


def _gamma_p_series(a: float, x: float, max_iter: int = 100_000) -> float:
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(max_iter):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    else:
        raise ConvergenceFailure("incomplete gamma series did not converge")
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_contfrac(a: float, x: float, max_iter: int = 100_000) -> float:
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / _CF_TINY
    d = 1.0 / b
    h = d
    for i in range(1, max_iter):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = b + an / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    else:
        raise ConvergenceFailure("incomplete gamma continued fraction did not converge")
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma ``Q(a, x)``."""
    if a <= 0:
        raise InvalidArgument("a must be positive")
    if x < 0:
        raise InvalidArgument("x must be nonnegative")
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_p_series(a, x))
    return min(1.0, _gamma_q_contfrac(a, x))


def chi_squared_sf(x: float, dof: int) -> float:
    """P(X > x) for X chi-squared with ``dof`` degrees of freedom."""
    if dof < 1:
        raise InvalidArgument("dof must be >= 1")
    if math.isnan(x) or x < 0:
        raise InvalidArgument(f"x must be nonnegative, got {x}")
    return regularized_gamma_q(0.5 * dof, 0.5 * x)
