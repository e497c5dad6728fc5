"""Scalar distances built on CCA, plus cosine and Euclidean baselines."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cca import DEFAULT_VARIANCE_FRACTION, CcaResult, as_activations, compute_cca, svcca_preprocess
from .errors import DegenerateInput, InvalidArgument, ShapeMismatch, ZeroNorm
from .tensor_core import DEFAULT_EPS, center_rows, chi_squared_sf, gram_schmidt

METRICS = ("mean_cca", "pwcca", "bartlett_cca", "svcca", "cosine", "euclidean")
DIRECTIONS = ("l1_weighted", "l2_weighted", "symmetric")
DEFAULT_ALPHA_LEVEL = 0.05


@dataclass
class DistanceReport:
    metric: str
    distance: float
    weights: np.ndarray | None = None
    k_significant: int | None = None
    direction: str | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def similarity(self) -> float:
        return 1.0 - self.distance


def mean_cca_distance(r: CcaResult) -> DistanceReport:
    """``1 - mean(rho)``, the SVCCA-style unweighted distance."""
    if r.c == 0:
        raise DegenerateInput("CCA result has no coefficients")
    d = 1.0 - float(np.mean(r.rho))
    return DistanceReport("mean_cca", min(max(d, 0.0), 1.0), metadata={"c": r.c})


def projection_weights(r: CcaResult, source, side: str = "left") -> np.ndarray:
    """Weights proportional to how much of ``source`` each canonical vector explains.

    The canonical vectors of ``side`` are re-orthonormalized, then
    ``alpha_i = sum_j |<h_i, z_j>|`` over the centered neuron rows ``z_j`` of
    ``source``, normalized to sum to one. A canonical vector dropped by the
    orthonormalization gets weight zero.
    """
    h = r.canonical(side)
    z = center_rows(as_activations(source, "source"))
    if z.shape[1] != h.shape[1]:
        raise InvalidArgument(
            f"source has {z.shape[1]} datapoints but canonical vectors have {h.shape[1]}"
        )
    basis, dropped = gram_schmidt(h)
    kept = [i for i in range(h.shape[0]) if i not in set(dropped)]
    raw = np.zeros(h.shape[0])
    raw[kept] = np.abs(basis @ z.T).sum(axis=1)
    total = raw.sum()
    if total == 0:
        raise DegenerateInput("source is orthogonal to every canonical vector")
    return raw / total


def _weighted(r: CcaResult, source, side: str) -> tuple[float, np.ndarray]:
    w = projection_weights(r, source, side)
    return 1.0 - float(w @ r.rho), w


def pwcca_distance(
    l1,
    l2,
    eps: float = DEFAULT_EPS,
    direction: str = "l1_weighted",
    variance_fraction: float | None = None,
) -> DistanceReport:
    """Projection-weighted CCA distance ``1 - sum_i alpha_i rho_i``.

    By default the weights come from ``l1``, so the result is not symmetric in
    its arguments. ``direction="symmetric"`` averages both directions.
    Passing ``variance_fraction`` first prunes both layers with
    :func:`svcca_preprocess` (the thresholded variant).
    """
    if direction not in DIRECTIONS:
        raise InvalidArgument(f"unknown direction {direction!r}")
    if variance_fraction is not None:
        l1 = svcca_preprocess(l1, variance_fraction)
        l2 = svcca_preprocess(l2, variance_fraction)
    r = compute_cca(l1, l2, eps)
    if direction == "l1_weighted":
        d, w = _weighted(r, l1, "left")
    elif direction == "l2_weighted":
        d, w = _weighted(r, l2, "right")
    else:
        d1, w1 = _weighted(r, l1, "left")
        d2, w2 = _weighted(r, l2, "right")
        d, w = 0.5 * (d1 + d2), 0.5 * (w1 + w2)
    return DistanceReport(
        "pwcca",
        min(max(d, 0.0), 1.0),
        weights=w,
        direction=direction,
        metadata={"c": r.c, "rho": r.rho, "variance_fraction": variance_fraction},
    )


def svcca_distance(l1, l2, variance_fraction: float = DEFAULT_VARIANCE_FRACTION, eps: float = DEFAULT_EPS) -> DistanceReport:
    """Mean CCA distance after SVD pruning of both layers."""
    p1 = svcca_preprocess(l1, variance_fraction)
    p2 = svcca_preprocess(l2, variance_fraction)
    rep = mean_cca_distance(compute_cca(p1, p2, eps))
    rep.metric = "svcca"
    rep.metadata.update(variance_fraction=variance_fraction, kept=(p1.shape[0], p2.shape[0]))
    return rep


# --- Bartlett's test ---------------------------------------------------------

def _check_bartlett_args(rho: np.ndarray, n: int, a: int, b: int, k: int) -> None:
    c = min(a, b)
    if c < 1:
        raise InvalidArgument("need at least one coefficient (min(a, b) >= 1)")
    if not 0 <= k < c:
        raise InvalidArgument(f"k must satisfy 0 <= k < {c}, got {k}")
    if n <= a + b:
        raise InvalidArgument(f"need n > a + b, got n={n}, a={a}, b={b}")
    if len(rho) < c:
        raise InvalidArgument(f"expected {c} coefficients, got {len(rho)}")
    if np.any(rho < 0) or np.any(np.diff(rho[:c]) > 1e-12):
        raise InvalidArgument("rho must be nonnegative and sorted nonincreasing")


def _bartlett_unchecked(rho: np.ndarray, n: int, a: int, b: int, k: int) -> float:
    c = min(a, b)
    correction = float(np.sum(1.0 / rho[:k] ** 2))
    scale = n - k - 0.5 * (a + b + 1) + correction
    return -scale * float(np.sum(np.log1p(-rho[k:c] ** 2)))


def bartlett_statistic(rho, n: int, a: int, b: int, k: int) -> float:
    """Bartlett's statistic ``T_k`` for the hypothesis of ``k`` significant correlations.

    The correction term adds ``sum_{i<=k} rho_i**-2``.
    """
    rho = np.asarray(rho, dtype=float)
    _check_bartlett_args(rho, n, a, b, k)
    c = min(a, b)
    if np.any(rho[:c] >= 1):
        raise InvalidArgument("coefficients must be < 1")
    if np.any(rho[:k] == 0):
        raise InvalidArgument("zero coefficient inside the correction term")
    return _bartlett_unchecked(rho, n, a, b, k)


def estimate_significant_correlations(
    rho, n: int, a: int, b: int, alpha_level: float = DEFAULT_ALPHA_LEVEL
) -> int:
    """Sequential Bartlett test: the first ``k`` whose null is not rejected.

    Returns ``min(a, b)`` when every null is rejected. A trailing coefficient
    equal to one makes ``T_k`` infinite, which rejects.
    """
    rho = np.asarray(rho, dtype=float)
    c = min(a, b)
    _check_bartlett_args(rho, n, a, b, 0)
    for k in range(c):
        if np.any(rho[k:c] >= 1):
            continue
        if k > 0 and rho[k - 1] == 0:
            return k
        t = _bartlett_unchecked(rho, n, a, b, k)
        if chi_squared_sf(max(t, 0.0), (a - k) * (b - k)) > alpha_level:
            return k
    return c


def bartlett_cca_distance(l1, l2, alpha_level: float = DEFAULT_ALPHA_LEVEL, eps: float = DEFAULT_EPS) -> DistanceReport:
    """Mean CCA distance over the Bartlett-significant coefficients.

    ``a`` and ``b`` are the retained ranks of the two layers. No significant
    coefficient gives distance 1.
    """
    r = compute_cca(l1, l2, eps)
    a, b = r.retained_rank_left, r.retained_rank_right
    k_hat = estimate_significant_correlations(r.rho, r.n, a, b, alpha_level)
    d = 1.0 if k_hat == 0 else 1.0 - float(np.mean(r.rho[:k_hat]))
    return DistanceReport(
        "bartlett_cca",
        min(max(d, 0.0), 1.0),
        k_significant=k_hat,
        metadata={"c": r.c, "alpha_level": alpha_level},
    )


# --- baselines ---------------------------------------------------------------

def _same_shape(l1, l2) -> tuple[np.ndarray, np.ndarray]:
    l1 = as_activations(l1, "l1")
    l2 = as_activations(l2, "l2")
    if l1.shape != l2.shape:
        raise ShapeMismatch(f"shapes differ: {l1.shape} vs {l2.shape}")
    return l1, l2


def cosine_distance(l1, l2) -> DistanceReport:
    l1, l2 = _same_shape(l1, l2)
    n1, n2 = np.linalg.norm(l1), np.linalg.norm(l2)
    if n1 == 0 or n2 == 0:
        raise ZeroNorm("cosine distance is undefined for a zero matrix")
    d = 1.0 - float(np.sum(l1 * l2)) / (n1 * n2)
    return DistanceReport("cosine", max(d, 0.0))


def euclidean_distance(l1, l2) -> DistanceReport:
    """Frobenius distance normalized to a per-entry RMS; the raw value is in metadata."""
    l1, l2 = _same_shape(l1, l2)
    raw = float(np.linalg.norm(l1 - l2))
    return DistanceReport("euclidean", raw / math.sqrt(l1.size), metadata={"raw": raw})


def distance(l1, l2, metric: str = "pwcca", **kwargs) -> DistanceReport:
    """Dispatch to one of :data:`METRICS` by name."""
    if metric == "pwcca":
        return pwcca_distance(l1, l2, **kwargs)
    if metric == "mean_cca":
        return mean_cca_distance(compute_cca(l1, l2, **kwargs))
    if metric == "bartlett_cca":
        return bartlett_cca_distance(l1, l2, **kwargs)
    if metric == "svcca":
        return svcca_distance(l1, l2, **kwargs)
    if metric == "cosine":
        return cosine_distance(l1, l2)
    if metric == "euclidean":
        return euclidean_distance(l1, l2)
    raise InvalidArgument(f"unknown metric {metric!r}; expected one of {METRICS}")
