"""Canonical correlation analysis between two activation matrices."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ColumnMismatch, DegenerateInput, AllEigenvaluesNegligible, InvalidArgument
from .tensor_core import DEFAULT_EPS, as_matrix, center_rows, covariance_blocks, psd_whitener, svd

DEFAULT_VARIANCE_FRACTION = 0.99


def as_activations(layer, name: str = "layer") -> np.ndarray:
    """Validate an activation matrix (rows = neurons, cols = datapoints)."""
    arr = as_matrix(layer, name)
    if arr.shape[1] < 2:
        raise InvalidArgument(f"{name} needs at least 2 datapoints, got {arr.shape[1]}")
    return arr


@dataclass(frozen=True)
class CcaResult:
    """Output of :func:`compute_cca`.

    ``rho`` holds the canonical correlations, sorted nonincreasing. Row ``i``
    of ``left_canonical`` is the unit-norm datapoint-space vector
    ``u_i^T Sigma11^{-1/2} L1``; ``left_directions`` holds the ``u_i`` in the
    whitened neuron space and ``left_weights`` the equivalent neuron-space
    weights ``Sigma11^{-1/2} u_i``. The ``right_*`` fields mirror these.
    """

    rho: np.ndarray
    left_directions: np.ndarray
    right_directions: np.ndarray
    left_weights: np.ndarray
    right_weights: np.ndarray
    left_canonical: np.ndarray
    right_canonical: np.ndarray
    retained_rank_left: int
    retained_rank_right: int
    n: int

    @property
    def c(self) -> int:
        return len(self.rho)

    def canonical(self, side: str) -> np.ndarray:
        if side == "left":
            return self.left_canonical
        if side == "right":
            return self.right_canonical
        raise InvalidArgument(f"side must be 'left' or 'right', got {side!r}")


def _whiten(cov: np.ndarray, eps: float, name: str) -> np.ndarray:
    try:
        return psd_whitener(cov, eps)
    except AllEigenvaluesNegligible as exc:
        raise DegenerateInput(f"{name} has zero retained rank (constant rows?)") from exc


def _unit_rows(m: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return m / norms


def compute_cca(l1, l2, eps: float = DEFAULT_EPS) -> CcaResult:
    """CCA between ``l1`` (a x n) and ``l2`` (b x n).

    Both layers are centered, whitened on the eigenspace of their covariance
    that survives the relative ``eps`` cutoff, and the whitened
    cross-covariance is decomposed with an SVD. The number of coefficients is
    the smaller of the two retained ranks.
    """
    l1 = as_activations(l1, "l1")
    l2 = as_activations(l2, "l2")
    if l1.shape[1] != l2.shape[1]:
        raise ColumnMismatch(f"datapoint counts differ: {l1.shape[1]} vs {l2.shape[1]}")
    n = l1.shape[1]
    c1 = center_rows(l1)
    c2 = center_rows(l2)
    s11, s22, s12 = covariance_blocks(c1, c2)
    w1 = _whiten(s11, eps, "l1")  # r1 x a
    w2 = _whiten(s22, eps, "l2")  # r2 x b
    r1, r2 = w1.shape[0], w2.shape[0]
    dec = svd(w1 @ s12 @ w2.T)
    c = min(r1, r2)
    rho = np.clip(dec.singular_values[:c], 0.0, 1.0)
    u = dec.u[:, :c]  # r1 x c, coordinates in the retained eigenbasis
    v = dec.vt[:c].T
    # row i: u_i^T Sigma^{-1/2} expressed in neuron space
    left_w = u.T @ w1
    right_w = v.T @ w2
    # whitened coordinates lifted back to R^a: V_r @ u_i
    e1 = w1 / np.linalg.norm(w1, axis=1, keepdims=True)
    e2 = w2 / np.linalg.norm(w2, axis=1, keepdims=True)
    return CcaResult(
        rho=rho,
        left_directions=u.T @ e1,
        right_directions=v.T @ e2,
        left_weights=left_w,
        right_weights=right_w,
        left_canonical=_unit_rows(left_w @ c1),
        right_canonical=_unit_rows(right_w @ c2),
        retained_rank_left=r1,
        retained_rank_right=r2,
        n=n,
    )


def _fix_signs(vt: np.ndarray) -> np.ndarray:
    # make the largest-magnitude entry of each row positive so outputs are reproducible
    idx = np.argmax(np.abs(vt), axis=1)
    signs = np.sign(vt[np.arange(vt.shape[0]), idx])
    signs[signs == 0] = 1.0
    return signs[:, None]


def svcca_preprocess(layer, variance_fraction: float = DEFAULT_VARIANCE_FRACTION) -> np.ndarray:
    """Project a layer onto its top singular directions.

    Keeps the fewest directions whose squared singular values reach
    ``variance_fraction`` of the total and returns them scaled by their
    singular values, one row per kept direction.
    """
    if not 0 < variance_fraction <= 1:
        raise InvalidArgument("variance_fraction must lie in (0, 1]")
    layer = as_activations(layer)
    centered = center_rows(layer)
    dec = svd(centered)
    s2 = dec.singular_values**2
    total = s2.sum()
    if total == 0:
        raise DegenerateInput("layer has zero variance")
    cum = np.cumsum(s2)
    # tolerance keeps fraction=1 from discarding the last nonzero direction to roundoff
    keep = int(np.searchsorted(cum, variance_fraction * total * (1 - 1e-12)) + 1)
    keep = min(keep, int(np.count_nonzero(dec.singular_values > dec.singular_values[0] * 1e-12)))
    vt = dec.vt[:keep]
    vt = vt * _fix_signs(vt)
    return dec.singular_values[:keep, None] * vt
