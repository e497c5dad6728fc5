"""Training-time and sequence-time analyses of a single layer."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cca import as_activations, compute_cca
from .errors import InsufficientRank, InvalidArgument
from .similarity import distance, mean_cca_distance, pwcca_distance

CURVE_METRICS = ("pwcca", "mean_cca", "cosine", "euclidean")


@dataclass(frozen=True)
class CheckpointSeries:
    """One layer's activations at successive training steps, on a fixed probe set."""

    steps: tuple[int, ...]
    activations: tuple[np.ndarray, ...]

    def __post_init__(self):
        steps = tuple(int(s) for s in self.steps)
        acts = tuple(as_activations(a, "checkpoint") for a in self.activations)
        if len(acts) < 2:
            raise InvalidArgument("a checkpoint series needs at least 2 checkpoints")
        if len(steps) != len(acts):
            raise InvalidArgument("steps and activations differ in length")
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise InvalidArgument("steps must be strictly increasing")
        if any(a.shape != acts[0].shape for a in acts):
            raise InvalidArgument("all checkpoints must share one shape")
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "activations", acts)

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def final(self) -> np.ndarray:
        return self.activations[-1]

    @property
    def mid_index(self) -> int:
        """Index of the ``T/2`` checkpoint, ``ceil((count - 1) / 2)``."""
        return math.ceil((len(self) - 1) / 2)

    def index_of(self, step: int) -> int:
        try:
            return self.steps.index(int(step))
        except ValueError:
            raise InvalidArgument(f"step {step} is not in the series") from None


def convergence_curve(series: CheckpointSeries, metric: str = "pwcca") -> np.ndarray:
    """Distance from each checkpoint to the final one."""
    if metric not in CURVE_METRICS:
        raise InvalidArgument(f"metric must be one of {CURVE_METRICS}")
    final = series.final
    return np.array([distance(a, final, metric).distance for a in series.activations])


def first_crossing(curve: Sequence[float], steps: Sequence[int], threshold: float) -> int | None:
    """First step at which ``curve`` drops below ``threshold`` and stays there."""
    curve = np.asarray(curve)
    above = np.flatnonzero(curve >= threshold)
    if len(above) == 0:
        return int(steps[0])
    i = above[-1] + 1
    return int(steps[i]) if i < len(steps) else None


def coefficient_trajectories(series: CheckpointSeries) -> np.ndarray:
    """Sorted CCA coefficients of every checkpoint against the final one.

    Rows are padded with NaN when rank truncation leaves a checkpoint with
    fewer coefficients than the others.
    """
    rows = [compute_cca(a, series.final).rho for a in series.activations]
    width = max(len(r) for r in rows)
    out = np.full((len(rows), width), np.nan)
    for i, r in enumerate(rows):
        out[i, : len(r)] = r
    return out


@dataclass(frozen=True)
class SubspaceSplit:
    stable_vectors: np.ndarray
    unstable_vectors: np.ndarray
    stable_rho: np.ndarray
    unstable_rho: np.ndarray
    t_early: int
    t_mid: int
    m: int
    side: str


def split_stable_unstable(
    series: CheckpointSeries, t_early: int, m: int | None = None, side: str = "early"
) -> SubspaceSplit:
    """Split CCA directions into the ``m`` most and ``m`` least converged.

    CCA is run between the checkpoint at step ``t_early`` and the ``T/2``
    checkpoint. With ``side="early"`` the canonical vectors come from the
    ``t_early`` layer, with ``side="mid"`` from the ``T/2`` layer.
    """
    if side not in ("early", "mid"):
        raise InvalidArgument("side must be 'early' or 'mid'")
    i_early = series.index_of(t_early)
    i_mid = series.mid_index
    if i_early >= i_mid:
        raise InvalidArgument("t_early must precede the midpoint checkpoint")
    r = compute_cca(series.activations[i_early], series.activations[i_mid])
    if m is None:
        m = min(100, r.c // 2)
    if m < 1 or r.c < 2 * m:
        raise InsufficientRank(f"need 2*m <= c, got m={m}, c={r.c}")
    vecs = r.left_canonical if side == "early" else r.right_canonical
    return SubspaceSplit(
        stable_vectors=vecs[:m],
        unstable_vectors=vecs[r.c - m :],
        stable_rho=r.rho[:m],
        unstable_rho=r.rho[r.c - m :],
        t_early=series.steps[i_early],
        t_mid=series.steps[i_mid],
        m=m,
        side=side,
    )


def subspace_similarity(vectors, layer, weighted: bool = False) -> float:
    """CCA similarity between a set of datapoint-space vectors and a layer."""
    vectors = as_activations(vectors, "vectors")
    layer = as_activations(layer, "layer")
    if weighted:
        return 1.0 - pwcca_distance(vectors, layer).distance
    return 1.0 - mean_cca_distance(compute_cca(vectors, layer)).distance


def stability_curves(series: CheckpointSeries, split: SubspaceSplit, weighted: bool = False) -> dict:
    """Similarity of the stable and unstable sets to every checkpoint from ``t_early`` on."""
    start = series.index_of(split.t_early)
    steps = series.steps[start:]
    acts = series.activations[start:]
    return {
        "steps": np.array(steps),
        "stable": np.array([subspace_similarity(split.stable_vectors, a, weighted) for a in acts]),
        "unstable": np.array([subspace_similarity(split.unstable_vectors, a, weighted) for a in acts]),
    }


def group_by_sequence_step(output, period: int) -> list[np.ndarray]:
    """Split columns by sequence position: group ``j`` holds columns ``i`` with ``i % period == j``."""
    output = np.asarray(output, dtype=float)
    if output.ndim != 2:
        raise InvalidArgument("output must be 2-D")
    if not 1 <= period <= output.shape[1]:
        raise InvalidArgument("need 1 <= period <= number of columns")
    return [output[:, j::period] for j in range(period)]
