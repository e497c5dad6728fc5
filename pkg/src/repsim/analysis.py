"""Aggregate statistics over pairwise distances: matrices, clustering, correlation."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

from .errors import InvalidArgument, ZeroVariance
from .similarity import distance


def max_workers() -> int:
    """Thread cap from ``REPSIM_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("REPSIM_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class DistanceMatrix:
    labels: list[str]
    values: np.ndarray
    metric: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        n = len(self.labels)
        if self.values.shape != (n, n):
            raise InvalidArgument(f"values must be {n}x{n}, got {self.values.shape}")
        if np.any(np.abs(np.diag(self.values)) > 1e-8):
            raise InvalidArgument("diagonal must be zero")
        if np.any(self.values < 0):
            raise InvalidArgument("distances must be nonnegative")

    @property
    def symmetrized(self) -> np.ndarray:
        return 0.5 * (self.values + self.values.T)

    @property
    def asymmetry(self) -> float:
        return float(np.abs(self.values - self.values.T).max())


def pairwise_distance_matrix(layers: Sequence[np.ndarray], metric: str = "pwcca",
                             labels: Sequence[str] | None = None, **kwargs) -> DistanceMatrix:
    """Evaluate ``metric`` on every ordered pair; the diagonal is zero."""
    if len(layers) < 2:
        raise InvalidArgument("need at least 2 layers")
    cols = {np.shape(l)[1] for l in layers}
    if len(cols) != 1:
        raise InvalidArgument("all layers must share the same datapoints")
    n = len(layers)
    labels = [str(i) for i in range(n)] if labels is None else [str(s) for s in labels]
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]

    def one(pair):
        i, j = pair
        return distance(layers[i], layers[j], metric, **kwargs).distance

    with ThreadPoolExecutor(max_workers=max_workers()) as pool:
        results = list(pool.map(one, pairs))
    values = np.zeros((n, n))
    for (i, j), d in zip(pairs, results):
        values[i, j] = d
    return DistanceMatrix(labels, values, metric)


@dataclass
class ClusterAssignment:
    assignments: dict[str, int]
    merge_heights: np.ndarray
    chosen_k: int

    def ids(self, labels: Sequence[str]) -> np.ndarray:
        return np.array([self.assignments[str(l)] for l in labels])


def _contiguous(raw: np.ndarray) -> np.ndarray:
    # relabel so cluster ids follow the first appearance of each cluster
    mapping: dict[int, int] = {}
    return np.array([mapping.setdefault(int(r), len(mapping)) for r in raw])


def choose_k_by_gap(heights: np.ndarray) -> int:
    """Cluster count that cuts the dendrogram at its largest jump in merge height."""
    n = len(heights) + 1
    if n <= 2:
        return 1
    jumps = np.diff(heights)
    i = int(np.argmax(jumps))
    # cutting after merge i leaves n - (i + 1) clusters
    return n - (i + 1)


def agglomerative_cluster(d: DistanceMatrix, k: int | None = None) -> ClusterAssignment:
    """Average-linkage clustering of the symmetrized matrix.

    Without ``k`` the dendrogram is cut at the largest gap between
    consecutive merge heights.
    """
    n = len(d.labels)
    if k is not None and not 1 <= k <= n:
        raise InvalidArgument(f"k must lie in [1, {n}]")
    if n == 1:
        return ClusterAssignment({d.labels[0]: 0}, np.zeros(0), 1)
    sym = d.symmetrized.copy()
    np.fill_diagonal(sym, 0.0)
    z = linkage(squareform(sym, checks=False), method="average")
    heights = z[:, 2]
    if k is None:
        k = choose_k_by_gap(heights)
    raw = fcluster(z, t=k, criterion="maxclust") if k < n else np.arange(n)
    ids = _contiguous(raw)
    return ClusterAssignment(dict(zip(d.labels, ids.tolist())), heights, int(ids.max() + 1))


def planted_block_matrix(block_sizes: Sequence[int], within: float = 0.1, between: float = 0.8,
                         noise_std: float = 0.05, seed: int = 0) -> tuple[DistanceMatrix, np.ndarray]:
    """Symmetric distance matrix with planted blocks, plus the true block ids."""
    rng = np.random.default_rng(seed)
    truth = np.repeat(np.arange(len(block_sizes)), block_sizes)
    n = truth.size
    base = np.where(truth[:, None] == truth[None, :], within, between)
    noise = rng.normal(0.0, noise_std, (n, n))
    noise = np.triu(noise, 1)
    vals = np.clip(base + noise + noise.T, 0.0, None)
    np.fill_diagonal(vals, 0.0)
    return DistanceMatrix([f"net{i}" for i in range(n)], vals), truth


def same_partition(a: Sequence[int], b: Sequence[int]) -> bool:
    """True when two labelings induce the same partition."""
    a, b = np.asarray(a), np.asarray(b)
    return bool(np.array_equal(a[:, None] == a[None, :], b[:, None] == b[None, :]))


def pearson_correlation(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise InvalidArgument("need two 1-D sequences of equal length >= 2")
    xc, yc = x - x.mean(), y - y.mean()
    sx, sy = np.sqrt(xc @ xc), np.sqrt(yc @ yc)
    if sx == 0 or sy == 0:
        raise ZeroVariance("pearson correlation needs nonzero variance in both inputs")
    return float(np.clip((xc @ yc) / (sx * sy), -1.0, 1.0))


def group_distance_stats(d: DistanceMatrix, groups: Sequence[str]) -> dict[str, dict]:
    """Mean and std of off-diagonal distances within each group and between groups.

    Keys are group names for within-group pairs and ``"inter"`` for pairs that
    straddle two groups.
    """
    groups = list(groups)
    if len(groups) != len(d.labels):
        raise InvalidArgument("one group name per label required")
    buckets: dict[str, list[float]] = {}
    for i, gi in enumerate(groups):
        for j, gj in enumerate(groups):
            if i == j:
                continue
            key = gi if gi == gj else "inter"
            buckets.setdefault(key, []).append(d.values[i, j])
    return {k: {"mean": float(np.mean(v)), "std": float(np.std(v)), "count": len(v)}
            for k, v in buckets.items()}
