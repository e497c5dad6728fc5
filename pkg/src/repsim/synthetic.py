"""Ground-truth generators: planted signal/noise layer pairs and toy RNNs."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import InvalidArgument, NumericalOverflow
from .similarity import distance, mean_cca_distance, pwcca_distance, svcca_distance
from .cca import compute_cca
from .tensor_core import random_orthogonal, random_rotation

SNR_K_GRID = (20, 50, 70, 80, 100, 120, 140, 160, 180, 199)
SWEEP_METRICS = ("mean_cca", "pwcca", "svcca")
OVERFLOW_LIMIT = 1e12


@dataclass(frozen=True)
class SnrSpec:
    signal_dims: int = 20
    total_dims: int = 200
    datapoints: int = 2000
    noise_std: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.signal_dims <= self.total_dims:
            raise InvalidArgument("need 1 <= signal_dims <= total_dims")
        if self.noise_std < 0:
            raise InvalidArgument("noise_std must be nonnegative")
        if self.datapoints < 2:
            raise InvalidArgument("need at least 2 datapoints")


def make_signal_noise_pair(spec: SnrSpec) -> tuple[np.ndarray, np.ndarray]:
    """Two layers sharing a ``k``-dimensional signal up to an orthonormal map.

    ``X`` stacks ``k`` standard-normal signal rows over ``total - k`` noise rows
    with standard deviation ``noise_std``. ``Y`` stacks a random orthonormal
    transform of the same signal rows over freshly drawn noise.
    """
    rng = np.random.default_rng(spec.seed)
    k, n = spec.signal_dims, spec.datapoints
    signal = rng.standard_normal((k, n))
    noise_x = spec.noise_std * rng.standard_normal((spec.total_dims - k, n))
    q = random_orthogonal(k, rng)
    noise_y = spec.noise_std * rng.standard_normal((spec.total_dims - k, n))
    x = np.vstack([signal, noise_x])
    y = np.vstack([q @ signal, noise_y])
    return x, y


@dataclass(frozen=True)
class SweepRecord:
    k: int
    seed: int
    metric: str
    distance: float


def snr_distances(x: np.ndarray, y: np.ndarray) -> dict[str, float]:
    r = compute_cca(x, y)
    return {
        "mean_cca": mean_cca_distance(r).distance,
        "pwcca": pwcca_distance(x, y).distance,
        "svcca": svcca_distance(x, y).distance,
    }


def run_snr_sweep(
    k_values: Sequence[int] = SNR_K_GRID,
    spec_template: SnrSpec = SnrSpec(),
    seeds: Sequence[int] = range(10),
) -> list[SweepRecord]:
    """Mean, projection-weighted and SVCCA distances for every ``(k, seed)``."""
    if not len(k_values):
        raise InvalidArgument("k_values must be nonempty")
    records = []
    for k in k_values:
        for seed in seeds:
            x, y = make_signal_noise_pair(replace(spec_template, signal_dims=int(k), seed=int(seed)))
            for metric, d in snr_distances(x, y).items():
                records.append(SweepRecord(int(k), int(seed), metric, d))
    return records


def summarize_sweep(records: Sequence[SweepRecord]) -> list[dict]:
    """Aggregate sweep records into ``{k, metric, mean, std, count}`` rows."""
    groups: dict[tuple[int, str], list[float]] = {}
    for rec in records:
        groups.setdefault((rec.k, rec.metric), []).append(rec.distance)
    rows = []
    for (k, metric), vals in sorted(groups.items()):
        v = np.asarray(vals)
        rows.append({"k": k, "metric": metric, "mean": float(v.mean()), "std": float(v.std()), "count": len(v)})
    return rows


# --- toy recurrent networks ------------------------------------------------

@dataclass(frozen=True)
class ToyRnnSpec:
    hidden_dim: int = 64
    steps: int = 50
    runs: int = 1000
    blend_alpha: float = 0.0
    bias: tuple[float, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.hidden_dim < 1 or self.steps < 1:
            raise InvalidArgument("hidden_dim and steps must be >= 1")
        if self.runs < 2:
            raise InvalidArgument("runs must be >= 2")
        if self.blend_alpha < 0:
            raise InvalidArgument("blend_alpha must be nonnegative")
        if self.bias is not None and len(self.bias) != self.hidden_dim:
            raise InvalidArgument("bias length must equal hidden_dim")


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def simulate_blended_rnn(spec: ToyRnnSpec) -> list[np.ndarray]:
    """Run ``h <- W_rot h + alpha * sigmoid(W_rand h) + b`` without inputs.

    Every run starts from its own standard-normal hidden state. Returns one
    ``hidden_dim x runs`` matrix per timestep, starting with the initial state.
    """
    rng = np.random.default_rng(spec.seed)
    w_rot = random_rotation(spec.hidden_dim, int(rng.integers(2**63)))
    w_rand = rng.standard_normal((spec.hidden_dim, spec.hidden_dim))
    h = rng.standard_normal((spec.hidden_dim, spec.runs))
    b = np.zeros((spec.hidden_dim, 1)) if spec.bias is None else np.asarray(spec.bias, float)[:, None]
    states = [h]
    for t in range(1, spec.steps):
        h = w_rot @ h
        if spec.blend_alpha:
            h = h + spec.blend_alpha * _sigmoid(w_rand @ states[-1])
        h = h + b
        if not np.all(np.abs(h) <= OVERFLOW_LIMIT):
            raise NumericalOverflow(f"hidden state exceeded {OVERFLOW_LIMIT:g} at step {t}")
        states.append(h)
    return states


def simulate_rotation_rnn(spec: ToyRnnSpec) -> list[np.ndarray]:
    """Linear RNN whose recurrent matrix is a random rotation."""
    if spec.blend_alpha != 0 or spec.bias is not None:
        spec = replace(spec, blend_alpha=0.0, bias=None)
    return simulate_blended_rnn(spec)


def timestep_distance_profile(states: Sequence[np.ndarray], metric: str = "pwcca") -> np.ndarray:
    """Distance from every state to the final state."""
    if len(states) < 2:
        raise InvalidArgument("need at least 2 timesteps")
    final = states[-1]
    return np.array([distance(h, final, metric).distance for h in states])
