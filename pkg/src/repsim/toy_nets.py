"""Small fully connected networks trained with hand-written backpropagation.

These stand in for the convolutional networks of the group experiments:
every run records post-nonlinearity activations on a fixed probe set so the
similarity and dynamics modules can compare networks and checkpoints.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .analysis import DistanceMatrix, pairwise_distance_matrix
from .errors import CountTooLarge, DivergenceDetected, InvalidArgument
from .tensor_core import as_matrix

ACTIVATIONS = ("relu", "tanh")


@dataclass(frozen=True)
class MlpSpec:
    layer_widths: tuple[int, ...]
    activation: str = "relu"
    seed: int = 0

    def __post_init__(self):
        widths = tuple(int(w) for w in self.layer_widths)
        if len(widths) < 3:
            raise InvalidArgument("need input, at least one hidden, and output widths")
        if min(widths) < 1:
            raise InvalidArgument("widths must be >= 1")
        if self.activation not in ACTIVATIONS:
            raise InvalidArgument(f"activation must be one of {ACTIVATIONS}")
        object.__setattr__(self, "layer_widths", widths)

    def scaled(self, factor: float) -> "MlpSpec":
        """Copy with every hidden width multiplied by ``factor`` (rounded, at least 1)."""
        w = self.layer_widths
        hidden = tuple(max(1, int(round(h * factor))) for h in w[1:-1])
        return replace(self, layer_widths=(w[0], *hidden, w[-1]))


@dataclass(frozen=True)
class SyntheticDataset:
    inputs: np.ndarray  # features x examples
    labels: np.ndarray
    classes: int
    seed: int

    @property
    def size(self) -> int:
        return self.inputs.shape[1]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 100
    batch_size: int = 32
    checkpoint_every: int | None = None
    n_checkpoints: int = 20
    label_mode: str = "true_labels"
    shuffle_seed: int = 0
    target_loss: float | None = None

    def __post_init__(self):
        if self.learning_rate < 0:
            raise InvalidArgument("learning_rate must be nonnegative")
        if self.label_mode not in ("true_labels", "shuffled_labels"):
            raise InvalidArgument(f"unknown label_mode {self.label_mode!r}")
        if self.batch_size < 1 or self.epochs < 0:
            raise InvalidArgument("batch_size must be >= 1 and epochs >= 0")


@dataclass
class ToyNetCheckpoint:
    step: int
    train_loss: float
    per_layer_activations: list[np.ndarray]
    train_accuracy: float = float("nan")
    params: list[tuple[np.ndarray, np.ndarray]] | None = field(default=None, repr=False)


# --- data --------------------------------------------------------------------

def make_dataset(features: int, classes: int, per_class: int, spread: float, seed: int,
                 centers: np.ndarray | None = None) -> SyntheticDataset:
    """Gaussian class clusters around standard-normal class means.

    Pass ``centers`` (features x classes) to draw a second sample, e.g. a
    probe or test set, from the same class means.
    """
    if min(features, classes, per_class) < 1:
        raise InvalidArgument("counts must be >= 1")
    if spread <= 0:
        raise InvalidArgument("spread must be positive")
    rng = np.random.default_rng(seed)
    if centers is None:
        centers = rng.standard_normal((features, classes))
    labels = np.repeat(np.arange(classes), per_class)
    inputs = centers[:, labels] + spread * rng.standard_normal((features, labels.size))
    return SyntheticDataset(inputs, labels, classes, seed)


def class_centers(features: int, classes: int, seed: int) -> np.ndarray:
    """The class means :func:`make_dataset` draws for the same ``seed``."""
    return np.random.default_rng(seed).standard_normal((features, classes))


def shuffle_labels(d: SyntheticDataset, shuffle_seed: int) -> SyntheticDataset:
    perm = np.random.default_rng(shuffle_seed).permutation(d.labels.size)
    return replace(d, labels=d.labels[perm].copy())


def subsample_rows(layer, count: int, seed: int) -> np.ndarray:
    """Seeded uniform choice of ``count`` rows, kept in their original order."""
    layer = as_matrix(layer)
    if count > layer.shape[0]:
        raise CountTooLarge(f"cannot take {count} rows from {layer.shape[0]}")
    if count < 1:
        raise InvalidArgument("count must be >= 1")
    idx = np.sort(np.random.default_rng(seed).choice(layer.shape[0], count, replace=False))
    return layer[idx]


# --- network -----------------------------------------------------------------

def init_params(spec: MlpSpec) -> list[tuple[np.ndarray, np.ndarray]]:
    rng = np.random.default_rng(spec.seed)
    gain = 2.0 if spec.activation == "relu" else 1.0
    params = []
    for fan_in, fan_out in zip(spec.layer_widths, spec.layer_widths[1:]):
        w = rng.standard_normal((fan_out, fan_in)) * np.sqrt(gain / fan_in)
        params.append((w, np.zeros(fan_out)))
    return params


def _act(z, kind):
    return np.maximum(z, 0.0) if kind == "relu" else np.tanh(z)


def _act_grad(z, a, kind):
    return (z > 0).astype(z.dtype) if kind == "relu" else 1.0 - a * a


def softmax(logits: np.ndarray) -> np.ndarray:
    """Column-wise softmax."""
    shifted = logits - logits.max(axis=0, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=0, keepdims=True)


def forward(params, x: np.ndarray, activation: str):
    """Return ``(pre_activations, activations)``; the last activation is the logits."""
    zs, acts = [], [x]
    for i, (w, b) in enumerate(params):
        z = w @ acts[-1] + b[:, None]
        zs.append(z)
        acts.append(z if i == len(params) - 1 else _act(z, activation))
    return zs, acts


def cross_entropy(params, x, labels, activation: str) -> float:
    _, acts = forward(params, x, activation)
    logits = acts[-1]
    shifted = logits - logits.max(axis=0, keepdims=True)
    logp = shifted - np.log(np.exp(shifted).sum(axis=0, keepdims=True))
    return float(-logp[labels, np.arange(labels.size)].mean())


def loss_and_grads(params, x, labels, activation: str):
    """Mean softmax cross-entropy and its gradient for every ``(W, b)``."""
    zs, acts = forward(params, x, activation)
    probs = softmax(acts[-1])
    n = labels.size
    cols = np.arange(n)
    loss = float(-np.log(np.maximum(probs[labels, cols], 1e-300)).mean())
    delta = probs
    delta[labels, cols] -= 1.0
    delta /= n
    grads = [None] * len(params)
    for i in range(len(params) - 1, -1, -1):
        w, _ = params[i]
        grads[i] = (delta @ acts[i].T, delta.sum(axis=1))
        if i:
            delta = (w.T @ delta) * _act_grad(zs[i - 1], acts[i], activation)
    return loss, grads


def predict(params, x, activation: str) -> np.ndarray:
    return forward(params, x, activation)[1][-1].argmax(axis=0)


def accuracy(params, data: SyntheticDataset, activation: str) -> float:
    return float(np.mean(predict(params, data.inputs, activation) == data.labels))


def probe_activations(params, probe: np.ndarray, activation: str) -> list[np.ndarray]:
    """Hidden-layer activations (post-nonlinearity) followed by the logits."""
    return [a.copy() for a in forward(params, probe, activation)[1][1:]]


def _checkpoint_steps(total: int, cfg: TrainConfig) -> set[int]:
    if cfg.checkpoint_every:
        steps = set(range(0, total + 1, cfg.checkpoint_every))
    else:
        steps = {0}
        if total > 0:
            grid = np.geomspace(1, total, max(cfg.n_checkpoints - 1, 1))
            steps |= {int(round(s)) for s in grid}
    steps.add(total)
    return steps


def train_mlp(spec: MlpSpec, data: SyntheticDataset, cfg: TrainConfig, probe) -> list[ToyNetCheckpoint]:
    """Mini-batch SGD on softmax cross-entropy, checkpointing probe activations.

    Checkpoints are log-spaced over the planned step count unless
    ``cfg.checkpoint_every`` is set; step 0 and the final step are always
    recorded. With ``cfg.target_loss`` training stops after the first epoch
    whose full training loss is below it.
    """
    probe = as_matrix(probe, "probe")
    if probe.shape[1] < 2:
        raise InvalidArgument("probe needs at least 2 columns")
    if probe.shape[0] != spec.layer_widths[0] or data.inputs.shape[0] != spec.layer_widths[0]:
        raise InvalidArgument("input width does not match data")
    if data.labels.max() >= spec.layer_widths[-1]:
        raise InvalidArgument("output width smaller than number of classes")
    if cfg.batch_size > data.size:
        raise InvalidArgument("batch_size exceeds dataset size")
    if cfg.label_mode == "shuffled_labels":
        data = shuffle_labels(data, cfg.shuffle_seed)

    params = [(w.copy(), b.copy()) for w, b in init_params(spec)]
    batches_per_epoch = int(np.ceil(data.size / cfg.batch_size))
    total = cfg.epochs * batches_per_epoch
    planned = _checkpoint_steps(total, cfg)
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 1]))
    x, y = data.inputs, data.labels

    def snapshot(step):
        loss = cross_entropy(params, x, y, spec.activation)
        if not np.isfinite(loss):
            raise DivergenceDetected(f"training loss became {loss} at step {step}")
        return ToyNetCheckpoint(
            step=step,
            train_loss=loss,
            per_layer_activations=probe_activations(params, probe, spec.activation),
            train_accuracy=float(np.mean(predict(params, x, spec.activation) == y)),
            params=[(w.copy(), b.copy()) for w, b in params],
        )

    checkpoints = [snapshot(0)]
    step = 0
    for _ in range(cfg.epochs):
        order = rng.permutation(data.size)
        for start in range(0, data.size, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss, grads = loss_and_grads(params, x[:, idx], y[idx], spec.activation)
            if not np.isfinite(loss):
                raise DivergenceDetected(f"batch loss became {loss} at step {step}")
            params = [(w - cfg.learning_rate * gw, b - cfg.learning_rate * gb)
                      for (w, b), (gw, gb) in zip(params, grads)]
            step += 1
            if step in planned and step != total:
                checkpoints.append(snapshot(step))
        if cfg.target_loss is not None and cross_entropy(params, x, y, spec.activation) < cfg.target_loss:
            break
    if checkpoints[-1].step != step:
        checkpoints.append(snapshot(step))
    return checkpoints


# --- group experiments -------------------------------------------------------

@dataclass
class GroupMember:
    name: str
    group: str
    spec: MlpSpec
    cfg: TrainConfig


@dataclass
class GroupResult:
    members: list[GroupMember]
    layer_matrices: list[DistanceMatrix]
    final_checkpoints: list[ToyNetCheckpoint]
    test_accuracy: list[float] | None = None


def run_group_experiment(
    group: Sequence[GroupMember],
    data: SyntheticDataset,
    probe,
    metric: str = "pwcca",
    test: SyntheticDataset | None = None,
    subsample: int | None = None,
    subsample_seed: int = 0,
) -> GroupResult:
    """Train every member and compare them layer by layer on the probe set.

    ``subsample`` draws that many rows from each layer before comparison,
    which keeps comparisons between different widths on an equal footing.
    """
    if len(group) < 2:
        raise InvalidArgument("a group experiment needs at least 2 networks")
    finals = []
    for member in group:
        finals.append(train_mlp(member.spec, data, member.cfg, probe)[-1])
    depth = {len(c.per_layer_activations) for c in finals}
    if len(depth) != 1:
        raise InvalidArgument("all networks must have the same number of layers")
    names = [m.name for m in group]
    matrices = []
    for layer in range(depth.pop()):
        acts = [c.per_layer_activations[layer] for c in finals]
        if subsample is not None:
            acts = [subsample_rows(a, min(subsample, a.shape[0]), subsample_seed + i) for i, a in enumerate(acts)]
        matrices.append(pairwise_distance_matrix(acts, metric, labels=names))
    test_acc = None
    if test is not None:
        test_acc = [accuracy(c.params, test, m.spec.activation) for c, m in zip(finals, group)]
    return GroupResult(list(group), matrices, finals, test_acc)
