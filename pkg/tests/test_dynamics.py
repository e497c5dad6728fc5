import numpy as np
import pytest

from conftest import random_invertible
from repsim.dynamics import (
    CheckpointSeries,
    coefficient_trajectories,
    convergence_curve,
    first_crossing,
    group_by_sequence_step,
    split_stable_unstable,
    stability_curves,
    subspace_similarity,
)
from repsim.errors import InsufficientRank, InvalidArgument


def _drifting_series(rng, count=5, dims=4, n=100):
    base = rng.standard_normal((dims, n))
    acts = [base + (count - 1 - i) * rng.standard_normal((dims, n)) for i in range(count)]
    return CheckpointSeries(tuple(range(0, 10 * count, 10)), tuple(acts))


def test_series_validation(rng):
    x = rng.standard_normal((3, 10))
    with pytest.raises(InvalidArgument):
        CheckpointSeries((0,), (x,))
    with pytest.raises(InvalidArgument):
        CheckpointSeries((5, 5), (x, x))
    with pytest.raises(InvalidArgument):
        CheckpointSeries((0, 1), (x, x[:2]))
    s = CheckpointSeries((0, 1, 2, 3), (x,) * 4)
    assert s.mid_index == 2
    assert CheckpointSeries((0, 1, 2), (x,) * 3).mid_index == 1


def test_curve_ends_at_zero_and_decreases(rng):
    s = _drifting_series(rng)
    curve = convergence_curve(s)
    assert curve[-1] == pytest.approx(0.0, abs=1e-8)
    assert curve[0] > curve[-2]


def test_curve_is_affine_invariant(rng):
    s = _drifting_series(rng)
    moved = CheckpointSeries(s.steps, tuple(random_invertible(rng, 4) @ a + 2.0 for a in s.activations))
    np.testing.assert_allclose(convergence_curve(moved, "mean_cca"), convergence_curve(s, "mean_cca"), atol=1e-6)
    with pytest.raises(InvalidArgument):
        convergence_curve(s, "svcca")


def test_first_crossing():
    steps = [0, 10, 20, 30]
    assert first_crossing([0.9, 0.5, 0.1, 0.0], steps, 0.2) == 20
    assert first_crossing([0.9, 0.1, 0.3, 0.0], steps, 0.2) == 30
    assert first_crossing([0.1, 0.1, 0.1, 0.0], steps, 0.2) == 0
    assert first_crossing([0.9, 0.9, 0.9, 0.9], steps, 0.2) is None


def test_coefficient_trajectories_shape(rng):
    s = _drifting_series(rng)
    traj = coefficient_trajectories(s)
    assert traj.shape == (5, 4)
    np.testing.assert_allclose(traj[-1], 1.0, atol=1e-8)


def _planted(seed, n=200, count=5):
    rng = np.random.default_rng(seed)
    frozen = rng.standard_normal(n)
    acts = []
    for _ in range(count):
        mix = random_invertible(rng, 2, max_cond=10)
        acts.append(mix @ np.vstack([frozen, rng.standard_normal(n)]))
    return CheckpointSeries(tuple(range(count)), tuple(acts)), frozen


@pytest.mark.parametrize("side", ["early", "mid"])
def test_split_finds_the_frozen_direction(side):
    s, frozen = _planted(0)
    split = split_stable_unstable(s, t_early=0, side=side)
    assert split.m == 1 and split.t_mid == 2
    f = frozen - frozen.mean()
    cos = abs(split.stable_vectors[0] @ f) / np.linalg.norm(f)
    assert cos > 0.9
    assert split.stable_rho[0] > split.unstable_rho[0]


def test_split_errors(rng):
    s, _ = _planted(1)
    with pytest.raises(InsufficientRank):
        split_stable_unstable(s, t_early=0, m=2)
    with pytest.raises(InvalidArgument):
        split_stable_unstable(s, t_early=3)
    with pytest.raises(InvalidArgument):
        split_stable_unstable(s, t_early=0, side="late")


def test_stability_curves(rng):
    s, _ = _planted(2)
    split = split_stable_unstable(s, t_early=0)
    curves = stability_curves(s, split)
    assert list(curves["steps"]) == list(s.steps)
    assert np.all(curves["stable"] > 0.9)
    assert np.mean(curves["unstable"]) < np.mean(curves["stable"])


def test_subspace_similarity_examples(rng):
    n = 50
    layer = rng.standard_normal((3, n))
    assert subspace_similarity(layer[:2], layer) == pytest.approx(1.0, abs=1e-8)
    # a vector orthogonal to the centered row space of the layer
    c = layer - layer.mean(axis=1, keepdims=True)
    v = rng.standard_normal(n)
    v -= v.mean()
    v -= c.T @ np.linalg.lstsq(c.T, v, rcond=None)[0]
    assert subspace_similarity(v[None, :], layer) == pytest.approx(0.0, abs=1e-8)
    both = np.vstack([c[0], v])
    assert subspace_similarity(both, layer) == pytest.approx(0.5, abs=1e-8)
    assert subspace_similarity(layer[:2], layer, weighted=True) == pytest.approx(1.0, abs=1e-8)


def test_group_by_sequence_step():
    out = np.arange(24.0).reshape(2, 12)
    groups = group_by_sequence_step(out, 3)
    assert [g.shape for g in groups] == [(2, 4)] * 3
    cols = sorted(int(v) for g in groups for v in g[0])
    assert cols == list(range(12))
    assert np.array_equal(groups[1][0], [1, 4, 7, 10])
    with pytest.raises(InvalidArgument):
        group_by_sequence_step(out, 0)
