import numpy as np
import pytest

from repsim.cca import compute_cca
from repsim.errors import InvalidArgument
from repsim.similarity import pwcca_distance
from repsim.synthetic import (
    SnrSpec,
    ToyRnnSpec,
    make_signal_noise_pair,
    run_snr_sweep,
    simulate_blended_rnn,
    simulate_rotation_rnn,
    summarize_sweep,
    timestep_distance_profile,
)


def test_pair_is_deterministic():
    spec = SnrSpec(signal_dims=5, total_dims=20, datapoints=100, seed=3)
    x1, y1 = make_signal_noise_pair(spec)
    x2, y2 = make_signal_noise_pair(spec)
    assert np.array_equal(x1, x2) and np.array_equal(y1, y2)
    assert x1.shape == y1.shape == (20, 100)


def test_pure_signal_is_recovered():
    x, y = make_signal_noise_pair(SnrSpec(signal_dims=30, total_dims=30, datapoints=300, noise_std=0.0))
    assert pwcca_distance(x, y).distance < 1e-4


def test_top_coefficients_track_the_signal():
    k = 10
    x, y = make_signal_noise_pair(SnrSpec(signal_dims=k, total_dims=40, datapoints=1000))
    rho = compute_cca(x, y).rho
    assert np.all(rho[:k] > 0.9)
    assert rho[k] < 0.5


def test_sweep_mean_distance_falls_with_k():
    template = SnrSpec(total_dims=40, datapoints=400)
    rows = summarize_sweep(run_snr_sweep([5, 15, 25, 39], template, seeds=[0, 1]))
    means = [r["mean"] for r in rows if r["metric"] == "mean_cca"]
    assert all(b < a for a, b in zip(means, means[1:]))
    assert {r["count"] for r in rows} == {2}


def test_spec_validation():
    with pytest.raises(InvalidArgument):
        SnrSpec(signal_dims=0)
    with pytest.raises(InvalidArgument):
        ToyRnnSpec(runs=1)
    with pytest.raises(InvalidArgument):
        ToyRnnSpec(hidden_dim=3, bias=(1.0,))


def test_rotation_rnn_preserves_norms_and_geometry():
    states = simulate_rotation_rnn(ToyRnnSpec(hidden_dim=8, steps=10, runs=30, seed=1))
    assert len(states) == 10
    g0 = states[0].T @ states[0]
    for h in states:
        np.testing.assert_allclose(np.linalg.norm(h, axis=0), np.linalg.norm(states[0], axis=0), rtol=1e-10)
        np.testing.assert_allclose(h.T @ h, g0, atol=1e-9)


def test_zero_alpha_equals_rotation():
    spec = ToyRnnSpec(hidden_dim=6, steps=5, runs=20, seed=4)
    a = simulate_blended_rnn(spec)
    b = simulate_rotation_rnn(ToyRnnSpec(hidden_dim=6, steps=5, runs=20, seed=4, blend_alpha=2.0))
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


def test_profile_ends_at_zero():
    states = simulate_blended_rnn(ToyRnnSpec(hidden_dim=6, steps=6, runs=50, blend_alpha=1.0))
    for metric in ("pwcca", "cosine"):
        prof = timestep_distance_profile(states, metric)
        assert prof.shape == (6,)
        assert prof[-1] == pytest.approx(0.0, abs=1e-8)
