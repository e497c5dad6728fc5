import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_invertible
from oracles import grid_first_canonical_correlation, grid_max_correlation_2x2
from repsim.cca import compute_cca, svcca_preprocess
from repsim.errors import ColumnMismatch, DegenerateInput, InvalidArgument


def test_self_comparison_gives_unit_coefficients(rng):
    x = rng.standard_normal((6, 40))
    r = compute_cca(x, x)
    np.testing.assert_allclose(r.rho, 1.0, atol=1e-8)
    assert r.c == 6


def test_anticorrelated_rows_have_unit_coefficient():
    r = compute_cca([[1, 2, 3]], [[3, 2, 1]])
    assert r.rho[0] == pytest.approx(1.0, abs=1e-12)


def test_orthogonal_centered_rows_have_zero_coefficient():
    r = compute_cca([[1, 2, 3]], [[1, -2, 1]])
    assert r.rho[0] == pytest.approx(0.0, abs=1e-12)


def test_errors(rng):
    with pytest.raises(ColumnMismatch):
        compute_cca(rng.standard_normal((2, 10)), rng.standard_normal((2, 11)))
    with pytest.raises(DegenerateInput):
        compute_cca(np.ones((3, 10)), rng.standard_normal((2, 10)))
    with pytest.raises(InvalidArgument):
        compute_cca([[1.0]], [[2.0]])


def test_first_coefficient_matches_angle_grid(rng):
    for _ in range(10):
        l1 = rng.standard_normal((2, 50))
        l2 = rng.standard_normal((2, 2)) @ l1 + rng.standard_normal((2, 50))
        assert compute_cca(l1, l2).rho[0] == pytest.approx(grid_max_correlation_2x2(l1, l2), abs=2e-3)


@settings(max_examples=25, deadline=None)
@given(a=st.integers(1, 3), b=st.integers(1, 3), n=st.integers(10, 60), seed=st.integers(0, 2**32 - 1),
       mix=st.floats(0.0, 2.0))
def test_first_coefficient_matches_grid_oracle(a, b, n, seed, mix):
    rng = np.random.default_rng(seed)
    l1 = rng.standard_normal((a, n))
    l2 = mix * rng.standard_normal((b, a)) @ l1 + rng.standard_normal((b, n))
    rho = compute_cca(l1, l2).rho[0]
    assert rho == pytest.approx(grid_first_canonical_correlation(l1, l2), abs=2e-3)


def test_affine_invariance(rng):
    l1 = rng.standard_normal((8, 200))
    l2 = rng.standard_normal((5, 8)) @ l1 + rng.standard_normal((5, 200))
    base = compute_cca(l1, l2).rho
    a = random_invertible(rng, 8)
    t = rng.standard_normal((8, 1)) * 10
    np.testing.assert_allclose(compute_cca(a @ l1 + t, l2).rho, base, atol=1e-6)


def test_symmetry_of_coefficients(rng):
    l1 = rng.standard_normal((7, 100))
    l2 = rng.standard_normal((4, 100)) + 0.5 * l1[:4]
    np.testing.assert_allclose(compute_cca(l1, l2).rho, compute_cca(l2, l1).rho, atol=1e-8)


@pytest.mark.parametrize("a, b, n", [(3, 5, 50), (20, 10, 300), (64, 64, 500)])
def test_result_invariants(rng, a, b, n):
    l1 = rng.standard_normal((a, n))
    l2 = rng.standard_normal((b, n)) + 0.3 * rng.standard_normal((b, a)) @ l1
    r = compute_cca(l1, l2)
    assert np.all(np.diff(r.rho) <= 1e-12)
    assert np.all((r.rho >= 0) & (r.rho <= 1))
    assert r.c == min(a, b) == min(r.retained_rank_left, r.retained_rank_right)
    gram = r.left_canonical @ r.left_canonical.T
    np.testing.assert_allclose(gram, np.eye(r.c), atol=1e-6)
    # canonical vectors are the stated projections of the centered data
    c1 = l1 - l1.mean(axis=1, keepdims=True)
    h = r.left_weights @ c1
    np.testing.assert_allclose(h / np.linalg.norm(h, axis=1, keepdims=True), r.left_canonical, atol=1e-10)
    # each pair of canonical vectors has correlation rho_i
    corr = np.sum(r.left_canonical * r.right_canonical, axis=1)
    np.testing.assert_allclose(np.abs(corr), r.rho, atol=1e-8)
    np.testing.assert_allclose(r.left_directions @ r.left_directions.T, np.eye(r.c), atol=1e-10)


def test_rank_deficient_layer_truncates(rng):
    base = rng.standard_normal((3, 80))
    l1 = rng.standard_normal((6, 3)) @ base  # rank 3 with 6 neurons
    r = compute_cca(l1, rng.standard_normal((5, 80)))
    assert r.retained_rank_left == 3
    assert r.c == 3


def test_more_neurons_than_datapoints(rng):
    r = compute_cca(rng.standard_normal((30, 10)), rng.standard_normal((30, 10)))
    # centered data has rank n - 1; both layers then span the same space
    assert r.c == 9
    np.testing.assert_allclose(r.rho, 1.0, atol=1e-6)


def test_svcca_preprocess_full_fraction_keeps_rank(rng):
    x = rng.standard_normal((5, 60))
    y = rng.standard_normal((4, 60)) + x[:4]
    p = svcca_preprocess(x, 1.0)
    assert p.shape == (5, 60)
    np.testing.assert_allclose(compute_cca(p, y).rho, compute_cca(x, y).rho, atol=1e-8)


def test_svcca_preprocess_one_dominant_direction(rng):
    u, _ = np.linalg.qr(rng.standard_normal((2, 2)))
    v, _ = np.linalg.qr(rng.standard_normal((50, 2)))
    v -= v.mean(axis=0)
    v, _ = np.linalg.qr(v)
    x = u @ np.diag([10.0, 0.01]) @ v.T
    assert svcca_preprocess(x, 0.99).shape[0] == 1


def test_svcca_preprocess_ignores_constant_rows(rng):
    x = rng.standard_normal((4, 30))
    padded = np.vstack([x, np.full((2, 30), 3.0)])
    np.testing.assert_allclose(svcca_preprocess(padded, 0.9), svcca_preprocess(x, 0.9), atol=1e-10)


def test_svcca_preprocess_errors():
    with pytest.raises(DegenerateInput):
        svcca_preprocess(np.zeros((3, 5)))
    with pytest.raises(InvalidArgument):
        svcca_preprocess(np.eye(3), 0.0)
