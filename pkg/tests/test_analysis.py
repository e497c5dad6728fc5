import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from repsim.analysis import (
    DistanceMatrix,
    agglomerative_cluster,
    choose_k_by_gap,
    group_distance_stats,
    pairwise_distance_matrix,
    pearson_correlation,
    planted_block_matrix,
    same_partition,
)
from repsim.errors import InvalidArgument, ZeroVariance


def test_pairwise_matrix(rng):
    base = rng.standard_normal((4, 60))
    layers = [base, 2 * base + 1, rng.standard_normal((4, 60))]
    dm = pairwise_distance_matrix(layers, "pwcca", labels=["a", "b", "c"])
    assert np.all(np.diag(dm.values) == 0)
    assert dm.values[0, 1] < 1e-8 and dm.values[1, 0] < 1e-8
    assert dm.values[0, 2] > 0.3
    assert dm.labels == ["a", "b", "c"]
    with pytest.raises(InvalidArgument):
        pairwise_distance_matrix([base], "pwcca")
    with pytest.raises(InvalidArgument):
        pairwise_distance_matrix([base, base[:, :10]], "pwcca")


def test_pairwise_threads_agree(rng, monkeypatch):
    layers = [rng.standard_normal((3, 40)) for _ in range(4)]
    single = pairwise_distance_matrix(layers, "mean_cca").values
    monkeypatch.setenv("REPSIM_THREADS", "3")
    assert np.array_equal(pairwise_distance_matrix(layers, "mean_cca").values, single)


def test_distance_matrix_validation():
    with pytest.raises(InvalidArgument):
        DistanceMatrix(["a", "b"], [[0.1, 1.0], [1.0, 0.0]])
    with pytest.raises(InvalidArgument):
        DistanceMatrix(["a", "b"], np.zeros((3, 3)))
    d = DistanceMatrix(["a", "b"], [[0.0, 0.2], [0.4, 0.0]])
    assert d.asymmetry == pytest.approx(0.2)
    np.testing.assert_allclose(d.symmetrized, [[0, 0.3], [0.3, 0]])


def test_planted_blocks_recovered():
    dm, truth = planted_block_matrix([3, 4, 5], seed=1)
    c = agglomerative_cluster(dm)
    assert c.chosen_k == 3
    assert same_partition(c.ids(dm.labels), truth)
    assert list(c.ids(dm.labels)[:3]) == [0, 0, 0]


def test_explicit_k():
    dm, _ = planted_block_matrix([2, 2, 2], seed=0)
    assert agglomerative_cluster(dm, k=6).chosen_k == 6
    assert len(set(agglomerative_cluster(dm, k=6).assignments.values())) == 6
    assert agglomerative_cluster(dm, k=1).chosen_k == 1
    with pytest.raises(InvalidArgument):
        agglomerative_cluster(dm, k=7)


def test_choose_k_by_gap():
    assert choose_k_by_gap(np.array([0.1, 0.1, 0.1, 0.8, 0.8])) == 3
    assert choose_k_by_gap(np.array([0.3])) == 1


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_clustering_is_permutation_equivariant(seed):
    dm, _ = planted_block_matrix([3, 3, 4], seed=seed)
    perm = np.random.default_rng(seed).permutation(10)
    moved = DistanceMatrix([dm.labels[i] for i in perm], dm.values[np.ix_(perm, perm)])
    a = agglomerative_cluster(dm)
    b = agglomerative_cluster(moved)
    assert same_partition(a.ids(dm.labels), b.ids(dm.labels))


def test_same_partition():
    assert same_partition([0, 0, 1], [5, 5, 2])
    assert not same_partition([0, 0, 1], [0, 1, 1])


def test_pearson():
    assert pearson_correlation([1, 2, 3], [1, 2, 4]) == pytest.approx(0.9820, abs=1e-4)
    assert pearson_correlation([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
    x, y = np.array([0.3, 1.0, -2.0, 4.0]), np.array([1.0, 0.0, 2.0, 5.0])
    assert pearson_correlation(3 * x - 1, 0.5 * y + 7) == pytest.approx(pearson_correlation(x, y))
    with pytest.raises(ZeroVariance):
        pearson_correlation([1, 1, 1], [1, 2, 3])
    with pytest.raises(InvalidArgument):
        pearson_correlation([1], [1])


def test_group_stats():
    v = np.array([[0, 1, 5, 5], [1, 0, 5, 5], [5, 5, 0, 2], [5, 5, 2, 0]], float)
    stats = group_distance_stats(DistanceMatrix(list("abcd"), v), ["g", "g", "m", "m"])
    assert stats["g"]["mean"] == 1 and stats["m"]["mean"] == 2
    assert stats["inter"]["mean"] == 5 and stats["inter"]["count"] == 8
