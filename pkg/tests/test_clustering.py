import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from qkmeans.clustering import (
    INIT_STRATEGIES,
    _repair_empty,
    classical_kmeans,
    init_centroids,
    init_indices,
    kernel_matrix_kmeans,
    quantum_kmeans,
)
from qkmeans.errors import InvalidArgumentError
from qkmeans.feature_maps import FeatureMapConfig
from qkmeans.kernel import ShotMode, fidelity_exact, kernel_matrix, to_distance

ANGLE1 = FeatureMapConfig("angle", 1)


def _wcss(points, labels):
    points = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    return sum(((points[labels == j] - points[labels == j].mean(axis=0)) ** 2).sum()
               for j in set(labels.tolist()))


@pytest.mark.parametrize("strategy", INIT_STRATEGIES)
def test_init_is_deterministic_and_distinct(strategy, rng):
    data = rng.normal(size=(40, 3))
    a = init_indices(data, 5, strategy, seed=4)
    assert a == init_indices(data, 5, strategy, seed=4)
    assert len(set(a)) == 5


@pytest.mark.parametrize("strategy", INIT_STRATEGIES)
def test_init_k_equals_n_is_a_permutation(strategy, rng):
    data = rng.normal(size=(7, 2))
    c = init_centroids(data, 7, strategy, seed=1)
    assert sorted(map(tuple, c)) == sorted(map(tuple, data))


def test_farthest_first_collinear():
    data = np.array([[0.0], [1.0], [10.0]])
    assert init_indices(data, 2, "farthest_first") == [0, 2]
    # brute-force: the second point maximises its distance to the first
    dists = [abs(p - 0.0) for p in (0.0, 1.0, 10.0)]
    assert int(np.argmax(dists)) == 2


def test_init_k_too_large():
    with pytest.raises(InvalidArgumentError):
        init_indices(np.zeros((3, 2)), 4)
    with pytest.raises(InvalidArgumentError):
        init_indices(np.zeros((3, 2)), 2, "bogus")


def test_two_pairs_matches_exhaustive_oracle():
    pts = np.array([[0, 0], [0, 1], [10, 10], [10, 11]], dtype=float)
    best_cost, best_labels = oracles.best_partition(pts, 2, lambda lab: _wcss(pts, lab))
    for seed in range(6):
        res = classical_kmeans(pts, 2, seed=seed)
        assert oracles.canonical(res.labels) == oracles.canonical(best_labels)
        assert res.converged
        got = sorted(map(tuple, res.centroids))
        assert got == [(0.0, 0.5), (10.0, 10.5)]


def test_k1_gives_the_mean(rng):
    data = rng.normal(size=(25, 3))
    res = classical_kmeans(data, 1)
    assert np.all(res.labels == 0)
    np.testing.assert_allclose(res.centroids[0], data.mean(axis=0), atol=1e-14)
    q = quantum_kmeans(rng.uniform(0, 3, size=(10, 1)), 1, ANGLE1)
    assert np.all(q.labels == 0)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_identical_points(k):
    data = np.ones((6, 2))
    for res in (classical_kmeans(data, k, seed=2),
                quantum_kmeans(np.full((6, 1), 0.5), k, ANGLE1, seed=2)):
        assert res.converged
        assert len(set(res.labels.tolist())) == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.sampled_from(INIT_STRATEGIES))
def test_classical_wcss_non_increasing(seed, k, init):
    data = np.random.default_rng(seed).normal(size=(30, 2))
    res = classical_kmeans(data, k, seed=seed, init=init)
    trace = np.array(res.similarity_trace)
    assert np.all(np.diff(trace) <= 1e-9 * max(1.0, trace[0]))
    assert res.iterations_run <= 30
    assert len(res.labels) == 30 and res.labels.min() >= 0 and res.labels.max() < k


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 20))
def test_t_max_bound(seed, t_max):
    data = np.random.default_rng(seed).normal(size=(40, 2))
    res = classical_kmeans(data, 4, t_max=t_max, seed=seed)
    assert res.iterations_run <= t_max
    if res.converged:
        # one more assignment pass from the final centroids changes nothing
        again = classical_kmeans(data, 4, t_max=1, initial_centroids=res.centroids)
        np.testing.assert_array_equal(again.labels, res.labels)


def test_angle_clusters_match_enumeration():
    data = np.array([[0.0], [0.1], [math.pi - 0.1], [math.pi]])
    res = quantum_kmeans(data, 2, ANGLE1, seed=0, init="farthest_first")
    # exhaustive: the partition maximising total similarity to cluster means
    def cost(lab):
        lab = np.array(lab)
        return -sum(fidelity_exact(data[i], data[lab == lab[i]].mean(axis=0), ANGLE1)
                    for i in range(4))
    _, want = oracles.best_partition(data, 2, cost)
    assert oracles.canonical(res.labels) == oracles.canonical(want) == (0, 0, 1, 1)


def _reference_quantum(data, config, centroids, t_max):
    """Plain loop using argmin of 1 - fidelity, pair by pair."""
    labels = None
    for _ in range(t_max):
        dist = np.array([[1 - fidelity_exact(x, c, config) for c in centroids] for x in data])
        new = np.argmin(dist, axis=1)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        centroids = np.array([data[labels == j].mean(axis=0) if np.any(labels == j) else centroids[j]
                              for j in range(len(centroids))])
    return labels


def test_argmax_similarity_equals_argmin_distance(iris_angles):
    cfg = FeatureMapConfig("zz", 4, entanglement="linear")
    data = iris_angles.features[::5]
    start = data[[0, 10, 20]]
    res = quantum_kmeans(data, 3, cfg, initial_centroids=start, t_max=10)
    np.testing.assert_array_equal(res.labels, _reference_quantum(data, cfg, start, 10))


@pytest.mark.parametrize("algo", ["classical", "quantum"])
def test_label_permutation_closure(algo, iris_angles):
    data = iris_angles.features
    idx = [3, 70, 120]
    perm = [2, 0, 1]
    cfg = FeatureMapConfig("efficient_su2", 4, theta_seed=2)

    def run(start):
        if algo == "classical":
            return classical_kmeans(data, 3, initial_centroids=start)
        return quantum_kmeans(data, 3, cfg, initial_centroids=start)

    a = run(data[idx])
    b = run(data[idx][perm])
    # cluster perm[j] of run a is cluster j of run b
    inv = np.argsort(perm)
    np.testing.assert_array_equal(inv[a.labels], b.labels)


def test_quantum_determinism(iris_angles):
    cfg = FeatureMapConfig("efficient_su2", 4, theta_seed=1)
    for mode in ("exact", ShotMode(256, 3)):
        a = quantum_kmeans(iris_angles.features, 3, cfg, mode=mode, seed=5)
        b = quantum_kmeans(iris_angles.features, 3, cfg, mode=mode, seed=5)
        np.testing.assert_array_equal(a.labels, b.labels)
        np.testing.assert_array_equal(a.centroids, b.centroids)
        assert a.similarity_trace == b.similarity_trace


def test_shot_mode_tracks_exact_on_separated_data():
    data = np.array([[0.0], [0.1], [0.2], [math.pi - 0.2], [math.pi - 0.1], [math.pi]])
    res = quantum_kmeans(data, 2, ANGLE1, mode=ShotMode(2048, 1), init="farthest_first")
    assert oracles.canonical(res.labels) == (0, 0, 0, 1, 1, 1)


def test_repair_moves_worst_served_point():
    labels = np.array([0, 0, 0, 0])
    cost = np.array([0.1, 0.9, 0.0, 0.4])
    fixed, moves = _repair_empty(labels, cost, 2)
    assert moves == [(1, 1)] and fixed.tolist() == [0, 1, 0, 0]
    # nothing to move when every point sits on its centroid
    fixed, moves = _repair_empty(labels, np.zeros(4), 2)
    assert moves == [] and fixed.tolist() == [0, 0, 0, 0]


def test_empty_cluster_is_repaired():
    # the second start is far from everything, so it wins no points at first
    data = np.array([[0.0], [1.0], [2.0], [3.0]])
    res = classical_kmeans(data, 2, initial_centroids=[[1.5], [100.0]])
    assert set(res.labels.tolist()) == {0, 1}


def test_block_diagonal_medoids():
    d = np.ones((6, 6))
    d[:3, :3] = 0
    d[3:, 3:] = 0
    best_cost, want = oracles.best_partition(
        range(6), 2, lambda lab: sum(d[i, j] for i in range(6) for j in range(6) if lab[i] == lab[j]))
    for seed in range(8):
        res = kernel_matrix_kmeans(d, 2, seed=seed)
        assert oracles.canonical(res.labels) == oracles.canonical(want) == (0, 0, 0, 1, 1, 1)


def test_medoids_saturated():
    d = 1 - np.eye(5)
    res = kernel_matrix_kmeans(d, 5, seed=0)
    assert sorted(res.labels.tolist()) == list(range(5))
    assert res.similarity_trace[-1] == 0.0


def test_identity_kernel_freezes_quickly():
    d = 1 - np.eye(8)
    a = kernel_matrix_kmeans(d, 2, seed=3)
    b = kernel_matrix_kmeans(d, 2, seed=3)
    assert a.converged and a.iterations_run <= 2
    np.testing.assert_array_equal(a.labels, b.labels)


def test_medoids_on_real_kernel(iris_angles):
    cfg = FeatureMapConfig("efficient_su2", 4)
    k = kernel_matrix(iris_angles.features, cfg)
    res = kernel_matrix_kmeans(to_distance(k), 3, seed=0)
    assert res.iterations_run <= 30 and len(set(res.labels.tolist())) == 3
    assert all(res.labels[m] == j for j, m in enumerate(res.centroids))


def test_medoid_input_must_be_square():
    with pytest.raises(InvalidArgumentError):
        kernel_matrix_kmeans(np.zeros((3, 4)), 2)
