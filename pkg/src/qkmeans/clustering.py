"""k-means loops: classical Lloyd, kernel-similarity, and precomputed-distance medoids.

All three share the same conventions: ties in arg-min / arg-max go to the
lowest cluster index, convergence means a full assignment pass changed no
label, and an empty cluster is refilled with the worst-served point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError
from .feature_maps import FeatureMapConfig, ThetaParameters, theta_for
from .kernel import EXACT, ShotMode, encode_states, inversion_probabilities

INIT_STRATEGIES = ("random_points", "kmeans_pp", "farthest_first")
DEFAULT_T_MAX = 30
FIDELITY_TOL = 1e-12


@dataclass(eq=False)
class ClusteringResult:
    labels: np.ndarray
    centroids: np.ndarray
    iterations_run: int
    converged: bool
    similarity_trace: list[float] = field(default_factory=list)
    init_indices: list[int] | None = None


def _check_k(n, k):
    if not 1 <= k <= n:
        raise InvalidArgumentError(f"need 1 <= k <= n points, got k={k}, n={n}")


def _sq_dists(data, centroids):
    diff = data[:, None, :] - centroids[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def init_indices(data, k: int, strategy: str = "random_points", seed: int = 0) -> list[int]:
    """Row indices of the ``k`` initial centroids."""
    data = np.asarray(data, dtype=float)
    n = len(data)
    _check_k(n, k)
    if strategy == "random_points":
        rng = np.random.default_rng(seed)
        return [int(i) for i in rng.choice(n, size=k, replace=False)]
    if strategy == "kmeans_pp":
        rng = np.random.default_rng(seed)
        chosen = [int(rng.integers(n))]
        best = _sq_dists(data, data[chosen]).min(axis=1)
        while len(chosen) < k:
            weights = best.copy()
            weights[chosen] = 0.0
            total = weights.sum()
            if total > 0:
                nxt = int(rng.choice(n, p=weights / total))
            else:
                # every remaining point coincides with a chosen one
                nxt = int(rng.choice(np.setdiff1d(np.arange(n), chosen)))
            chosen.append(nxt)
            best = np.minimum(best, _sq_dists(data, data[[nxt]])[:, 0])
        return chosen
    if strategy == "farthest_first":
        # deterministic: start at row 0, then repeatedly take the point
        # farthest from everything chosen (lowest index on ties)
        chosen = [0]
        best = _sq_dists(data, data[[0]])[:, 0]
        while len(chosen) < k:
            masked = best.copy()
            masked[chosen] = -1.0
            nxt = int(np.argmax(masked))
            chosen.append(nxt)
            best = np.minimum(best, _sq_dists(data, data[[nxt]])[:, 0])
        return chosen
    raise InvalidArgumentError(f"unknown init strategy {strategy!r}; expected {INIT_STRATEGIES}")


def init_centroids(data, k: int, strategy: str = "random_points", seed: int = 0) -> np.ndarray:
    data = np.asarray(data, dtype=float)
    return data[init_indices(data, k, strategy, seed)].copy()


def _repair_empty(labels, cost, k, tol=0.0):
    """Give each empty cluster the point with the highest ``cost``.

    ``cost[i]`` is how badly point ``i`` is served by its own centroid.
    Donors come from clusters with more than one member, and only a point
    with cost above ``tol`` is moved: a point sitting on its centroid
    cannot seed a distinct cluster. Returns the (possibly) updated labels
    and the list of ``(cluster, point)`` moves.
    """
    labels = labels.copy()
    cost = cost.copy()
    moves = []
    for j in range(k):
        if np.any(labels == j):
            continue
        sizes = np.bincount(labels, minlength=k)
        eligible = (sizes[labels] > 1) & (cost > tol)
        if not eligible.any():
            continue
        i = int(np.argmax(np.where(eligible, cost, -np.inf)))
        labels[i] = j
        cost[i] = 0.0
        moves.append((j, i))
    return labels, moves


def _mean_update(data, labels, centroids):
    out = centroids.copy()
    for j in range(len(centroids)):
        members = labels == j
        if members.any():
            out[j] = data[members].mean(axis=0)
    return out


def classical_kmeans(data, k: int, t_max: int = DEFAULT_T_MAX, seed: int = 0,
                     init: str = "random_points", initial_centroids=None) -> ClusteringResult:
    """Lloyd's algorithm on squared Euclidean distance.

    ``similarity_trace`` records the within-cluster sum of squares measured
    at each assignment pass.
    """
    data = np.asarray(data, dtype=float)
    n = len(data)
    _check_k(n, k)
    idx = None
    if initial_centroids is None:
        idx = init_indices(data, k, init, seed)
        centroids = data[idx].copy()
    else:
        centroids = np.array(initial_centroids, dtype=float)
    labels = None
    trace = []
    converged = False
    it = 0
    for it in range(1, t_max + 1):
        d2 = _sq_dists(data, centroids)
        new = np.argmin(d2, axis=1)
        new, moves = _repair_empty(new, d2[np.arange(n), new], k)
        for j, i in moves:
            centroids[j] = data[i]
        d2 = _sq_dists(data, centroids)
        trace.append(float(d2[np.arange(n), new].sum()))
        if labels is not None and np.array_equal(new, labels):
            converged = True
            break
        labels = new
        centroids = _mean_update(data, labels, centroids)
    return ClusteringResult(labels, centroids, it, converged, trace, idx)


def _similarities(data_states, centroids, config, theta, mode, rng, data):
    """Point-to-centroid similarity matrix, shape ``(n, k)``."""
    if mode == EXACT:
        cent_states = encode_states(centroids, config, theta)
        return np.abs(data_states.conj() @ cent_states.T) ** 2
    n, k = len(data), len(centroids)
    left = np.repeat(data, k, axis=0)
    right = np.tile(centroids, (n, 1))
    p0 = inversion_probabilities(left, right, config, theta)[:, 0]
    # the all-zeros count of a full-register multinomial is binomial(S, p0)
    counts = rng.binomial(mode.shots, np.clip(p0, 0.0, 1.0))
    return (counts / mode.shots).reshape(n, k)


def quantum_kmeans(data, k: int, config: FeatureMapConfig, theta: ThetaParameters | None = None,
                   t_max: int = DEFAULT_T_MAX, mode=EXACT, seed: int = 0,
                   init: str = "random_points", initial_centroids=None) -> ClusteringResult:
    """k-means with state fidelity as the similarity.

    Centroids are plain feature-space means, re-encoded through the same
    feature map every iteration. ``similarity_trace`` holds the mean
    similarity of each point to its assigned centroid.
    """
    data = np.asarray(data, dtype=float)
    n = len(data)
    _check_k(n, k)
    config.check_dimension(data.shape[1])
    if theta is None:
        theta = theta_for(config, data.shape[1])
    idx = None
    if initial_centroids is None:
        idx = init_indices(data, k, init, seed)
        centroids = data[idx].copy()
    else:
        centroids = np.array(initial_centroids, dtype=float)

    data_states = encode_states(data, config, theta) if mode == EXACT else None
    rng = None
    if isinstance(mode, ShotMode):
        rng = np.random.default_rng([mode.seed, seed])
    elif mode != EXACT:
        raise InvalidArgumentError(f"unknown mode {mode!r}")

    labels = None
    trace = []
    converged = False
    it = 0
    for it in range(1, t_max + 1):
        sim = _similarities(data_states, centroids, config, theta, mode, rng, data)
        new = np.argmax(sim, axis=1)
        served = sim[np.arange(n), new]
        # fidelities of equal states can come out a few ulps below 1
        new, moves = _repair_empty(new, 1.0 - served, k, tol=FIDELITY_TOL)
        if moves:
            for j, i in moves:
                centroids[j] = data[i]
            sim = _similarities(data_states, centroids, config, theta, mode, rng, data)
        trace.append(float(sim[np.arange(n), new].mean()))
        if labels is not None and np.array_equal(new, labels):
            converged = True
            break
        labels = new
        centroids = _mean_update(data, labels, centroids)
    return ClusteringResult(labels, centroids, it, converged, trace, idx)


def kernel_matrix_kmeans(distance, k: int, t_max: int = DEFAULT_T_MAX, seed: int = 0,
                         initial_indices=None) -> ClusteringResult:
    """Medoid loop over a precomputed distance matrix.

    A cluster is represented by the member with the smallest mean distance
    to the other members; ``centroids`` in the result holds those row
    indices. ``similarity_trace`` is the mean distance to the representative.
    """
    dist = np.asarray(getattr(distance, "values", distance), dtype=float)
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise InvalidArgumentError(f"distance matrix must be square, got {dist.shape}")
    n = dist.shape[0]
    _check_k(n, k)
    if initial_indices is None:
        medoids = [int(i) for i in np.random.default_rng(seed).choice(n, size=k, replace=False)]
    else:
        medoids = [int(i) for i in initial_indices]
    start = list(medoids)
    labels = None
    trace = []
    converged = False
    it = 0
    rows = np.arange(n)
    for it in range(1, t_max + 1):
        d = dist[:, medoids]
        new = np.argmin(d, axis=1)
        new, moves = _repair_empty(new, d[rows, new], k, tol=FIDELITY_TOL)
        for j, i in moves:
            medoids[j] = i
        trace.append(float(dist[rows, np.asarray(medoids)[new]].mean()))
        if labels is not None and np.array_equal(new, labels):
            converged = True
            break
        labels = new
        for j in range(k):
            members = np.flatnonzero(labels == j)
            if len(members):
                within = dist[np.ix_(members, members)].mean(axis=1)
                medoids[j] = int(members[np.argmin(within)])
    return ClusteringResult(labels, np.array(medoids), it, converged, trace, start)
