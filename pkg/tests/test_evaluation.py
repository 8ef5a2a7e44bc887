import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from qkmeans.errors import InvalidArgumentError
from qkmeans.evaluation import (
    accuracy,
    adjusted_mutual_information,
    adjusted_rand_index,
    confusion_matrix,
    contingency,
    evaluate,
    expected_mutual_information,
    majority_vote,
)

# frozen from the oracles in tests/oracles.py (pair enumeration and
# direct hypergeometric summation), computed before the library existed
ARI_EXAMPLE = 0.24242424242424243
AMI_EXAMPLE = 0.29879245817089006
EMI_EXAMPLE = 0.2772588722239781
EX_LABELS = [0, 0, 1, 1, 2, 2]
EX_TRUTH = [0, 0, 0, 1, 1, 1]

label_vectors = st.integers(2, 12).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 4), min_size=n, max_size=n),
                        st.lists(st.integers(0, 4), min_size=n, max_size=n)))


def test_majority_vote_examples():
    assert majority_vote([0, 0, 1, 1], [2, 2, 0, 0]).cluster_to_class == {0: 2, 1: 0}
    assert majority_vote([0, 0, 0], [1, 1, 2]).cluster_to_class == {0: 1}
    assert majority_vote([0, 0], [0, 1]).cluster_to_class == {0: 0}


def test_majority_vote_may_merge_clusters():
    assert majority_vote([0, 1, 1, 0], [0, 0, 0, 0]).cluster_to_class == {0: 0, 1: 0}


def test_accuracy_examples():
    assert accuracy([1, 1, 0, 0, 2], [0, 0, 2, 2, 1]) == 1.0
    assert accuracy([0, 0, 0, 0], [0, 0, 1, 1]) == 0.5


def test_confusion_examples():
    truth = np.repeat([0, 1, 2], 50)
    np.testing.assert_array_equal(confusion_matrix(truth, truth), np.diag([50, 50, 50]))
    cm = confusion_matrix(np.zeros(10, dtype=int), np.repeat([0, 1], 5), n_classes=2)
    np.testing.assert_array_equal(cm, [[5, 0], [5, 0]])


def test_ari_examples():
    assert adjusted_rand_index([0, 1, 2, 0], [0, 1, 2, 0]) == 1.0
    assert adjusted_rand_index([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0
    assert abs(adjusted_rand_index(EX_LABELS, EX_TRUTH) - ARI_EXAMPLE) <= 1e-12


def test_ari_degenerate_partitions():
    assert adjusted_rand_index([0, 0, 0], [1, 1, 1]) == 1.0
    assert adjusted_rand_index([0, 1, 2], [2, 0, 1]) == 1.0
    assert adjusted_rand_index([0, 0, 0], [0, 1, 2]) == 0.0


def test_ami_examples():
    assert adjusted_mutual_information([0, 1, 1, 2], [0, 1, 1, 2]) == 1.0
    assert adjusted_mutual_information([0, 0, 0, 0], [0, 0, 1, 1]) == 0.0
    assert abs(adjusted_mutual_information(EX_LABELS, EX_TRUTH) - AMI_EXAMPLE) <= 1e-12
    table = contingency(EX_LABELS, EX_TRUTH)
    assert abs(expected_mutual_information(table) - EMI_EXAMPLE) <= 1e-12


def test_metrics_need_two_points():
    for fn in (adjusted_rand_index, adjusted_mutual_information):
        with pytest.raises(InvalidArgumentError):
            fn([0], [0])
        with pytest.raises(InvalidArgumentError):
            fn([0, 1], [0, 1, 1])


@settings(max_examples=200, deadline=None)
@given(label_vectors)
def test_ari_matches_pair_enumeration(pair):
    a, b = pair
    assert abs(adjusted_rand_index(a, b) - oracles.ari_pairs(a, b)) <= 1e-10


@settings(max_examples=200, deadline=None)
@given(label_vectors)
def test_ami_matches_direct_summation(pair):
    a, b = pair
    if oracles.canonical(a) == oracles.canonical(b):
        assert adjusted_mutual_information(a, b) == 1.0
        return
    table = contingency(a, b)
    assert abs(expected_mutual_information(table) - oracles.emi_direct(a, b)) <= 1e-10
    assert abs(adjusted_mutual_information(a, b) - oracles.ami_direct(a, b)) <= 1e-10


def test_against_sklearn(rng):
    metrics = pytest.importorskip("sklearn.metrics")
    for _ in range(50):
        n = int(rng.integers(2, 200))
        a = rng.integers(0, 5, n)
        b = rng.integers(0, 4, n)
        assert abs(adjusted_rand_index(a, b) - metrics.adjusted_rand_score(b, a)) <= 1e-10
        assert abs(adjusted_mutual_information(a, b)
                   - metrics.adjusted_mutual_info_score(b, a)) <= 1e-10


@settings(max_examples=100, deadline=None)
@given(label_vectors, st.permutations(range(5)), st.permutations(range(5)))
def test_symmetry_and_relabeling(pair, p, q):
    a, b = pair
    pa = [p[v] for v in a]
    qb = [q[v] for v in b]
    for fn in (adjusted_rand_index, adjusted_mutual_information):
        base = fn(a, b)
        assert abs(fn(b, a) - base) <= 1e-12
        assert abs(fn(pa, qb) - base) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(label_vectors)
def test_ari_at_most_one(pair):
    a, b = pair
    ari = adjusted_rand_index(a, b)
    assert ari <= 1 + 1e-12
    if oracles.canonical(a) == oracles.canonical(b):
        assert ari == 1.0
    elif ari == 1.0:
        pytest.fail("ARI is 1 for different partitions")


@settings(max_examples=100, deadline=None)
@given(label_vectors)
def test_report_consistency_and_vote_optimality(pair):
    labels, truth = pair
    truth = list(oracles.canonical(truth))
    c = max(truth) + 1
    rep = evaluate(labels, truth, c)
    assert rep.confusion.sum() == len(labels)
    assert rep.accuracy == np.trace(rep.confusion) / len(labels)
    np.testing.assert_array_equal(rep.confusion.sum(axis=1), np.bincount(truth, minlength=c))
    # changing the class of any one cluster never helps
    mapping = rep.alignment.cluster_to_class
    for cluster, cls in itertools.product(mapping, range(c)):
        alt = dict(mapping)
        alt[cluster] = cls
        pred = [alt[v] for v in labels]
        assert np.mean(np.array(pred) == truth) <= rep.accuracy + 1e-12
