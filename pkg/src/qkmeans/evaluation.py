"""Scoring cluster assignments against ground-truth classes."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.special import gammaln

from .errors import InvalidArgumentError


@dataclass(eq=False)
class LabelAlignment:
    cluster_to_class: dict[int, int]
    vote_counts: dict[int, np.ndarray] = field(repr=False)


@dataclass(eq=False)
class EvaluationReport:
    accuracy: float
    confusion: np.ndarray
    ari: float
    ami: float
    alignment: LabelAlignment | None = None


def _pair(labels, truth):
    labels = np.asarray(labels).reshape(-1)
    truth = np.asarray(truth).reshape(-1)
    if labels.shape != truth.shape:
        raise InvalidArgumentError(
            f"label vectors differ in length: {labels.shape[0]} vs {truth.shape[0]}"
        )
    return labels, truth


def majority_vote(labels, truth) -> LabelAlignment:
    """Map each non-empty cluster to its most frequent true class.

    Ties go to the lower class index. Two clusters may map to one class.
    """
    labels, truth = _pair(labels, truth)
    if labels.size == 0:
        raise InvalidArgumentError("cannot vote on zero points")
    n_classes = int(truth.max()) + 1
    mapping, votes = {}, {}
    for cluster in np.unique(labels):
        hist = np.bincount(truth[labels == cluster], minlength=n_classes)
        mapping[int(cluster)] = int(np.argmax(hist))
        votes[int(cluster)] = hist
    return LabelAlignment(mapping, votes)


def aligned_predictions(labels, alignment: LabelAlignment) -> np.ndarray:
    labels = np.asarray(labels)
    return np.array([alignment.cluster_to_class[int(c)] for c in labels], dtype=int)


def accuracy(labels, truth, alignment: LabelAlignment | None = None) -> float:
    labels, truth = _pair(labels, truth)
    if alignment is None:
        alignment = majority_vote(labels, truth)
    return float(np.mean(aligned_predictions(labels, alignment) == truth))


def confusion_matrix(labels, truth, alignment: LabelAlignment | None = None,
                     n_classes: int | None = None) -> np.ndarray:
    """Rows are true classes, columns the aligned predicted classes."""
    labels, truth = _pair(labels, truth)
    if alignment is None:
        alignment = majority_vote(labels, truth)
    pred = aligned_predictions(labels, alignment)
    c = n_classes or int(max(truth.max(), pred.max())) + 1
    out = np.zeros((c, c), dtype=int)
    np.add.at(out, (truth, pred), 1)
    return out


def contingency(a, b) -> np.ndarray:
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    return table


def _same_partition(table) -> bool:
    return bool(np.all((table > 0).sum(axis=0) == 1) and np.all((table > 0).sum(axis=1) == 1))


def adjusted_rand_index(labels, truth) -> float:
    labels, truth = _pair(labels, truth)
    n = labels.size
    if n < 2:
        raise InvalidArgumentError("ARI needs at least two points")
    table = contingency(labels, truth)
    # exact integer pair counts, converted once at the end
    index = sum(comb(int(v), 2) for v in table.ravel())
    rows = sum(comb(int(v), 2) for v in table.sum(axis=1))
    cols = sum(comb(int(v), 2) for v in table.sum(axis=0))
    total = comb(n, 2)
    expected = rows * cols / total
    max_index = (rows + cols) / 2
    if max_index == expected:
        return 1.0 if _same_partition(table) else 0.0
    return float((index - expected) / (max_index - expected))


def _entropy(counts, n):
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def mutual_information(table) -> float:
    n = table.sum()
    a = table.sum(axis=1)
    b = table.sum(axis=0)
    nz = table > 0
    nij = table[nz].astype(float)
    outer = np.outer(a, b)[nz].astype(float)
    return float((nij / n * (np.log(n * nij) - np.log(outer))).sum())


def expected_mutual_information(table) -> float:
    """Exact E[MI] under the hypergeometric (fixed-marginals) model."""
    n = int(table.sum())
    a = table.sum(axis=1).astype(int)
    b = table.sum(axis=0).astype(int)
    lg_n = gammaln(n + 1)
    emi = 0.0
    for ai in a:
        for bj in b:
            lo = max(1, ai + bj - n)
            hi = min(ai, bj)
            if lo > hi:
                continue
            nij = np.arange(lo, hi + 1, dtype=float)
            term = nij / n * (np.log(n * nij) - np.log(float(ai) * float(bj)))
            log_p = (
                gammaln(ai + 1) + gammaln(bj + 1) + gammaln(n - ai + 1) + gammaln(n - bj + 1)
                - lg_n - gammaln(nij + 1) - gammaln(ai - nij + 1) - gammaln(bj - nij + 1)
                - gammaln(n - ai - bj + nij + 1)
            )
            emi += float((term * np.exp(log_p)).sum())
    return emi


def adjusted_mutual_information(labels, truth) -> float:
    """AMI with natural-log entropies and the arithmetic-mean normaliser."""
    labels, truth = _pair(labels, truth)
    n = labels.size
    if n < 2:
        raise InvalidArgumentError("AMI needs at least two points")
    table = contingency(labels, truth)
    if _same_partition(table):
        return 1.0
    h_a = _entropy(table.sum(axis=1), n)
    h_b = _entropy(table.sum(axis=0), n)
    mi = mutual_information(table)
    emi = expected_mutual_information(table)
    denom = (h_a + h_b) / 2 - emi
    if denom == 0:
        return 0.0
    return float((mi - emi) / denom)


def evaluate(labels, truth, n_classes: int | None = None) -> EvaluationReport:
    labels, truth = _pair(labels, truth)
    alignment = majority_vote(labels, truth)
    return EvaluationReport(
        accuracy=accuracy(labels, truth, alignment),
        confusion=confusion_matrix(labels, truth, alignment, n_classes),
        ari=adjusted_rand_index(labels, truth),
        ami=adjusted_mutual_information(labels, truth),
        alignment=alignment,
    )
