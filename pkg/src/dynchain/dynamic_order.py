"""Per-instance chain-order selection.

For a query, every validation instance gets a fuzzy membership
``exp(-beta * squared Euclidean distance)``.  Per label, the membership
mass splits into locally weighted true-positive / false-positive /
false-negative counts of a chain-free reference prediction, giving a
local F1 around the query.  Labels are chained in descending local F1,
so the locally most reliable models decide first and feed fewer errors
down the chain.

Cardinalities are sigma-counts: set intersections here only combine a
fuzzy neighbourhood with crisp indicator sets (membership 1), so the
min-intersection reduces to the neighbourhood membership itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import _frozen
from .nb_chain import LabelPermutation


@dataclass(frozen=True, eq=False)
class FuzzyNeighborhood:
    """Membership of every validation row around a query."""

    memberships: np.ndarray
    beta: float

    def __post_init__(self):
        m = np.asarray(self.memberships, dtype=np.float64).ravel()
        if (m <= 0).any() or (m > 1).any():
            raise ValueError("memberships must lie in (0, 1]")
        object.__setattr__(self, "memberships", _frozen(m))


class ValidationCache:
    """Validation rows plus their precomputed chain-free predictions.

    ``br_predictions[n, l]`` is the reference (no-chain) decision for
    label ``l`` on validation row ``n``; together with the true labels it
    yields the per-label confusion masks reused by every query.
    """

    def __init__(self, validation_features, validation_labels,
                 br_predictions):
        feats = np.asarray(validation_features, dtype=np.float64)
        labs = np.asarray(validation_labels, dtype=np.int8)
        preds = np.asarray(br_predictions, dtype=np.int8)
        if not feats.shape[0] == labs.shape[0] == preds.shape[0]:
            raise ValueError("cache matrices must be row-aligned")
        if labs.shape != preds.shape:
            raise ValueError("labels and predictions must have equal shape")
        self.validation_features = _frozen(feats)
        self.validation_labels = _frozen(labs)
        self.br_predictions = _frozen(preds)
        truth = labs == 1
        pred = preds == 1
        self._tp_mask = _frozen((truth & pred).astype(np.float64))
        self._fp_mask = _frozen((~truth & pred).astype(np.float64))
        self._fn_mask = _frozen((truth & ~pred).astype(np.float64))

    @property
    def n_rows(self) -> int:
        return self.validation_features.shape[0]

    @property
    def n_labels(self) -> int:
        return self.validation_labels.shape[1]


def membership(query, point, beta: float) -> float:
    """Gaussian potential membership ``exp(-beta * ||query - point||^2)``."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    q = np.asarray(query, dtype=np.float64).ravel()
    p = np.asarray(point, dtype=np.float64).ravel()
    if q.shape != p.shape:
        raise ValueError("dimension mismatch")
    return float(np.exp(-beta * np.sum((q - p) ** 2)))


def neighborhood(cache: ValidationCache, query,
                 beta: float) -> FuzzyNeighborhood:
    """Fuzzy neighbourhood of ``query`` over the whole validation set."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    q = np.asarray(query, dtype=np.float64).ravel()
    if q.shape[0] != cache.validation_features.shape[1]:
        raise ValueError("dimension mismatch")
    sq = np.sum((cache.validation_features - q) ** 2, axis=1)
    return FuzzyNeighborhood(np.exp(-beta * sq), float(beta))


def local_counts(cache: ValidationCache, l: int, query, beta: float):
    """Membership-weighted (tp, fp, fn) of the reference classifier for
    label ``l`` around ``query``."""
    if not 0 <= l < cache.n_labels:
        raise ValueError(f"label {l} out of range")
    mu = neighborhood(cache, query, beta).memberships
    return (
        float(mu @ cache._tp_mask[:, l]),
        float(mu @ cache._fp_mask[:, l]),
        float(mu @ cache._fn_mask[:, l]),
    )


def local_f1(tp: float, fp: float, fn: float) -> float:
    """``2*tp / (2*tp + fp + fn)``; 0 when the denominator is 0 (a label
    with no local evidence should not lead the chain)."""
    if tp < 0 or fp < 0 or fn < 0:
        raise ValueError("counts must be nonnegative")
    denom = 2.0 * tp + fp + fn
    if denom == 0.0:
        return 0.0
    return 2.0 * tp / denom


def local_scores(cache: ValidationCache, query, beta: float) -> np.ndarray:
    """Length-L vector of local F1 values for a query (one membership
    pass shared by all labels)."""
    mu = neighborhood(cache, query, beta).memberships
    tp = mu @ cache._tp_mask
    fp = mu @ cache._fp_mask
    fn = mu @ cache._fn_mask
    denom = 2.0 * tp + fp + fn
    out = np.zeros(cache.n_labels)
    nz = denom > 0.0
    out[nz] = 2.0 * tp[nz] / denom[nz]
    return out


def dynamic_permutation(cache: ValidationCache, query,
                        beta: float) -> LabelPermutation:
    """Label order sorted by descending local F1, ties broken by
    ascending label index."""
    f = local_scores(cache, query, beta)
    return LabelPermutation(np.argsort(-f, kind="stable"))
