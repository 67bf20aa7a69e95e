"""Per-label conditioning applied before base-model fitting.

Each label of a multi-label problem induces a one-vs-rest binary view of
the training data.  Two procedures condition that view:

* random undersampling of the majority class whenever the imbalance
  ratio exceeds a cap (the minority class is never touched), and
* greedy forward feature selection that maximises a correlation-based
  merit (features highly correlated with the target, weakly correlated
  with each other), with a hard cap enforced by a uniform random draw.

Both are pure functions of ``(input, seed)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import MultiLabelDataset, _frozen
from .rng import make_rng


@dataclass(frozen=True, eq=False)
class LabelView:
    """One label's binary one-vs-rest slice of a training set.

    ``source_rows`` index into the parent dataset so that downstream
    consumers can recover the other label columns for the same rows.
    """

    features: np.ndarray
    target: np.ndarray
    source_rows: np.ndarray

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        target = np.asarray(self.target).ravel().astype(np.int8)
        rows = np.asarray(self.source_rows, dtype=np.intp).ravel()
        if feats.shape[0] != target.shape[0] or feats.shape[0] != rows.shape[0]:
            raise ValueError("features, target and source_rows must be row-aligned")
        if target.shape[0] < 1:
            raise ValueError("a label view needs at least one row")
        if len(np.unique(rows)) != len(rows):
            raise ValueError("source_rows must be unique")
        object.__setattr__(self, "features", _frozen(feats))
        object.__setattr__(self, "target", _frozen(target))
        object.__setattr__(self, "source_rows", _frozen(rows))

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]


def label_view(ds: MultiLabelDataset, label: int) -> LabelView:
    """The full (unconditioned) view of ``ds`` for one label column."""
    return LabelView(ds.features, ds.labels[:, label], np.arange(ds.n_rows))


@dataclass(frozen=True, eq=False)
class FeatureSubset:
    """Strictly increasing feature column indices chosen for one label."""

    indices: np.ndarray
    target_label: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.intp).ravel()
        if idx.size < 1:
            raise ValueError("a feature subset cannot be empty")
        if (np.diff(idx) <= 0).any():
            raise ValueError("indices must be strictly increasing")
        if idx[0] < 0:
            raise ValueError("indices must be nonnegative")
        object.__setattr__(self, "indices", _frozen(idx))

    def __len__(self) -> int:
        return int(self.indices.size)


def undersample(view: LabelView, max_ir: float, seed: int) -> LabelView:
    """Subsample the majority class so majority/minority <= ``max_ir``.

    When the imbalance ratio already satisfies the cap, or the view is
    single-class, the view is returned unchanged.  All minority rows are
    always kept; the retained majority count is ``ceil(max_ir * minority)``
    so the ratio lands at the cap without dropping below it.  Surviving
    rows keep their original order.
    """
    if max_ir < 1.0:
        raise ValueError("max_ir must be >= 1")
    n_pos = int(view.target.sum())
    n_neg = view.n_rows - n_pos
    minority, majority = min(n_pos, n_neg), max(n_pos, n_neg)
    if minority == 0 or majority <= max_ir * minority:
        return view
    majority_class = 0 if n_neg > n_pos else 1
    keep_majority = math.ceil(max_ir * minority)
    maj_idx = np.flatnonzero(view.target == majority_class)
    rng = make_rng(seed, "undersample")
    kept = rng.choice(maj_idx, size=keep_majority, replace=False)
    keep = np.sort(np.concatenate([np.flatnonzero(view.target != majority_class),
                                   kept]))
    return LabelView(view.features[keep], view.target[keep],
                     view.source_rows[keep])


def _zscore_columns(x: np.ndarray) -> np.ndarray:
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    safe = np.where(sd == 0.0, 1.0, sd)
    z = (x - mu) / safe
    z[:, sd == 0.0] = 0.0
    return z


def select_features(view: LabelView, cap: int, seed: int,
                    target_label: int = 0) -> FeatureSubset:
    """Greedy forward selection maximising the correlation-based merit

        merit(S) = k * mean|corr(f, target)| /
                   sqrt(k + k*(k-1) * mean|corr(f, f')|)

    over subsets S of feature columns (k = |S|; the pairwise mean runs
    over unordered pairs within S).  Correlations are Pearson; a binary
    target makes the feature-target term the point-biserial coefficient.
    Zero-variance columns get correlation 0.  Selection starts from the
    best singleton and stops at the first step that does not improve the
    merit.  If more than ``cap`` features survive, a uniform random
    ``cap``-sized subset of them is drawn.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    x = view.features
    n, d = x.shape
    z = _zscore_columns(x)
    zt = _zscore_columns(view.target.reshape(-1, 1).astype(np.float64))[:, 0]
    r_ct = np.abs(z.T @ zt) / n

    selected = [int(np.argmax(r_ct))]
    merit = float(r_ct[selected[0]])
    in_set = np.zeros(d, dtype=bool)
    in_set[selected[0]] = True
    sum_ct = float(r_ct[selected[0]])
    sum_cc = 0.0                       # sum over unordered pairs inside S
    cc_with_set = np.abs(z.T @ z[:, selected[0]]) / n  # sum|corr(c, s)| per candidate

    while len(selected) < d:
        k = len(selected) + 1
        cand_ct = sum_ct + r_ct
        cand_cc = sum_cc + cc_with_set
        denom = np.sqrt(k + 2.0 * cand_cc)  # k + k(k-1)*mean_cc, pairs = k(k-1)/2
        cand_merit = np.where(in_set, -np.inf, cand_ct / denom)
        best = int(np.argmax(cand_merit))
        if cand_merit[best] <= merit:
            break
        merit = float(cand_merit[best])
        selected.append(best)
        in_set[best] = True
        sum_ct += float(r_ct[best])
        sum_cc += float(cc_with_set[best])
        cc_with_set = cc_with_set + np.abs(z.T @ z[:, best]) / n

    if len(selected) > cap:
        rng = make_rng(seed, "feature-cap")
        selected = list(rng.choice(np.asarray(selected), size=cap,
                                   replace=False))
    return FeatureSubset(np.sort(np.asarray(selected, dtype=np.intp)),
                         target_label)
