"""Naive Bayes chain classifier that trains once and predicts under any
label order.

A classic classifier chain must be refit whenever the label order
changes, because each link's input space embeds the upstream decisions.
Here the model instead stores order-independent sufficient statistics:

* per-label class priors,
* per-label Gaussian feature likelihoods (restricted to that label's
  selected feature columns), and
* the full table of pairwise label conditionals
  ``P(other label = 1 | this label = y)``.

Greedy chain inference for an arbitrary permutation then only multiplies
stored factors, so the order can differ per query at no training cost.
All probability products are accumulated in log space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import MultiLabelDataset
from .errors import TrainingError
from .preprocess import FeatureSubset, LabelView

VARIANCE_FLOOR = 1e-9


@dataclass(frozen=True, eq=False)
class LabelPermutation:
    """A bijection on label indices: ``order[step] = label decided at step``."""

    order: np.ndarray

    def __post_init__(self):
        order = np.asarray(self.order, dtype=np.intp).ravel()
        n = order.size
        if n < 1 or not np.array_equal(np.sort(order), np.arange(n)):
            raise ValueError(f"{order!r} is not a permutation of 0..{n - 1}")
        inverse = np.empty(n, dtype=np.intp)
        inverse[order] = np.arange(n)
        order.flags.writeable = False
        inverse.flags.writeable = False
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "inverse", inverse)

    def __len__(self) -> int:
        return int(self.order.size)

    @staticmethod
    def identity(n_labels: int) -> "LabelPermutation":
        return LabelPermutation(np.arange(n_labels))

    @staticmethod
    def random(n_labels: int, rng: np.random.Generator) -> "LabelPermutation":
        return LabelPermutation(rng.permutation(n_labels))


@dataclass(frozen=True, eq=False)
class Prediction:
    """Hard 0/1 decisions plus the per-label relevance scores that
    produced them (score > 0.5 <=> hard 1; exact ties decide 0)."""

    hard: np.ndarray
    scores: np.ndarray

    def __post_init__(self):
        hard = np.asarray(self.hard, dtype=np.int8).ravel()
        scores = np.asarray(self.scores, dtype=np.float64).ravel()
        if hard.shape != scores.shape:
            raise ValueError("hard and scores must have equal length")
        hard.flags.writeable = False
        scores.flags.writeable = False
        object.__setattr__(self, "hard", hard)
        object.__setattr__(self, "scores", scores)


class NbChainModel:
    """Order-free Naive Bayes chain model.

    Parameters are fit per label on that label's conditioned view, so
    priors and conditionals reflect the (undersampled) training
    distribution the label was given.

    Attributes
    ----------
    priors : (L, 2) array, ``priors[i, y] = P(label i = y)``, rows sum to 1.
    feature_means, feature_vars : per label, per class ``(2, d_i)`` arrays
        of Gaussian parameters over that label's selected features.
    label_conditionals : (L, L, 2) array,
        ``[i, l, y] = P(label l = 1 | label i = y)`` fit on label i's
        view; the diagonal ``l == i`` is NaN and never read.
    feature_subsets : per-label :class:`FeatureSubset` into the full
        feature space.
    """

    def __init__(self, priors, feature_means, feature_vars,
                 label_conditionals, feature_subsets, n_features,
                 smoothing):
        self.priors = np.asarray(priors, dtype=np.float64)
        self.feature_means = [np.asarray(m, dtype=np.float64) for m in feature_means]
        self.feature_vars = [np.asarray(v, dtype=np.float64) for v in feature_vars]
        self.label_conditionals = np.asarray(label_conditionals, dtype=np.float64)
        self.feature_subsets = list(feature_subsets)
        self.n_features = int(n_features)
        self.smoothing = float(smoothing)
        self.n_labels = self.priors.shape[0]
        self._log_priors = np.log(self.priors)
        with np.errstate(invalid="ignore"):
            self._log_cond_pos = np.log(self.label_conditionals)
            self._log_cond_neg = np.log1p(-self.label_conditionals)
        for arrs in (self.feature_means, self.feature_vars):
            for a in arrs:
                a.flags.writeable = False
        for a in (self.priors, self.label_conditionals, self._log_priors,
                  self._log_cond_pos, self._log_cond_neg):
            a.flags.writeable = False

    # structural budget: the estimator counts the training pass produces
    @property
    def n_prior_entries(self) -> int:
        return 2 * self.n_labels

    @property
    def n_conditional_entries(self) -> int:
        return int(np.sum(~np.isnan(self.label_conditionals)))

    @property
    def n_gaussian_estimators(self) -> int:
        return sum(m.shape[0] * m.shape[1] for m in self.feature_means)

    def _check_query(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64).ravel()
        if x.shape[0] != self.n_features:
            raise ValueError(
                f"query has {x.shape[0]} features, model expects {self.n_features}"
            )
        return x

    def feature_log_likelihoods(self, x) -> np.ndarray:
        """(L, 2) array of summed Gaussian log densities of ``x`` restricted
        to each label's feature subset, per class."""
        x = self._check_query(x)
        out = np.empty((self.n_labels, 2))
        for i in range(self.n_labels):
            xi = x[self.feature_subsets[i].indices]
            means, variances = self.feature_means[i], self.feature_vars[i]
            out[i] = -0.5 * np.sum(
                np.log(2.0 * np.pi * variances)
                + (xi - means) ** 2 / variances,
                axis=1,
            )
        return out


def train_nb(train: MultiLabelDataset, per_label_views: list[LabelView],
             smoothing: float = 1.0,
             feature_subsets: list[FeatureSubset] | None = None) -> NbChainModel:
    """Fit every order-independent estimator of the chain model.

    ``per_label_views`` holds one conditioned view per label (already
    undersampled, with ``features`` restricted to that label's selected
    columns).  ``feature_subsets`` says which full-space columns each
    view's features are; omit it when views span all columns.

    For label i on its view (n rows, n_y of class y):

    * prior ``P(Y_i = y) = (n_y + s) / (n + 2s)`` (additive smoothing),
    * Gaussian mean/population-variance per (class, feature), variance
      floored at ``1e-9``; a class with no rows falls back to the view's
      marginal moments,
    * conditional ``P(Y_l = 1 | Y_i = y) = (#{y_l=1, y_i=y} + s) / (n_y + 2s)``.
    """
    if smoothing <= 0:
        raise ValueError("smoothing must be positive")
    n_labels = train.n_labels
    if len(per_label_views) != n_labels:
        raise ValueError(
            f"expected {n_labels} per-label views, got {len(per_label_views)}"
        )
    if feature_subsets is None:
        feature_subsets = [
            FeatureSubset(np.arange(train.n_features), i)
            for i in range(n_labels)
        ]

    priors = np.empty((n_labels, 2))
    means, variances = [], []
    conditionals = np.full((n_labels, n_labels, 2), np.nan)
    for i, view in enumerate(per_label_views):
        if view.n_rows == 0:
            raise TrainingError(f"label {i}: empty training view")
        if view.features.shape[1] != len(feature_subsets[i]):
            raise ValueError(
                f"label {i}: view has {view.features.shape[1]} columns but "
                f"the subset names {len(feature_subsets[i])}"
            )
        n = view.n_rows
        n_pos = int(view.target.sum())
        counts = {0: n - n_pos, 1: n_pos}
        for y in (0, 1):
            priors[i, y] = (counts[y] + smoothing) / (n + 2.0 * smoothing)

        d_i = view.features.shape[1]
        m_i = np.empty((2, d_i))
        v_i = np.empty((2, d_i))
        marginal_mean = view.features.mean(axis=0)
        marginal_var = view.features.var(axis=0)
        for y in (0, 1):
            rows = view.features[view.target == y]
            if rows.shape[0] == 0:
                m_i[y], v_i[y] = marginal_mean, marginal_var
            else:
                m_i[y] = rows.mean(axis=0)
                v_i[y] = rows.var(axis=0)  # population variance
        np.maximum(v_i, VARIANCE_FLOOR, out=v_i)
        means.append(m_i)
        variances.append(v_i)

        other_labels = train.labels[view.source_rows]
        for y in (0, 1):
            mask = view.target == y
            n_y = int(mask.sum())
            pos = other_labels[mask].sum(axis=0)
            conditionals[i, :, y] = (pos + smoothing) / (n_y + 2.0 * smoothing)
        conditionals[i, i, :] = np.nan

    return NbChainModel(priors, means, variances, conditionals,
                        feature_subsets, train.n_features, smoothing)


def _score_pair(log_post: np.ndarray):
    """Hard decision and relevance score from a two-class log posterior."""
    decision = 1 if log_post[1] > log_post[0] else 0
    shift = max(log_post[0], log_post[1])
    w = np.exp(log_post - shift)
    return decision, float(w[1] / (w[0] + w[1]))


def _walk_chain(model: NbChainModel, x, pi: LabelPermutation):
    if len(pi) != model.n_labels:
        raise ValueError(
            f"permutation covers {len(pi)} labels, model has {model.n_labels}"
        )
    acc = model.feature_log_likelihoods(x) + model._log_priors
    hard = np.zeros(model.n_labels, dtype=np.int8)
    scores = np.zeros(model.n_labels)
    log_post = np.zeros((model.n_labels, 2))
    undecided = list(pi.order)
    for step in range(model.n_labels):
        label = undecided.pop(0)
        log_post[label] = acc[label]
        hard[label], scores[label] = _score_pair(acc[label])
        if undecided:
            rest = np.asarray(undecided, dtype=np.intp)
            table = (model._log_cond_pos if hard[label] == 1
                     else model._log_cond_neg)
            acc[rest] += table[rest, label, :]
    return hard, scores, log_post


def predict_chain_nb(model: NbChainModel, x,
                     pi: LabelPermutation) -> Prediction:
    """Greedy chain prediction of every label, walked in the order ``pi``.

    At each step the pending label's two-class log posterior is its log
    prior plus its feature log likelihood plus one stored log conditional
    per already-decided label; the decision is the argmax (ties go to 0)
    and the score is the normalized posterior at that step.  After a
    decision, every undecided label's accumulator absorbs the matching
    conditional factor, which is all the chain structure there is: no
    estimator depends on ``pi``.
    """
    hard, scores, _ = _walk_chain(model, x, pi)
    return Prediction(hard, scores)


def chain_log_posteriors(model: NbChainModel, x,
                         pi: LabelPermutation) -> np.ndarray:
    """(L, 2) unnormalized two-class log posteriors, each row captured at
    the step its label was decided."""
    _, _, log_post = _walk_chain(model, x, pi)
    return log_post


def predict_br_nb(model: NbChainModel, x) -> Prediction:
    """Independent per-label prediction: prior times feature likelihood
    only, no chain factors."""
    log_post = model.feature_log_likelihoods(x) + model._log_priors
    hard = np.zeros(model.n_labels, dtype=np.int8)
    scores = np.zeros(model.n_labels)
    for i in range(model.n_labels):
        hard[i], scores[i] = _score_pair(log_post[i])
    return Prediction(hard, scores)


def br_predict_matrix(model: NbChainModel, features: np.ndarray) -> np.ndarray:
    """Hard chain-free predictions for every row of ``features``."""
    features = np.asarray(features, dtype=np.float64)
    out = np.empty((features.shape[0], model.n_labels), dtype=np.int8)
    for i in range(model.n_labels):
        cols = model.feature_subsets[i].indices
        xi = features[:, cols]
        means, variances = model.feature_means[i], model.feature_vars[i]
        ll = np.empty((features.shape[0], 2))
        for y in (0, 1):
            ll[:, y] = -0.5 * np.sum(
                np.log(2.0 * np.pi * variances[y])
                + (xi - means[y]) ** 2 / variances[y],
                axis=1,
            )
        log_post = ll + model._log_priors[i]
        out[:, i] = (log_post[:, 1] > log_post[:, 0]).astype(np.int8)
    return out


# ---------------------------------------------------------------------------
# text serialization (version-tagged, 17-significant-digit decimals)

FORMAT_TAG = "dynchain-nb v1"


def _fmt(values) -> str:
    return " ".join(f"{float(v):.17g}" for v in np.atleast_1d(values))


def save_nb_model(model: NbChainModel, path) -> None:
    """Write the model as plain text, one record per estimator block."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{FORMAT_TAG}\n")
        fh.write(f"labels {model.n_labels}\n")
        fh.write(f"features {model.n_features}\n")
        fh.write(f"smoothing {model.smoothing:.17g}\n")
        for i in range(model.n_labels):
            fh.write(f"prior {i} {_fmt(model.priors[i])}\n")
            idx = " ".join(str(int(j)) for j in model.feature_subsets[i].indices)
            fh.write(f"subset {i} {idx}\n")
            for y in (0, 1):
                fh.write(f"gmean {i} {y} {_fmt(model.feature_means[i][y])}\n")
                fh.write(f"gvar {i} {y} {_fmt(model.feature_vars[i][y])}\n")
            for l in range(model.n_labels):
                if l == i:
                    continue
                fh.write(f"cond {i} {l} {_fmt(model.label_conditionals[i, l])}\n")
        fh.write("end\n")


def load_nb_model(path) -> NbChainModel:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != FORMAT_TAG:
        raise ValueError(f"{path}: not a {FORMAT_TAG} file")
    header = {}
    body_start = 1
    for ln in lines[1:4]:
        key, val = ln.split(" ", 1)
        header[key] = val
        body_start += 1
    n_labels = int(header["labels"])
    n_features = int(header["features"])
    smoothing = float(header["smoothing"])
    priors = np.full((n_labels, 2), np.nan)
    subsets: list = [None] * n_labels
    means: list = [None] * n_labels
    variances: list = [None] * n_labels
    conditionals = np.full((n_labels, n_labels, 2), np.nan)
    for ln in lines[body_start:]:
        if ln == "end":
            break
        parts = ln.split(" ")
        kind = parts[0]
        if kind == "prior":
            priors[int(parts[1])] = [float(parts[2]), float(parts[3])]
        elif kind == "subset":
            i = int(parts[1])
            subsets[i] = FeatureSubset(np.array([int(t) for t in parts[2:]]), i)
        elif kind in ("gmean", "gvar"):
            i, y = int(parts[1]), int(parts[2])
            vals = np.array([float(t) for t in parts[3:]])
            store = means if kind == "gmean" else variances
            if store[i] is None:
                store[i] = np.empty((2, vals.size))
            store[i][y] = vals
        elif kind == "cond":
            i, l = int(parts[1]), int(parts[2])
            conditionals[i, l] = [float(parts[3]), float(parts[4])]
        else:
            raise ValueError(f"{path}: unknown record {kind!r}")
    return NbChainModel(priors, means, variances, conditionals, subsets,
                        n_features, smoothing)
