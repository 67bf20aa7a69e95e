"""Lazy nearest-neighbour chain classifier.

The model is just the retained training matrix plus a neighbour count;
chain behaviour comes entirely from the query-time distance, which at
step ``i`` of a label order joins the feature space with the labels
already decided at steps ``1..i-1``.  Changing the order therefore never
touches the stored data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import MultiLabelDataset, _frozen
from .nb_chain import LabelPermutation, Prediction

UNDECIDED = -1


class KnnChainModel:
    """Retained training set evaluated lazily under the chain distance."""

    def __init__(self, train_features, train_labels, r: int):
        self.train_features = _frozen(np.asarray(train_features, dtype=np.float64))
        self.train_labels = _frozen(np.asarray(train_labels, dtype=np.int8))
        if self.train_features.shape[0] != self.train_labels.shape[0]:
            raise ValueError("feature and label matrices must be row-aligned")
        self.r = int(r)
        if not 1 <= self.r <= self.train_features.shape[0]:
            raise ValueError(
                f"r={r} must lie in [1, {self.train_features.shape[0]}]"
            )
        self.n_features = self.train_features.shape[1]
        self.n_labels = self.train_labels.shape[1]

    @staticmethod
    def fit(train: MultiLabelDataset, r: int) -> "KnnChainModel":
        return KnnChainModel(train.features, train.labels, r)


@dataclass(frozen=True, eq=False)
class Neighborhood:
    """The ``r`` training rows closest to a query, ascending by distance,
    distance ties broken by ascending row index."""

    member_rows: np.ndarray
    distances: np.ndarray


def _decided_columns(partial_labels: np.ndarray, pi: LabelPermutation,
                     step: int) -> np.ndarray:
    cols = pi.order[: step - 1]
    if (partial_labels[cols] == UNDECIDED).any():
        missing = [int(c) for c in cols if partial_labels[c] == UNDECIDED]
        raise ValueError(
            f"labels {missing} are referenced at step {step} but undecided"
        )
    return cols


def chain_distance(pi: LabelPermutation, step: int, query, train_point) -> float:
    """Distance at chain position ``step`` (1-based).

    Step 1 is the Euclidean feature distance.  Later steps append one
    squared-difference term per already-decided label, i.e. the metric of
    the joined feature+decided-label space.  ``query`` and ``train_point``
    are ``(features, labels)`` pairs; query labels not yet decided hold
    ``UNDECIDED`` and contribute nothing.
    """
    if step < 1:
        raise ValueError("step is 1-based")
    qx, qy = query
    tx, ty = train_point
    qx = np.asarray(qx, dtype=np.float64).ravel()
    tx = np.asarray(tx, dtype=np.float64).ravel()
    if qx.shape != tx.shape:
        raise ValueError("feature dimension mismatch")
    sq = float(np.sum((qx - tx) ** 2))
    if step > 1:
        qy = np.asarray(qy).ravel()
        ty = np.asarray(ty).ravel()
        cols = _decided_columns(qy, pi, step)
        diff = qy[cols].astype(np.float64) - ty[cols].astype(np.float64)
        sq += float(np.sum(diff ** 2))
    return float(np.sqrt(sq))


def _step_distances(model: KnnChainModel, pi: LabelPermutation, step: int,
                    feature_sq: np.ndarray,
                    partial_labels: np.ndarray) -> np.ndarray:
    """Squared chain distance from the query to every training row,
    with the feature part precomputed once per query."""
    sq = feature_sq
    if step > 1:
        cols = _decided_columns(partial_labels, pi, step)
        diff = (partial_labels[cols].astype(np.float64)
                - model.train_labels[:, cols].astype(np.float64))
        sq = sq + np.sum(diff ** 2, axis=1)
    return sq


def _smallest_r(sq_distances: np.ndarray, r: int) -> np.ndarray:
    # rank by the actual metric, stable: equal distances keep ascending row index
    return np.argsort(np.sqrt(sq_distances), kind="stable")[:r]


def find_neighborhood(model: KnnChainModel, pi: LabelPermutation, step: int,
                      query) -> Neighborhood:
    """The ``model.r`` training rows nearest to ``query`` under the
    step-``step`` chain distance."""
    qx, qy = query
    qx = np.asarray(qx, dtype=np.float64).ravel()
    if qx.shape[0] != model.n_features:
        raise ValueError(
            f"query has {qx.shape[0]} features, model expects {model.n_features}"
        )
    feature_sq = np.sum((model.train_features - qx) ** 2, axis=1)
    partial = np.asarray(qy, dtype=np.int64).ravel() if qy is not None \
        else np.full(model.n_labels, UNDECIDED)
    sq = _step_distances(model, pi, step, feature_sq, partial)
    rows = _smallest_r(sq, model.r)
    return Neighborhood(rows, np.sqrt(sq[rows]))


def predict_chain_knn(model: KnnChainModel, x,
                      pi: LabelPermutation) -> Prediction:
    """Greedy chain prediction: decide labels in the order ``pi``, each
    step voting over the neighbourhood found in the joined space of
    features plus the labels decided so far.

    The score for a label is the fraction of its step's neighbours that
    carry the label; the decision is 1 iff the score exceeds 0.5.
    """
    if len(pi) != model.n_labels:
        raise ValueError(
            f"permutation covers {len(pi)} labels, model has {model.n_labels}"
        )
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] != model.n_features:
        raise ValueError(
            f"query has {x.shape[0]} features, model expects {model.n_features}"
        )
    feature_sq = np.sum((model.train_features - x) ** 2, axis=1)
    partial = np.full(model.n_labels, UNDECIDED, dtype=np.int64)
    scores = np.zeros(model.n_labels)
    for step in range(1, model.n_labels + 1):
        label = pi.order[step - 1]
        sq = _step_distances(model, pi, step, feature_sq, partial)
        rows = _smallest_r(sq, model.r)
        votes = int(model.train_labels[rows, label].sum())
        scores[label] = votes / model.r
        partial[label] = 1 if scores[label] > 0.5 else 0
    return Prediction(partial.astype(np.int8), scores)


def br_vote_matrix(model: KnnChainModel, features: np.ndarray) -> np.ndarray:
    """Chain-free per-label votes for every row: each label is decided by
    the feature-only (step 1) neighbourhood, score > 0.5."""
    features = np.asarray(features, dtype=np.float64)
    out = np.empty((features.shape[0], model.n_labels), dtype=np.int8)
    for n, x in enumerate(features):
        feature_sq = np.sum((model.train_features - x) ** 2, axis=1)
        rows = _smallest_r(feature_sq, model.r)
        votes = model.train_labels[rows].sum(axis=0)
        out[n] = (votes / model.r > 0.5).astype(np.int8)
    return out


def predict_br_knn(model: KnnChainModel, x) -> Prediction:
    """Chain-free prediction of a single query via the feature-only vote."""
    x = np.asarray(x, dtype=np.float64).ravel()
    feature_sq = np.sum((model.train_features - x) ** 2, axis=1)
    rows = _smallest_r(feature_sq, model.r)
    scores = model.train_labels[rows].sum(axis=0) / model.r
    return Prediction((scores > 0.5).astype(np.int8), scores)


# ---------------------------------------------------------------------------
# text serialization: an r header line on top of the dataset CSV format

FORMAT_TAG = "dynchain-knn v1"


def save_knn_model(model: KnnChainModel, path, feature_names=None,
                   label_names=None) -> None:
    """Write the retained training set as dataset CSV under a header line
    carrying ``r`` and the label count."""
    if feature_names is None:
        feature_names = tuple(f"x{j}" for j in range(model.n_features))
    if label_names is None:
        label_names = tuple(f"y{j}" for j in range(model.n_labels))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"{FORMAT_TAG}\n")
        fh.write(f"r {model.r} labels {model.n_labels}\n")
        fh.write(",".join(tuple(feature_names) + tuple(label_names)) + "\n")
        for x, y in zip(model.train_features, model.train_labels):
            fh.write(",".join([repr(float(v)) for v in x]
                              + [str(int(v)) for v in y]) + "\n")


def load_knn_model(path) -> KnnChainModel:
    import csv as _csv

    with open(path, "r", encoding="utf-8", newline="") as fh:
        tag = fh.readline().rstrip("\n")
        if tag != FORMAT_TAG:
            raise ValueError(f"{path}: not a {FORMAT_TAG} file")
        parts = fh.readline().split()
        if len(parts) != 4 or parts[0] != "r" or parts[2] != "labels":
            raise ValueError(f"{path}: malformed r header line")
        r, n_labels = int(parts[1]), int(parts[3])
        reader = _csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    d = len(header) - n_labels
    feats = np.array([[float(t) for t in row[:d]] for row in rows])
    labs = np.array([[int(t) for t in row[d:]] for row in rows], dtype=np.int8)
    return KnnChainModel(feats, labs, r)
