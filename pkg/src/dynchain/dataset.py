"""Multi-label dataset container, CSV ingestion, standardization and the
sampling/splitting primitives used by the training and evaluation
protocols.

A dataset couples an ``N x d`` numeric feature matrix with an ``N x L``
binary label matrix.  All values are immutable after construction;
sampling operations are pure functions of ``(input, seed)``.

CSV format: UTF-8, comma-separated, one header row, ``.`` decimal
separator, no quoting.  The trailing ``label_count`` columns are the
labels and must contain the literal characters ``0`` or ``1``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .rng import make_rng


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class MultiLabelDataset:
    """Immutable feature matrix + binary label matrix with column names."""

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]
    label_names: tuple[str, ...]

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        labs = np.asarray(self.labels)
        if feats.ndim != 2 or labs.ndim != 2:
            raise ValueError("features and labels must be 2-D matrices")
        if feats.shape[0] != labs.shape[0]:
            raise ValueError(
                f"row count mismatch: {feats.shape[0]} feature rows vs "
                f"{labs.shape[0]} label rows"
            )
        if feats.shape[0] < 1 or feats.shape[1] < 1 or labs.shape[1] < 1:
            raise ValueError("need at least one row, one feature and one label")
        if not np.isin(labs, (0, 1)).all():
            raise DataError("label matrix contains entries other than 0/1")
        names_f = tuple(str(n) for n in self.feature_names)
        names_l = tuple(str(n) for n in self.label_names)
        if len(names_f) != feats.shape[1]:
            raise ValueError("feature_names length does not match feature count")
        if len(names_l) != labs.shape[1]:
            raise ValueError("label_names length does not match label count")
        if len(set(names_f)) != len(names_f) or len(set(names_l)) != len(names_l):
            raise ValueError("duplicate column names")
        object.__setattr__(self, "features", _frozen(feats))
        object.__setattr__(self, "labels", _frozen(labs.astype(np.int8)))
        object.__setattr__(self, "feature_names", names_f)
        object.__setattr__(self, "label_names", names_l)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_labels(self) -> int:
        return self.labels.shape[1]

    def take(self, rows) -> "MultiLabelDataset":
        """Dataset restricted to the given row indices (in the given order)."""
        rows = np.asarray(rows, dtype=np.intp)
        return MultiLabelDataset(
            self.features[rows], self.labels[rows],
            self.feature_names, self.label_names,
        )


@dataclass(frozen=True, eq=False)
class StandardizationParams:
    """Per-column means and population standard deviations.

    A standard deviation of exactly 0 marks a constant column; such
    columns map to all zeros when the parameters are applied.
    """

    means: np.ndarray
    stddevs: np.ndarray

    def __post_init__(self):
        means = np.asarray(self.means, dtype=np.float64).ravel()
        stds = np.asarray(self.stddevs, dtype=np.float64).ravel()
        if means.shape != stds.shape:
            raise ValueError("means and stddevs must have equal length")
        if (stds < 0).any():
            raise ValueError("standard deviations must be nonnegative")
        object.__setattr__(self, "means", _frozen(means))
        object.__setattr__(self, "stddevs", _frozen(stds))


@dataclass(frozen=True, eq=False)
class SplitPair:
    """A disjoint, exhaustive two-way split of a dataset's rows."""

    train_part: MultiLabelDataset
    validation_part: MultiLabelDataset
    ratio: float


def load_csv(path, label_count: int) -> MultiLabelDataset:
    """Load a dataset from CSV; the trailing ``label_count`` columns are labels.

    Raises
    ------
    ValueError
        ``label_count`` is not in ``[1, total columns - 1]``.
    DataError
        Ragged rows, unparseable feature values, or label cells that are
        not the literal characters ``0``/``1``; the message names the
        offending row (1-based, header included) and column.
    """
    label_count = int(label_count)
    if label_count < 1:
        raise ValueError("label_count must be positive")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        n_cols = len(header)
        if label_count >= n_cols:
            raise ValueError(
                f"label_count={label_count} must be smaller than the "
                f"column count {n_cols}"
            )
        d = n_cols - label_count
        feat_rows, label_rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != n_cols:
                raise DataError(
                    f"{path}: row {lineno} has {len(row)} columns, expected {n_cols}"
                )
            try:
                feat_rows.append([float(tok) for tok in row[:d]])
            except ValueError:
                bad = next(i for i, tok in enumerate(row[:d])
                           if not _is_float(tok))
                raise DataError(
                    f"{path}: row {lineno}, column {bad + 1} "
                    f"({header[bad]!r}): cannot parse {row[bad]!r} as a number"
                ) from None
            lab = []
            for j, tok in enumerate(row[d:]):
                if tok not in ("0", "1"):
                    raise DataError(
                        f"{path}: row {lineno}, column {d + j + 1} "
                        f"({header[d + j]!r}): label value {tok!r} is not 0 or 1"
                    )
                lab.append(int(tok))
            label_rows.append(lab)
    if not feat_rows:
        raise DataError(f"{path}: no data rows")
    return MultiLabelDataset(
        np.asarray(feat_rows, dtype=np.float64),
        np.asarray(label_rows, dtype=np.int8),
        tuple(header[:d]),
        tuple(header[d:]),
    )


def _is_float(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def save_csv(ds: MultiLabelDataset, path) -> None:
    """Write a dataset in the CSV format accepted by :func:`load_csv`.

    Feature values are written with ``repr``, which round-trips float64
    exactly, so ``load_csv(save_csv(ds))`` reproduces ``ds`` bit for bit.
    """
    for name in ds.feature_names + ds.label_names:
        if "," in name or "\n" in name:
            raise ValueError(f"column name {name!r} contains a delimiter")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(ds.feature_names + ds.label_names) + "\n")
        for x, y in zip(ds.features, ds.labels):
            fh.write(",".join([repr(float(v)) for v in x]
                              + [str(int(v)) for v in y]) + "\n")


def standardize(ds: MultiLabelDataset):
    """Shift/scale every feature column to mean 0, population std 1.

    Constant columns (population std exactly 0) become all zeros.
    Returns the transformed dataset and the fitted parameters, which
    :func:`apply_standardization` reuses on held-out data.
    """
    means = ds.features.mean(axis=0)
    stds = ds.features.std(axis=0)  # population (divide-by-N) convention
    params = StandardizationParams(means, stds)
    return apply_standardization(ds, params), params


def apply_standardization(ds: MultiLabelDataset,
                          params: StandardizationParams) -> MultiLabelDataset:
    """Apply previously fitted column parameters: x -> (x - mean) / std,
    with zero-std columns mapping to 0."""
    if params.means.shape[0] != ds.n_features:
        raise ValueError(
            f"params fitted for {params.means.shape[0]} columns, "
            f"dataset has {ds.n_features}"
        )
    safe = np.where(params.stddevs == 0.0, 1.0, params.stddevs)
    out = (ds.features - params.means) / safe
    out[:, params.stddevs == 0.0] = 0.0
    return MultiLabelDataset(out, ds.labels, ds.feature_names, ds.label_names)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split_train_validation(ds: MultiLabelDataset, t: float,
                           seed: int) -> SplitPair:
    """Random disjoint split with ``round(t * N)`` training rows.

    The training size uses round-half-up and is clamped to ``[1, N-1]``
    so both parts are nonempty.
    """
    if not 0.0 < t < 1.0:
        raise ValueError(f"split fraction t={t} must lie in (0, 1)")
    n = ds.n_rows
    if n < 2:
        raise ValueError("need at least 2 rows to split")
    n_train = min(max(_round_half_up(t * n), 1), n - 1)
    perm = make_rng(seed, "split").permutation(n)
    train_rows = np.sort(perm[:n_train])
    val_rows = np.sort(perm[n_train:])
    return SplitPair(ds.take(train_rows), ds.take(val_rows), float(t))


def kfold(ds: MultiLabelDataset, k: int, seed: int) -> list[SplitPair]:
    """Shuffled k-fold partition: k (train, test) pairs whose test parts
    are pairwise disjoint, exhaustive, and differ in size by at most 1."""
    n = ds.n_rows
    if not 2 <= k <= n:
        raise ValueError(f"k={k} must satisfy 2 <= k <= N={n}")
    perm = make_rng(seed, "kfold").permutation(n)
    base, extra = divmod(n, k)
    pairs = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        test_rows = np.sort(perm[start:start + size])
        mask = np.ones(n, dtype=bool)
        mask[test_rows] = False
        train_rows = np.flatnonzero(mask)
        pairs.append(SplitPair(ds.take(train_rows), ds.take(test_rows),
                               len(train_rows) / n))
        start += size
    return pairs


def bag_sample(ds: MultiLabelDataset, fraction: float,
               seed: int) -> MultiLabelDataset:
    """Sample ``round(fraction * N)`` rows uniformly without replacement."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction={fraction} must lie in (0, 1]")
    n = ds.n_rows
    size = min(max(_round_half_up(fraction * n), 1), n)
    rows = make_rng(seed, "bag").permutation(n)[:size]
    return ds.take(rows)
