"""Bagged ensembles of chain classifiers with per-query label ordering.

Every member is trained on its own bag: sample ``bag_fraction`` of the
rows, fit member-local standardization, split into an actual training
part and a validation part, condition each label's binary problem
(undersampling + feature selection, Naive Bayes base only), fit the base
model, and precompute the validation part's chain-free predictions for
the ordering heuristic.

At query time each member picks its own chain order:

* ``dynamic``   - local-F1 ordering from the member's validation cache,
                  recomputed per query;
* ``random``    - one random order drawn per member at build time and
                  reused for every query;
* ``fixed``     - a caller-supplied order shared by all members;
* ``br``        - no chain at all, each label predicted independently.

Member votes are hard 0/1 decisions; the ensemble emits label ``i`` iff
strictly more than half the members voted for it.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dataset import (MultiLabelDataset, StandardizationParams,
                      bag_sample, split_train_validation, standardize)
from .dynamic_order import ValidationCache, dynamic_permutation
from .errors import TrainingError
from .knn_chain import (KnnChainModel, br_vote_matrix, predict_br_knn,
                        predict_chain_knn)
from .nb_chain import (LabelPermutation, NbChainModel, Prediction,
                       br_predict_matrix, predict_br_nb, predict_chain_nb,
                       train_nb)
from .preprocess import LabelView, label_view, select_features, undersample
from .rng import derive_seed, make_rng

BASES = ("naive_bayes", "nearest_neighbour")
ORDERINGS = ("dynamic", "random", "fixed", "br")
TUNE = "tune"


@dataclass(frozen=True)
class EnsembleConfig:
    """Build-time knobs of a chain ensemble."""

    k: int = 20
    bag_fraction: float = 0.66
    max_ir: float = 20.0
    feature_cap: int = 300
    base: str = "naive_bayes"
    ordering: str = "dynamic"
    fixed_order: tuple[int, ...] | None = None
    beta: float | str = 1.0
    r: int | str = 3
    split_fraction: float = 0.6
    smoothing: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 0.0 < self.bag_fraction <= 1.0:
            raise ValueError("bag_fraction must lie in (0, 1]")
        if self.base not in BASES:
            raise ValueError(f"base must be one of {BASES}")
        if self.ordering not in ORDERINGS:
            raise ValueError(f"ordering must be one of {ORDERINGS}")
        if self.beta != TUNE and float(self.beta) <= 0:
            raise ValueError("beta must be positive or 'tune'")
        if self.r != TUNE and int(self.r) < 1:
            raise ValueError("r must be >= 1 or 'tune'")
        if self.fixed_order is not None:
            object.__setattr__(self, "fixed_order",
                               tuple(int(v) for v in self.fixed_order))


@dataclass(frozen=True, eq=False)
class EnsembleMember:
    """One trained member: base model, its validation cache for dynamic
    ordering, its own standardization, and its build-time order (random
    and fixed policies only)."""

    model: NbChainModel | KnnChainModel
    cache: ValidationCache
    std_params: StandardizationParams
    build_order: LabelPermutation | None


def _transform_vector(x: np.ndarray, params: StandardizationParams) -> np.ndarray:
    safe = np.where(params.stddevs == 0.0, 1.0, params.stddevs)
    out = (x - params.means) / safe
    out[params.stddevs == 0.0] = 0.0
    return out


def _conditioned_views(train_part: MultiLabelDataset, config: EnsembleConfig,
                       seed: int):
    views, subsets = [], []
    for i in range(train_part.n_labels):
        view = label_view(train_part, i)
        view = undersample(view, config.max_ir, derive_seed(seed, "under", i))
        subset = select_features(view, config.feature_cap,
                                 derive_seed(seed, "select", i), target_label=i)
        views.append(LabelView(view.features[:, subset.indices], view.target,
                               view.source_rows))
        subsets.append(subset)
    return views, subsets


def build_member(train: MultiLabelDataset, config: EnsembleConfig,
                 beta: float, r: int, seed: int,
                 bag: bool = True) -> EnsembleMember:
    """Train one ensemble member from its own sampled/conditioned data."""
    data = bag_sample(train, config.bag_fraction,
                      derive_seed(seed, "bag")) if bag else train
    data, std_params = standardize(data)
    split = split_train_validation(data, config.split_fraction,
                                   derive_seed(seed, "split"))
    train_part, val_part = split.train_part, split.validation_part

    if config.base == "naive_bayes":
        views, subsets = _conditioned_views(train_part, config, seed)
        model = train_nb(train_part, views, config.smoothing, subsets)
        br = br_predict_matrix(model, val_part.features)
    else:
        r_eff = min(int(r), train_part.n_rows)
        model = KnnChainModel(train_part.features, train_part.labels, r_eff)
        br = br_vote_matrix(model, val_part.features)

    cache = ValidationCache(val_part.features, val_part.labels, br)
    order = None
    if config.ordering == "random":
        order = LabelPermutation.random(train.n_labels, make_rng(seed, "order"))
    elif config.ordering == "fixed":
        order = (LabelPermutation(np.asarray(config.fixed_order))
                 if config.fixed_order is not None
                 else LabelPermutation.identity(train.n_labels))
    return EnsembleMember(model, cache, std_params, order)


def predict_member(member: EnsembleMember, ordering: str, beta: float,
                   x: np.ndarray) -> Prediction:
    """Predict one query with one member under the given ordering policy.
    ``x`` is in the ensemble's input space; the member applies its own
    standardization."""
    xs = _transform_vector(np.asarray(x, dtype=np.float64).ravel(),
                           member.std_params)
    if ordering == "br":
        if isinstance(member.model, NbChainModel):
            return predict_br_nb(member.model, xs)
        return predict_br_knn(member.model, xs)
    if ordering == "dynamic":
        pi = dynamic_permutation(member.cache, xs, beta)
    else:
        pi = member.build_order
    if isinstance(member.model, NbChainModel):
        return predict_chain_nb(member.model, xs, pi)
    return predict_chain_knn(member.model, xs, pi)


class Ensemble:
    """K trained members plus the resolved configuration."""

    def __init__(self, members, config: EnsembleConfig, beta: float, r: int,
                 feature_names, label_names):
        self.members = list(members)
        self.config = config
        self.beta = float(beta)
        self.r = int(r)
        self.feature_names = tuple(feature_names)
        self.label_names = tuple(label_names)
        self.n_features = len(self.feature_names)
        self.n_labels = len(self.label_names)

    def member_prediction(self, member: EnsembleMember, x: np.ndarray) -> Prediction:
        return predict_member(member, self.config.ordering, self.beta, x)

    def predict(self, x) -> Prediction:
        """Aggregate the members' hard votes: label i is on iff its vote
        fraction strictly exceeds 0.5; scores carry the fractions."""
        x = np.asarray(x, dtype=np.float64).ravel()
        if x.shape[0] != self.n_features:
            raise ValueError(
                f"query has {x.shape[0]} features, ensemble expects "
                f"{self.n_features}"
            )
        votes = np.zeros(self.n_labels)
        for member in self.members:
            votes += self.member_prediction(member, x).hard
        fractions = votes / len(self.members)
        return Prediction((fractions > 0.5).astype(np.int8), fractions)

    def predict_matrix(self, features) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        out = np.empty((features.shape[0], self.n_labels), dtype=np.int8)
        for n, x in enumerate(features):
            out[n] = self.predict(x).hard
        return out


def build_ensemble(train: MultiLabelDataset,
                   config: EnsembleConfig) -> Ensemble:
    """Train a K-member ensemble on ``train``.

    ``beta``/``r`` set to ``"tune"`` are resolved once here by 3-fold
    cross-validated grid search and then shared by all members.
    """
    if config.ordering == "fixed" and config.fixed_order is not None \
            and len(config.fixed_order) != train.n_labels:
        raise ValueError("fixed_order length must equal the label count")
    beta, r = config.beta, config.r
    if r == TUNE:
        from .tuning import tune_r
        r = tune_r(train, config)
    if beta == TUNE:
        from .tuning import tune_beta
        beta = tune_beta(train, replace(config, r=r))
    members = []
    for k in range(config.k):
        seed = derive_seed(config.seed, "member", k)
        try:
            members.append(build_member(train, config, float(beta), int(r),
                                        seed))
        except Exception as exc:
            raise TrainingError(f"member {k}: {exc}") from exc
    return Ensemble(members, config, float(beta), int(r),
                    train.feature_names, train.label_names)


def predict_ensemble(ens: Ensemble, x) -> Prediction:
    """Module-level alias for :meth:`Ensemble.predict`."""
    return ens.predict(x)


# ---------------------------------------------------------------------------
# persistence: a manifest.txt naming member files, all plain text
#
#   manifest.txt       key-value lines (config, names, member ids)
#   member_<id>.model  base model (format tag on line 1 picks the loader)
#   member_<id>.std    member standardization parameters
#   member_<id>.cache  validation features/labels/reference predictions
#   member_<id>.order  build-time label order (random/fixed policies only)

MANIFEST_TAG = "dynchain-ensemble v1"
CACHE_TAG = "dynchain-cache v1"
STD_TAG = "dynchain-std v1"


def _fmt_floats(values) -> str:
    return " ".join(f"{float(v):.17g}" for v in np.atleast_1d(values))


def save_ensemble(ens: Ensemble, out_dir) -> None:
    from pathlib import Path

    from .knn_chain import save_knn_model
    from .nb_chain import save_nb_model

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = ens.config
    lines = [
        MANIFEST_TAG,
        f"k {cfg.k}",
        f"base {cfg.base}",
        f"ordering {cfg.ordering}",
        f"beta {ens.beta:.17g}",
        f"r {ens.r}",
        f"bag_fraction {cfg.bag_fraction:.17g}",
        f"max_ir {cfg.max_ir:.17g}",
        f"feature_cap {cfg.feature_cap}",
        f"split_fraction {cfg.split_fraction:.17g}",
        f"smoothing {cfg.smoothing:.17g}",
        f"seed {cfg.seed}",
        "fixed_order " + (",".join(str(v) for v in cfg.fixed_order)
                          if cfg.fixed_order is not None else "-"),
        "feature_names " + ",".join(ens.feature_names),
        "label_names " + ",".join(ens.label_names),
    ]
    for idx, member in enumerate(ens.members):
        stem = f"member_{idx:03d}"
        lines.append(f"member {stem}")
        if isinstance(member.model, NbChainModel):
            save_nb_model(member.model, out / f"{stem}.model")
        else:
            save_knn_model(member.model, out / f"{stem}.model",
                           ens.feature_names, ens.label_names)
        with open(out / f"{stem}.std", "w", encoding="utf-8") as fh:
            fh.write(f"{STD_TAG}\n")
            fh.write(f"means {_fmt_floats(member.std_params.means)}\n")
            fh.write(f"stds {_fmt_floats(member.std_params.stddevs)}\n")
        cache = member.cache
        with open(out / f"{stem}.cache", "w", encoding="utf-8") as fh:
            fh.write(f"{CACHE_TAG}\n")
            fh.write(f"shape {cache.n_rows} "
                     f"{cache.validation_features.shape[1]} {cache.n_labels}\n")
            for feats, labs, preds in zip(cache.validation_features,
                                          cache.validation_labels,
                                          cache.br_predictions):
                fh.write(_fmt_floats(feats) + " "
                         + " ".join(str(int(v)) for v in labs) + " "
                         + " ".join(str(int(v)) for v in preds) + "\n")
        if member.build_order is not None:
            with open(out / f"{stem}.order", "w", encoding="utf-8") as fh:
                fh.write("order " + " ".join(str(int(v)) for v in
                                             member.build_order.order) + "\n")
    with open(out / "manifest.txt", "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _load_cache(path) -> ValidationCache:
    with open(path, "r", encoding="utf-8") as fh:
        if fh.readline().rstrip("\n") != CACHE_TAG:
            raise ValueError(f"{path}: not a {CACHE_TAG} file")
        _, n, d, l = fh.readline().split()
        n, d, l = int(n), int(d), int(l)
        feats = np.empty((n, d))
        labs = np.empty((n, l), dtype=np.int8)
        preds = np.empty((n, l), dtype=np.int8)
        for row in range(n):
            toks = fh.readline().split()
            feats[row] = [float(t) for t in toks[:d]]
            labs[row] = [int(t) for t in toks[d:d + l]]
            preds[row] = [int(t) for t in toks[d + l:]]
    return ValidationCache(feats, labs, preds)


def load_ensemble(out_dir) -> Ensemble:
    from pathlib import Path

    from .knn_chain import FORMAT_TAG as KNN_TAG
    from .knn_chain import load_knn_model
    from .nb_chain import load_nb_model

    out = Path(out_dir)
    with open(out / "manifest.txt", "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if lines[0] != MANIFEST_TAG:
        raise ValueError(f"{out}: not a {MANIFEST_TAG} manifest")
    fields = {}
    member_stems = []
    for ln in lines[1:]:
        key, _, value = ln.partition(" ")
        if key == "member":
            member_stems.append(value)
        else:
            fields[key] = value
    fixed = fields.get("fixed_order", "-")
    config = EnsembleConfig(
        k=int(fields["k"]),
        bag_fraction=float(fields["bag_fraction"]),
        max_ir=float(fields["max_ir"]),
        feature_cap=int(fields["feature_cap"]),
        base=fields["base"],
        ordering=fields["ordering"],
        fixed_order=None if fixed == "-" else
        tuple(int(v) for v in fixed.split(",")),
        beta=float(fields["beta"]),
        r=int(fields["r"]),
        split_fraction=float(fields["split_fraction"]),
        smoothing=float(fields["smoothing"]),
        seed=int(fields["seed"]),
    )
    members = []
    for stem in member_stems:
        with open(out / f"{stem}.model", "r", encoding="utf-8") as fh:
            tag = fh.readline().rstrip("\n")
        model = (load_knn_model(out / f"{stem}.model") if tag == KNN_TAG
                 else load_nb_model(out / f"{stem}.model"))
        with open(out / f"{stem}.std", "r", encoding="utf-8") as fh:
            if fh.readline().rstrip("\n") != STD_TAG:
                raise ValueError(f"{stem}.std: bad format tag")
            means = [float(t) for t in fh.readline().split()[1:]]
            stds = [float(t) for t in fh.readline().split()[1:]]
        cache = _load_cache(out / f"{stem}.cache")
        order = None
        order_path = out / f"{stem}.order"
        if order_path.exists():
            with open(order_path, "r", encoding="utf-8") as fh:
                order = LabelPermutation(
                    np.array([int(t) for t in fh.readline().split()[1:]]))
        members.append(EnsembleMember(model, cache,
                                      StandardizationParams(means, stds),
                                      order))
    return Ensemble(members, config,
                    float(fields["beta"]), int(fields["r"]),
                    fields["feature_names"].split(","),
                    fields["label_names"].split(","))
