"""Cross-validated grid search for the ensemble hyperparameters.

Both grids are evaluated with 3-fold CV of a single dynamically ordered
chain member (no bagging) scored by macro-averaged F1 loss; ties resolve
to the smallest candidate.  The fuzzy-neighbourhood width ``beta`` is
searched over 1..10, the neighbour count ``r`` over the odd values
1..11, skipping candidates larger than the smallest fold's retained
training part.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .dataset import MultiLabelDataset, kfold, _round_half_up
from .ensemble import EnsembleConfig, TUNE, build_member, predict_member
from .errors import TuningError
from .metrics import evaluate
from .rng import derive_seed

BETA_GRID = tuple(range(1, 11))
R_GRID = (1, 3, 5, 7, 9, 11)
TUNING_FOLDS = 3
_FALLBACK_BETA = 1.0
_FALLBACK_R = 3


def _cv_folds(train: MultiLabelDataset, seed: int):
    if train.n_rows < TUNING_FOLDS:
        raise TuningError(
            f"{train.n_rows} rows cannot support {TUNING_FOLDS}-fold tuning"
        )
    return kfold(train, TUNING_FOLDS, seed)


def _member_loss(fold, config: EnsembleConfig, beta: float, r: int,
                 seed: int) -> float:
    try:
        member = build_member(fold.train_part, config, beta, r, seed,
                              bag=False)
    except ValueError as exc:
        raise TuningError(f"fold too small to train a member: {exc}") from exc
    predicted = np.vstack([
        predict_member(member, "dynamic", beta, x).hard
        for x in fold.validation_part.features
    ])
    return evaluate(fold.validation_part.labels, predicted).macro_f1_loss


def tune_beta(train: MultiLabelDataset, config: EnsembleConfig) -> float:
    """Pick the fuzzy-neighbourhood width from ``BETA_GRID`` by 3-fold CV."""
    folds = _cv_folds(train, derive_seed(config.seed, "tune-beta"))
    r = int(config.r) if config.r != TUNE else _FALLBACK_R
    best_beta, best_loss = None, np.inf
    for beta in BETA_GRID:
        losses = [
            _member_loss(fold, config, float(beta), r,
                         derive_seed(config.seed, "tune-beta", beta, i))
            for i, fold in enumerate(folds)
        ]
        loss = float(np.mean(losses))
        if loss < best_loss:
            best_beta, best_loss = float(beta), loss
    return best_beta


def tune_r(train: MultiLabelDataset, config: EnsembleConfig) -> int:
    """Pick the neighbour count from ``R_GRID`` by 3-fold CV; candidates
    beyond the smallest fold's retained training part are skipped."""
    folds = _cv_folds(train, derive_seed(config.seed, "tune-r"))
    beta = float(config.beta) if config.beta != TUNE else _FALLBACK_BETA
    limit = min(
        _round_half_up(config.split_fraction * fold.train_part.n_rows)
        for fold in folds
    )
    best_r, best_loss = None, np.inf
    for r in R_GRID:
        if r > limit:
            continue
        losses = [
            _member_loss(fold, config, beta, r,
                         derive_seed(config.seed, "tune-r", r, i))
            for i, fold in enumerate(folds)
        ]
        loss = float(np.mean(losses))
        if loss < best_loss:
            best_r, best_loss = int(r), loss
    if best_r is None:
        raise TuningError("no neighbour count fits the tuning folds")
    return best_r
