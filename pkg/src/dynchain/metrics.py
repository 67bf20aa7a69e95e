"""Multi-label quality criteria, all reported as losses in [0, 1]
(lower is better).

Eleven values cover three views of the confusion structure:

* instance-based: ``hamming`` (mean bit disagreement), ``zero_one``
  (fraction of rows with any disagreement), and per-row FDR / FNR /
  F1-loss averaged over rows;
* macro-averaged: per-label FDR = FP/(TP+FP), FNR = FN/(TP+FN),
  F1-loss = 1 - 2TP/(2TP+FP+FN), averaged over labels;
* micro-averaged: the same formulas on tallies summed over labels.

Zero-denominator convention, everywhere: a ratio with an empty
denominator contributes 0 loss.  In particular a row with empty truth
and empty prediction is a perfect row, and a label that never occurs
and is never predicted costs nothing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

METRIC_NAMES = (
    "hamming", "zero_one",
    "ex_fdr", "ex_fnr", "ex_f1_loss",
    "macro_fdr", "macro_fnr", "macro_f1_loss",
    "micro_fdr", "micro_fnr", "micro_f1_loss",
)


@dataclass(frozen=True, eq=False)
class EvaluationReport:
    hamming: float
    zero_one: float
    ex_fdr: float
    ex_fnr: float
    ex_f1_loss: float
    macro_fdr: float
    macro_fnr: float
    macro_f1_loss: float
    micro_fdr: float
    micro_fnr: float
    micro_f1_loss: float
    support: np.ndarray  # (L, 4) integer tallies: TP, FP, FN, TN per label

    def as_dict(self) -> dict:
        return {name: float(getattr(self, name)) for name in METRIC_NAMES}

    def to_json(self) -> str:
        return json.dumps(self.as_dict())

    def __getitem__(self, name: str) -> float:
        if name not in METRIC_NAMES:
            raise KeyError(name)
        return float(getattr(self, name))


def _safe_div(num, denom):
    num = np.asarray(num, dtype=np.float64)
    denom = np.asarray(denom, dtype=np.float64)
    out = np.zeros(np.broadcast(num, denom).shape)
    nz = denom > 0
    out[nz] = num[nz] / denom[nz]
    return out


def _check(truth, predicted):
    truth = np.asarray(truth)
    predicted = np.asarray(predicted)
    if truth.ndim != 2 or truth.shape != predicted.shape:
        raise ValueError(
            f"shape mismatch: truth {truth.shape} vs predicted {predicted.shape}"
        )
    if truth.shape[0] < 1:
        raise ValueError("need at least one row")
    for name, m in (("truth", truth), ("predicted", predicted)):
        if not np.isin(m, (0, 1)).all():
            raise ValueError(f"{name} matrix contains entries other than 0/1")
    return truth.astype(np.int64), predicted.astype(np.int64)


def evaluate(truth, predicted) -> EvaluationReport:
    """Score a prediction matrix against the ground truth.

    Both arguments are ``N x L`` 0/1 matrices.  Returns the 11 losses
    plus per-label TP/FP/FN/TN tallies.
    """
    truth, predicted = _check(truth, predicted)
    tp = ((truth == 1) & (predicted == 1))
    fp = ((truth == 0) & (predicted == 1))
    fn = ((truth == 1) & (predicted == 0))
    tn = ((truth == 0) & (predicted == 0))

    hamming = float(np.mean(truth != predicted))
    zero_one = float(np.mean((truth != predicted).any(axis=1)))

    # instance-based: per-row ratios, then the mean over rows
    row_tp = tp.sum(axis=1)
    row_fp = fp.sum(axis=1)
    row_fn = fn.sum(axis=1)
    ex_fdr = float(np.mean(_safe_div(row_fp, row_tp + row_fp)))
    ex_fnr = float(np.mean(_safe_div(row_fn, row_tp + row_fn)))
    ex_f1 = _safe_div(2 * row_tp, 2 * row_tp + row_fp + row_fn)
    # a row with no positives anywhere is perfect, not zero-F1
    ex_f1[(2 * row_tp + row_fp + row_fn) == 0] = 1.0
    ex_f1_loss = float(np.mean(1.0 - ex_f1))

    lab_tp = tp.sum(axis=0)
    lab_fp = fp.sum(axis=0)
    lab_fn = fn.sum(axis=0)
    lab_tn = tn.sum(axis=0)
    macro_fdr = float(np.mean(_safe_div(lab_fp, lab_tp + lab_fp)))
    macro_fnr = float(np.mean(_safe_div(lab_fn, lab_tp + lab_fn)))
    lab_f1 = _safe_div(2 * lab_tp, 2 * lab_tp + lab_fp + lab_fn)
    lab_f1[(2 * lab_tp + lab_fp + lab_fn) == 0] = 1.0
    macro_f1_loss = float(np.mean(1.0 - lab_f1))

    t_tp, t_fp, t_fn = int(lab_tp.sum()), int(lab_fp.sum()), int(lab_fn.sum())
    micro_fdr = float(_safe_div(t_fp, t_tp + t_fp))
    micro_fnr = float(_safe_div(t_fn, t_tp + t_fn))
    if 2 * t_tp + t_fp + t_fn == 0:
        micro_f1_loss = 0.0
    else:
        micro_f1_loss = 1.0 - 2.0 * t_tp / (2 * t_tp + t_fp + t_fn)

    support = np.column_stack([lab_tp, lab_fp, lab_fn, lab_tn])
    support.flags.writeable = False
    return EvaluationReport(
        hamming, zero_one, ex_fdr, ex_fnr, ex_f1_loss,
        macro_fdr, macro_fnr, macro_f1_loss,
        micro_fdr, micro_fnr, float(micro_f1_loss),
        support,
    )
