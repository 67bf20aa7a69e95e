"""Independent reference implementations used as test oracles.

Everything here is written with plain loops (and exact rational
arithmetic where it matters) on purpose: these functions must not share
code paths with the package they check.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np


# ---------------------------------------------------------------------------
# chain NB: literally retrain one label-extended classifier per permutation


class RetrainedChain:
    """A classic chain classifier retrained for one fixed label order.

    For the label at chain position s, an independent classifier is fit
    on that label's view: additively smoothed prior, per-feature Gaussian
    (population variance, floored), and one smoothed Bernoulli per
    preceding label column (ground-truth columns at training time).
    """

    def __init__(self, order, views, subsets, other_labels, smoothing,
                 var_floor=1e-9):
        self.order = list(order)
        self.smoothing = smoothing
        self.classifiers = {}
        for pos, label in enumerate(self.order):
            x, t = views[label]
            rows = other_labels[label]
            n = len(t)
            n_pos = sum(t)
            prior = {}
            for y in (0, 1):
                n_y = n_pos if y == 1 else n - n_pos
                prior[y] = (n_y + smoothing) / (n + 2 * smoothing)
            gauss = {}
            for y in (0, 1):
                sel = [i for i in range(n) if t[i] == y]
                if not sel:
                    sel = list(range(n))
                cols = []
                for j in range(x.shape[1]):
                    vals = [x[i, j] for i in sel]
                    mean = sum(vals) / len(vals)
                    var = sum((v - mean) ** 2 for v in vals) / len(vals)
                    cols.append((mean, max(var, var_floor)))
                gauss[y] = cols
            bern = {}
            for prev in self.order[:pos]:
                for y in (0, 1):
                    sel = [i for i in range(n) if t[i] == y]
                    cnt = sum(rows[i][prev] for i in sel)
                    bern[(prev, y)] = ((cnt + smoothing)
                                       / (len(sel) + 2 * smoothing))
            self.classifiers[label] = (prior, gauss, bern, subsets[label])

    def predict(self, x):
        decided = {}
        log_post = {}
        for pos, label in enumerate(self.order):
            prior, gauss, bern, subset = self.classifiers[label]
            lp = {}
            for y in (0, 1):
                total = math.log(prior[y])
                for j, col in enumerate(subset):
                    mean, var = gauss[y][j]
                    total += (-0.5 * math.log(2 * math.pi * var)
                              - (x[col] - mean) ** 2 / (2 * var))
                for prev in self.order[:pos]:
                    p = bern[(prev, y)]
                    total += math.log(p if decided[prev] == 1 else 1 - p)
                lp[y] = total
            decided[label] = 1 if lp[1] > lp[0] else 0
            log_post[label] = (lp[0], lp[1])
        n = len(self.order)
        hard = np.array([decided[i] for i in range(n)], dtype=np.int8)
        lp = np.array([log_post[i] for i in range(n)])
        return hard, lp


def make_trivial_views(ds):
    """Unconditioned per-label views in the shapes RetrainedChain expects."""
    views, subsets, others = {}, {}, {}
    for i in range(ds.n_labels):
        views[i] = (np.array(ds.features), list(int(v) for v in ds.labels[:, i]))
        subsets[i] = list(range(ds.n_features))
        others[i] = [list(int(v) for v in row) for row in ds.labels]
    return views, subsets, others


# ---------------------------------------------------------------------------
# chain KNN: full sort at every step


def knn_chain_oracle(train_features, train_labels, r, order, x):
    """Greedy chain KNN by sorting the whole training set at each step."""
    n = train_features.shape[0]
    decided = {}
    scores = {}
    for pos, label in enumerate(order):
        dists = []
        for row in range(n):
            sq = sum((float(x[j]) - float(train_features[row, j])) ** 2
                     for j in range(train_features.shape[1]))
            for prev in list(order)[:pos]:
                sq += (decided[prev] - float(train_labels[row, prev])) ** 2
            dists.append((math.sqrt(sq), row))
        dists.sort(key=lambda pair: (pair[0], pair[1]))
        neigh = [row for _, row in dists[:r]]
        votes = sum(int(train_labels[row, label]) for row in neigh)
        scores[label] = votes / r
        decided[label] = 1 if scores[label] > 0.5 else 0
    n_labels = train_labels.shape[1]
    return (np.array([decided[i] for i in range(n_labels)], dtype=np.int8),
            np.array([scores[i] for i in range(n_labels)]))


# ---------------------------------------------------------------------------
# metrics: exact rational tallies


def _ratio(num, denom, empty=Fraction(0)):
    return Fraction(num, denom) if denom else empty


def rational_report(truth, pred):
    """The 11 losses computed with Fractions and explicit loops."""
    truth = [[int(v) for v in row] for row in truth]
    pred = [[int(v) for v in row] for row in pred]
    n, l = len(truth), len(truth[0])

    bits_wrong = sum(truth[i][j] != pred[i][j] for i in range(n) for j in range(l))
    hamming = Fraction(bits_wrong, n * l)
    zero_one = Fraction(sum(any(truth[i][j] != pred[i][j] for j in range(l))
                            for i in range(n)), n)

    ex_fdr = ex_fnr = ex_f1_loss = Fraction(0)
    for i in range(n):
        tp = sum(truth[i][j] == 1 and pred[i][j] == 1 for j in range(l))
        fp = sum(truth[i][j] == 0 and pred[i][j] == 1 for j in range(l))
        fn = sum(truth[i][j] == 1 and pred[i][j] == 0 for j in range(l))
        ex_fdr += _ratio(fp, tp + fp)
        ex_fnr += _ratio(fn, tp + fn)
        ex_f1_loss += 1 - _ratio(2 * tp, 2 * tp + fp + fn, empty=Fraction(1))
    ex_fdr /= n
    ex_fnr /= n
    ex_f1_loss /= n

    macro_fdr = macro_fnr = macro_f1_loss = Fraction(0)
    t_tp = t_fp = t_fn = 0
    for j in range(l):
        tp = sum(truth[i][j] == 1 and pred[i][j] == 1 for i in range(n))
        fp = sum(truth[i][j] == 0 and pred[i][j] == 1 for i in range(n))
        fn = sum(truth[i][j] == 1 and pred[i][j] == 0 for i in range(n))
        macro_fdr += _ratio(fp, tp + fp)
        macro_fnr += _ratio(fn, tp + fn)
        macro_f1_loss += 1 - _ratio(2 * tp, 2 * tp + fp + fn, empty=Fraction(1))
        t_tp, t_fp, t_fn = t_tp + tp, t_fp + fp, t_fn + fn
    macro_fdr /= l
    macro_fnr /= l
    macro_f1_loss /= l

    micro_fdr = _ratio(t_fp, t_tp + t_fp)
    micro_fnr = _ratio(t_fn, t_tp + t_fn)
    micro_f1_loss = 1 - _ratio(2 * t_tp, 2 * t_tp + t_fp + t_fn,
                               empty=Fraction(1))

    return {
        "hamming": hamming, "zero_one": zero_one,
        "ex_fdr": ex_fdr, "ex_fnr": ex_fnr, "ex_f1_loss": ex_f1_loss,
        "macro_fdr": macro_fdr, "macro_fnr": macro_fnr,
        "macro_f1_loss": macro_f1_loss,
        "micro_fdr": micro_fdr, "micro_fnr": micro_fnr,
        "micro_f1_loss": micro_f1_loss,
    }


# ---------------------------------------------------------------------------
# crisp per-label F1 of predictions on a validation set


def crisp_f1(truth_col, pred_col):
    tp = sum(t == 1 and p == 1 for t, p in zip(truth_col, pred_col))
    fp = sum(t == 0 and p == 1 for t, p in zip(truth_col, pred_col))
    fn = sum(t == 1 and p == 0 for t, p in zip(truth_col, pred_col))
    denom = 2 * tp + fp + fn
    return 0.0 if denom == 0 else 2 * tp / denom


# ---------------------------------------------------------------------------
# Wilcoxon signed rank: exact enumeration over sign assignments


def exact_wilcoxon_p(diffs):
    """Two-sided exact p-value: 2 * P(W+ <= min(W+, W-)), enumerated over
    all sign assignments of the observed midranks, capped at 1."""
    d = [v for v in diffs if v != 0]
    n = len(d)
    mags = sorted((abs(v), i) for i, v in enumerate(d))
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j < n and mags[j][0] == mags[i][0]:
            j += 1
        mid = (i + 1 + j) / 2  # average of ranks i+1 .. j
        for k in range(i, j):
            ranks[mags[k][1]] = mid
        i = j
    w_plus = sum(r for r, v in zip(ranks, d) if v > 0)
    w_minus = sum(r for r, v in zip(ranks, d) if v < 0)
    w = min(w_plus, w_minus)
    count = 0
    for signs in itertools.product((0, 1), repeat=n):
        s = sum(r for r, b in zip(ranks, signs) if b)
        if s <= w + 1e-12:
            count += 1
    return min(1.0, 2.0 * count / 2 ** n)
