"""Nonparametric comparison machinery for benchmark results.

Pairwise comparisons use the Wilcoxon signed-rank test (two-sided,
zero differences dropped) with Holm's step-down correction across a
family of tests.  Groups of three or more algorithms use the Friedman
test on per-dataset ranks, followed by the Nemenyi critical distance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2, norm, rankdata

from .errors import InsufficientDataError

# Largest sample size for which the signed-rank p-value is computed by
# exact enumeration of the 2^n sign assignments (conditional on the
# observed midranks); beyond this the normal approximation with tie and
# continuity corrections is used.
EXACT_ENUMERATION_LIMIT = 12

# Nemenyi critical values: two-sided studentized range quantile at
# infinite df, divided by sqrt(2); indexed by [alpha][number of algorithms].
NEMENYI_Q = {
    0.05: {2: 1.960, 3: 2.343, 4: 2.569, 5: 2.728, 6: 2.850,
           7: 2.949, 8: 3.031, 9: 3.102, 10: 3.164},
    0.10: {2: 1.645, 3: 2.052, 4: 2.291, 5: 2.459, 6: 2.589,
           7: 2.693, 8: 2.780, 9: 2.855, 10: 2.920},
}


@dataclass(frozen=True, eq=False)
class ComparisonMatrix:
    """Loss scores of A algorithms on D datasets (lower is better)."""

    scores: np.ndarray
    algorithm_names: tuple[str, ...]
    dataset_names: tuple[str, ...]

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.ndim != 2:
            raise ValueError("scores must be a 2-D matrix")
        a, d = scores.shape
        if a < 2 or d < 1:
            raise ValueError("need at least 2 algorithms and 1 dataset")
        if not np.isfinite(scores).all():
            raise ValueError("scores must be finite (no missing entries)")
        if len(self.algorithm_names) != a or len(self.dataset_names) != d:
            raise ValueError("name lists must match the matrix shape")
        scores.flags.writeable = False
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "algorithm_names", tuple(self.algorithm_names))
        object.__setattr__(self, "dataset_names", tuple(self.dataset_names))


def _exact_signed_rank_p(ranks: np.ndarray, w_small: float) -> float:
    """P-value by enumerating all sign assignments of the observed ranks."""
    n = ranks.size
    masks = np.arange(2 ** n, dtype=np.uint64)
    bits = (masks[:, None] >> np.arange(n)) & 1
    sums = bits @ ranks
    # distribution of W+ is symmetric: two-sided p = 2 * P(W+ <= min(W+, W-))
    p = 2.0 * np.count_nonzero(sums <= w_small + 1e-12) / 2 ** n
    return min(1.0, p)


def wilcoxon_signed_rank(a, b):
    """Two-sided Wilcoxon signed-rank test for paired samples.

    Zero differences are dropped.  Ties in the absolute differences get
    midranks.  The statistic is ``min(W+, W-)``.  For up to
    ``EXACT_ENUMERATION_LIMIT`` nonzero differences the p-value is exact
    (enumeration); beyond that it uses the normal approximation with tie
    and continuity corrections.

    Returns
    -------
    (statistic, p_value)

    Raises
    ------
    InsufficientDataError
        Fewer than 5 nonzero differences remain.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError("paired samples must have equal length")
    d = a - b
    d = d[d != 0.0]
    n = d.size
    if n < 5:
        raise InsufficientDataError(
            f"only {n} nonzero differences; need at least 5"
        )
    ranks = rankdata(np.abs(d), method="average")
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    statistic = min(w_plus, w_minus)

    if n <= EXACT_ENUMERATION_LIMIT:
        return statistic, _exact_signed_rank_p(ranks, statistic)

    mean = n * (n + 1) / 4.0
    # sum(r^2)/4 equals the classical variance with the tie correction built in
    sd = np.sqrt(np.sum(ranks ** 2) / 4.0)
    z = (statistic - mean + 0.5) / sd  # continuity correction toward the mean
    p = min(1.0, 2.0 * norm.cdf(z))
    return statistic, float(p)


def holm_adjust(p_values) -> list[float]:
    """Holm step-down adjustment, returned in the input order.

    ``adjusted[(i)] = max over j <= i of min(1, (m - j + 1) * p[(j)])``
    over the ascending order of the raw p-values.
    """
    p = np.asarray(p_values, dtype=np.float64).ravel()
    if p.size == 0:
        return []
    if (p < 0).any() or (p > 1).any():
        raise ValueError("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    adjusted = np.empty(m)
    running = 0.0
    for step, idx in enumerate(order):
        running = max(running, min(1.0, (m - step) * p[idx]))
        adjusted[idx] = running
    return [float(v) for v in adjusted]


def friedman_nemenyi(m: ComparisonMatrix, alpha: float = 0.10):
    """Friedman test over per-dataset ranks plus the Nemenyi critical
    distance.

    Ranks are assigned per dataset, 1 = lowest loss, midranks on ties.
    Returns ``(avg_ranks, friedman_p, critical_distance)``; two average
    ranks further apart than the critical distance differ significantly
    at level ``alpha``.

    Raises
    ------
    ValueError
        Fewer than 3 algorithms (use :func:`wilcoxon_signed_rank`), more
        than 10 (no tabulated critical value), or an unsupported alpha.
    """
    n_algo, n_data = m.scores.shape
    if n_algo < 3:
        raise ValueError(
            "Friedman/Nemenyi needs at least 3 algorithms; "
            "compare 2 with wilcoxon_signed_rank"
        )
    q_table = None
    for level, table in NEMENYI_Q.items():
        if abs(alpha - level) < 1e-12:
            q_table = table
    if q_table is None:
        raise ValueError(f"alpha={alpha} not supported; use 0.05 or 0.1")
    if n_algo not in q_table:
        raise ValueError(f"no critical value tabulated for {n_algo} algorithms")

    ranks = np.empty_like(m.scores)
    for j in range(n_data):
        ranks[:, j] = rankdata(m.scores[:, j], method="average")
    avg_ranks = ranks.mean(axis=1)

    center = (n_algo + 1) / 2.0
    statistic = (12.0 * n_data / (n_algo * (n_algo + 1))
                 * float(np.sum((avg_ranks - center) ** 2)))
    friedman_p = float(chi2.sf(statistic, n_algo - 1))
    cd = q_table[n_algo] * np.sqrt(n_algo * (n_algo + 1) / (6.0 * n_data))
    return avg_ranks, friedman_p, float(cd)


def load_comparison_matrix(path, metric: str) -> ComparisonMatrix:
    """Build a comparison matrix from a benchmark summary CSV.

    The file must carry a header with at least the columns ``dataset``,
    ``algorithm`` and ``metric``; every (algorithm, dataset) cell must be
    present exactly once.  Row order fixes the name order.
    """
    import csv

    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or metric not in reader.fieldnames:
            raise ValueError(f"{path}: no column named {metric!r}")
        cells = {}
        algorithms: list[str] = []
        datasets: list[str] = []
        for row in reader:
            algo, ds = row["algorithm"], row["dataset"]
            if algo not in algorithms:
                algorithms.append(algo)
            if ds not in datasets:
                datasets.append(ds)
            cells[(algo, ds)] = float(row[metric])
    scores = np.empty((len(algorithms), len(datasets)))
    for i, algo in enumerate(algorithms):
        for j, ds in enumerate(datasets):
            if (algo, ds) not in cells:
                raise ValueError(f"{path}: missing cell ({algo}, {ds})")
            scores[i, j] = cells[(algo, ds)]
    return ComparisonMatrix(scores, tuple(algorithms), tuple(datasets))
