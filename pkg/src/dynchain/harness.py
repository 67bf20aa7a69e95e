"""Experiment orchestration: cross-validated evaluation of chain-ensemble
variants over one or more datasets, with deterministic seeding and
plain-CSV outputs.

Every (dataset, algorithm, fold) cell derives its own random stream from
the experiment seed, so cells are order-independent and a rerun with the
same seed reproduces every output file byte for byte.  Training inside a
cell only ever sees the fold's training part: standardization parameters
are fit there and applied to the test part, and hyperparameter tuning
runs inside the ensemble build on training data only.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

from .dataset import (MultiLabelDataset, apply_standardization, kfold,
                      load_csv, standardize)
from .ensemble import BASES, ORDERINGS, EnsembleConfig, build_ensemble
from .errors import DataError
from .metrics import METRIC_NAMES, EvaluationReport, evaluate
from .rng import derive_seed
from .stats import ComparisonMatrix, friedman_nemenyi, holm_adjust, \
    wilcoxon_signed_rank
from .tuning import tune_beta, tune_r  # noqa: F401  (re-exported)

BASE_ALIASES = {"nb": "naive_bayes", "knn": "nearest_neighbour"}


def algorithm_id(base: str, ordering: str) -> str:
    short = {v: k for k, v in BASE_ALIASES.items()}[base]
    return f"{short}-{ordering}"


@dataclass(frozen=True)
class ExperimentSpec:
    """What to run: datasets, algorithm variants, CV folds, shared config.

    ``datasets`` entries are either ``(name, MultiLabelDataset)`` or
    ``(name, csv_path, label_count)``.  ``algorithms`` entries are
    ``(base, ordering)`` pairs using the full option names.
    """

    datasets: tuple
    algorithms: tuple
    folds: int = 10
    config: EnsembleConfig = EnsembleConfig()
    seed: int = 0
    out_dir: str | None = None
    save_models: bool = False

    def __post_init__(self):
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "algorithms",
                           tuple((b, o) for b, o in self.algorithms))
        if not self.datasets or not self.algorithms:
            raise ValueError("need at least one dataset and one algorithm")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        for base, ordering in self.algorithms:
            if base not in BASES or ordering not in ORDERINGS:
                raise ValueError(f"unknown algorithm ({base}, {ordering})")


@dataclass
class ExperimentResult:
    rows: list = field(default_factory=list)       # (dataset, algo, fold, report)
    failures: list = field(default_factory=list)   # (dataset, algo, fold, error)
    summaries: dict = field(default_factory=dict)  # (dataset, algo) -> mean dict
    matrices: dict = field(default_factory=dict)   # metric -> ComparisonMatrix


def fit_cell(train_part: MultiLabelDataset, base: str, ordering: str,
             config: EnsembleConfig, seed: int):
    """Fit one experiment cell from its training rows only.

    Returns the fold's standardization parameters (to be applied to the
    held-out rows) and the trained ensemble.
    """
    std_train, params = standardize(train_part)
    cfg = replace(config, base=base, ordering=ordering, seed=seed)
    return params, build_ensemble(std_train, cfg)


def _resolve_dataset(entry) -> tuple[str, MultiLabelDataset]:
    if len(entry) == 2:
        name, ds = entry
        if not isinstance(ds, MultiLabelDataset):
            raise ValueError(f"dataset {name!r}: expected a MultiLabelDataset")
        return str(name), ds
    name, path, label_count = entry
    return str(name), load_csv(path, int(label_count))


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Run the full grid of (dataset, algorithm, fold) cells.

    A failing cell is recorded and skipped; the rest of the grid still
    runs.  When ``spec.out_dir`` is set, writes ``reports.csv`` (one row
    per cell), ``summary.csv`` (per dataset/algorithm fold means),
    ``failures.csv`` and ``stats.txt``.
    """
    result = ExperimentResult()
    fold_scores: dict = {}
    dataset_names = []
    for entry in spec.datasets:
        name, ds = _resolve_dataset(entry)
        dataset_names.append(name)
        pairs = kfold(ds, spec.folds, derive_seed(spec.seed, "folds", name))
        for fold_idx, pair in enumerate(pairs):
            for base, ordering in spec.algorithms:
                algo = algorithm_id(base, ordering)
                cell_seed = derive_seed(spec.seed, "cell", name, algo, fold_idx)
                try:
                    params, ens = fit_cell(pair.train_part, base, ordering,
                                           spec.config, cell_seed)
                    test = apply_standardization(pair.validation_part, params)
                    predicted = ens.predict_matrix(test.features)
                    report = evaluate(test.labels, predicted)
                except Exception as exc:  # cell isolation by design
                    result.failures.append((name, algo, fold_idx, repr(exc)))
                    continue
                result.rows.append((name, algo, fold_idx, report))
                fold_scores.setdefault((name, algo), []).append(report)
                if spec.save_models and spec.out_dir:
                    from .ensemble import save_ensemble
                    save_ensemble(ens, Path(spec.out_dir) / "models" / name
                                  / f"fold{fold_idx}" / algo)

    algo_ids = [algorithm_id(b, o) for b, o in spec.algorithms]
    for (name, algo), reports in fold_scores.items():
        result.summaries[(name, algo)] = {
            metric: sum(r[metric] for r in reports) / len(reports)
            for metric in METRIC_NAMES
        }

    complete = all((name, algo) in result.summaries
                   for name in dataset_names for algo in algo_ids)
    if complete and len(algo_ids) >= 2:
        import numpy as np
        for metric in METRIC_NAMES:
            scores = np.array([
                [result.summaries[(name, algo)][metric]
                 for name in dataset_names]
                for algo in algo_ids
            ])
            result.matrices[metric] = ComparisonMatrix(
                scores, tuple(algo_ids), tuple(dataset_names))

    if spec.out_dir:
        _write_outputs(spec, result, dataset_names, algo_ids)
    return result


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def _write_outputs(spec: ExperimentSpec, result: ExperimentResult,
                   dataset_names, algo_ids) -> None:
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "reports.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["dataset", "algorithm", "fold", *METRIC_NAMES])
        for name, algo, fold_idx, report in result.rows:
            writer.writerow([name, algo, fold_idx,
                             *(_fmt(report[m]) for m in METRIC_NAMES)])

    with open(out / "summary.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["dataset", "algorithm", *METRIC_NAMES])
        for name in dataset_names:
            for algo in algo_ids:
                means = result.summaries.get((name, algo))
                if means is None:
                    continue
                writer.writerow([name, algo,
                                 *(_fmt(means[m]) for m in METRIC_NAMES)])

    with open(out / "failures.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["dataset", "algorithm", "fold", "error"])
        for row in result.failures:
            writer.writerow(row)

    with open(out / "stats.txt", "w", encoding="utf-8") as fh:
        fh.write(format_stats(result))


def format_stats(result: ExperimentResult, alpha: float = 0.10) -> str:
    """Render pairwise Wilcoxon (Holm-adjusted) and Friedman/Nemenyi
    summaries for every metric with a complete comparison matrix."""
    lines = []
    for metric, matrix in result.matrices.items():
        lines.append(f"== {metric}")
        algos = matrix.algorithm_names
        pair_ps, pair_names = [], []
        for i in range(len(algos)):
            for j in range(i + 1, len(algos)):
                try:
                    _, p = wilcoxon_signed_rank(matrix.scores[i],
                                                matrix.scores[j])
                    pair_ps.append(p)
                    pair_names.append((algos[i], algos[j]))
                except Exception as exc:
                    lines.append(f"wilcoxon {algos[i]} vs {algos[j]}: "
                                 f"not available ({exc})")
        if pair_ps:
            adjusted = holm_adjust(pair_ps)
            for (a, b), p, ap in zip(pair_names, pair_ps, adjusted):
                lines.append(f"wilcoxon {a} vs {b}: p={p:.6g} holm={ap:.6g}")
        if len(algos) >= 3 and len(matrix.dataset_names) >= 2:
            ranks, fr_p, cd = friedman_nemenyi(matrix, alpha)
            rank_str = " ".join(f"{a}={v:.4g}" for a, v in zip(algos, ranks))
            lines.append(f"friedman p={fr_p:.6g} nemenyi_cd={cd:.6g} "
                         f"avg_ranks: {rank_str}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_spec_file(path) -> ExperimentSpec:
    """Parse the key-value experiment description used by the benchmark
    command.

    Line forms (``#`` starts a comment)::

        dataset <name> <csv_path> <label_count>
        algorithm <nb|knn> <dynamic|random|fixed|br>
        folds <int>              k <int>
        bag_fraction <float>     max_ir <float>
        feature_cap <int>        split_fraction <float>
        smoothing <float>        seed <int>
        beta <float|tune>        r <int|tune>
    """
    datasets, algorithms = [], []
    scalars: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            key = parts[0]
            try:
                if key == "dataset":
                    name, csv_path, label_count = parts[1], parts[2], parts[3]
                    datasets.append((name, csv_path, int(label_count)))
                elif key == "algorithm":
                    base = BASE_ALIASES.get(parts[1], parts[1])
                    algorithms.append((base, parts[2]))
                elif key in ("folds", "k", "feature_cap", "seed"):
                    scalars[key] = int(parts[1])
                elif key in ("bag_fraction", "max_ir", "split_fraction",
                             "smoothing"):
                    scalars[key] = float(parts[1])
                elif key in ("beta", "r"):
                    scalars[key] = parts[1] if parts[1] == "tune" else (
                        float(parts[1]) if key == "beta" else int(parts[1]))
                else:
                    raise ValueError(f"unknown key {key!r}")
            except (IndexError, ValueError) as exc:
                raise DataError(f"{path}: line {lineno}: {exc}") from exc
    folds = scalars.pop("folds", 10)
    seed = scalars.pop("seed", 0)
    config = EnsembleConfig(**scalars)
    return ExperimentSpec(tuple(datasets), tuple(algorithms), folds=folds,
                          config=config, seed=seed)
