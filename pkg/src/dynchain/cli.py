"""Command-line front end.

Subcommands::

    train      fit an ensemble on a dataset CSV and save it
    predict    load a saved ensemble and emit a label CSV
    evaluate   score a prediction CSV against ground truth
    benchmark  run a cross-validated experiment from a spec file
    compare    statistical tests over a benchmark summary CSV
    synth      generate a synthetic dataset CSV

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .dataset import load_csv, save_csv
from .ensemble import (EnsembleConfig, build_ensemble, load_ensemble,
                       save_ensemble)
from .errors import (DataError, InsufficientDataError, TrainingError,
                     TuningError)
from .harness import (BASE_ALIASES, ExperimentSpec, format_stats,
                      parse_spec_file, run_experiment)
from .metrics import METRIC_NAMES, evaluate
from .stats import friedman_nemenyi, holm_adjust, load_comparison_matrix, \
    wilcoxon_signed_rank
from .synth import SynthSpec, generate


def _beta_arg(text: str):
    return text if text == "tune" else float(text)


def _r_arg(text: str):
    return text if text == "tune" else int(text)


def _fixed_order_arg(text: str):
    return tuple(int(t) for t in text.split(","))


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--base", choices=sorted(BASE_ALIASES), default="nb")
    p.add_argument("--ordering",
                   choices=["dynamic", "random", "fixed", "br"],
                   default="dynamic")
    p.add_argument("--k", type=int, default=20, help="ensemble size")
    p.add_argument("--beta", type=_beta_arg, default=1.0,
                   help="fuzzy neighbourhood width, or 'tune'")
    p.add_argument("--r", type=_r_arg, default=3,
                   help="neighbour count, or 'tune'")
    p.add_argument("--bag-fraction", type=float, default=0.66)
    p.add_argument("--max-ir", type=float, default=20.0)
    p.add_argument("--feature-cap", type=int, default=300)
    p.add_argument("--split-fraction", type=float, default=0.6)
    p.add_argument("--smoothing", type=float, default=1.0)
    p.add_argument("--fixed-order", type=_fixed_order_arg, default=None,
                   help="comma-separated label order for --ordering fixed")
    p.add_argument("--seed", type=int, default=0)


def _config_from_args(args) -> EnsembleConfig:
    return EnsembleConfig(
        k=args.k, bag_fraction=args.bag_fraction, max_ir=args.max_ir,
        feature_cap=args.feature_cap, base=BASE_ALIASES[args.base],
        ordering=args.ordering, fixed_order=args.fixed_order,
        beta=args.beta, r=args.r, split_fraction=args.split_fraction,
        smoothing=args.smoothing, seed=args.seed,
    )


def _cmd_train(args) -> int:
    ds = load_csv(args.data, args.label_count)
    ens = build_ensemble(ds, _config_from_args(args))
    save_ensemble(ens, args.out)
    print(f"trained {args.base}-{args.ordering} ensemble "
          f"(k={args.k}) on {ds.n_rows} rows -> {args.out}")
    return 0


def _read_label_csv(path) -> tuple[np.ndarray, tuple[str, ...]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(f"{path}: row {lineno} has {len(row)} "
                                f"columns, expected {len(header)}")
            for j, tok in enumerate(row):
                if tok not in ("0", "1"):
                    raise DataError(f"{path}: row {lineno}, column {j + 1}: "
                                    f"label value {tok!r} is not 0 or 1")
            rows.append([int(t) for t in row])
    if not rows:
        raise DataError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.int8), tuple(header)


def _cmd_predict(args) -> int:
    ens = load_ensemble(args.model)
    if args.label_count:
        ds = load_csv(args.data, args.label_count)
        features = ds.features
    else:
        with open(args.data, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            features = np.array([[float(t) for t in row] for row in reader])
    predicted = ens.predict_matrix(features)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(ens.label_names) + "\n")
        for row in predicted:
            fh.write(",".join(str(int(v)) for v in row) + "\n")
    print(f"predicted {predicted.shape[0]} rows -> {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    if args.label_count:
        truth = load_csv(args.truth, args.label_count).labels
    else:
        truth, _ = _read_label_csv(args.truth)
    predicted, _ = _read_label_csv(args.pred)
    if truth.shape != predicted.shape:
        raise DataError(f"truth {truth.shape} and prediction "
                        f"{predicted.shape} differ in shape")
    report = evaluate(truth, predicted)
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def _cmd_benchmark(args) -> int:
    spec = parse_spec_file(args.spec)
    config = spec.config
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    spec = ExperimentSpec(
        spec.datasets, spec.algorithms,
        folds=args.folds if args.folds is not None else spec.folds,
        config=config,
        seed=args.seed if args.seed is not None else spec.seed,
        out_dir=args.out,
        save_models=args.save_models,
    )
    result = run_experiment(spec)
    ok = len(result.rows)
    failed = len(result.failures)
    print(f"benchmark: {ok} cells evaluated, {failed} failed -> {args.out}")
    for name, algo, fold, err in result.failures:
        print(f"  FAILED {name}/{algo}/fold{fold}: {err}", file=sys.stderr)
    return 0 if failed == 0 else 3


def _cmd_compare(args) -> int:
    matrix = load_comparison_matrix(args.reports, args.metric)
    algos = matrix.algorithm_names
    lines = [f"metric {args.metric}: {len(algos)} algorithms, "
             f"{len(matrix.dataset_names)} datasets"]
    pair_ps, pair_names = [], []
    for i in range(len(algos)):
        for j in range(i + 1, len(algos)):
            try:
                stat, p = wilcoxon_signed_rank(matrix.scores[i],
                                               matrix.scores[j])
                pair_ps.append(p)
                pair_names.append((algos[i], algos[j], stat))
            except InsufficientDataError as exc:
                lines.append(f"wilcoxon {algos[i]} vs {algos[j]}: {exc}")
    for (a, b, stat), p, ap in zip(pair_names, pair_ps, holm_adjust(pair_ps)):
        lines.append(f"wilcoxon {a} vs {b}: W={stat:g} p={p:.6g} holm={ap:.6g}")
    if len(algos) >= 3:
        ranks, fr_p, cd = friedman_nemenyi(matrix, args.alpha)
        lines.append(f"friedman p={fr_p:.6g} nemenyi_cd={cd:.6g}")
        for a, v in zip(algos, ranks):
            lines.append(f"avg_rank {a} {v:.6g}")
    print("\n".join(lines))
    return 0


def _cmd_synth(args) -> int:
    ds = generate(SynthSpec(n=args.n, d=args.d, l=args.l,
                            dependence=args.dependence, noise=args.noise,
                            seed=args.seed))
    save_csv(ds, args.out)
    print(f"synthetic dataset n={args.n} d={args.d} l={args.l} -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynchain",
        description="Dynamic classifier-chain ensembles for multi-label "
                    "classification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit an ensemble and save it")
    p.add_argument("--data", required=True)
    p.add_argument("--label-count", type=int, required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="load an ensemble, emit a label CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--label-count", type=int, default=0,
                   help="strip this many trailing label columns from --data")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions against truth")
    p.add_argument("--truth", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--label-count", type=int, default=0,
                   help="if set, --truth is a dataset CSV with this many "
                        "trailing label columns; otherwise a label CSV")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("benchmark", help="run an experiment spec file")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--folds", type=int, default=None)
    p.add_argument("--save-models", action="store_true")
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("compare", help="statistics over a summary CSV")
    p.add_argument("--reports", required=True)
    p.add_argument("--metric", required=True, choices=METRIC_NAMES)
    p.add_argument("--alpha", type=float, default=0.10)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--dependence", type=float, default=0.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (DataError, TrainingError, TuningError,
            InsufficientDataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
