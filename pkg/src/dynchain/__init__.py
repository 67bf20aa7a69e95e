"""dynchain: dynamic classifier-chain ensembles for multi-label
classification.

The package decomposes a multi-label problem into a chain of binary
decisions whose order can change per query without retraining:

* :mod:`dynchain.nb_chain` - a Naive Bayes chain whose priors, feature
  likelihoods and pairwise label conditionals are fit once and reused
  under any label permutation;
* :mod:`dynchain.knn_chain` - a lazy nearest-neighbour chain whose
  distance joins the feature space with the labels decided so far;
* :mod:`dynchain.dynamic_order` - the per-query ordering heuristic:
  labels sorted by a fuzzy, locally weighted F1 of a chain-free
  reference classifier on validation data;
* :mod:`dynchain.ensemble` - bagged K-member ensembles with dynamic,
  random (build-time fixed), fixed or chain-free ordering policies and
  strict majority voting;
* :mod:`dynchain.dataset`, :mod:`dynchain.preprocess`,
  :mod:`dynchain.metrics`, :mod:`dynchain.stats`,
  :mod:`dynchain.tuning`, :mod:`dynchain.harness`,
  :mod:`dynchain.synth` - data handling, per-label conditioning, the 11
  loss-oriented quality criteria, nonparametric comparison tests,
  hyperparameter grids, the CV experiment runner, and synthetic data.
"""

from .dataset import (MultiLabelDataset, SplitPair, StandardizationParams,
                      apply_standardization, bag_sample, kfold, load_csv,
                      save_csv, split_train_validation, standardize)
from .dynamic_order import (FuzzyNeighborhood, ValidationCache,
                            dynamic_permutation, local_counts, local_f1,
                            local_scores, membership)
from .ensemble import (Ensemble, EnsembleConfig, EnsembleMember,
                       build_ensemble, build_member, load_ensemble,
                       predict_ensemble, predict_member, save_ensemble)
from .errors import (DataError, InsufficientDataError, TrainingError,
                     TuningError)
from .harness import (ExperimentResult, ExperimentSpec, fit_cell,
                      parse_spec_file, run_experiment)
from .knn_chain import (KnnChainModel, Neighborhood, chain_distance,
                        find_neighborhood, load_knn_model, predict_br_knn,
                        predict_chain_knn, save_knn_model)
from .metrics import METRIC_NAMES, EvaluationReport, evaluate
from .nb_chain import (LabelPermutation, NbChainModel, Prediction,
                       chain_log_posteriors, load_nb_model, predict_br_nb,
                       predict_chain_nb, save_nb_model, train_nb)
from .preprocess import (FeatureSubset, LabelView, label_view,
                         select_features, undersample)
from .rng import derive_seed, make_rng
from .stats import (ComparisonMatrix, friedman_nemenyi, holm_adjust,
                    load_comparison_matrix, wilcoxon_signed_rank)
from .synth import SynthSpec, generate
from .tuning import tune_beta, tune_r

__version__ = "0.1.0"

__all__ = [
    "MultiLabelDataset", "SplitPair", "StandardizationParams",
    "apply_standardization", "bag_sample", "kfold", "load_csv", "save_csv",
    "split_train_validation", "standardize",
    "FuzzyNeighborhood", "ValidationCache", "dynamic_permutation",
    "local_counts", "local_f1", "local_scores", "membership",
    "Ensemble", "EnsembleConfig", "EnsembleMember", "build_ensemble",
    "build_member", "load_ensemble", "predict_ensemble", "predict_member",
    "save_ensemble",
    "DataError", "InsufficientDataError", "TrainingError", "TuningError",
    "ExperimentResult", "ExperimentSpec", "fit_cell", "parse_spec_file",
    "run_experiment",
    "KnnChainModel", "Neighborhood", "chain_distance", "find_neighborhood",
    "load_knn_model", "predict_br_knn", "predict_chain_knn", "save_knn_model",
    "METRIC_NAMES", "EvaluationReport", "evaluate",
    "LabelPermutation", "NbChainModel", "Prediction", "chain_log_posteriors",
    "load_nb_model", "predict_br_nb", "predict_chain_nb", "save_nb_model",
    "train_nb",
    "FeatureSubset", "LabelView", "label_view", "select_features",
    "undersample",
    "derive_seed", "make_rng",
    "ComparisonMatrix", "friedman_nemenyi", "holm_adjust",
    "load_comparison_matrix", "wilcoxon_signed_rank",
    "SynthSpec", "generate",
    "tune_beta", "tune_r",
]
