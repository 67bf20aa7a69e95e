import itertools

import numpy as np
import pytest

from dynchain import (FeatureSubset, LabelPermutation, LabelView,
                      MultiLabelDataset, TrainingError, chain_log_posteriors,
                      generate, label_view, load_nb_model, predict_br_nb,
                      predict_chain_nb, save_nb_model, select_features,
                      train_nb, undersample)
from dynchain.synth import SynthSpec

from oracles import RetrainedChain, make_trivial_views


def trivial_views(ds):
    return [label_view(ds, i) for i in range(ds.n_labels)]


def small_model(n=40, d=3, l=3, seed=0, dependence=0.6):
    ds = generate(SynthSpec(n=n, d=d, l=l, dependence=dependence, seed=seed))
    return ds, train_nb(ds, trivial_views(ds))


class TestTrainNb:
    def test_estimator_counts(self):
        ds = generate(SynthSpec(n=50, d=4, l=3, seed=1))
        model = train_nb(ds, trivial_views(ds))
        assert model.n_gaussian_estimators == 2 * 3 * 4
        assert model.priors.shape == (3, 2)
        assert model.n_conditional_entries == 2 * 3 * (3 - 1)

    def test_hand_moments(self):
        # one feature, class-1 samples {1, 3}: mean 2, population variance 1
        features = np.array([[1.0], [3.0], [10.0], [12.0]])
        labels = np.array([[1], [1], [0], [0]])
        ds = MultiLabelDataset(features, labels, ("x",), ("y",))
        model = train_nb(ds, trivial_views(ds))
        assert model.feature_means[0][1, 0] == pytest.approx(2.0)
        assert model.feature_vars[0][1, 0] == pytest.approx(1.0)

    def test_laplace_prior(self):
        # 3 positives of 10 rows, smoothing 1 -> (3+1)/(10+2)
        rng = np.random.default_rng(0)
        labels = np.array([[1]] * 3 + [[0]] * 7)
        ds = MultiLabelDataset(rng.normal(size=(10, 2)), labels,
                               ("a", "b"), ("y",))
        model = train_nb(ds, trivial_views(ds))
        assert model.priors[0, 1] == pytest.approx(4.0 / 12.0)

    def test_priors_sum_to_one(self):
        _, model = small_model(seed=3)
        np.testing.assert_allclose(model.priors.sum(axis=1), 1.0, atol=1e-12)

    def test_conditional_diagonal_invalid(self):
        _, model = small_model()
        for i in range(model.n_labels):
            assert np.isnan(model.label_conditionals[i, i]).all()

    def test_empty_view_rejected(self):
        ds = generate(SynthSpec(n=10, d=2, l=2, seed=0))
        views = trivial_views(ds)
        with pytest.raises(ValueError):
            train_nb(ds, views[:1])

    def test_smoothing_keeps_conditionals_interior(self):
        ds = generate(SynthSpec(n=30, d=2, l=4, dependence=1.0, seed=2))
        model = train_nb(ds, trivial_views(ds))
        vals = model.label_conditionals[~np.isnan(model.label_conditionals)]
        assert np.all(vals > 0) and np.all(vals < 1)


class TestPredictBr:
    def test_prior_dominates_when_likelihoods_equal(self):
        # both classes share the same Gaussian; prior 0.8 decides
        subsets = [FeatureSubset(np.array([0]), 0)]
        from dynchain.nb_chain import NbChainModel
        model = NbChainModel(
            priors=np.array([[0.2, 0.8]]),
            feature_means=[np.zeros((2, 1))],
            feature_vars=[np.ones((2, 1))],
            label_conditionals=np.full((1, 1, 2), np.nan),
            feature_subsets=subsets, n_features=1, smoothing=1.0,
        )
        assert predict_br_nb(model, np.array([0.3])).hard[0] == 1

    def test_tie_decides_zero(self):
        from dynchain.nb_chain import NbChainModel
        model = NbChainModel(
            priors=np.array([[0.5, 0.5]]),
            feature_means=[np.zeros((2, 1))],
            feature_vars=[np.ones((2, 1))],
            label_conditionals=np.full((1, 1, 2), np.nan),
            feature_subsets=[FeatureSubset(np.array([0]), 0)],
            n_features=1, smoothing=1.0,
        )
        pred = predict_br_nb(model, np.array([0.0]))
        assert pred.hard[0] == 0
        assert pred.scores[0] == pytest.approx(0.5)

    def test_single_label_chain_equals_br(self):
        ds = generate(SynthSpec(n=30, d=3, l=1, seed=4))
        model = train_nb(ds, trivial_views(ds))
        pi = LabelPermutation.identity(1)
        for x in ds.features[:10]:
            assert (predict_chain_nb(model, x, pi).hard
                    == predict_br_nb(model, x).hard).all()


class TestReorderEquivalence:
    """Chain predictions must match a classifier literally retrained for
    each permutation."""

    def test_exhaustive_l3(self):
        ds = generate(SynthSpec(n=60, d=3, l=3, dependence=0.7, noise=0.05,
                                seed=5))
        model = train_nb(ds, trivial_views(ds))
        views, subsets, others = make_trivial_views(ds)
        queries = ds.features[:25]
        for order in itertools.permutations(range(3)):
            oracle = RetrainedChain(order, views, subsets, others,
                                    smoothing=1.0)
            pi = LabelPermutation(np.array(order))
            for x in queries:
                got = predict_chain_nb(model, x, pi)
                want_hard, want_lp = oracle.predict(x)
                assert np.array_equal(got.hard, want_hard)
                np.testing.assert_allclose(
                    chain_log_posteriors(model, x, pi), want_lp, atol=1e-9)

    def test_with_conditioned_views(self):
        # same equivalence when views are undersampled and feature-selected
        ds = generate(SynthSpec(n=80, d=5, l=3, dependence=0.5, noise=0.1,
                                seed=6))
        views, subsets = [], []
        for i in range(3):
            view = undersample(label_view(ds, i), max_ir=2.0, seed=i)
            subset = select_features(view, cap=3, seed=i, target_label=i)
            views.append(LabelView(view.features[:, subset.indices],
                                   view.target, view.source_rows))
            subsets.append(subset)
        model = train_nb(ds, views, smoothing=1.0, feature_subsets=subsets)

        oracle_views = {i: (np.array(views[i].features),
                            [int(v) for v in views[i].target])
                        for i in range(3)}
        oracle_subsets = {i: list(range(len(subsets[i]))) for i in range(3)}
        oracle_others = {i: [[int(v) for v in ds.labels[r]]
                             for r in views[i].source_rows]
                         for i in range(3)}
        for order in itertools.permutations(range(3)):
            oracle = RetrainedChain(order, oracle_views, oracle_subsets,
                                    oracle_others, smoothing=1.0)
            pi = LabelPermutation(np.array(order))
            for x in ds.features[:15]:
                got = predict_chain_nb(model, x, pi)
                # oracle consumes per-label selected columns directly
                per_label_x = {i: x[subsets[i].indices] for i in range(3)}
                decided = {}
                import math
                for pos, lab in enumerate(order):
                    prior, gauss, bern, sub = oracle.classifiers[lab]
                    lp = {}
                    for y in (0, 1):
                        tot = math.log(prior[y])
                        for j in sub:
                            mean, var = gauss[y][j]
                            tot += (-0.5 * math.log(2 * math.pi * var)
                                    - (per_label_x[lab][j] - mean) ** 2
                                    / (2 * var))
                        for prev in list(order)[:pos]:
                            p = bern[(prev, y)]
                            tot += math.log(p if decided[prev] == 1 else 1 - p)
                        lp[y] = tot
                    decided[lab] = 1 if lp[1] > lp[0] else 0
                want = np.array([decided[i] for i in range(3)], dtype=np.int8)
                assert np.array_equal(got.hard, want)

    def test_engineered_dependence_flips_decision(self):
        # y2 copies y1 in training; after deciding y1=1 the chain factor
        # pulls y2 to 1 even though its own features are uninformative
        rng = np.random.default_rng(10)
        n = 10
        y1 = np.array([1, 1, 1, 1, 1, 0, 0, 0, 0, 0])
        labels = np.column_stack([y1, y1])
        features = np.column_stack([y1 * 4.0 + rng.normal(size=n) * 0.1,
                                    rng.normal(size=n) * 0.01])
        ds = MultiLabelDataset(features, labels, ("a", "b"), ("y1", "y2"))
        views = [label_view(ds, 0), label_view(ds, 1)]
        subsets = [FeatureSubset(np.array([0]), 0),
                    FeatureSubset(np.array([1]), 1)]
        cond_views = [LabelView(views[i].features[:, subsets[i].indices],
                                views[i].target, views[i].source_rows)
                      for i in range(2)]
        model = train_nb(ds, cond_views, feature_subsets=subsets)
        x = np.array([4.0, 0.0])
        pred = predict_chain_nb(model, x, LabelPermutation(np.array([0, 1])))
        assert pred.hard[0] == 1
        assert pred.hard[1] == 1
        # without the chain, label 2 alone stays at its (tied) prior -> 0
        assert predict_br_nb(model, x).hard[1] == 0


class TestLogSpaceAgreement:
    def test_linear_space_argmax_matches(self):
        ds, model = small_model(n=50, d=2, l=3, seed=8)
        pi = LabelPermutation(np.array([2, 0, 1]))
        for x in ds.features[:20]:
            lp = chain_log_posteriors(model, x, pi)
            linear = np.exp(lp)
            if np.all(np.isfinite(linear)) and np.all(linear > 0):
                got = predict_chain_nb(model, x, pi)
                want = (linear[:, 1] > linear[:, 0]).astype(int)
                assert np.array_equal(got.hard, want)

    def test_scores_in_unit_interval(self):
        ds, model = small_model(n=60, d=4, l=4, seed=9)
        pi = LabelPermutation(np.array([3, 1, 0, 2]))
        for x in ds.features:
            s = predict_chain_nb(model, x, pi).scores
            assert np.all(np.isfinite(s)) and np.all(s >= 0) and np.all(s <= 1)


class TestPermutationType:
    def test_inverse(self):
        pi = LabelPermutation(np.array([2, 0, 1]))
        assert list(pi.inverse[pi.order]) == [0, 1, 2]

    def test_rejects_non_bijection(self):
        with pytest.raises(ValueError):
            LabelPermutation(np.array([0, 0, 2]))


class TestSerialization:
    def test_round_trip_predictions_identical(self, tmp_path):
        ds, model = small_model(n=70, d=4, l=4, seed=12)
        path = tmp_path / "model.txt"
        save_nb_model(model, path)
        loaded = load_nb_model(path)
        pi = LabelPermutation(np.array([1, 3, 0, 2]))
        for x in ds.features[:20]:
            a = predict_chain_nb(model, x, pi)
            b = predict_chain_nb(loaded, x, pi)
            assert np.array_equal(a.hard, b.hard)
            np.testing.assert_array_equal(a.scores, b.scores)

    def test_parameters_exact(self, tmp_path):
        _, model = small_model(seed=13)
        path = tmp_path / "model.txt"
        save_nb_model(model, path)
        loaded = load_nb_model(path)
        np.testing.assert_array_equal(loaded.priors, model.priors)
        np.testing.assert_array_equal(loaded.label_conditionals[~np.isnan(loaded.label_conditionals)],
                                      model.label_conditionals[~np.isnan(model.label_conditionals)])
        for a, b in zip(loaded.feature_means, model.feature_means):
            np.testing.assert_array_equal(a, b)
