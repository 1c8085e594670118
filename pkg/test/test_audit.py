"""Tests for label flipping & bias discovery"""
import unittest

import numpy as np

from fairlatent.audit import (
    AuditError,
    DiscriminationRanking,
    curve_area,
    curve_at,
    default_flip_group,
    detect_flipped,
    detection_fractions,
    discovery_curve,
    discrimination_scores,
    match_and_flip,
)
from fairlatent.data import Dataset
from fairlatent.model import logreg_fit, logreg_score

from .base import synthetic_dataset


def small_dataset(x, y, p):
    x = np.asarray(x, dtype=float)
    return Dataset(
        X=np.column_stack([x, p]),
        y=y,
        p=p,
        feature_names=('x', 'sex'),
        standardization={'x': (0.0, 1.0)},
        protected_columns=('sex',),
        protected_levels=('male', 'female'),
    )


class TestMatchAndFlip(unittest.TestCase):

    def test_single_pair(self):
        ds = small_dataset(x=[0.0, 0.0, 5.0, 9.0], y=[1, 1, 0, 0], p=[0, 1, 0, 1])
        (flipped_ds, experiment) = match_and_flip(ds, group=1)

        np.testing.assert_array_equal(experiment.pairs, [[0, 1]])
        np.testing.assert_array_equal(experiment.flipped, [1])
        np.testing.assert_array_equal(flipped_ds.y, [1, 0, 0, 0])
        np.testing.assert_array_equal(experiment.original_labels, ds.y)

    def test_deduplicated(self):
        ds = small_dataset(x=[0.0, 0.2, 0.1, 3.0, 9.0], y=[1, 1, 1, 1, 1], p=[0, 0, 1, 1, 1])
        (flipped_ds, experiment) = match_and_flip(ds, group=1)

        self.assertEqual(len(experiment.pairs), 2)
        np.testing.assert_array_equal(experiment.flipped, [2])
        np.testing.assert_array_equal(flipped_ds.y, [1, 1, 0, 1, 1])

    def test_tie_lower_index(self):
        ds = small_dataset(x=[0.0, -1.0, 1.0], y=[1, 1, 1], p=[0, 1, 1])
        (_flipped_ds, experiment) = match_and_flip(ds, group=1)

        np.testing.assert_array_equal(experiment.flipped, [1])

    def test_only_labels_change(self):
        ds = synthetic_dataset(n=100, seed=2)
        (flipped_ds, experiment) = match_and_flip(ds)

        np.testing.assert_array_equal(flipped_ds.X, ds.X)
        np.testing.assert_array_equal(flipped_ds.p, ds.p)

        changed = np.flatnonzero(flipped_ds.y != ds.y)
        np.testing.assert_array_equal(changed, experiment.flipped)
        self.assertTrue((ds.y[changed] == 1).all())
        self.assertTrue((ds.p[changed] == experiment.group).all())

    def test_default_group(self):
        ds = small_dataset(x=[0, 1, 2, 3], y=[1, 1, 1, 0], p=[0, 0, 1, 1])
        self.assertEqual(default_flip_group(ds), 1)

    def test_no_pairs(self):
        ds = small_dataset(x=[0.0, 1.0, 2.0], y=[1, 0, 1], p=[0, 1, 0])

        with self.assertRaises(AuditError) as context:
            match_and_flip(ds, group=1)

        self.assertEqual(context.exception.code, 'no-pairs')


class TestDetection(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.ds = synthetic_dataset(n=200, seed=3)
        (cls.flipped_ds, cls.experiment) = match_and_flip(cls.ds)

    def test_oracle(self):
        oracle = self.experiment.original_labels[:, np.newaxis].astype(float)
        fraction = detect_flipped(self.flipped_ds, self.experiment, oracle, [1e-4, 1e-2], seed=0)

        self.assertEqual(fraction, 1.0)

    def test_noise_baseline(self):
        ds = synthetic_dataset(n=1000, seed=4)
        (flipped_ds, experiment) = match_and_flip(ds)

        noise = np.random.default_rng(5).normal(size=(ds.n, 3))
        fraction = detect_flipped(flipped_ds, experiment, noise, [1e-2], seed=0)

        clf = logreg_fit(noise, flipped_ds.y, 1e-2, 0)
        rate = np.mean(logreg_score(clf, noise) >= 0.5)

        spread = np.sqrt(rate * (1 - rate) / len(experiment))
        self.assertLessEqual(abs(fraction - rate), 4 * spread + 1e-9)

    def test_fractions(self):
        grid = [1e-3, 1e-1]
        fractions = detection_fractions(self.flipped_ds, self.experiment, self.flipped_ds.X,
                                        grid, seed=0)

        self.assertEqual(list(fractions), grid)
        self.assertTrue(all(0 <= value <= 1 for value in fractions.values()))

    def test_empty_grid(self):
        with self.assertRaises(AuditError) as context:
            detect_flipped(self.flipped_ds, self.experiment, self.flipped_ds.X, [], seed=0)

        self.assertEqual(context.exception.code, 'empty-grid')

    def test_row_mismatch(self):
        with self.assertRaises(AuditError):
            detect_flipped(self.flipped_ds, self.experiment, self.flipped_ds.X[:10], [0.01],
                           seed=0)


class TestRanking(unittest.TestCase):

    def test_scores(self):
        ranking = discrimination_scores([0.2, 0.5, 0.1], [0.4, 0.5, 0.4])

        np.testing.assert_allclose(ranking.scores, [0.5, 0.0, 0.75])
        np.testing.assert_array_equal(ranking.ordering, [2, 0, 1])

    def test_ties(self):
        ranking = discrimination_scores([0.3, 0.3, 0.3], [0.6, 0.6, 0.6])
        np.testing.assert_array_equal(ranking.ordering, [0, 1, 2])

    def test_scale_invariant(self):
        rng = np.random.default_rng(7)
        (p_o, p_f) = (rng.uniform(0.1, 0.9, size=30), rng.uniform(0.1, 0.9, size=30))

        ranking = discrimination_scores(p_o, p_f)
        scaled = discrimination_scores(p_o * 0.5, p_f * 0.5)

        np.testing.assert_allclose(scaled.scores, ranking.scores)
        np.testing.assert_array_equal(scaled.ordering, ranking.ordering)

    def test_non_positive(self):
        with self.assertRaises(AuditError) as context:
            discrimination_scores([0.1, 0.2], [0.3, 0.0])

        self.assertEqual(context.exception.code, 'score')

    def test_frame(self):
        ranking = discrimination_scores([0.2, 0.5, 0.1], [0.4, 0.5, 0.4])
        frame = ranking.frame(flipped=[0])

        self.assertEqual(list(frame.columns), ['index', 's_d', 'flipped'])
        self.assertEqual(frame['flipped'].tolist(), [False, True, False])


class TestDiscoveryCurve(unittest.TestCase):

    def test_best_case(self):
        ranking = DiscriminationRanking(np.array([0.9, 0.8, 0.1, 0.0]), np.arange(4))
        curve = discovery_curve(ranking, flipped=[0, 1], group=[0, 1, 2, 3])

        self.assertEqual(curve['fraction_found'].tolist(), [0, 0.5, 1, 1, 1])
        self.assertEqual(curve_at(curve, 0.5), 1.0)
        self.assertEqual(tuple(curve.iloc[0]), (0.0, 0.0))
        self.assertEqual(tuple(curve.iloc[-1]), (1.0, 1.0))

    def test_restricted_to_group(self):
        ranking = DiscriminationRanking(np.zeros(6), np.array([5, 4, 3, 2, 1, 0]))
        curve = discovery_curve(ranking, flipped=[3], group=[1, 3, 5])

        self.assertEqual(curve['fraction_found'].tolist(), [0, 0, 1, 1])

    def test_monotone_area(self):
        rng = np.random.default_rng(8)
        ranking = DiscriminationRanking(np.zeros(1000), rng.permutation(1000))
        flipped = np.arange(0, 1000, 10)

        curve = discovery_curve(ranking, flipped, np.arange(1000))

        self.assertTrue((np.diff(curve['fraction_found']) >= 0).all())
        self.assertAlmostEqual(curve_area(curve), 0.5, delta=0.1)

    def test_area_brute_force(self):
        ranking = DiscriminationRanking(np.zeros(5), np.array([2, 0, 4, 1, 3]))
        flipped = [0, 3]
        curve = discovery_curve(ranking, flipped, np.arange(5))

        # area = mean over cut-offs of found fraction (trapezoids)
        found = curve['fraction_found'].to_numpy()
        expected = np.sum((found[1:] + found[:-1]) / 2) / 5
        self.assertAlmostEqual(curve_area(curve), expected)

        # each flipped individual at 0-based rank r contributes (N - r - 1/2) / (N·F)
        positions = [list(ranking.ordering).index(index) for index in flipped]
        self.assertAlmostEqual(curve_area(curve), 1 - (np.mean(positions) + 0.5) / 5)

    def test_empty_flipped(self):
        ranking = DiscriminationRanking(np.zeros(3), np.arange(3))

        with self.assertRaises(AuditError) as context:
            discovery_curve(ranking, [], [0, 1, 2])

        self.assertEqual(context.exception.code, 'empty-flipped')
