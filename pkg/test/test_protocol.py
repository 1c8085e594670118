"""Tests for the evaluation protocol & representation methods"""
import concurrent.futures
import unittest

import numpy as np

from fairlatent.error import ConfigError
from fairlatent.evaluate import (
    SWEEP_COLUMNS,
    EvaluateConfig,
    derive_seed,
    run_protocol,
    score_representation,
    sweep,
    sweep_point,
)
from fairlatent.method import COMPARISON, get_method, registry
from fairlatent.metrics import FairnessReport
from fairlatent.train import TrainConfig

from .base import synthetic_dataset


TRAIN = TrainConfig(latent_dim=3, epochs=10, batch=16)

EVALUATE = EvaluateConfig(split_repeats=2, protocol_repeats=2, emd_sample=64, emd_draws=2)


class TestMethods(unittest.TestCase):

    def test_registry(self):
        self.assertEqual(list(registry), sorted([
            'ae', 'ae_p', 'mae', 'nrl', 'nrl_multiclass', 'original', 'original_p',
        ]))
        self.assertTrue(set(COMPARISON) <= set(registry))

    def test_names(self):
        for name in registry:
            with self.subTest(name=name):
                method = get_method(name)
                self.assertEqual(method.name, name)
                self.assertTrue(method.__doc__.startswith(f'{name}:'))

    def test_unknown(self):
        with self.assertRaises(ConfigError) as context:
            get_method('pca')

        self.assertEqual(context.exception.code, 'method')

    def test_prepare(self):
        ds = synthetic_dataset(n=40)

        self.assertIs(get_method('original').prepare(ds), ds)
        self.assertEqual(get_method('original_p').prepare(ds).m, ds.m - 1)
        self.assertEqual(get_method('ae_p').prepare(ds).m, ds.m - 1)

    def test_protected_classes(self):
        ds = synthetic_dataset(n=60, groups=3)

        for name in registry:
            with self.subTest(name=name):
                method = get_method(name)

                if name == 'nrl':
                    with self.assertRaises(ConfigError) as context:
                        method.check(ds)

                    self.assertEqual(context.exception.code, 'method')
                else:
                    method.check(ds)

        with self.assertRaises(ConfigError):
            run_protocol(get_method('nrl'), ds, TRAIN, EVALUATE, seed=0)

    def test_represent(self):
        ds = synthetic_dataset(n=40)

        for name in ('original', 'ae', 'mae', 'nrl'):
            with self.subTest(name=name):
                method = get_method(name)
                fit = method.fit(ds, TRAIN)
                Z = method.represent(fit, ds)

                self.assertEqual(Z.shape, (ds.n, ds.m if name == 'original' else 3))
                self.assertEqual(method.learns, name != 'original')


class TestConfig(unittest.TestCase):

    def test_penalty(self):
        cfg = EvaluateConfig(classifier_c=0.01)
        self.assertAlmostEqual(cfg.penalty(200), 0.5)
        self.assertEqual(cfg.mapping(200)['n_train'], 200)

        direct = cfg.replace(classifier_lambda=0.25)
        self.assertEqual(direct.penalty(200), 0.25)
        self.assertEqual(direct.mapping(200)['mapping'], 'direct')

    def test_invalid(self):
        with self.assertRaises(ConfigError):
            EvaluateConfig(train_fraction=1.0)

        with self.assertRaises(ConfigError):
            EvaluateConfig(split_repeats=0)

    def test_derive_seed(self):
        self.assertEqual(derive_seed(3, 1), derive_seed(3, 1))
        self.assertNotEqual(derive_seed(3, 1), derive_seed(3, 2))


class TestScoring(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.ds = synthetic_dataset(n=160, shift=1.5, seed=4)

    def test_report(self):
        evaluation = score_representation(self.ds.X, self.ds, EVALUATE, seed=0)
        report = evaluation.report

        self.assertIsInstance(report, FairnessReport)
        self.assertGreaterEqual(report.parity, 1.0)
        self.assertTrue(0 <= report.f1 <= 1)
        self.assertTrue(0 <= report.ks <= 1)
        self.assertGreater(report.emd, 0)
        self.assertEqual(report.mse, 0.0)
        self.assertGreaterEqual(report.bound_margin, -EVALUATE.bound_tol)

        self.assertEqual(list(evaluation.classes.columns), ['class', 'average_score', 'emd'])
        self.assertEqual(evaluation.classifier['n_train'], 112)

    def test_deterministic(self):
        first = score_representation(self.ds.X, self.ds, EVALUATE, seed=1).report
        second = score_representation(self.ds.X, self.ds, EVALUATE, seed=1).report
        self.assertEqual(first, second)

    def test_protected_removed_lowers_emd(self):
        original = score_representation(self.ds.X, self.ds, EVALUATE, seed=0).report
        dropped = get_method('original_p').prepare(self.ds)
        without = score_representation(dropped.X, dropped, EVALUATE, seed=0).report

        self.assertLess(without.emd, original.emd)

    def test_multiclass(self):
        ds = synthetic_dataset(n=150, groups=3, seed=5)
        evaluation = score_representation(ds.X, ds, EVALUATE, seed=0)

        self.assertEqual(len(evaluation.classes), 3)
        self.assertAlmostEqual(evaluation.report.emd, evaluation.classes['emd'].max())


class TestProtocol(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.ds = synthetic_dataset(n=100, seed=6)

    def test_reproducible(self):
        method = get_method('nrl')
        first = run_protocol(method, self.ds, TRAIN, EVALUATE, seed=2)
        second = run_protocol(method, self.ds, TRAIN, EVALUATE, seed=2)

        self.assertEqual(first.report, second.report)
        np.testing.assert_array_equal(first.representation, second.representation)

    def test_executor(self):
        method = get_method('ae')
        serial = run_protocol(method, self.ds, TRAIN, EVALUATE, seed=2)

        with concurrent.futures.ThreadPoolExecutor(max_workers=2) as executor:
            parallel = run_protocol(method, self.ds, TRAIN, EVALUATE, seed=2, executor=executor)

        self.assertEqual(serial.report, parallel.report)

    def test_sweep(self):
        frame = sweep(get_method('nrl'), self.ds, 'alpha', [0, 10], TRAIN,
                      EVALUATE.replace(protocol_repeats=1), seed=0)

        self.assertEqual(tuple(frame.columns), SWEEP_COLUMNS)
        self.assertEqual(frame['value'].tolist(), [0, 10])

    def test_sweep_single_value(self):
        cfg = EVALUATE.replace(protocol_repeats=1)
        frame = sweep(get_method('nrl'), self.ds, 'dim', [2], TRAIN, cfg, seed=0)
        report = run_protocol(get_method('nrl'), self.ds, TRAIN.replace(latent_dim=2), cfg,
                              seed=0).report

        self.assertEqual(frame['emd'].iloc[0], report.emd)
        self.assertEqual(frame['f1'].iloc[0], report.f1)

    def test_sweep_point(self):
        (train, evaluate) = sweep_point('classifier_c', 0.1, TRAIN, EVALUATE)
        self.assertEqual(evaluate.classifier_c, 0.1)
        self.assertIs(train, TRAIN)

        with self.assertRaises(ConfigError) as context:
            sweep_point('epochs', 1, TRAIN, EVALUATE)

        self.assertEqual(context.exception.code, 'axis')

    def test_sweep_empty(self):
        with self.assertRaises(ConfigError):
            sweep(get_method('nrl'), self.ds, 'alpha', [], TRAIN, EVALUATE, seed=0)
