"""Reproduction checks on the public UCI datasets.

Skipped unless the path of a local copy is given by environment:

    FAIRLATENT_ADULT_CSV=adult.csv FAIRLATENT_STATLOG_CSV=german.csv \
        python -m unittest test.test_acceptance

"""
import os
import unittest

import numpy as np

from fairlatent.audit import (
    curve_at,
    detect_flipped,
    discovery_curve,
    discrimination_scores,
    match_and_flip,
)
from fairlatent.config import load_config
from fairlatent.data import load_csv, preprocess
from fairlatent.evaluate import run_protocol
from fairlatent.method import get_method
from fairlatent.model import logreg_fit, logreg_score


ADULT_CSV = os.environ.get('FAIRLATENT_ADULT_CSV')

STATLOG_CSV = os.environ.get('FAIRLATENT_STATLOG_CSV')


def prepare(preset, path):
    config = load_config(preset=preset, environ={}, overrides={'data': {'path': path}})
    data = config.data
    raw = load_csv(data.path, data.schema, data.missing)
    return (config, preprocess(raw, data.schema, missing=data.missing, positive=data.positive))


def evaluate(config, ds, name):
    return run_protocol(get_method(name), ds, config.train, config.evaluate, config.seed).report


@unittest.skipUnless(ADULT_CSV, "FAIRLATENT_ADULT_CSV not set")
class TestAdult(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        (cls.config, cls.ds) = prepare('adult', ADULT_CSV)
        cls.reports = {}

    def report(self, name):
        if name not in self.reports:
            self.reports[name] = evaluate(self.config, self.ds, name)
        return self.reports[name]

    def test_original(self):
        report = self.report('original')

        self.assertAlmostEqual(report.parity, 2.396, delta=0.35)
        self.assertAlmostEqual(report.f1, 0.640, delta=0.05)
        self.assertAlmostEqual(report.ks, 0.560, delta=0.06)
        self.assertAlmostEqual(report.emd, 0.275, delta=0.08)

    def test_nrl(self):
        report = self.report('nrl')

        self.assertLessEqual(report.parity, 1.15)
        self.assertLessEqual(report.emd, 0.05)
        self.assertGreaterEqual(report.consistency, 0.975)
        self.assertGreaterEqual(report.f1, 0.52)
        self.assertLessEqual(report.mse, 0.20)

    def test_ordering(self):
        self.assertGreater(self.report('original').emd, self.report('original_p').emd)
        self.assertGreater(self.report('original_p').emd, self.report('nrl').emd)
        self.assertLess(self.report('nrl').parity, self.report('ae_p').parity)

    def test_audit(self):
        config = self.config
        method = get_method('nrl')
        (flipped_ds, experiment) = match_and_flip(method.prepare(self.ds))

        fit = method.fit(flipped_ds, config.train.replace(seed=config.seed))
        fair = method.represent(fit, flipped_ds)
        original = np.asarray(flipped_ds.X)

        grid = config.audit.lambda_grid
        self.assertGreaterEqual(detect_flipped(flipped_ds, experiment, fair, grid, config.seed),
                                0.65)
        self.assertLessEqual(detect_flipped(flipped_ds, experiment, original, grid, config.seed),
                             0.55)

        lam = config.evaluate.penalty(flipped_ds.n)
        p_o = logreg_score(logreg_fit(original, flipped_ds.y, lam, config.seed), original)
        p_f = logreg_score(logreg_fit(fair, flipped_ds.y, lam, config.seed), fair)

        curve = discovery_curve(discrimination_scores(p_o, p_f), experiment.flipped,
                                np.flatnonzero(flipped_ds.p == experiment.group))
        self.assertGreater(curve_at(curve, 0.25), 0.25)


@unittest.skipUnless(ADULT_CSV, "FAIRLATENT_ADULT_CSV not set")
class TestAdultRace(unittest.TestCase):

    def test_multiclass(self):
        (config, ds) = prepare('adult-race', ADULT_CSV)
        evaluation = run_protocol(get_method(config.method), ds, config.train, config.evaluate,
                                  config.seed)

        self.assertTrue((evaluation.classes['emd'] <= 0.01).all())
        self.assertLessEqual(evaluation.report.parity, 1.10)


@unittest.skipUnless(STATLOG_CSV, "FAIRLATENT_STATLOG_CSV not set")
class TestStatlog(unittest.TestCase):

    def test_nrl(self):
        (config, ds) = prepare('statlog', STATLOG_CSV)
        report = evaluate(config, ds, 'nrl')

        self.assertLessEqual(report.parity, 1.10)
        self.assertLessEqual(report.emd, 0.03)
        self.assertGreaterEqual(report.f1, 0.48)
