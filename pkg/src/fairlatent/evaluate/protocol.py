"""Evaluation protocol.

A representation is scored over `split_repeats` seeded train/test
splits: a ridge logistic classifier is fit to the training rows and
measured on the test rows. Reconstruction error and the groups'
Wasserstein distance are measured on the full representation. Without
a given fit, the method is retrained `protocol_repeats` times (each of
its own seed) and the reports of all repeats averaged.

"""
import dataclasses
import typing

import numpy as np
import pandas as pd

from fairlatent.data import split_index
from fairlatent.error import ConfigError
from fairlatent.metrics import (
    FairnessReport,
    consistency,
    f1,
    group_emd,
    group_means,
    has_predicted_positives,
    ks_statistic,
    multiclass_parity,
    one_vs_rest_emd,
    parity_bound_check,
    statistical_parity,
)
from fairlatent.model import lipschitz_bound, logreg_fit, logreg_score, reconstruction_loss


@dataclasses.dataclass(frozen=True)
class EvaluateConfig:
    """Parameters of the evaluation protocol.

    The classifier's penalty is given by its inverse strength
    `classifier_c`, unless `classifier_lambda` sets it directly.

    """
    train_fraction: float = 0.7
    classifier_c: float = 0.01
    classifier_lambda: typing.Optional[float] = None
    split_repeats: int = 5
    protocol_repeats: int = 3
    consistency_k: int = 1
    threshold: float = 0.5
    emd_sample: int = 256
    emd_draws: int = 5
    bound_tol: float = 0.02

    def __post_init__(self):
        checks = (
            ('train_fraction', 0 < self.train_fraction < 1),
            ('classifier_c', self.classifier_c > 0),
            ('classifier_lambda', self.classifier_lambda is None or self.classifier_lambda >= 0),
            ('split_repeats', self.split_repeats >= 1),
            ('protocol_repeats', self.protocol_repeats >= 1),
            ('consistency_k', self.consistency_k >= 1),
            ('threshold', 0 < self.threshold < 1),
            ('emd_sample', self.emd_sample >= 1),
            ('emd_draws', self.emd_draws >= 1),
            ('bound_tol', self.bound_tol >= 0),
        )
        for (name, valid) in checks:
            if not valid:
                raise ConfigError(f"invalid evaluation parameter {name}: "
                                  f"{getattr(self, name)!r}")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def penalty(self, n_train):
        """Ridge penalty of the mean-loss objective: `1 / (C·n_train)`
        (making it that of the summed loss at inverse strength C).

        """
        if self.classifier_lambda is not None:
            return float(self.classifier_lambda)

        return 1 / (self.classifier_c * n_train)

    def mapping(self, n_train):
        """Description of the classifier penalty, for reports."""
        if self.classifier_lambda is not None:
            return {'classifier_lambda': self.classifier_lambda, 'mapping': 'direct'}

        return {
            'classifier_c': self.classifier_c,
            'classifier_lambda': self.penalty(n_train),
            'n_train': n_train,
            'mapping': 'lambda = 1 / (C * n_train)',
        }


class Evaluation(typing.NamedTuple):
    """Averaged report, per-class measurements, classifier mapping and
    (the first) representation scored.

    """
    report: FairnessReport
    classes: pd.DataFrame
    classifier: dict
    representation: typing.Optional[np.ndarray] = None


def derive_seed(*entropy):
    """Integer seed derived from the sequence `entropy`."""
    return int(np.random.SeedSequence(list(entropy)).generate_state(1)[0])


def _margin(clf, Z, p, n_protected, seed, cfg):
    if n_protected == 2:
        return parity_bound_check(clf, Z, p, seed, sample=cfg.emd_sample, draws=cfg.emd_draws)

    return min(
        parity_bound_check(clf, Z, (p != group).astype(np.int64), seed,
                           sample=cfg.emd_sample, draws=cfg.emd_draws)
        for group in range(n_protected)
    )


def representation_emd(Z, ds, seed, cfg):
    """Groups' distance: two-group EMD, or the largest one-vs-rest EMD."""
    if ds.n_protected == 2:
        return group_emd(Z, ds.p, seed, sample=cfg.emd_sample, draws=cfg.emd_draws)

    return float(one_vs_rest_emd(Z, ds.p, seed, sample=cfg.emd_sample,
                                 draws=cfg.emd_draws).max())


def score_representation(Z, ds, cfg, seed, *, mse=0.0):
    """Score the representation `Z` of dataset `ds` over the seeded
    splits of the protocol.

    Returns an `Evaluation`.

    """
    Z = np.asarray(Z, dtype=float)
    emd = representation_emd(Z, ds, seed, cfg)

    reports = []
    class_scores = []
    n_train = None

    for repeat in range(cfg.split_repeats):
        (train, test) = split_index(ds.n, cfg.train_fraction, derive_seed(seed, repeat))
        n_train = len(train)

        clf = logreg_fit(Z[train], ds.y[train], cfg.penalty(n_train), seed)
        scores = logreg_score(clf, Z[test])
        (p_test, y_test) = (ds.p[test], ds.y[test])

        if ds.n_protected == 2:
            parity = statistical_parity(scores, p_test)
        else:
            parity = multiclass_parity(scores, p_test)

        margin = _margin(clf, Z[test], p_test, ds.n_protected, seed, cfg)

        flags = []
        if np.isinf(parity):
            flags.append('parity: a group mean score is zero')
        if not has_predicted_positives(scores, cfg.threshold):
            flags.append('f1: no predicted positives')
        if margin < -cfg.bound_tol:
            flags.append('bound: parity gap exceeds Lipschitz bound beyond tolerance')

        reports.append(FairnessReport(
            mse=mse,
            emd=emd,
            parity=parity,
            consistency=consistency(Z[test], scores, cfg.consistency_k),
            f1=f1(scores, y_test, cfg.threshold),
            ks=ks_statistic(scores, y_test),
            lipschitz_K=lipschitz_bound(clf),
            bound_margin=margin,
            flags=tuple(flags),
        ))

        class_scores.append(group_means(scores, p_test))

    return Evaluation(
        report=FairnessReport.mean(reports),
        classes=class_frame(ds, np.mean(class_scores, axis=0), Z, seed, cfg),
        classifier=cfg.mapping(n_train),
        representation=Z,
    )


def class_frame(ds, average_scores, Z, seed, cfg):
    """Per protected class: mean score and one-vs-rest EMD."""
    return pd.DataFrame({
        'class': list(ds.protected_levels),
        'average_score': average_scores,
        'emd': one_vs_rest_emd(Z, ds.p, seed, sample=cfg.emd_sample, draws=cfg.emd_draws),
    })


def average_evaluations(evaluations):
    evaluations = list(evaluations)

    classes = evaluations[0].classes.copy()
    for column in ('average_score', 'emd'):
        classes[column] = np.mean([evaluation.classes[column] for evaluation in evaluations],
                                  axis=0)

    return Evaluation(
        report=FairnessReport.mean(evaluation.report for evaluation in evaluations),
        classes=classes,
        classifier=evaluations[0].classifier,
        representation=evaluations[0].representation,
    )


def evaluate_fit(method, fit, prepared, cfg, seed):
    """Evaluate the fit of `method` on the method's `prepared` dataset."""
    Z = method.represent(fit, prepared)
    mse = reconstruction_loss(fit.encoder, prepared.X) if fit.encoder is not None else 0.0
    return score_representation(Z, prepared, cfg, seed, mse=mse)


def run_protocol(method, ds, train_cfg, cfg, seed, *, executor=None, callback=None):
    """Train `method` `protocol_repeats` times (training seeds `seed`,
    `seed + 1`, ...) and average the evaluations of the fits.

    Repeats are mapped over `executor` if given; results are combined in
    repeat order.

    """
    method.check(ds)
    prepared = method.prepare(ds)

    def repeat(index):
        repeat_seed = seed + index
        fit = method.fit(prepared, train_cfg.replace(seed=repeat_seed), callback=callback)
        return evaluate_fit(method, fit, prepared, cfg, repeat_seed)

    repeats = range(cfg.protocol_repeats)
    mapper = map if executor is None else executor.map

    return average_evaluations(mapper(repeat, repeats))


#: sweep axes and the configuration each varies
SWEEP_AXES = {
    'dim': ('train', 'latent_dim', int),
    'alpha': ('train', 'alpha', float),
    'classifier_lambda': ('evaluate', 'classifier_lambda', float),
    'classifier_c': ('evaluate', 'classifier_c', float),
}

SWEEP_COLUMNS = ('value', 'mse', 'emd', 'f1', 'parity', 'consistency', 'ks')


def sweep_point(axis, value, train_cfg, cfg):
    """Configurations of the sweep point `axis = value`."""
    try:
        (section, field, cast) = SWEEP_AXES[axis]
    except KeyError:
        raise ConfigError(f"unknown sweep axis {axis!r} (select from: {', '.join(SWEEP_AXES)})",
                          code='axis')

    if section == 'train':
        return (train_cfg.replace(**{field: cast(value)}), cfg)

    return (train_cfg, cfg.replace(**{field: cast(value)}))


def sweep(method, ds, axis, values, train_cfg, cfg, seed, *, executor=None):
    """Run the protocol at each value of `axis`, returning one row (of
    `SWEEP_COLUMNS`) per value, in the given order.

    """
    values = list(values)
    if not values:
        raise ConfigError("sweep requires at least one value", code='empty')

    points = [sweep_point(axis, value, train_cfg, cfg) for value in values]

    def run(point):
        return run_protocol(method, ds, *point, seed)

    mapper = map if executor is None else executor.map

    rows = []
    for (value, evaluation) in zip(values, mapper(run, points)):
        report = evaluation.report
        rows.append((value,) + tuple(getattr(report, name) for name in SWEEP_COLUMNS[1:]))

    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
