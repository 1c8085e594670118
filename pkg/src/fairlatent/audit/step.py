"""Pipeline Step to inject and discover label bias: Audit"""
import typing

import numpy as np
import toml

from fairlatent import pipeline
from fairlatent.command import registries
from fairlatent.error import ConfigError
from fairlatent.method import get_method
from fairlatent.model import logreg_fit, logreg_score
from fairlatent.train.step import add_arguments as add_train_arguments, progress_printer

from .flip import (
    curve_area,
    curve_at,
    default_flip_group,
    detection_fractions,
    discovery_curve,
    discrimination_scores,
    match_and_flip,
)


AUDIT_NAME = 'audit.toml'
PAIRS_NAME = 'pairs.csv'
RANKING_NAME = 'ranking.csv'
DISCOVERY_NAME = 'discovery.csv'

#: selected fraction of the discriminated group at which discovery is reported
DISCOVERY_CUTOFF = 0.25


class AuditResult(typing.NamedTuple):
    """Pipeline Step results for Audit"""
    audit_path: str
    flipped: int
    detected_original: float
    detected_fair: float


def flip_group_index(ds, value):
    """Protected class index of the raw protected value `value`."""
    if value is None:
        return default_flip_group(ds)

    try:
        return ds.protected_levels.index(str(value))
    except ValueError:
        raise ConfigError(f"[audit] flip_group: unknown protected value {value!r} "
                          f"(select from: {', '.join(ds.protected_levels)})",
                          code='flip-group') from None


def _lambda_key(lam):
    return f'{lam:g}'


class Audit(pipeline.Step, commands=registries('audit')):
    """Extend given `ArgumentParser` with the audit interface and run
    the label-flipping experiment on the prepared `dataset`.

    Labels of matched members of the discriminated group are flipped,
    the configured (learning) method is trained on the flipped data,
    and the flipped individuals' recovery is measured both on the
    original features and on the learned representation.

    Returns an `AuditResult`.

    """
    __provides__ = AuditResult
    __requires__ = ('dataset',)

    def __init__(self, parser):
        add_train_arguments(parser)

        group_parser = parser.add_argument_group("audit")
        group_parser.add_argument(
            '--flip-group',
            dest='cfg.audit.flip_group',
            metavar='VALUE',
            help="raw protected value of the group whose labels are flipped "
                 "(default: that of the lower positive rate)",
        )

    def __pre__(self, parser, args, results):
        method = get_method(results.config.method)

        if not method.learns:
            raise ConfigError(f"method {method.name} learns no representation to audit",
                              code='method')

    def __call__(self, args, results):
        config = results.config
        method = get_method(config.method)

        dataset = method.prepare(results.dataset)
        group = flip_group_index(dataset, config.audit.flip_group)

        (flipped_ds, experiment) = match_and_flip(dataset, group)

        if args.verbosity >= 1:
            print(f'flipped {len(experiment)} labels of protected group '
                  f'{dataset.protected_levels[group]} ({len(experiment.pairs)} pairs)')

        fit = method.fit(flipped_ds, config.train.replace(seed=config.seed),
                         callback=progress_printer(args, method.name))

        original = np.asarray(flipped_ds.X)
        fair = method.represent(fit, flipped_ds)

        grid = config.audit.lambda_grid
        threshold = config.evaluate.threshold

        original_fractions = detection_fractions(flipped_ds, experiment, original, grid,
                                                 config.seed, threshold)
        fair_fractions = detection_fractions(flipped_ds, experiment, fair, grid,
                                             config.seed, threshold)

        lam = config.evaluate.penalty(flipped_ds.n)
        p_o = logreg_score(logreg_fit(original, flipped_ds.y, lam, config.seed), original)
        p_f = logreg_score(logreg_fit(fair, flipped_ds.y, lam, config.seed), fair)

        ranking = discrimination_scores(p_o, p_f)
        members = np.flatnonzero(flipped_ds.p == group)
        curve = discovery_curve(ranking, experiment.flipped, members)

        experiment.frame().to_csv(args.outdir / PAIRS_NAME, index=False)
        ranking.frame(experiment.flipped).to_csv(args.outdir / RANKING_NAME, index=False,
                                                 float_format='%.6g')
        curve.to_csv(args.outdir / DISCOVERY_NAME, index=False, float_format='%.6g')

        audit = {
            'method': method.name,
            'seed': config.seed,
            'flip_group': dataset.protected_levels[group],
            'pairs': len(experiment.pairs),
            'flipped': len(experiment),
            'classifier_lambda': lam,
            'original': {
                'detected': max(original_fractions.values()),
                'fractions': {_lambda_key(key): value
                              for (key, value) in original_fractions.items()},
            },
            'fair': {
                'detected': max(fair_fractions.values()),
                'fractions': {_lambda_key(key): value
                              for (key, value) in fair_fractions.items()},
            },
            'discovery': {
                'area': curve_area(curve),
                'cutoff': DISCOVERY_CUTOFF,
                'found_at_cutoff': curve_at(curve, DISCOVERY_CUTOFF),
            },
        }

        audit_path = args.outdir / AUDIT_NAME
        with audit_path.open('w') as fd:
            toml.dump(audit, fd)

        if args.verbosity >= 2:
            print(f"  detected on original features: {audit['original']['detected']:.3f}")
            print(f"  detected on {method.name} representation: "
                  f"{audit['fair']['detected']:.3f}")
            print(f"  found at {DISCOVERY_CUTOFF:.0%} selected: "
                  f"{audit['discovery']['found_at_cutoff']:.3f}")

        return AuditResult(str(audit_path), len(experiment),
                           audit['original']['detected'], audit['fair']['detected'])
