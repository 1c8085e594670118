"""Pipeline Step to train a representation: Train"""
import dataclasses
import pathlib
import typing

import numpy as np
import pandas as pd
import toml

from fairlatent import pipeline
from fairlatent.command import registries
from fairlatent.data import partition, split
from fairlatent.error import ConfigError
from fairlatent.evaluate.protocol import derive_seed
from fairlatent.metrics import group_emd, one_vs_rest_emd
from fairlatent.method import get_method
from fairlatent.model import encode, load_encoder, save_critic, save_encoder
from fairlatent.transport import dual_estimate, per_feature_emd
from fairlatent.util import NumericRangeType


MODEL_DIRNAME = 'model'
ENCODER_NAME = 'encoder.txt'
CRITIC_NAME = 'critic.txt'
HISTORY_NAME = 'history.csv'
WEIGHTS_NAME = 'feature-weights.csv'
CHECKPOINT_NAME = 'model.toml'


def add_arguments(parser):
    """Extend `parser` with overrides of the training configuration."""
    group_parser = parser.add_argument_group("training")

    group_parser.add_argument(
        '--dim',
        dest='cfg.train.latent_dim',
        metavar='INTEGER',
        type=NumericRangeType(int, [1, None]),
        help="latent dimension d",
    )
    group_parser.add_argument(
        '--alpha',
        dest='cfg.train.alpha',
        metavar='FLOAT',
        type=NumericRangeType(float, [0, None]),
        help="weight α of the Wasserstein term against reconstruction",
    )
    group_parser.add_argument(
        '--mu',
        dest='cfg.train.mu',
        metavar='FLOAT',
        type=NumericRangeType(float, (0, None)),
        help="step size of generator & critic updates",
    )
    group_parser.add_argument(
        '--batch',
        dest='cfg.train.batch',
        metavar='INTEGER',
        type=NumericRangeType(int, [1, None]),
        help="samples drawn from each group per epoch",
    )
    group_parser.add_argument(
        '--epochs',
        dest='cfg.train.epochs',
        metavar='INTEGER',
        type=NumericRangeType(int, [0, None]),
        help="number of training epochs",
    )
    group_parser.add_argument(
        '--c-clip',
        dest='cfg.train.c_clip',
        metavar='FLOAT',
        type=NumericRangeType(float, (0, None)),
        help="clipping bound of the critic's weights",
    )
    group_parser.add_argument(
        '--nonlinear',
        dest='cfg.train.nonlinear',
        action='store_const',
        const=True,
        help="add a rectified hidden layer (of the latent width) to encoder & decoder",
    )
    group_parser.add_argument(
        '--log-every',
        default=100,
        metavar='INTEGER',
        type=NumericRangeType(int, [1, None]),
        help="epochs between progress lines at increased verbosity (default: %(default)s)",
    )


def progress_printer(args, label=''):
    """Epoch callback printing training progress per verbosity."""
    if args.verbosity < 2:
        return None

    prefix = f'{label}: ' if label else ''

    def report(record, *_state):
        if args.verbosity >= 3 or record.epoch % args.log_every == 0:
            print(f'{prefix}epoch {record.epoch} [group {record.group}] '
                  f'L_A={record.L_A:.6g} L_D={record.L_D:.6g} '
                  f'dual={record.dual_estimate:.6g} critic_iters={record.critic_iters}')

    return report


def feature_weights(ds, encoder):
    """Per input feature: its row norm in the linear encoder, and (for
    a binary protected attribute) its EMD between the groups.

    """
    frame = pd.DataFrame({
        'feature': list(ds.feature_names),
        'encoder_weight': np.linalg.norm(encoder.A, axis=1),
    })

    if ds.n_protected == 2:
        frame.insert(1, 'emd', per_feature_emd(ds, partition(ds)))

    return frame


def save_checkpoint(outdir, method, fit, train_cfg, summary):
    """Write the model directory of a fit."""
    outdir = pathlib.Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    save_encoder(fit.encoder, outdir / ENCODER_NAME)

    if fit.critic is not None:
        save_critic(fit.critic, outdir / CRITIC_NAME)

    fit.history.to_csv(outdir / HISTORY_NAME)

    with (outdir / CHECKPOINT_NAME).open('w') as fd:
        toml.dump({
            'method': method.name,
            'train': dataclasses.asdict(train_cfg),
            'summary': summary,
            'notes': list(fit.history.notes),
        }, fd)


def load_checkpoint(model_dir):
    """Method name & encoder of the model directory `model_dir`."""
    model_dir = pathlib.Path(model_dir)

    try:
        checkpoint = toml.load(model_dir / CHECKPOINT_NAME)
    except FileNotFoundError as exc:
        raise ConfigError(f"not a model directory (no {CHECKPOINT_NAME}): '{model_dir}'",
                          code='missing-checkpoint') from exc

    return (checkpoint['method'], load_encoder(model_dir / ENCODER_NAME))


class TrainResult(typing.NamedTuple):
    """Pipeline Step results for Train"""
    model_path: str
    dual_estimate: typing.Optional[float]
    emd: float


class Train(pipeline.Step, commands=registries('train')):
    """Extend given `ArgumentParser` with the training interface and
    train the configured method on the training rows of a seeded split
    of the prepared `dataset`, writing its checkpoint and training
    history. The checkpoint's summary EMD and dual estimate are measured
    on the held-out rows.

    Returns a `TrainResult`.

    """
    __provides__ = TrainResult
    __requires__ = ('dataset',)

    def __init__(self, parser):
        add_arguments(parser)

    def __pre__(self, parser, args, results):
        method = get_method(results.config.method)

        if not method.learns:
            raise ConfigError(f"method {method.name} learns no representation to train "
                              "(see: evaluate)", code='method')

    def __call__(self, args, results):
        config = results.config
        method = get_method(config.method)

        method.check(results.dataset)
        prepared = method.prepare(results.dataset)
        train_cfg = config.train.replace(seed=config.seed)

        (fitted, held) = split(prepared, config.evaluate.train_fraction,
                               derive_seed(config.seed, 0))

        fit = method.fit(fitted, train_cfg, callback=progress_printer(args))

        Z = encode(fit.encoder, held.X)

        if held.n_protected == 2:
            emd = group_emd(Z, held.p, config.seed, sample=config.evaluate.emd_sample,
                            draws=config.evaluate.emd_draws)
        else:
            emd = float(one_vs_rest_emd(Z, held.p, config.seed,
                                        sample=config.evaluate.emd_sample,
                                        draws=config.evaluate.emd_draws).max())

        if fit.critic is not None and held.n_protected == 2 and np.any(fit.critic.w):
            dual = dual_estimate(fit.critic, Z[held.p == 0], Z[held.p == 1])
        else:
            dual = None

        if args.verbosity >= 1:
            for note in fit.history.notes:
                print('note:', note)

        model_path = args.outdir / MODEL_DIRNAME
        summary = {'train_rows': fitted.n, 'held_out_rows': held.n, 'emd': emd}
        if dual is not None:
            summary['dual_estimate'] = dual
        save_checkpoint(model_path, method, fit, train_cfg, summary)

        if not fit.encoder.nonlinear:
            feature_weights(prepared, fit.encoder).to_csv(model_path / WEIGHTS_NAME,
                                                          index=False)

        return TrainResult(str(model_path), dual, emd)
