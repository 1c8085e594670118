"""Adversarial training of the fair encoder.

Each epoch draws a batch of `L` samples from either side of a group
pair, trains the critic on these to convergence (the inner loop), and
takes one gradient step of the generator against `L_A + α·L_D`.

The plain autoencoder is the same loop with `α = 0`: the critic is
still trained (as a monitor of `L_D`) but exerts no force on the
generator. Hence an `α = 0` fair run and the autoencoder run of the
same seed are identical epoch by epoch.

The multiclass extension cycles the group pair through `(U^(j), U^(−j))`
for each protected class `j`, `class_iterations` epochs at a time, all
against one shared critic.

"""
import dataclasses
import typing

import numpy as np
import pandas as pd

from fairlatent.data import partition
from fairlatent.error import ConfigError, FairLatentError
from fairlatent.model import (
    CriticState,
    clip,
    critic_gap,
    encode,
    grad_generator,
    init_encoder,
    reconstruction_loss,
)


class TrainingError(FairLatentError):

    code = 'training'


@dataclasses.dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of a training run."""
    latent_dim: int = 12
    alpha: float = 10.0
    mu: float = 5e-3
    batch: int = 256
    epochs: int = 2000
    critic_tol: float = 1e-3
    critic_max_iter: int = 500
    c_clip: float = 0.1
    seed: int = 0
    nonlinear: bool = False
    bias: bool = True
    halve_step: bool = False
    class_iterations: int = 10

    def __post_init__(self):
        checks = (
            ('latent_dim', self.latent_dim >= 1),
            ('alpha', self.alpha >= 0),
            ('mu', self.mu > 0),
            ('batch', self.batch >= 1),
            ('epochs', self.epochs >= 0),
            ('critic_tol', self.critic_tol > 0),
            ('critic_max_iter', self.critic_max_iter >= 1),
            ('c_clip', self.c_clip > 0),
            ('class_iterations', self.class_iterations >= 1),
        )
        for (name, valid) in checks:
            if not valid:
                raise ConfigError(f"invalid training parameter {name}: "
                                  f"{getattr(self, name)!r}")

    @property
    def hidden(self):
        """Width of the rectified hidden layer (if any)."""
        return self.latent_dim if self.nonlinear else None

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


class EpochRecord(typing.NamedTuple):

    epoch: int
    L_A: float
    L_D: float
    dual_estimate: float
    critic_iters: int
    group: int = 0
    mu: float = float('nan')
    mse: float = float('nan')


@dataclasses.dataclass
class TrainHistory:
    """Per-epoch records of a run, plus notes on recoverable
    conditions met along the way.

    """
    records: typing.List[EpochRecord] = dataclasses.field(default_factory=list)
    notes: typing.List[str] = dataclasses.field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def append(self, record):
        self.records.append(record)

    def note(self, message):
        if message not in self.notes:
            self.notes.append(message)

    def frame(self):
        return pd.DataFrame(self.records, columns=EpochRecord._fields)

    def to_csv(self, path):
        self.frame().to_csv(path, index=False, float_format='%.17g')


def init_critic(d, cfg):
    """Critic weights uniform in ±c_clip, drawn from a stream separate
    from that of batch sampling.

    """
    rng = np.random.default_rng([cfg.seed, 1])
    return CriticState(rng.uniform(-cfg.c_clip, cfg.c_clip, size=d), cfg.c_clip)


def train_critic_inner(cr, enc, X0_batch, X1_batch, cfg):
    """Ascend `L_D` in the critic's weights (clipping after each step)
    until its change falls below `critic_tol` or `critic_max_iter` steps
    are taken.

    Returns the updated critic and the number of steps taken.

    """
    if len(X0_batch) == 0 or len(X1_batch) == 0:
        raise TrainingError("critic requires non-empty batches", code='empty-group')

    # L_D is linear in w: its gradient is fixed for a fixed encoder
    gradient = encode(enc, X0_batch).mean(axis=0) - encode(enc, X1_batch).mean(axis=0)

    value = float(cr.w @ gradient)
    iterations = 0

    while iterations < cfg.critic_max_iter:
        cr = clip(dataclasses.replace(cr, w=cr.w + cfg.mu * gradient))
        iterations += 1

        (previous, value) = (value, float(cr.w @ gradient))
        if abs(value - previous) < cfg.critic_tol:
            break

    return (cr, iterations)


def _draw(rng, index, size, history, label):
    if len(index) >= size:
        return index[rng.choice(len(index), size=size, replace=False)]

    history.note(f"group {label} has {len(index)} samples (fewer than batch {size}): "
                 "sampled with replacement")
    return index[rng.choice(len(index), size=size, replace=True)]


def _normalized_gap(cr, gap):
    norm = np.linalg.norm(cr.w)
    return float(abs(gap) / norm) if norm > 0 else 0.0


def _adversarial_loop(ds, cfg, pairs, *, alpha, halve_step=False, callback=None):
    """Shared epoch loop over the group `pairs` schedule.

    `pairs(epoch)` returns `(group, index0, index1)` for the epoch.

    `callback(record, enc, cr)` receives each epoch's record along with
    the (immutable) encoder and critic states that close the epoch.

    """
    rng = np.random.default_rng(cfg.seed)

    enc = init_encoder(ds.m, cfg.latent_dim, rng, hidden=cfg.hidden)
    cr = init_critic(cfg.latent_dim, cfg)

    history = TrainHistory()
    mu = cfg.mu
    mse = reconstruction_loss(enc, ds.X) if halve_step else float('nan')

    for epoch in range(cfg.epochs):
        (group, index0, index1) = pairs(epoch)

        X0 = ds.X[_draw(rng, index0, cfg.batch, history, group)]
        X1 = ds.X[_draw(rng, index1, cfg.batch, history, f'not {group}')]

        (cr, critic_iters) = train_critic_inner(cr, enc, X0, X1, cfg)

        gap = critic_gap(cr, enc, X0, X1)
        loss = reconstruction_loss(enc, np.concatenate([X0, X1]))

        gradient = grad_generator(enc, cr, X0, X1, alpha)

        if halve_step:
            # full-data reconstruction error may not increase
            while True:
                candidate = enc.step(gradient, mu, bias=cfg.bias)
                candidate_mse = reconstruction_loss(candidate, ds.X)

                if candidate_mse <= mse:
                    (enc, mse) = (candidate, candidate_mse)
                    break

                mu /= 2
                if mu < np.finfo(float).eps * cfg.mu:
                    history.note(f"epoch {epoch}: step size exhausted; state held")
                    break
        else:
            enc = enc.step(gradient, mu, bias=cfg.bias)

        record = EpochRecord(epoch, loss, gap, _normalized_gap(cr, gap), critic_iters,
                             group, mu, mse)
        history.append(record)

        if callback is not None:
            callback(record, enc, cr)

    return (enc, cr, history)


def _check_binary(ds):
    if ds.n_protected != 2:
        raise TrainingError(f"binary protected attribute required (found {ds.n_protected} "
                            "classes); see the multiclass method", code='protected-classes')


def _check_dimension(ds, cfg):
    if cfg.latent_dim > ds.m:
        raise TrainingError(f"latent dimension {cfg.latent_dim} exceeds feature count {ds.m}",
                            code='dimension')


def train_nrl(ds, cfg, *, callback=None):
    """Train the fair encoder on a binary protected attribute.

    Returns `(EncoderState, CriticState, TrainHistory)`.

    """
    _check_binary(ds)
    _check_dimension(ds, cfg)

    part = partition(ds)
    schedule = (0, part.group(0), part.group(1))

    return _adversarial_loop(ds, cfg, lambda _epoch: schedule,
                             alpha=cfg.alpha, callback=callback)


def train_autoencoder(ds, cfg, *, callback=None):
    """Train the encoder on reconstruction alone.

    Batches are drawn as for `train_nrl`. With `halve_step`, the step
    size is halved whenever a step would increase the full-data
    reconstruction error.

    Returns `(EncoderState, TrainHistory)`.

    """
    _check_dimension(ds, cfg)

    part = partition(ds)

    if ds.n_protected == 2:
        schedule = (0, part.group(0), part.group(1))
    else:
        schedule = (0, part.group(0), part.complement(0))

    (enc, _cr, history) = _adversarial_loop(ds, cfg, lambda _epoch: schedule, alpha=0.0,
                                            halve_step=cfg.halve_step, callback=callback)
    return (enc, history)


def multiclass_schedule(part, class_iterations):
    """Group pair of each epoch: `class_iterations` epochs of each class
    against its complement, cycling through the classes.

    """
    pairs = [(group, part.group(group), part.complement(group)) for group in range(len(part))]

    def schedule(epoch):
        return pairs[(epoch // class_iterations) % len(pairs)]

    return schedule


def train_multiclass(ds, cfg, *, callback=None):
    """Train the fair encoder one-vs-rest over every protected class,
    sharing one critic.

    Returns `(EncoderState, CriticState, TrainHistory)`.

    """
    _check_dimension(ds, cfg)

    part = partition(ds)
    if not all(part.sizes()):
        raise TrainingError(f"every protected class must be non-empty: {part.sizes()}",
                            code='empty-group')

    return _adversarial_loop(ds, cfg, multiclass_schedule(part, cfg.class_iterations),
                             alpha=cfg.alpha, callback=callback)
