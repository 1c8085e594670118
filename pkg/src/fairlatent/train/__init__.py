"""Adversarial training of fair representations."""
from .loop import (  # noqa: F401
    EpochRecord,
    TrainConfig,
    TrainHistory,
    TrainingError,
    init_critic,
    multiclass_schedule,
    train_autoencoder,
    train_critic_inner,
    train_multiclass,
    train_nrl,
)
