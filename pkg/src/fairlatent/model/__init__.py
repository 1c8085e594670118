"""Generator, critic & classifier states and their closed-form
gradients.

"""
from .linear import (  # noqa: F401
    ClassifierState,
    CriticState,
    Dense,
    EncoderState,
    ModelError,
    clip,
    critic_gap,
    decode,
    encode,
    grad_critic,
    grad_generator,
    init_encoder,
    lipschitz_bound,
    logreg_fit,
    logreg_gradient,
    logreg_score,
    reconstruction_loss,
)

from .serialize import (  # noqa: F401
    dump_arrays,
    load_arrays,
    load_classifier,
    load_critic,
    load_encoder,
    save_classifier,
    save_critic,
    save_encoder,
)
