"""Plain (linear) autoencoder baseline."""
from fairlatent.train import train_autoencoder

from .base import Fit, Method


class AutoEncoder(Method):
    """ae: linear autoencoder minimizing reconstruction error alone
    (the protected attribute included)
    """
    learns = True

    #: hidden layer of the encoder
    nonlinear = False

    def fit(self, ds, cfg, *, callback=None):
        (encoder, history) = train_autoencoder(ds, cfg.replace(nonlinear=self.nonlinear),
                                               callback=callback)
        return Fit(encoder, None, history)
