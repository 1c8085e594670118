"""Fair representation learning against the Wasserstein critic."""
from fairlatent.train import train_nrl

from .base import Fit, Method


class NRL(Method):
    """nrl: linear autoencoder trained adversarially against a clipped
    linear critic, penalizing the Wasserstein distance between the two
    protected groups' representations (binary protected attribute)
    """
    learns = True
    multiclass = False

    def fit(self, ds, cfg, *, callback=None):
        return Fit(*train_nrl(ds, cfg, callback=callback))
