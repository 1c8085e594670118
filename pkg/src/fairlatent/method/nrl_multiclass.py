from fairlatent.train import train_multiclass

from .base import Fit, Method


class NRLMulticlass(Method):
    """nrl_multiclass: as nrl, constraining each protected class against
    its complement in turn (one-vs-rest) with one shared critic; the
    `nonlinear` training option adds a rectified hidden layer
    """
    learns = True

    def fit(self, ds, cfg, *, callback=None):
        return Fit(*train_multiclass(ds, cfg, callback=callback))
