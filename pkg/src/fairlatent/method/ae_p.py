from .ae import AutoEncoder


class AutoEncoderP(AutoEncoder):
    """ae_p: as ae, with the protected attribute removed from the
    features
    """
    excludes_protected = True
