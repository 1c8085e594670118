from .original import Original


class OriginalP(Original):
    """original_p: as original, with the protected attribute removed
    from the features
    """
    excludes_protected = True
