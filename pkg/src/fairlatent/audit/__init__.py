"""Discovery of hidden label bias by label flipping."""
from .flip import (  # noqa: F401
    AuditError,
    DiscriminationRanking,
    FlipExperiment,
    curve_area,
    curve_at,
    default_flip_group,
    detect_flipped,
    detection_fractions,
    discovery_curve,
    discrimination_scores,
    match_and_flip,
    positive_rates,
)
