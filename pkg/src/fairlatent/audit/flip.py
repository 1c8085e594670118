"""Discovery of hidden label bias.

Discrimination is injected synthetically: each positively labeled
member of the reference group is matched to the nearest positively
labeled member of the discriminated group, and the matched individuals'
labels are flipped to negative. A representation is then judged by how
many of the flipped individuals a classifier fit on it still predicts
positive, and by how early they appear in the ranking by discrimination
strength `s_d = 1 − p_o/p_f`.

"""
import dataclasses
import typing

import numpy as np
import pandas as pd
from sklearn.metrics import auc, pairwise_distances_chunked

from fairlatent.error import FairLatentError
from fairlatent.model import logreg_fit, logreg_score


class AuditError(FairLatentError):

    code = 'audit'


@dataclasses.dataclass(frozen=True, eq=False)
class FlipExperiment:
    """Matched (reference, discriminated) index pairs, the flipped
    indices (sorted, deduplicated) and the labels before flipping.

    """
    pairs: np.ndarray
    flipped: np.ndarray
    original_labels: np.ndarray
    group: int

    def __len__(self):
        return len(self.flipped)

    def frame(self):
        return pd.DataFrame(self.pairs, columns=['reference', 'flipped'])


class DiscriminationRanking(typing.NamedTuple):
    """Discrimination strength of each individual and the descending
    order of these (ties by lower index).

    """
    scores: np.ndarray
    ordering: np.ndarray

    def frame(self, flipped=()):
        return pd.DataFrame({
            'index': self.ordering,
            's_d': self.scores[self.ordering],
            'flipped': np.isin(self.ordering, flipped),
        })


def positive_rates(ds):
    return np.array([ds.y[ds.p == group].mean() for group in range(ds.n_protected)])


def default_flip_group(ds):
    """The protected class of lower positive rate."""
    return int(np.argmin(positive_rates(ds)))


def _check_binary(ds):
    if ds.n_protected != 2:
        raise AuditError(f"binary protected attribute required (found {ds.n_protected} "
                         "classes)", code='protected-classes')


def match_and_flip(ds, group=None):
    """Flip to negative the labels of the positively labeled members of
    `group` nearest (by Euclidean distance over the non-protected
    features; ties by lower index) to a positively labeled member of the
    other group.

    Returns the flipped `Dataset` and its `FlipExperiment`.

    """
    _check_binary(ds)

    if group is None:
        group = default_flip_group(ds)

    keep = [index for (index, name) in enumerate(ds.feature_names)
            if name not in ds.protected_columns]
    X = ds.X[:, keep]

    reference = np.flatnonzero((ds.p != group) & (ds.y == 1))
    candidates = np.flatnonzero((ds.p == group) & (ds.y == 1))

    if len(reference) == 0 or len(candidates) == 0:
        raise AuditError(f"no qualifying pairs: {len(reference)} positive reference and "
                         f"{len(candidates)} positive class-{group} individuals",
                         code='no-pairs')

    nearest = np.concatenate(list(pairwise_distances_chunked(
        X[reference],
        X[candidates],
        reduce_func=lambda chunk, _start: chunk.argmin(axis=1),
        metric='euclidean',
    )))

    pairs = np.column_stack([reference, candidates[nearest]])
    flipped = np.unique(candidates[nearest])

    y = ds.y.copy()
    y[flipped] = 0

    experiment = FlipExperiment(pairs, flipped, ds.y, group)
    return (ds.with_labels(y), experiment)


def _check_representation(flipped_ds, experiment, representation):
    representation = np.asarray(representation, dtype=float)

    if len(representation) != flipped_ds.n:
        raise AuditError(f"representation has {len(representation)} rows for "
                         f"{flipped_ds.n} samples", code='dimension')

    if len(experiment) == 0:
        raise AuditError("no flipped individuals", code='empty-flipped')

    return representation


def detection_fractions(flipped_ds, experiment, representation, lambda_grid, seed,
                        threshold=0.5):
    """Fraction of flipped individuals predicted positive by a ridge
    logistic classifier fit (to the flipped labels) on `representation`,
    for each regularization strength of `lambda_grid`.

    """
    lambda_grid = list(lambda_grid)
    if not lambda_grid:
        raise AuditError("regularization grid is empty", code='empty-grid')

    representation = _check_representation(flipped_ds, experiment, representation)

    fractions = {}
    for lam in lambda_grid:
        clf = logreg_fit(representation, flipped_ds.y, lam, seed)
        scores = logreg_score(clf, representation[experiment.flipped])
        fractions[lam] = float(np.mean(scores >= threshold))

    return fractions


def detect_flipped(flipped_ds, experiment, representation, lambda_grid, seed, threshold=0.5):
    """Largest fraction of flipped individuals predicted positive over
    `lambda_grid`.

    """
    fractions = detection_fractions(flipped_ds, experiment, representation, lambda_grid,
                                    seed, threshold)
    return max(fractions.values())


def discrimination_scores(p_o, p_f):
    """`s_d = 1 − p_o/p_f` and its descending ranking."""
    p_o = np.asarray(p_o, dtype=float)
    p_f = np.asarray(p_f, dtype=float)

    if p_o.shape != p_f.shape:
        raise AuditError(f"score vectors differ in length: {len(p_o)} vs {len(p_f)}",
                         code='score')

    if (p_f <= 0).any():
        raise AuditError("fair-representation scores must be positive", code='score')

    scores = 1 - p_o / p_f
    ordering = np.lexsort((np.arange(len(scores)), -scores))

    return DiscriminationRanking(scores, ordering)


def discovery_curve(ranking, flipped, group):
    """Fraction of the flipped individuals found among the top-ranked
    fraction of `group`, at every cut-off.

    Returns a frame of columns `fraction_selected` & `fraction_found`
    running from (0, 0) to (1, 1).

    """
    flipped = np.asarray(flipped)
    group = np.asarray(group)

    if len(flipped) == 0:
        raise AuditError("no flipped individuals", code='empty-flipped')

    if not np.isin(flipped, group).all():
        raise AuditError("flipped individuals must belong to the group", code='score')

    order = ranking.ordering[np.isin(ranking.ordering, group)]
    found = np.concatenate([[0], np.isin(order, flipped).cumsum()])

    return pd.DataFrame({
        'fraction_selected': np.arange(len(order) + 1) / len(order),
        'fraction_found': found / len(flipped),
    })


def curve_area(curve):
    """Area under a discovery curve."""
    return float(auc(curve['fraction_selected'], curve['fraction_found']))


def curve_at(curve, fraction):
    """Fraction found at the first cut-off selecting at least `fraction`."""
    reached = curve.loc[curve['fraction_selected'] >= fraction, 'fraction_found']
    return float(reached.iloc[0])
