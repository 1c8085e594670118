"""Fairness and classification measurements.

Group fairness is measured by statistical parity (the max/min ratio of
group mean scores) and by the Wasserstein distance between the groups'
representations; individual fairness by yNN consistency. The
Lipschitz bound of a classifier ties these together: its parity gap can
be no larger than `K·W₁`.

"""
import dataclasses
import typing

import numpy as np
from scipy import stats
from sklearn.decomposition import PCA
from sklearn.metrics import f1_score, pairwise_distances_chunked

from fairlatent.error import FairLatentError
from fairlatent.model import lipschitz_bound, logreg_score
from fairlatent.transport import SAMPLE_DRAWS, SAMPLE_SIZE, subsample_emd


#: significant digits of reported values
REPORT_DIGITS = 6


class MetricError(FairLatentError):

    code = 'metric'


def _significant(value, digits=REPORT_DIGITS):
    return float(f'{value:.{digits}g}')


@dataclasses.dataclass(frozen=True)
class FairnessReport:
    """Measurements of one configuration.

    `flags` names recoverable conditions met in measurement (such as an
    infinite parity ratio or an F1 score without predicted positives).

    """
    mse: float
    emd: float
    parity: float
    consistency: float
    f1: float
    ks: float
    lipschitz_K: float
    bound_margin: float
    flags: typing.Tuple[str, ...] = ()

    FIELDS = ('mse', 'emd', 'parity', 'consistency', 'f1', 'ks', 'lipschitz_K', 'bound_margin')

    def __post_init__(self):
        if not self.parity >= 1:
            raise MetricError(f"parity must be at least 1: {self.parity!r}", code='parity')

    def values(self):
        return {name: getattr(self, name) for name in self.FIELDS}

    def rounded(self, digits=REPORT_DIGITS):
        """Report values at `digits` significant digits."""
        return {name: _significant(value, digits) for (name, value) in self.values().items()}

    @classmethod
    def mean(cls, reports):
        """Field-wise mean of `reports` (flags combined in order)."""
        reports = list(reports)
        if not reports:
            raise MetricError("no reports to average", code='empty')

        flags = tuple(dict.fromkeys(flag for report in reports for flag in report.flags))

        return cls(
            **{name: float(np.mean([getattr(report, name) for report in reports]))
               for name in cls.FIELDS},
            flags=flags,
        )


def _group_means(scores, p, classes):
    scores = np.asarray(scores, dtype=float)
    p = np.asarray(p)

    if len(scores) != len(p):
        raise MetricError(f"{len(scores)} scores for {len(p)} group entries", code='dimension')

    means = []
    for group in range(classes):
        member = p == group
        if not member.any():
            raise MetricError(f"protected class {group} is empty", code='empty-group')
        means.append(float(scores[member].mean()))

    return np.array(means)


def group_means(scores, p):
    """Mean score of each protected class `0..max(p)`."""
    return _group_means(scores, p, int(np.max(p)) + 1)


def _ratio(means):
    (low, high) = (means.min(), means.max())

    if low <= 0:
        return float('inf')

    return float(high / low)


def statistical_parity(scores, p):
    """Ratio of the larger group mean score to the smaller.

    Binary groups only. Infinite where a group's mean score is zero.

    """
    p = np.asarray(p)
    if len(p) and (p.min() < 0 or p.max() > 1):
        raise MetricError("statistical parity requires binary groups", code='protected-classes')

    return _ratio(_group_means(scores, p, 2))


def multiclass_parity(scores, p):
    """Ratio of the largest class mean score to the smallest."""
    means = group_means(scores, p)

    if len(means) < 2:
        raise MetricError("parity requires at least two protected classes",
                          code='protected-classes')

    return _ratio(means)


def nearest_neighbors(Z, k, *, working_memory=None):
    """Indices (n × k) of each row's k nearest other rows of `Z` by
    Euclidean distance, ties broken by lower index.

    """
    Z = np.asarray(Z, dtype=float)
    n = len(Z)

    if not 1 <= k < n:
        raise MetricError(f"neighbor count must lie in [1, {n - 1}]: {k}", code='neighbors')

    def reduce(chunk, start):
        rows = np.arange(len(chunk))
        chunk[rows, rows + start] = np.inf

        kth = np.partition(chunk, k - 1, axis=1)[:, k - 1]

        found = np.empty((len(chunk), k), dtype=np.int64)
        for (row, distances) in enumerate(chunk):
            candidates = np.flatnonzero(distances <= kth[row])
            order = np.argsort(distances[candidates], kind='stable')
            found[row] = candidates[order[:k]]

        return found

    chunks = pairwise_distances_chunked(Z, reduce_func=reduce, metric='euclidean',
                                        working_memory=working_memory)
    return np.vstack(list(chunks))


def consistency(Z, scores, k=1):
    """yNN consistency: one less the mean absolute difference between
    each score and the mean score of its `k` nearest neighbors in `Z`.

    """
    scores = np.asarray(scores, dtype=float)

    if len(scores) != len(Z):
        raise MetricError(f"{len(scores)} scores for {len(Z)} representations",
                          code='dimension')

    neighbors = nearest_neighbors(Z, k)
    return float(1 - np.mean(np.abs(scores - scores[neighbors].mean(axis=1))))


def _check_labels(labels):
    labels = np.asarray(labels)

    if len(np.unique(labels)) < 2:
        raise MetricError("both label values are required", code='single-class')

    return labels


def f1(scores, labels, threshold=0.5):
    """F1 of predictions `scores ≥ threshold`; zero without predicted
    positives (see `has_predicted_positives`).

    """
    labels = _check_labels(labels)
    predicted = (np.asarray(scores) >= threshold).astype(np.int64)
    return float(f1_score(labels, predicted, zero_division=0))


def has_predicted_positives(scores, threshold=0.5):
    return bool((np.asarray(scores) >= threshold).any())


def ks_statistic(scores, labels):
    """Two-sample Kolmogorov–Smirnov statistic between the scores of
    positives and those of negatives: `max |TPR − FPR|`.

    """
    labels = _check_labels(labels)
    scores = np.asarray(scores, dtype=float)
    return float(stats.ks_2samp(scores[labels == 1], scores[labels == 0]).statistic)


def group_emd(Z, p, seed, *, sample=SAMPLE_SIZE, draws=SAMPLE_DRAWS):
    """Subsampled exact W₁ between the two groups' representations."""
    Z = np.asarray(Z, dtype=float)
    p = np.asarray(p)

    (Z0, Z1) = (Z[p == 0], Z[p == 1])
    if len(Z0) == 0 or len(Z1) == 0:
        raise MetricError("EMD requires both groups non-empty", code='empty-group')

    return subsample_emd(Z0, Z1, seed, sample=sample, draws=draws)


def one_vs_rest_emd(Z, p, seed, *, sample=SAMPLE_SIZE, draws=SAMPLE_DRAWS):
    """group_emd of each protected class against its complement."""
    p = np.asarray(p)
    return np.array([group_emd(Z, (p != group).astype(np.int64), seed,
                               sample=sample, draws=draws)
                     for group in range(int(p.max()) + 1)])


def parity_bound_check(clf, Z, p, seed=0, *, distance=None,
                       sample=SAMPLE_SIZE, draws=SAMPLE_DRAWS):
    """Margin `K·D − |Δ|` by which the classifier's mean score gap Δ
    between the groups falls within its Lipschitz bound K times the
    groups' Wasserstein distance D.

    D is computed by `group_emd` unless given. With exact D the margin
    is never negative; subsampled D admits a small negative margin.

    """
    scores = logreg_score(clf, Z)
    (mean0, mean1) = _group_means(scores, p, 2)

    if distance is None:
        distance = group_emd(Z, p, seed, sample=sample, draws=draws)

    return float(lipschitz_bound(clf) * distance - abs(mean0 - mean1))


class Projection(typing.NamedTuple):
    """Principal-component projection of a matrix."""
    points: np.ndarray
    components: np.ndarray
    mean: np.ndarray
    explained_variance: np.ndarray
    deficient: bool


def pca_project(X, dims=2):
    """Project the centered `X` onto its top `dims` principal components.

    Component signs are fixed such that each component's largest
    magnitude loading is positive. Components beyond the rank of `X` are
    zero-filled (and the projection flagged `deficient`).

    """
    X = np.asarray(X, dtype=float)
    (n, m) = X.shape

    if n < dims:
        raise MetricError(f"projection to {dims} dimensions requires as many samples "
                          f"(found {n})", code='dimension')

    count = min(dims, m, n)
    pca = PCA(n_components=count, svd_solver='full').fit(X)

    components = pca.components_.copy()
    variance = pca.explained_variance_.copy()

    tolerance = max(n, m) * np.finfo(float).eps * (variance.max() if variance.size else 0.0)
    live = variance > tolerance
    components[~live] = 0.0
    variance[~live] = 0.0

    pivots = np.abs(components).argmax(axis=1)
    signs = np.sign(components[np.arange(count), pivots])
    signs[signs == 0] = 1.0
    components *= signs[:, np.newaxis]

    points = np.zeros((n, dims))
    points[:, :count] = (X - pca.mean_) @ components.T

    if count < dims:
        components = np.vstack([components, np.zeros((dims - count, m))])
        variance = np.append(variance, np.zeros(dims - count))

    return Projection(points, components, pca.mean_, variance,
                      deficient=bool(count < dims or not live.all()))
