"""Wasserstein-1 distances between empirical distributions.

The primal distance is computed exactly (network simplex, via POT) on
clouds of bounded size, or by the closed form in one dimension (via
scipy). The critic's dual estimate is the lower bound attained by a
linear test function normalized to Lipschitz constant 1.

"""
import dataclasses

import numpy as np
import ot
from scipy import stats

from fairlatent.error import FairLatentError


#: largest transport problem (k0 × k1) solved exactly
SIZE_CAP = 512 * 512

#: default subsample size per group & number of subsample draws
SAMPLE_SIZE = 256
SAMPLE_DRAWS = 5


class TransportError(FairLatentError):

    code = 'transport'


@dataclasses.dataclass(frozen=True, eq=False)
class EmpiricalCloud:
    """Point cloud (k × d) carrying uniform weights 1/k."""
    points: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)

        if points.ndim == 1:
            points = points[:, np.newaxis]

        if points.ndim != 2:
            raise TransportError(f"cloud must be 2-D not {points.ndim}-D", code='dimension')

        if len(points) == 0:
            raise TransportError("cloud must hold at least one point", code='empty')

        if not np.isfinite(points).all():
            raise TransportError("cloud has non-finite entries", code='finite')

        object.__setattr__(self, 'points', points)

    @property
    def k(self):
        return self.points.shape[0]

    @property
    def d(self):
        return self.points.shape[1]

    @property
    def weights(self):
        return np.full(self.k, 1 / self.k)


def emd_1d(xs, ys):
    """Exact W₁ between two empirical distributions on the line.

    Integrates `|F_x − F_y|` over the merged support; sample counts may
    differ.

    """
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()

    if len(xs) == 0 or len(ys) == 0:
        raise TransportError("emd_1d requires non-empty samples", code='empty')

    return float(stats.wasserstein_distance(xs, ys))


def emd_exact(c0, c1, *, size_cap=SIZE_CAP):
    """Exact W₁ between clouds `c0` and `c1` under Euclidean cost.

    Solved as the minimum-cost flow from supplies 1/k₀ to demands 1/k₁.

    """
    if not isinstance(c0, EmpiricalCloud):
        c0 = EmpiricalCloud(c0)

    if not isinstance(c1, EmpiricalCloud):
        c1 = EmpiricalCloud(c1)

    if c0.d != c1.d:
        raise TransportError(f"cloud dimensions differ: {c0.d} vs {c1.d}", code='dimension')

    if c0.k * c1.k > size_cap:
        raise TransportError(f"transport problem {c0.k}×{c1.k} exceeds size cap {size_cap}",
                             code='size-cap')

    cost = ot.dist(c0.points, c1.points, metric='euclidean')

    return max(float(ot.emd2(c0.weights, c1.weights, cost, numItermax=10_000_000)), 0.0)


def dual_estimate(cr, Z0, Z1):
    """Kantorovich-Rubinstein value of the linear critic `cr` on
    representations `Z0` and `Z1`, normalized by ‖w‖₂.

    """
    norm = np.linalg.norm(cr.w)
    if norm == 0:
        raise TransportError("critic vector is zero", code='zero-critic')

    Z0 = np.asarray(Z0, dtype=float)
    Z1 = np.asarray(Z1, dtype=float)

    if len(Z0) == 0 or len(Z1) == 0:
        raise TransportError("dual estimate requires non-empty groups", code='empty')

    return float(abs(np.mean(Z0 @ cr.w) - np.mean(Z1 @ cr.w)) / norm)


def per_feature_emd(ds, part):
    """emd_1d of each feature column between the two protected groups."""
    if len(part) != 2:
        raise TransportError(f"per-feature EMD requires a binary protected attribute "
                             f"(found {len(part)} classes)", code='dimension')

    X0 = ds.X[part.group(0)]
    X1 = ds.X[part.group(1)]

    return np.array([emd_1d(X0[:, column], X1[:, column]) for column in range(ds.m)])


def subsample_emd(Z0, Z1, seed, *, sample=SAMPLE_SIZE, draws=SAMPLE_DRAWS):
    """Mean emd_exact over `draws` seeded subsamples of at most `sample`
    points per group.

    Groups no larger than `sample` are used whole; if both are, the
    distance is exact and computed once.

    """
    Z0 = np.asarray(Z0, dtype=float)
    Z1 = np.asarray(Z1, dtype=float)

    if len(Z0) == 0 or len(Z1) == 0:
        raise TransportError("EMD requires non-empty groups", code='empty')

    if len(Z0) <= sample and len(Z1) <= sample:
        return emd_exact(Z0, Z1)

    rng = np.random.default_rng(seed)

    def draw(Z):
        if len(Z) <= sample:
            return Z
        return Z[np.sort(rng.choice(len(Z), size=sample, replace=False))]

    return float(np.mean([emd_exact(draw(Z0), draw(Z1)) for _draw in range(draws)]))
