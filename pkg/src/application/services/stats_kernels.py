"""Distance and neighbourhood kernels over empirical distributions and embeddings.

All kernels are exact: Wasserstein-2 integrates the two empirical quantile
functions segment by segment, and k-NN radii come from full pairwise distances.
"""

import math
from typing import Iterator, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from domain.entities.distribution import (
    DistanceMetric,
    DistributionKind,
    EmbeddingMatrix,
    EmpiricalDistribution,
    NeighborRadii,
)
from domain.errors import DimensionMismatch, KindMismatch, KTooLarge

ROW_TILE = 1024


def wasserstein2(p: EmpiricalDistribution, q: EmpiricalDistribution) -> float:
    """Exact W2 between two equal-weight numeric samples of any sizes.

    The quantile function of an n-point sample steps at multiples of 1/n. On the
    common grid of 1/(n*m) those steps sit at multiples of m (for p) and n (for q),
    so the merged breakpoints and each segment's quantile indices are integers.
    """
    if p.kind is not DistributionKind.NUMERIC or q.kind is not DistributionKind.NUMERIC:
        raise KindMismatch("numeric", f"{p.kind.value}/{q.kind.value}")
    u = np.asarray(p.values, dtype=np.float64)
    v = np.asarray(q.values, dtype=np.float64)
    n, m = len(u), len(v)

    if n == m:
        return math.sqrt(float(np.mean((u - v) ** 2)))

    breaks = np.union1d(
        np.arange(1, n + 1, dtype=np.int64) * m,
        np.arange(1, m + 1, dtype=np.int64) * n,
    )
    widths = np.diff(np.concatenate(([0], breaks)))
    # Segment (prev, b] lies inside step ceil(b/m)-1 of p and ceil(b/n)-1 of q.
    i = (breaks + m - 1) // m - 1
    j = (breaks + n - 1) // n - 1
    squared = float(np.sum(widths * (u[i] - v[j]) ** 2)) / (n * m)
    return math.sqrt(max(squared, 0.0))


def total_variation(p: EmpiricalDistribution, q: EmpiricalDistribution) -> float:
    if p.kind is not DistributionKind.CATEGORICAL or q.kind is not DistributionKind.CATEGORICAL:
        raise KindMismatch("categorical", f"{p.kind.value}/{q.kind.value}")
    p_hat, q_hat = p.normalized(), q.normalized()
    categories = sorted(set(p_hat) | set(q_hat))
    distance = 0.5 * sum(abs(p_hat.get(c, 0.0) - q_hat.get(c, 0.0)) for c in categories)
    return min(max(distance, 0.0), 1.0)


def _unit_rows(vectors: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    # Zero rows stay zero, giving cosine similarity 0 against anything.
    return np.divide(vectors, norms, out=np.zeros_like(vectors), where=norms > 0)


def _tiles(count: int) -> Iterator[Tuple[int, int]]:
    for start in range(0, count, ROW_TILE):
        yield start, min(start + ROW_TILE, count)


def pairwise_distances(
    queries: np.ndarray, refs: np.ndarray, metric: DistanceMetric
) -> Iterator[Tuple[int, np.ndarray]]:
    """Yield ``(row offset, distance block)`` tiles of the query-by-ref matrix."""
    if queries.shape[1] != refs.shape[1]:
        raise DimensionMismatch(refs.shape[1], queries.shape[1])
    if metric is DistanceMetric.COSINE:
        unit_refs = _unit_rows(refs)
        for start, stop in _tiles(len(queries)):
            block = 1.0 - _unit_rows(queries[start:stop]) @ unit_refs.T
            yield start, np.clip(block, 0.0, 2.0)
    else:
        for start, stop in _tiles(len(queries)):
            yield start, cdist(queries[start:stop], refs, metric="euclidean")


def knn_radii(points: EmbeddingMatrix, k: int, metric: DistanceMetric) -> NeighborRadii:
    """Distance from each point to its k-th nearest neighbour, itself excluded."""
    n = len(points)
    if k < 1:
        raise ValueError("k must be at least 1")
    if k >= n:
        raise KTooLarge(k, n)
    radii = np.empty(n, dtype=np.float64)
    for start, block in pairwise_distances(points.vectors, points.vectors, metric):
        rows = np.arange(start, start + len(block))
        block = block.copy()
        block[np.arange(len(block)), rows] = np.inf
        radii[start : start + len(block)] = np.partition(block, k - 1, axis=1)[:, k - 1]
    return NeighborRadii(k=k, metric=metric, radii=radii)


def coverage_fraction(
    queries: EmbeddingMatrix,
    refs: EmbeddingMatrix,
    radii: NeighborRadii,
    metric: DistanceMetric,
) -> float:
    """Fraction of queries inside at least one closed reference ball."""
    if queries.dimension != refs.dimension:
        raise DimensionMismatch(refs.dimension, queries.dimension)
    if len(radii.radii) != len(refs):
        raise ValueError("radii were not computed on these reference points")
    if radii.metric is not metric:
        raise ValueError("radii were computed with a different distance metric")
    if len(queries) == 0:
        raise ValueError("coverage needs at least one query point")
    covered = 0
    for _, block in pairwise_distances(queries.vectors, refs.vectors, metric):
        covered += int(np.count_nonzero(np.any(block <= radii.radii[None, :], axis=1)))
    return covered / len(queries)
