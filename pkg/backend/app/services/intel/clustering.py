"""
Spatial k-means over mote coordinates.
"""

import logging
from collections.abc import Sequence

import numpy as np

from app.core.exceptions import InvalidInput
from app.models import ClusterAssignment, FloatArray, IntArray, MoteLocation

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 100


def _squared_distances(points: FloatArray, centers: FloatArray) -> FloatArray:
    diff = points[:, None, :] - centers[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _plus_plus_seeds(points: FloatArray, k: int, rng: np.random.Generator) -> FloatArray:
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    for _ in range(1, k):
        d2 = _squared_distances(points, points[chosen]).min(axis=1)
        total = d2.sum()
        if total > 0:
            chosen.append(int(rng.choice(n, p=d2 / total)))
        else:
            chosen.append(int(rng.integers(n)))
    return points[chosen].copy()


def _objective(points: FloatArray, centers: FloatArray, labels: IntArray) -> float:
    diff = points - centers[labels]
    return float(np.sum(diff * diff))


def kmeans_clusters(
    locations: Sequence[MoteLocation],
    k: int,
    seed: int,
    max_iterations: int = MAX_ITERATIONS,
) -> ClusterAssignment:
    """
    Lloyd's k-means with k-means++ seeding.

    Stops when assignments no longer change or after ``max_iterations``.
    An emptied cluster is re-seeded at the point farthest from its centroid,
    which never raises the objective.
    """
    if not locations:
        raise InvalidInput("no mote locations to cluster")
    if not 1 <= k <= len(locations):
        raise InvalidInput(f"k must lie in [1, {len(locations)}], got {k}")

    ordered = sorted(locations, key=lambda loc: loc.mote_id)
    points = np.array([(loc.x, loc.y) for loc in ordered], dtype=np.float64)
    rng = np.random.default_rng(seed)

    centers = _plus_plus_seeds(points, k, rng)
    labels = _squared_distances(points, centers).argmin(axis=1)
    history = [_objective(points, centers, labels)]
    iterations = 0

    for iterations in range(1, max_iterations + 1):
        for c in range(k):
            members = labels == c
            if members.any():
                centers[c] = points[members].mean(axis=0)
            else:
                far = int(np.sum((points - centers[labels]) ** 2, axis=1).argmax())
                logger.warning(f"Cluster {c} emptied; re-seeding at mote {ordered[far].mote_id}")
                centers[c] = points[far]
        new_labels = _squared_distances(points, centers).argmin(axis=1)
        history.append(_objective(points, centers, new_labels))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels

    logger.info(
        f"k-means converged after {iterations} iterations "
        f"(k={k}, objective={history[-1]:.6g})"
    )
    return ClusterAssignment(
        labels={loc.mote_id: int(c) for loc, c in zip(ordered, labels, strict=True)},
        centroids=[(float(x), float(y)) for x, y in centers],
        objective_history=history,
        iterations=iterations,
    )
