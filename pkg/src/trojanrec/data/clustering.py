"""Cosine k-means over binary interaction rows."""
from __future__ import annotations

import logging

import numpy as np
from sklearn.metrics.pairwise import cosine_distances
from sklearn.preprocessing import normalize

from ..errors import ParameterError
from ..utils import make_rng
from .dataset import InteractionMatrix

_LOGGER = logging.getLogger(__name__)

MAX_ITERATIONS = 100


def _plus_plus_centers(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Pick k seed rows, each with probability proportional to squared distance."""
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    closest = cosine_distances(x, x[chosen]).ravel()
    for _ in range(1, k):
        weights = np.clip(closest, 0.0, None) ** 2
        weights[chosen] = 0.0
        total = weights.sum()
        if total <= 0:
            remaining = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(remaining))
        else:
            nxt = int(rng.choice(n, p=weights / total))
        chosen.append(nxt)
        closest = np.minimum(closest, cosine_distances(x, x[[nxt]]).ravel())
    return x[chosen].copy()


def _relabel(assign: np.ndarray) -> np.ndarray:
    """Number clusters by the index of their first member."""
    _, first = np.unique(assign, return_index=True)
    order = np.argsort(first)
    mapping = np.empty(order.size, dtype=np.int64)
    mapping[np.unique(assign)[order]] = np.arange(order.size)
    return mapping[assign]


def cluster_users(m: InteractionMatrix, k: int, seed: int) -> np.ndarray:
    """Cluster users by their interaction rows under cosine distance.

    Seeding is k-means++ driven by the seed. A centroid that loses all members is
    re-seeded from the point farthest from its own centroid.

    Arguments:
        m -- interaction matrix.
        k -- number of clusters.
        seed -- seed of the k-means++ draws.

    Returns:
        Array with the cluster id of every user, ids numbered by first member.

    Raises:
        ParameterError: If k exceeds the number of users or of distinct rows.

    """
    n = m.rows
    if k < 1 or k > n:
        raise ParameterError(f"k={k} must lie in [1, {n}].")
    dense = m.csr.toarray()
    if k > np.unique(dense, axis=0).shape[0]:
        raise ParameterError(f"k={k} exceeds the number of distinct rows.")
    x = normalize(dense)
    rng = make_rng(seed)
    centers = _plus_plus_centers(x, k, rng)
    assign = np.full(n, -1, dtype=np.int64)
    for iteration in range(MAX_ITERATIONS):
        dist = cosine_distances(x, centers)
        new_assign = np.argmin(dist, axis=1)
        for cluster in range(k):
            if np.any(new_assign == cluster):
                continue
            own = dist[np.arange(n), new_assign]
            sizes = np.bincount(new_assign, minlength=k)
            own[sizes[new_assign] <= 1] = -np.inf
            far = int(np.argmax(own))
            new_assign[far] = cluster
            centers[cluster] = x[far]
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for cluster in range(k):
            centers[cluster] = x[assign == cluster].mean(axis=0)
    _LOGGER.debug("k-means with k=%d stopped after %d iterations", k, iteration + 1)
    return _relabel(assign)
