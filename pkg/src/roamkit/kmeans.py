"""Seeded Lloyd's K-means with k-means++ initialization.

Written out rather than delegated so the fitting contract is exact:
bit-identical results for identical inputs and seed, fixed restart
count, and farthest-point repair for empty clusters.
"""

import numpy as np


def kmeans_fit(X, k, seed, n_restarts=20, max_iter=300, tol=1e-8):
    """Cluster rows of ``X`` into ``k`` groups.

    Returns ``(centers, labels, inertia)`` of the best restart (lowest
    within-cluster sum of squares; ties keep the earliest restart).
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be 2-D")
    n = X.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < k:
        raise ValueError(f"needs at least k={k} samples, got {n}")

    rng = np.random.default_rng(int(seed))
    best = None
    for _ in range(n_restarts):
        centers = _kmeans_plus_plus(X, k, rng)
        centers, labels, inertia = _lloyd(X, centers, max_iter, tol)
        if best is None or inertia < best[2]:
            best = (centers, labels, inertia)
    return best


def _kmeans_plus_plus(X, k, rng):
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    closest_sq = _sq_distances(X, centers[0])
    for i in range(1, k):
        total = closest_sq.sum()
        if total <= 0:
            # All remaining mass on duplicate points: fall back to uniform.
            index = rng.integers(n)
        else:
            index = int(np.searchsorted(np.cumsum(closest_sq), rng.random() * total))
            index = min(index, n - 1)
        centers[i] = X[index]
        closest_sq = np.minimum(closest_sq, _sq_distances(X, centers[i]))
    return centers


def _lloyd(X, centers, max_iter, tol):
    k = centers.shape[0]
    labels = None
    for _ in range(max_iter):
        distances = _pairwise_sq(X, centers)
        labels = np.argmin(distances, axis=1)
        new_centers = centers.copy()
        for j in range(k):
            members = labels == j
            if np.any(members):
                new_centers[j] = X[members].mean(axis=0)
            else:
                # Standard repair: reseed at the point farthest from its
                # assigned center, then reassign.
                farthest = int(np.argmax(np.min(distances, axis=1)))
                new_centers[j] = X[farthest]
                distances = _pairwise_sq(X, new_centers)
                labels = np.argmin(distances, axis=1)
        shift = np.max(np.linalg.norm(new_centers - centers, axis=1))
        centers = new_centers
        if shift < tol:
            break
    distances = _pairwise_sq(X, centers)
    labels = np.argmin(distances, axis=1)
    inertia = float(np.sum(distances[np.arange(X.shape[0]), labels]))
    return centers, labels, inertia


def _sq_distances(X, center):
    diff = X - center
    return np.einsum("ij,ij->i", diff, diff)


def _pairwise_sq(X, centers):
    return (
        np.einsum("ij,ij->i", X, X)[:, None]
        - 2.0 * X @ centers.T
        + np.einsum("ij,ij->i", centers, centers)[None, :]
    )
