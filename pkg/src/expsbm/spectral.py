"""Spectral initialisation from total interaction durations."""
from __future__ import annotations

import numpy as np
from scipy.linalg import eigh

from . import _rng
from .timeline import NetworkData, PairStatsMatrix

DEGREE_FLOOR = 1e-12


def total_interaction_matrix(network) -> np.ndarray:
    """Total time spent interacting, per pair. Symmetric for undirected data."""
    stats = network.stats_matrix() if isinstance(network, NetworkData) else network
    if not isinstance(stats, PairStatsMatrix):
        raise TypeError("expected NetworkData or PairStatsMatrix")
    M = np.array(stats.x_plus, dtype=float)
    if not stats.directed:
        M = M + M.T
    return M


def affinity(M) -> np.ndarray:
    """``log(1 + M + M^T) / 2`` on pairs that ever interacted, zero elsewhere."""
    M = np.asarray(M, dtype=float)
    total = M + M.T
    S = np.zeros_like(total)
    pos = total > 0
    S[pos] = np.log1p(total[pos]) / 2
    np.fill_diagonal(S, 0.0)
    return S


def _kmeans_pp(X, K, rng):
    n = X.shape[0]
    centers = np.empty((K, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for k in range(1, K):
        total = d2.sum()
        idx = rng.choice(n, p=d2 / total) if total > 0 else rng.integers(n)
        centers[k] = X[idx]
        d2 = np.minimum(d2, ((X - centers[k]) ** 2).sum(axis=1))
    return centers


def _assign(X, centers):
    d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    return labels, float(d2[np.arange(X.shape[0]), labels].sum())


def lloyd(X, centers, tol=1e-9, max_iter=300):
    """Lloyd iterations from the given centres.

    Returns ``(labels, centers, inertia_history)``; a centre that loses all
    its points stays where it was.
    """
    centers = np.array(centers, dtype=float)
    history = []
    for _ in range(max_iter):
        labels, inertia = _assign(X, centers)
        history.append(inertia)
        new = centers.copy()
        for k in range(centers.shape[0]):
            members = labels == k
            if members.any():
                new[k] = X[members].mean(axis=0)
        shift = float(np.abs(new - centers).max())
        centers = new
        if shift < tol:
            break
    labels, inertia = _assign(X, centers)
    history.append(inertia)
    return labels, centers, history


def kmeans(X, K, rng, n_init=10, tol=1e-9, max_iter=300):
    """k-means with k-means++ seeding; the restart with lowest inertia wins."""
    X = np.asarray(X, dtype=float)
    rng = _rng.make_rng(rng)
    best = None
    for _ in range(n_init):
        labels, centers, history = lloyd(X, _kmeans_pp(X, K, rng), tol, max_iter)
        if best is None or history[-1] < best[2]:
            best = (labels, centers, history[-1])
    return best[0], best[1], best[2]


def spectral_embedding(S, K) -> np.ndarray:
    """Row-normalised eigenvectors of the K smallest eigenvalues of the normalised Laplacian."""
    S = np.asarray(S, dtype=float)
    N = S.shape[0]
    d = np.maximum(S.sum(axis=1), DEGREE_FLOOR)
    inv_sqrt = 1.0 / np.sqrt(d)
    L = np.eye(N) - inv_sqrt[:, None] * S * inv_sqrt[None, :]
    L = 0.5 * (L + L.T)
    _, U = eigh(L, subset_by_index=[0, K - 1])
    norms = np.linalg.norm(U, axis=1)
    nz = norms > 0
    U[nz] /= norms[nz, None]
    return U


def spectral_kmeans(S, K: int, rng, n_init: int = 10) -> np.ndarray:
    """Spectral clustering labels (0-based) of an affinity matrix."""
    N = np.asarray(S).shape[0]
    if K < 1 or K > N:
        raise ValueError(f"K={K} must lie in 1..N={N}")
    if K == 1:
        return np.zeros(N, dtype=int)
    U = spectral_embedding(S, K)
    labels, _, _ = kmeans(U, K, rng, n_init=n_init)
    return labels


def spectral_init(network, K: int, seed=0) -> np.ndarray:
    """Initial allocation used by :func:`expsbm.vem.fit`."""
    S = affinity(total_interaction_matrix(network))
    return spectral_kmeans(S, K, _rng.make_rng(seed, _rng.STREAM_INIT, 1))
