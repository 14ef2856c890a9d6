"""Synthetic networks drawn from the exponential blockmodel."""
from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from . import _rng
from .errors import ValidationError
from .timeline import EdgeTimeline, NetworkData

MAX_SEGMENTS = 10**8


@dataclass(frozen=True)
class GeneratorConfig:
    N: int
    K: int
    T: float
    lam: np.ndarray
    mu: np.ndarray
    nu: np.ndarray
    seed: int = 0
    directed: bool = True

    def __post_init__(self):
        lam = np.atleast_1d(np.asarray(self.lam, dtype=float))
        mu = np.atleast_2d(np.asarray(self.mu, dtype=float))
        nu = np.atleast_2d(np.asarray(self.nu, dtype=float))
        K = self.K
        if lam.shape != (K,) or mu.shape != (K, K) or nu.shape != (K, K):
            raise ValidationError(f"parameter shapes do not match K={K}")
        if np.any(lam < 0) or abs(lam.sum() - 1) > 1e-9:
            raise ValidationError("mixing proportions must lie on the simplex")
        if not (np.all(mu > 0) and np.all(nu > 0)):
            raise ValidationError("all rates must be strictly positive")
        if not self.directed and not (np.allclose(mu, mu.T) and np.allclose(nu, nu.T)):
            raise ValidationError("undirected networks need symmetric rate matrices")
        if self.N < 2 or not self.T > 0:
            raise ValidationError("need N >= 2 and T > 0")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "nu", nu)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("lam", "mu", "nu"):
            d[key] = np.asarray(d[key]).tolist()
        return d


def sample_alternating_lengths(mu: float, nu: float, initial_state: int, T: float, rng) -> EdgeTimeline:
    """Alternating exponential segments, the last one cut so they sum to ``T``."""
    if not (mu > 0 and nu > 0 and T > 0):
        raise ValueError("rates and T must be positive")
    rng = _rng.make_rng(rng)
    # rate per segment alternates, starting with the initial state
    first, second = (mu, nu) if initial_state == 1 else (nu, mu)
    mean_len = 0.5 * (1.0 / mu + 1.0 / nu)
    chunk = int(min(1.25 * T / mean_len + 8, 1e6))
    pieces = []
    drawn = 0
    total = 0.0
    while True:
        e = rng.standard_exponential(chunk)
        rates = np.where((np.arange(drawn, drawn + chunk) % 2) == 0, first, second)
        x = e / rates
        csum = total + np.cumsum(x)
        hit = np.searchsorted(csum, T, side="left")
        if hit < chunk:
            x = x[: hit + 1].copy()
            x[-1] = T - (csum[hit - 1] if hit > 0 else total)
            pieces.append(x)
            break
        pieces.append(x)
        total = float(csum[-1])
        drawn += chunk
        if drawn > MAX_SEGMENTS:
            raise RuntimeError("segment cap exceeded while sampling a timeline")
    return EdgeTimeline(int(initial_state), np.concatenate(pieces))


def sample_network(config: GeneratorConfig) -> tuple[NetworkData, np.ndarray]:
    """Draw allocations, initial states and all pair timelines.

    Returns the network and the 0-based true allocation vector.
    """
    alloc_rng = _rng.make_rng(config.seed, _rng.STREAM_ALLOC)
    z = alloc_rng.choice(config.K, size=config.N, p=config.lam)
    network = NetworkData(config.N, config.T, config.directed, {})
    timelines = {}
    for idx, (i, j) in enumerate(network.pairs()):
        rng = _rng.make_rng(config.seed, _rng.STREAM_PAIRS, idx)
        a1 = int(rng.integers(0, 2))
        g, h = z[i], z[j]
        timelines[(i, j)] = sample_alternating_lengths(config.mu[g, h], config.nu[g, h], a1, config.T, rng)
    network.timelines = timelines
    return network, z


def sample_study1_params(K: int, xi: float, rng):
    """Mixing proportions from a symmetric Dirichlet(0.5) and Gamma(xi, xi) rates.

    The rates have mean 1 and variance ``1 / xi``; large ``xi`` makes the
    blocks hard to tell apart.
    """
    if not xi > 0:
        raise ValueError(f"xi must be positive, got {xi!r}")
    rng = _rng.make_rng(rng)
    lam = rng.dirichlet(np.full(K, 0.5))
    rates = rng.gamma(shape=xi, scale=1.0 / xi, size=(2, K, K))
    return lam, rates[0], rates[1]


def make_community_params(K: int, epsilon: float, theta: float):
    """Rates favouring long, frequent within-group interactions.

    ``mu`` has ``epsilon`` on the diagonal and ``theta`` elsewhere, ``nu``
    the other way round.
    """
    if not (epsilon > 0 and theta > 0):
        raise ValueError("epsilon and theta must be positive")
    eye = np.eye(K, dtype=bool)
    mu = np.where(eye, epsilon, theta).astype(float)
    nu = np.where(eye, theta, epsilon).astype(float)
    return mu, nu
