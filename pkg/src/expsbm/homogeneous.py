"""Closed-form fit of the single-block (homogeneous) model."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .timeline import PairStatsMatrix, stats_from_pairs


@dataclass(frozen=True)
class HomogeneousFit:
    mu_hat: float
    nu_hat: float
    loglik: float
    mu_degenerate: bool = False
    nu_degenerate: bool = False

    @property
    def degenerate(self) -> bool:
        return self.mu_degenerate or self.nu_degenerate


def homogeneous_loglik(totals, mu: float, nu: float) -> float:
    """Log-likelihood from pooled totals ``(L_mu, L_nu, eta, zeta)``.

    Uses ``0 * log 0 = 0`` so boundary rates of zero are allowed when the
    matching count is zero.
    """
    l_mu, l_nu, eta, zeta = totals
    return float(xlogy(l_mu, mu) + xlogy(l_nu, nu) - mu * eta - nu * zeta)


def pooled_totals(stats) -> tuple[float, float, float, float]:
    """Return ``(L_mu, L_nu, eta, zeta)`` summed over all stored pairs."""
    if isinstance(stats, PairStatsMatrix):
        return (float(stats.a_plus.sum()), float(stats.a_minus.sum()),
                float(stats.x_plus.sum()), float(stats.x_minus.sum()))
    arr = stats_from_pairs(stats)
    if arr.shape[0] == 0:
        raise ValueError("at least one pair is required")
    a_plus, a_minus, x_plus, x_minus = arr.sum(axis=0)
    return float(a_plus), float(a_minus), float(x_plus), float(x_minus)


def _ratio(count, exposure):
    if exposure > 0:
        return count / exposure, count == 0
    if count > 0:
        raise ValueError("positive segment count with zero exposure")
    return 0.0, True


def fit_homogeneous(stats) -> HomogeneousFit:
    """Maximum likelihood rates of the homogeneous model.

    ``stats`` is either an iterable of :class:`~expsbm.timeline.PairStats`
    or a :class:`~expsbm.timeline.PairStatsMatrix`. A rate whose embedded
    count is zero is reported as ``0.0`` with its degenerate flag set.
    """
    totals = pooled_totals(stats)
    l_mu, l_nu, eta, zeta = totals
    mu, mu_deg = _ratio(l_mu, eta)
    nu, nu_deg = _ratio(l_nu, zeta)
    return HomogeneousFit(float(mu), float(nu), homogeneous_loglik(totals, mu, nu),
                          bool(mu_deg), bool(nu_deg))


def profile_grid(stats, mu_grid, nu_grid) -> np.ndarray:
    """Log-likelihood over a rate grid; rows index ``mu_grid``."""
    l_mu, l_nu, eta, zeta = pooled_totals(stats)
    mu = np.asarray(mu_grid, dtype=float)[:, None]
    nu = np.asarray(nu_grid, dtype=float)[None, :]
    return xlogy(l_mu, mu) + xlogy(l_nu, nu) - mu * eta - nu * zeta
