"""Choosing the number of groups with the integrated completed likelihood."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from .vem import FitOptions, FitResult, StackedStats, _stacked, fit, hard_tau


def completed_loglik(stats, z_hat, K: int | None = None):
    """Completed log-likelihood of a hard partition at its own MLE.

    Block rates and group proportions are re-estimated from the partition;
    blocks without segments contribute nothing (``0 log 0 = 0``) and get a
    rate of 0. Returns ``(value, lambda_hat, mu_hat, nu_hat)``.
    """
    st = _stacked(stats)
    z = np.asarray(z_hat, dtype=int).reshape(-1)
    if z.size != st.N:
        raise ValueError(f"partition has {z.size} labels, expected {st.N}")
    K = int(z.max()) + 1 if K is None else int(K)
    tau = hard_tau(z, K)
    E = st.expected(tau)
    with np.errstate(divide="ignore", invalid="ignore"):
        mu = np.where(E[2] > 0, E[0] / E[2], 0.0)
        nu = np.where(E[3] > 0, E[1] / E[3], 0.0)
    data = st.weight * float(np.sum(xlogy(E[0], mu) + xlogy(E[1], nu) - mu * E[2] - nu * E[3]))
    lam = np.bincount(z, minlength=K) / z.size
    value = data + float(np.sum(np.log(lam[z])))
    return value, lam, mu, nu


def icl(completed_value: float, K: int, N: int, total_segments: int) -> float:
    """``completed - K^2 log(total_segments) - (K - 1)/2 log N``."""
    if total_segments <= 0:
        raise ValueError("total_segments must be positive")
    return completed_value - K * K * math.log(total_segments) - 0.5 * (K - 1) * math.log(N)


@dataclass
class SelectionRecord:
    K: int
    fit: FitResult
    completed_loglik: float
    icl: float

    @property
    def elbo(self) -> float:
        return self.fit.elbo


@dataclass
class SelectionReport:
    records: list = field(default_factory=list)
    best_K: int | None = None

    @property
    def best(self) -> SelectionRecord:
        return next(r for r in self.records if r.K == self.best_K)

    def to_dict(self, include_fits: bool = False) -> dict:
        rows = []
        for r in self.records:
            row = {"K": r.K, "elbo": r.elbo, "completed_loglik": r.completed_loglik, "icl": r.icl,
                   "converged": r.fit.converged, "n_iter": r.fit.n_iter}
            if include_fits:
                row["fit"] = r.fit.to_dict()
            rows.append(row)
        return {"schema": 1, "best_K": self.best_K, "records": rows}

    def table(self) -> str:
        lines = [f"{'K':>3} {'ELBO':>16} {'completed':>16} {'ICL':>16}"]
        for r in self.records:
            mark = "  *" if r.K == self.best_K else ""
            lines.append(f"{r.K:>3} {r.elbo:>16.4f} {r.completed_loglik:>16.4f} {r.icl:>16.4f}{mark}")
        return "\n".join(lines)


def score_fit(st: StackedStats, result: FitResult) -> SelectionRecord:
    K = result.K
    value, *_ = completed_loglik(st, result.z_hat, K)
    result.icl = icl(value, K, st.N, st.source.total_segments)
    return SelectionRecord(K, result, value, result.icl)


def _fit_and_score(args):
    st, K, options = args
    return score_fit(st, fit(st, K, options))


def select_k(network, k_min: int = 1, k_max: int = 10, options: FitOptions | None = None,
             jobs: int = 1) -> SelectionReport:
    """Fit every K in ``k_min..k_max`` and keep the one with the largest ICL.

    Ties go to the smaller K. With ``jobs > 1`` the fits run in worker
    processes; the report is the same either way.
    """
    if k_min < 1 or k_max < k_min:
        raise ValueError(f"invalid K range {k_min}..{k_max}")
    st = _stacked(network)
    if k_max > st.N:
        raise ValueError(f"k_max={k_max} exceeds N={st.N}")
    options = options or FitOptions()
    tasks = [(st, K, options) for K in range(k_min, k_max + 1)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_fit_and_score, tasks))
    else:
        records = [_fit_and_score(t) for t in tasks]
    report = SelectionReport(records)
    best = records[0]
    for r in records[1:]:
        if r.icl > best.icl:
            best = r
    report.best_K = best.K
    return report
