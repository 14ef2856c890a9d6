"""Variational EM for the exponential stochastic blockmodel.

The variational distribution is a product of per-node categoricals with
responsibilities ``tau`` (N x K). Every update is closed form:

* rates: ``mu[g, h] = Lbar_mu[g, h] / eta_bar[g, h]`` (likewise ``nu``), where
  the barred quantities are tau-weighted sums of pair statistics;
* mixing proportions: column means of ``tau``;
* responsibilities: a softmax of per-node scores, iterated to a fixed point
  with rows refreshed in place.

Undirected networks are handled by symmetrising the stored statistics and
halving the data term, so every unordered pair counts once and the fitted
rate matrices are symmetric.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numba
import numpy as np
from scipy.special import xlogy

from . import _rng
from .errors import NumericalError
from .homogeneous import fit_homogeneous
from .timeline import NetworkData, PairStatsMatrix

logger = logging.getLogger(__name__)

RATE_FLOOR = 1e-10


@dataclass
class BlockParams:
    lam: np.ndarray
    mu: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=float).reshape(-1)
        self.mu = np.atleast_2d(np.asarray(self.mu, dtype=float))
        self.nu = np.atleast_2d(np.asarray(self.nu, dtype=float))

    @property
    def K(self) -> int:
        return self.lam.size

    def permuted(self, perm) -> "BlockParams":
        perm = np.asarray(perm)
        return BlockParams(self.lam[perm], self.mu[np.ix_(perm, perm)], self.nu[np.ix_(perm, perm)])


@dataclass
class FitOptions:
    """Settings of a single variational EM run.

    ``init`` is ``"spectral"``, ``"random"``, an allocation vector (0-based
    labels) or an ``N x K`` responsibility matrix. ``n_random_starts`` adds
    that many runs from random responsibilities; the run with the highest
    final ELBO is returned.
    """

    init: object = "spectral"
    tol: float = 1e-8
    max_iter: int = 500
    seed: int = 0
    rate_floor: float = RATE_FLOOR
    inner_tol: float = 1e-6
    inner_max_iter: int = 50
    n_random_starts: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        if not isinstance(self.init, str):
            d["init"] = "user"
        return d


@dataclass
class FitResult:
    params: BlockParams
    tau: np.ndarray
    z_hat: np.ndarray
    elbo_trace: list
    converged: bool
    n_iter: int
    options: FitOptions = field(default_factory=FitOptions)
    notes: list = field(default_factory=list)
    icl: float | None = None

    @property
    def K(self) -> int:
        return self.params.K

    @property
    def elbo(self) -> float:
        return self.elbo_trace[-1]

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "K": self.K,
            "lambda": self.params.lam.tolist(),
            "mu": self.params.mu.tolist(),
            "nu": self.params.nu.tolist(),
            "tau": self.tau.tolist(),
            "z_hat": (self.z_hat + 1).tolist(),
            "elbo_trace": [float(v) for v in self.elbo_trace],
            "icl": self.icl,
            "converged": bool(self.converged),
            "n_iter": int(self.n_iter),
            "seed": self.options.seed,
            "options": self.options.to_dict(),
            "notes": list(self.notes),
        }


class StackedStats:
    """Pair statistics stacked as a ``(4, N, N)`` array in ordered-pair form.

    Channel order is ``a_plus, a_minus, x_plus, x_minus``. ``weight`` is 1 for
    directed data and 1/2 for undirected data, whose statistics are
    symmetrised so each unordered pair appears twice.
    """

    def __init__(self, stats: PairStatsMatrix):
        S = np.stack([stats.a_plus, stats.a_minus, stats.x_plus, stats.x_minus]).astype(float)
        if stats.directed:
            self.weight = 1.0
        else:
            S = S + S.transpose(0, 2, 1)
            self.weight = 0.5
        self.S = S
        self.directed = stats.directed
        self.N = S.shape[1]
        self.source = stats
        self._rows = None

    @property
    def rows(self) -> np.ndarray:
        """Per-node slices used by the E-step: ``(N, C, N)``.

        For directed data a node's outgoing rows are followed by its incoming
        columns (C = 8); undirected data only needs one copy (C = 4).
        """
        if self._rows is None:
            out = self.S.transpose(1, 0, 2)
            if self.directed:
                self._rows = np.ascontiguousarray(np.concatenate([out, self.S.transpose(2, 0, 1)], axis=1))
            else:
                self._rows = np.ascontiguousarray(out)
        return self._rows

    def expected(self, tau: np.ndarray) -> np.ndarray:
        """Tau-weighted block sums ``(4, K, K)``: Lbar_mu, Lbar_nu, eta_bar, zeta_bar."""
        return tau.T @ (self.S @ tau)


def _stacked(stats) -> StackedStats:
    if isinstance(stats, StackedStats):
        return stats
    if isinstance(stats, NetworkData):
        stats = stats.stats_matrix()
    return StackedStats(stats)


def omega(stats, mu_gh: float, nu_gh: float) -> float:
    """Log-density score of one pair under the rates of block pair ``(g, h)``."""
    if not (mu_gh > 0 and nu_gh > 0):
        raise ValueError(f"rates must be positive, got mu={mu_gh!r}, nu={nu_gh!r}")
    a_plus, a_minus, x_plus, x_minus = stats
    return a_plus * np.log(mu_gh) + a_minus * np.log(nu_gh) - x_plus * mu_gh - x_minus * nu_gh


def _check_tau(tau, N, K):
    tau = np.asarray(tau, dtype=float)
    if tau.shape != (N, K):
        raise ValueError(f"tau has shape {tau.shape}, expected {(N, K)}")
    return tau


def _log_lambda(lam):
    with np.errstate(divide="ignore"):
        return np.log(lam)


def elbo_terms(stats, params: BlockParams, tau) -> tuple[float, float, float]:
    """ELBO split into (data term, mixing term, entropy)."""
    st = _stacked(stats)
    tau = _check_tau(tau, st.N, params.K)
    E = st.expected(tau)
    data = st.weight * float(np.sum(xlogy(E[0], params.mu) + xlogy(E[1], params.nu)
                                    - params.mu * E[2] - params.nu * E[3]))
    mass = tau.sum(axis=0)
    if np.any((params.lam <= 0) & (mass > 0)):
        mixing = -np.inf
    else:
        mixing = float(np.sum(xlogy(mass, params.lam)))
    entropy = -float(np.sum(xlogy(tau, tau)))
    return data, mixing, entropy


def elbo(stats, params: BlockParams, tau) -> float:
    """Evidence lower bound; ``-inf`` if tau puts mass on a group with zero weight."""
    data, mixing, entropy = elbo_terms(stats, params, tau)
    return data + mixing + entropy


def update_lambda(tau) -> np.ndarray:
    return np.asarray(tau, dtype=float).mean(axis=0)


def update_rates(stats, tau, previous: BlockParams | None = None, rate_floor: float = RATE_FLOOR):
    """Closed-form rate maximisers given tau.

    Blocks with zero expected exposure keep the rate from ``previous``; if
    there is none, the pooled homogeneous rate is used. Results are
    clipped below at ``rate_floor``.
    """
    st = _stacked(stats)
    tau = np.asarray(tau, dtype=float)
    K = tau.shape[1]
    E = st.expected(tau)
    if previous is not None:
        prev_mu, prev_nu = previous.mu, previous.nu
    else:
        pooled = fit_homogeneous(st.source)
        prev_mu = np.full((K, K), max(pooled.mu_hat, rate_floor))
        prev_nu = np.full((K, K), max(pooled.nu_hat, rate_floor))
    with np.errstate(divide="ignore", invalid="ignore"):
        mu = np.where(E[2] > 0, E[0] / E[2], prev_mu)
        nu = np.where(E[3] > 0, E[1] / E[3], prev_nu)
    return np.maximum(mu, rate_floor), np.maximum(nu, rate_floor)


def _score_matrix(params: BlockParams, directed: bool) -> np.ndarray:
    K = params.K
    theta = np.stack([np.log(params.mu), np.log(params.nu), -params.mu, -params.nu])
    out = theta.transpose(0, 2, 1).reshape(4 * K, K)
    into = theta.reshape(4 * K, K)
    if not directed:
        # symmetric statistics: incoming rows equal outgoing rows
        return 0.5 * (out + into)
    return np.vstack([out, into])


def tau_scores(stats, params: BlockParams, tau, node: int) -> np.ndarray:
    """Unnormalised log-responsibilities of ``node`` given all other rows."""
    st = _stacked(stats)
    phi = _score_matrix(params, st.directed)
    return (st.rows[node] @ tau).reshape(-1) @ phi + _log_lambda(params.lam)


@numba.njit(cache=True)
def _gauss_seidel_pass(rows, tau, phi, log_lam, order):
    """One in-place sweep over ``order``; returns (max row change, bad node or -1)."""
    C, N = rows.shape[1], rows.shape[2]
    K = tau.shape[1]
    scores = np.empty(K)
    new = np.empty(K)
    agg = np.empty(C * K)
    delta = 0.0
    for ell in order:
        r = rows[ell]
        for c in range(C):
            for k in range(K):
                acc = 0.0
                for j in range(N):
                    acc += r[c, j] * tau[j, k]
                agg[c * K + k] = acc
        m = -np.inf
        for k in range(K):
            acc = log_lam[k]
            for q in range(C * K):
                acc += agg[q] * phi[q, k]
            if np.isnan(acc):
                return delta, ell
            scores[k] = acc
            if acc > m:
                m = acc
        if not np.isfinite(m):
            return delta, ell
        total = 0.0
        for k in range(K):
            new[k] = np.exp(scores[k] - m)
            total += new[k]
        for k in range(K):
            v = new[k] / total
            d = abs(v - tau[ell, k])
            if d > delta:
                delta = d
            tau[ell, k] = v
    return delta, -1


def update_tau(stats, params: BlockParams, tau_in, inner_tol: float = 1e-6,
               inner_max_iter: int = 50, nodes=None) -> np.ndarray:
    """Fixed-point E-step.

    Rows are refreshed one node at a time, in index order, each using the
    latest values of the others; passes repeat until the largest change in
    a pass drops below ``inner_tol``. ``nodes`` restricts the update to a
    subset of rows.
    """
    st = _stacked(stats)
    tau = np.ascontiguousarray(_check_tau(tau_in, st.N, params.K), dtype=float).copy()
    phi = np.ascontiguousarray(_score_matrix(params, st.directed))
    log_lam = _log_lambda(params.lam)
    order = np.arange(st.N) if nodes is None else np.asarray(nodes, dtype=np.int64).reshape(-1)
    for _ in range(inner_max_iter):
        delta, bad = _gauss_seidel_pass(st.rows, tau, phi, log_lam, order)
        if bad >= 0:
            raise NumericalError(f"E-step scores of node {bad} are NaN or all infinite")
        if delta < inner_tol:
            break
    return tau


def map_partition(tau) -> np.ndarray:
    """Per-row argmax (0-based); ties go to the lowest group index."""
    return np.argmax(np.asarray(tau), axis=1)


def hard_tau(z, K: int) -> np.ndarray:
    z = np.asarray(z, dtype=int)
    tau = np.zeros((z.size, K))
    tau[np.arange(z.size), z] = 1.0
    return tau


def random_tau(N: int, K: int, seed, start: int = 0) -> np.ndarray:
    """Dirichlet(1) rows from the stream ``(seed, init, 0, start)``."""
    return _rng.make_rng(seed, _rng.STREAM_INIT, 0, start).dirichlet(np.ones(K), size=N)


def initial_tau(st: StackedStats, K: int, options: FitOptions) -> np.ndarray:
    init = options.init
    N = st.N
    if isinstance(init, str):
        if init == "spectral":
            from .spectral import spectral_init
            return hard_tau(spectral_init(st.source, K, seed=options.seed), K)
        if init == "random":
            return random_tau(N, K, options.seed)
        raise ValueError(f"unknown init mode {init!r}")
    arr = np.asarray(init)
    if arr.ndim == 1:
        if arr.shape != (N,) or arr.min() < 0 or arr.max() >= K:
            raise ValueError("initial allocation must hold N labels in 0..K-1")
        return hard_tau(arr, K)
    tau = _check_tau(arr, N, K)
    if np.any(tau < 0) or not np.allclose(tau.sum(axis=1), 1.0):
        raise ValueError("initial tau rows must lie on the simplex")
    return tau.copy()


def m_step(st, tau, previous=None, rate_floor=RATE_FLOOR) -> BlockParams:
    mu, nu = update_rates(st, tau, previous, rate_floor)
    return BlockParams(update_lambda(tau), mu, nu)


def fit(network, K: int, options: FitOptions | None = None, **kwargs) -> FitResult:
    """Run variational EM for a fixed number of groups.

    Each iteration applies the M-step, the E-step and records the ELBO;
    iterations stop once the relative ELBO change drops below
    ``options.tol``. A last M-step makes the returned parameters optimal
    for the returned responsibilities.

    Keyword arguments override fields of ``options``.
    """
    options = FitOptions(**{**asdict(options or FitOptions()), **kwargs})
    st = _stacked(network)
    N = st.N
    if K < 1:
        raise ValueError("K must be at least 1")
    if K > N:
        raise ValueError(f"K={K} exceeds the number of nodes N={N}")

    best = _run(st, initial_tau(st, K, options), options)
    for start in range(1, options.n_random_starts + 1):
        other = _run(st, random_tau(N, K, options.seed, start), options)
        if other.elbo > best.elbo:
            best = other
    return best


def _run(st: StackedStats, tau, options: FitOptions) -> FitResult:
    params = None
    trace: list[float] = []
    notes: list[str] = []
    converged = False
    n_iter = 0
    for n_iter in range(1, options.max_iter + 1):
        params = m_step(st, tau, params, options.rate_floor)
        tau_new = update_tau(st, params, tau, options.inner_tol, options.inner_max_iter)
        value = elbo(st, params, tau_new)
        if not np.isfinite(value):
            raise NumericalError(f"non-finite ELBO ({value}) at iteration {n_iter}")
        if trace and value < trace[-1] - 1e-8 * abs(trace[-1]):
            notes.append("fixed-point truncation: ELBO decreased, E-step reverted")
            logger.warning("ELBO decreased at iteration %d; keeping previous tau", n_iter)
            converged = True
            break
        tau = tau_new
        trace.append(value)
        if len(trace) > 1 and abs(trace[-1] - trace[-2]) <= options.tol * abs(trace[-2]):
            converged = True
            break

    params = m_step(st, tau, params, options.rate_floor)
    final = elbo(st, params, tau)
    if not np.isfinite(final):
        raise NumericalError(f"non-finite ELBO ({final}) after the final M-step")
    trace.append(final)
    return FitResult(params, tau, map_partition(tau), trace, converged, n_iter, options, notes)
