"""Replicated simulation studies: clustering recovery and model choice.

Replicate ``r`` of a study derives every random stream from ``(seed, r)``,
so replicate ``r`` sees the same allocations under every setting of the
swept parameter.
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import _rng
from .metrics import adjusted_rand_index
from .sampler import GeneratorConfig, make_community_params, sample_network, sample_study1_params
from .selection import select_k
from .vem import FitOptions, fit

STUDY1_XIS = (0.5, 1.0, 5.0, 25.0, 50.0)
STUDY2_KS = (1, 2, 3, 4, 5)
STUDY3_TS = (0.1, 0.25, 0.5, 1.0, 10.0)


def replicate_seed(seed: int, r: int) -> int:
    """64-bit seed of replicate ``r``."""
    hi, lo = _rng.seed_sequence(seed, _rng.STREAM_REPLICATE, r).generate_state(2)
    return (int(hi) << 32) | int(lo)


def _map(func, tasks, jobs):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(func, tasks))
    return [func(t) for t in tasks]


def _community_config(N, K, T, epsilon, theta, rep_seed):
    mu, nu = make_community_params(K, epsilon, theta)
    return GeneratorConfig(N, K, T, np.full(K, 1.0 / K), mu, nu, seed=rep_seed)


def _fit_replicate(task):
    config, setting, r, restarts = task
    network, z = sample_network(config)
    t0 = time.perf_counter()
    res = fit(network, config.K, FitOptions(seed=config.seed, n_random_starts=restarts))
    seconds = time.perf_counter() - t0
    return {
        **setting,
        "replicate": r,
        "ari": adjusted_rand_index(z, res.z_hat),
        "seconds": seconds,
        "n_iter": res.n_iter,
        "converged": res.converged,
        "occupied_groups": int(np.unique(z).size),
    }


def summarize(rows, key):
    """Per-setting summary of ARI values."""
    out = []
    for value in sorted({row[key] for row in rows}):
        aris = np.array([row["ari"] for row in rows if row[key] == value])
        out.append({key: value, "replicates": int(aris.size), "mean_ari": float(aris.mean()),
                    "median_ari": float(np.median(aris)), "min_ari": float(aris.min()),
                    "share_perfect": float(np.mean(aris >= 1.0 - 1e-12))})
    return out


def study1(replicates=20, xis=STUDY1_XIS, N=100, K=3, T=10.0, seed=0, restarts=10, jobs=1):
    """Recovery with Dirichlet(0.5) proportions and Gamma(xi, xi) rates."""
    tasks = []
    for xi in xis:
        for r in range(replicates):
            rep = replicate_seed(seed, r)
            lam, mu, nu = sample_study1_params(K, xi, _rng.make_rng(rep, _rng.STREAM_PARAMS))
            config = GeneratorConfig(N, K, T, lam, mu, nu, seed=rep)
            tasks.append((config, {"xi": float(xi)}, r, restarts))
    rows = _map(_fit_replicate, tasks, jobs)
    return {"study": 1, "rows": rows, "summary": summarize(rows, "xi")}


def study3(replicates=20, Ts=STUDY3_TS, N=100, K=3, epsilon=0.5, theta=5.0, seed=0, restarts=10, jobs=1):
    """Recovery of community-structured blocks as the window ``T`` shrinks."""
    tasks = []
    for T in Ts:
        for r in range(replicates):
            config = _community_config(N, K, float(T), epsilon, theta, replicate_seed(seed, r))
            tasks.append((config, {"T": float(T)}, r, restarts))
    rows = _map(_fit_replicate, tasks, jobs)
    return {"study": 3, "rows": rows, "summary": summarize(rows, "T")}


def _select_replicate(task):
    config, r, k_min, k_max, restarts = task
    network, z = sample_network(config)
    t0 = time.perf_counter()
    report = select_k(network, k_min, k_max, FitOptions(seed=config.seed, n_random_starts=restarts))
    return {
        "true_K": config.K,
        "replicate": r,
        "K_hat": report.best_K,
        "ari": adjusted_rand_index(z, report.best.fit.z_hat),
        "seconds": time.perf_counter() - t0,
        "icl": [rec.icl for rec in report.records],
    }


def study2(replicates=20, true_ks=STUDY2_KS, k_min=1, k_max=10, N=100, T=10.0,
           epsilon=0.5, theta=5.0, seed=0, restarts=0, jobs=1):
    """Model choice by ICL on community-structured networks."""
    tasks = []
    for K in true_ks:
        for r in range(replicates):
            config = _community_config(N, K, T, epsilon, theta, replicate_seed(seed, r))
            tasks.append((config, r, k_min, k_max, restarts))
    rows = _map(_select_replicate, tasks, jobs)
    confusion = []
    for K in true_ks:
        picks = [row["K_hat"] for row in rows if row["true_K"] == K]
        counts = np.bincount(picks, minlength=k_max + 1)[k_min:k_max + 1]
        confusion.append({"true_K": K, "proportions": (counts / len(picks)).tolist(),
                          "correct": float(np.mean(np.array(picks) == K))})
    return {"study": 2, "rows": rows, "summary": summarize(rows, "true_K"), "confusion": confusion,
            "k_range": [k_min, k_max]}
