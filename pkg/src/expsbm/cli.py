"""Command-line entry point.

Exit status is 0 on success, 1 for invalid input or usage, 2 when a fit
fails numerically.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import _rng, io, studies
from .errors import NumericalError
from .homogeneous import fit_homogeneous, pooled_totals
from .ingest import DetectionRule, build_network, detect_all, parse_contact_events
from .metrics import adjusted_rand_index
from .sampler import GeneratorConfig, make_community_params, sample_network, sample_study1_params
from .selection import score_fit, select_k
from .vem import FitOptions, StackedStats, fit

log = logging.getLogger("expsbm")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _emit(obj, out, fmt="json"):
    if fmt == "csv":
        rows = obj if isinstance(obj, list) else [obj]
        target = open(out, "w", newline="") if out else sys.stdout
        try:
            writer = csv.DictWriter(target, fieldnames=list(rows[0].keys()), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: (json.dumps(v) if isinstance(v, (list, dict)) else v) for k, v in row.items()})
        finally:
            if out:
                target.close()
        return
    if out:
        io.write_json(out, obj)
    else:
        print(json.dumps(obj, indent=2, sort_keys=True))


def _network_args(p):
    p.add_argument("--input", required=True, help="timeline or interval CSV")
    p.add_argument("--n", type=int, help="number of nodes (default: sidecar or largest id)")
    p.add_argument("--t", type=float, help="observation horizon T (default: sidecar)")
    p.add_argument("--undirected", action="store_true", default=None)


def _fit_args(p):
    p.add_argument("--init", default="spectral", help="spectral | random | file:<labels.csv>")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--inner-tol", type=float, default=1e-6)
    p.add_argument("--inner-max-iter", type=int, default=50)
    p.add_argument("--rate-floor", type=float, default=1e-10)
    p.add_argument("--restarts", type=int, default=0, help="extra random starts; best ELBO wins")
    p.add_argument("--seed", type=int, default=0)


def _load(args):
    directed = None if args.undirected is None else not args.undirected
    return io.read_network(args.input, args.n, args.t, directed)


def _options(args):
    init = args.init
    if init.startswith("file:"):
        init = io.read_labels(init[len("file:"):])
    return FitOptions(init=init, tol=args.tol, max_iter=args.max_iter, seed=args.seed,
                      rate_floor=args.rate_floor, inner_tol=args.inner_tol,
                      inner_max_iter=args.inner_max_iter, n_random_starts=args.restarts)


def cmd_simulate(args):
    if args.xi is not None:
        lam, mu, nu = sample_study1_params(args.k, args.xi, _rng.make_rng(args.seed, _rng.STREAM_PARAMS))
        if args.undirected:
            mu, nu = np.triu(mu) + np.triu(mu, 1).T, np.triu(nu) + np.triu(nu, 1).T
    else:
        mu, nu = make_community_params(args.k, args.epsilon, args.theta)
        lam = np.full(args.k, 1.0 / args.k)
    config = GeneratorConfig(args.n, args.k, args.t, lam, mu, nu, seed=args.seed, directed=not args.undirected)
    network, z = sample_network(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_timeline_csv(network, out / "timelines.csv")
    io.write_labels(out / "truth.csv", z)
    io.write_json(out / "config.json", {"schema": 1, **config.to_dict(), "xi": args.xi})
    print(f"wrote {network.n_pairs} pair timelines to {out}")


def cmd_stats(args):
    network = _load(args)
    stats = network.stats_matrix()
    hom = fit_homogeneous(stats)
    l_mu, l_nu, eta, zeta = pooled_totals(stats)
    summary = {"schema": 1, "N": network.N, "T": network.T, "directed": network.directed,
               "n_pairs": network.n_pairs, "total_segments": stats.total_segments,
               "L_mu": l_mu, "L_nu": l_nu, "eta": eta, "zeta": zeta,
               "mu_hat": hom.mu_hat, "nu_hat": hom.nu_hat, "loglik": hom.loglik,
               "mu_degenerate": hom.mu_degenerate, "nu_degenerate": hom.nu_degenerate}
    if args.pairs:
        with open(args.pairs, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["i", "j", "a_plus", "a_minus", "x_plus", "x_minus", "W"])
            for (i, j), s in stats.items():
                writer.writerow([i + 1, j + 1, s.a_plus, s.a_minus, repr(s.x_plus), repr(s.x_minus),
                                 int(stats.n_segments[i, j])])
    _emit(summary, args.out)


def cmd_fit(args):
    network = _load(args)
    st = StackedStats(network.stats_matrix())
    result = fit(st, args.k, _options(args))
    score_fit(st, result)
    if args.labels:
        io.write_labels(args.labels, result.z_hat)
    _emit(result.to_dict(), args.out)
    if args.out:
        print(f"K={result.K} ELBO={result.elbo:.6f} ICL={result.icl:.6f} iterations={result.n_iter}")


def cmd_select(args):
    network = _load(args)
    report = select_k(network, args.kmin, args.kmax, _options(args), jobs=args.jobs)
    data = report.to_dict(include_fits=args.include_fits)
    if args.out:
        if args.format == "csv":
            _emit(data["records"], args.out, "csv")
        else:
            io.write_json(args.out, data)
    print(report.table())
    print(f"best K = {report.best_K}")


def cmd_preprocess(args):
    rule = DetectionRule(args.window, args.span, args.min_contacts)
    events = parse_contact_events(args.events)
    max_time = max((float(ts[-1]) for ts in events.values()), default=0.0)
    if max_time > args.t:
        raise ValueError(f"T={args.t} is shorter than the last contact time {max_time}")
    intervals = detect_all(events, rule)
    shifted = {}
    for (i, j), ivs in intervals.items():
        if i < 1 or j < 1 or i > args.n or j > args.n:
            raise ValueError(f"node ids must lie in 1..{args.n}, got pair {(i, j)}")
        shifted[(i - 1, j - 1)] = ivs
    network = build_network(shifted, args.n, args.t, directed=args.directed)
    io.write_timeline_csv(network, args.out)
    print(f"{len(events)} pairs with contacts, {len(intervals)} with interactions; wrote {args.out}")


def cmd_ari(args):
    a = io.read_labels(args.a)
    b = io.read_labels(args.b)
    print(repr(adjusted_rand_index(a, b)))


def _study_output(result, args):
    rows = [dict(r) for r in result["rows"]]
    timing = [r.pop("seconds") for r in rows]
    if args.format == "csv":
        _emit(rows, args.out, "csv")
        return
    payload = {"schema": 1, "study": result["study"], "rows": rows, "summary": result["summary"],
               "config": {"replicates": args.replicates, "seed": args.seed, "restarts": args.restarts},
               "timing": {"seconds": timing, "mean_seconds": float(np.mean(timing)) if timing else None}}
    if "confusion" in result:
        payload["confusion"] = result["confusion"]
        payload["k_range"] = result["k_range"]
    _emit(payload, args.out)


def _floats(text):
    return tuple(float(v) for v in text.split(","))


def cmd_study1(args):
    res = studies.study1(args.replicates, _floats(args.xis), args.n, args.k, args.t, args.seed,
                         args.restarts, args.jobs)
    _study_output(res, args)
    for row in res["summary"]:
        print(f"xi={row['xi']:<6g} mean ARI={row['mean_ari']:.4f} perfect={row['share_perfect']:.2f}",
              file=sys.stderr)


def cmd_study2(args):
    ks = tuple(int(v) for v in args.ks.split(","))
    res = studies.study2(args.replicates, ks, args.kmin, args.kmax, args.n, args.t, args.epsilon,
                         args.theta, args.seed, args.restarts, args.jobs)
    _study_output(res, args)
    for row in res["confusion"]:
        print(f"K={row['true_K']} correct={row['correct']:.2f} "
              f"proportions={np.round(row['proportions'], 2).tolist()}", file=sys.stderr)


def cmd_study3(args):
    res = studies.study3(args.replicates, _floats(args.ts), args.n, args.k, args.epsilon, args.theta,
                         args.seed, args.restarts, args.jobs)
    _study_output(res, args)
    for row in res["summary"]:
        print(f"T={row['T']:<6g} mean ARI={row['mean_ari']:.4f}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="expsbm", description="Exponential stochastic blockmodel for interaction lengths")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="sample a synthetic network")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=float, default=10.0)
    p.add_argument("--xi", type=float, help="Gamma(xi, xi) rates with Dirichlet(0.5) proportions")
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--theta", type=float, default=5.0)
    p.add_argument("--undirected", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stats", help="pooled statistics and the homogeneous fit")
    _network_args(p)
    p.add_argument("--pairs", help="write per-pair statistics to this CSV")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("fit", help="variational EM for a fixed K")
    _network_args(p)
    _fit_args(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", help="fit JSON (default: stdout)")
    p.add_argument("--labels", help="write the MAP partition as i,z CSV")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("select", help="choose K by ICL")
    _network_args(p)
    _fit_args(p)
    p.add_argument("--kmin", type=int, default=1)
    p.add_argument("--kmax", type=int, default=10)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--include-fits", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("preprocess", help="sensor contacts to timelines")
    p.add_argument("--events", required=True, help="CSV with rows t,i,j")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--span", type=float, default=300.0)
    p.add_argument("--min-contacts", type=int, default=5)
    p.add_argument("--directed", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("ari", help="adjusted Rand index of two label files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(func=cmd_ari)

    for name, func in (("study1", cmd_study1), ("study2", cmd_study2), ("study3", cmd_study3)):
        p = sub.add_parser(name, help=f"replicated simulation study {name[-1]}")
        p.add_argument("--replicates", type=int, default=20)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--n", type=int, default=100)
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--out")
        p.set_defaults(func=func)
        if name == "study1":
            p.add_argument("--k", type=int, default=3)
            p.add_argument("--t", type=float, default=10.0)
            p.add_argument("--xis", default="0.5,1,5,25,50")
            p.add_argument("--restarts", type=int, default=10)
        elif name == "study2":
            p.add_argument("--ks", default="1,2,3,4,5")
            p.add_argument("--kmin", type=int, default=1)
            p.add_argument("--kmax", type=int, default=10)
            p.add_argument("--t", type=float, default=10.0)
            p.add_argument("--epsilon", type=float, default=0.5)
            p.add_argument("--theta", type=float, default=5.0)
            p.add_argument("--restarts", type=int, default=0)
        else:
            p.add_argument("--k", type=int, default=3)
            p.add_argument("--ts", default="0.1,0.25,0.5,1,10")
            p.add_argument("--epsilon", type=float, default=0.5)
            p.add_argument("--theta", type=float, default=5.0)
            p.add_argument("--restarts", type=int, default=10)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())
