"""Command-line surface: bounds evaluation, simulation, sweeps, the exact
oracle, and f(r)-curve data, with machine-readable output.

Exit codes: 0 ok, 2 usage error, 3 enumeration guard, 4 numeric
convergence failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bounds as bnd
from .decode import EnumerationGuardError, exact_pe_oracle
from .experiments import ExperimentConfig, estimate_pe, figure1_data, sweep_n
from .infotheory import GeniePattern, QuadratureError
from .model import NoiseModel, Proportions, TestDesign, round_proportions
from . import report

EXIT_OK, EXIT_USAGE, EXIT_GUARD, EXIT_NUMERIC = 0, 2, 3, 4

FIG1_PI = [0.49, 0.49] + [0.0025] * 8


class UsageError(ValueError):
    pass


def parse_pi(spec: str) -> Proportions:
    """Accepts '0.5,0.3,0.2', 'uniform:D', or 'fig1'."""
    try:
        if spec == "fig1":
            return Proportions(np.array(FIG1_PI))
        if spec.startswith("uniform:"):
            return Proportions.uniform(int(spec.split(":", 1)[1]))
        return Proportions(np.array([float(x) for x in spec.split(",")]))
    except ValueError as exc:
        raise UsageError(f"invalid --pi {spec!r}: {exc}") from exc


def parse_n_grid(spec: str) -> list[int]:
    try:
        if ":" in spec:
            a, b = spec.split(":", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError("empty range")
            return list(range(lo, hi + 1))
        return [int(spec)]
    except ValueError as exc:
        raise UsageError(f"invalid --n {spec!r}: {exc}") from exc


def parse_design(spec: str, p: int) -> TestDesign | None:
    if spec == "bernoulli":
        return None
    if spec.startswith("rows:"):
        try:
            rows = [[int(ch) for ch in row] for row in spec[5:].split(",") if row]
            design = TestDesign(np.array(rows, dtype=np.int8).reshape(len(rows), -1))
        except ValueError as exc:
            raise UsageError(f"invalid --design {spec!r}: {exc}") from exc
        if design.p != p:
            raise UsageError(f"--design rows have width {design.p}, expected p={p}")
        return design
    raise UsageError(f"invalid --design {spec!r}")


def _noise_from_args(args) -> NoiseModel:
    if args.noise == "none":
        return NoiseModel.noiseless()
    if args.sigma2 is None:
        raise UsageError(f"--noise {args.noise} requires --sigma2")
    if args.noise == "gaussian":
        return NoiseModel.gaussian(args.sigma2)
    return NoiseModel.clipped_gaussian(args.sigma2)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_bounds(args) -> int:
    pi = parse_pi(args.pi)
    reports = [bnd.noiseless_threshold(pi, args.p)]
    delta = args.delta
    if args.q is not None:
        try:
            reports.append(bnd.bernoulli_noiseless_bound(pi, args.p, args.q, delta))
        except bnd.RegimeError as exc:
            reports.append(bnd.BoundReport(
                name="bernoulli_noiseless", n_bound=0.0,
                regime_note=f"regime violation: {exc}",
                inputs={"pi": list(pi.pi), "p": args.p, "q": args.q}))
    if args.sigma2 is not None:
        reports.append(bnd.gaussian_subset_bound(pi, args.p, args.sigma2, delta))
        reports.append(bnd.gaussian_single_item_bound(
            args.p, args.sigma2, delta, pi1=float(pi.pi.max())))
    if args.qmax is not None:
        reports.append(bnd.approx_recovery_threshold(
            pi, args.p, args.qmax, delta, variant="noiseless"))
        if args.q is not None:
            counts = round_proportions(pi, args.p)
            mi = bnd.mi_noiseless_bernoulli(
                GeniePattern(counts.counts, counts), args.q)
            reports.append(bnd.approx_recovery_threshold(
                pi, args.p, args.qmax, delta, variant="fano", mi_per_test=mi))
    text = (report.bounds_to_json(reports) if args.format == "json"
            else report.bounds_to_csv(reports))
    _emit(text, args.out)
    return EXIT_OK


def _config_from_args(args, n: int) -> ExperimentConfig:
    pi = parse_pi(args.pi)
    design = parse_design(args.design, args.p)
    if design is not None and design.n != n:
        raise UsageError(f"--design has {design.n} rows but --n asks for {n}")
    return ExperimentConfig(pi=pi, p=args.p, n=n, q=args.q,
                            noise=_noise_from_args(args), qmax=args.qmax,
                            trials=args.trials, master_seed=args.seed,
                            design=design)


def cmd_simulate(args) -> int:
    grid = parse_n_grid(args.n)
    if len(grid) != 1:
        raise UsageError("simulate takes a single --n, not a range")
    est = estimate_pe(_config_from_args(args, grid[0]), threads=args.threads)
    if args.format == "json":
        text = json.dumps({"n": grid[0], "trials": est.trials,
                           "failures": est.failures, "pe_hat": est.pe_hat,
                           "ci_low": est.ci_low, "ci_high": est.ci_high})
    else:
        text = ("n,trials,failures,pe_hat,ci_low,ci_high\n"
                f"{grid[0]},{est.trials},{est.failures},{est.pe_hat:.6g},"
                f"{est.ci_low:.6g},{est.ci_high:.6g}\n")
    _emit(text, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    grid = parse_n_grid(args.n)
    config = _config_from_args(args, grid[0])
    sweep = sweep_n(config, grid, threads=args.threads)
    text = (report.sweep_to_json(sweep) if args.format == "json"
            else report.sweep_to_csv(sweep))
    _emit(text, args.out)
    if args.plot:
        report.render_sweep(sweep, args.plot)
    return EXIT_OK


def cmd_oracle(args) -> int:
    pi = parse_pi(args.pi)
    design = parse_design(args.design, args.p)
    if design is None:
        raise UsageError("oracle needs an explicit --design rows:...")
    counts = round_proportions(pi, args.p)
    res = exact_pe_oracle(design, counts, qmax=args.qmax)
    if args.format == "json":
        text = json.dumps({"pe_exact": res.pe_exact, "pe_unique": res.pe_unique,
                           "candidates_total": res.candidates_total})
    else:
        text = ("pe_exact,pe_unique,candidates_total\n"
                f"{res.pe_exact:.6g},{res.pe_unique:.6g},{res.candidates_total}\n")
    _emit(text, args.out)
    return EXIT_OK


def cmd_figure1(args) -> int:
    rows = figure1_data(args.d, args.random, args.seed)
    if args.format == "json":
        text = json.dumps([{"pi_id": a, "r": r, "f_r": f} for a, r, f in rows])
    else:
        text = report.figure1_to_csv(rows)
    _emit(text, args.out)
    if args.plot:
        report.render_figure1(rows, args.plot)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pooldata")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, need_pi=True):
        if need_pi:
            sp.add_argument("--pi", required=True,
                            help="comma list, uniform:D, or fig1")
            sp.add_argument("--p", type=int, required=True)
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--out", default=None)

    sp = sub.add_parser("bounds", help="evaluate every applicable lower bound")
    common(sp)
    sp.add_argument("--q", type=float, default=None)
    sp.add_argument("--sigma2", type=float, default=None)
    sp.add_argument("--qmax", type=int, default=None)
    sp.add_argument("--delta", type=float, default=0.0)
    sp.set_defaults(func=cmd_bounds)

    for name, func in (("simulate", cmd_simulate), ("sweep", cmd_sweep)):
        sp = sub.add_parser(name)
        common(sp)
        sp.add_argument("--n", required=True, help="single value or a:b range")
        sp.add_argument("--q", type=float, default=0.5)
        sp.add_argument("--noise", choices=("none", "gaussian", "clipped"),
                        default="none")
        sp.add_argument("--sigma2", type=float, default=None)
        sp.add_argument("--qmax", type=int, default=0)
        sp.add_argument("--trials", type=int, default=1000)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--design", default="bernoulli",
                        help="'bernoulli' or rows:0101,1100")
        if name == "sweep":
            sp.add_argument("--plot", default=None,
                            help="render the sweep curve to this image file")
        sp.set_defaults(func=func)

    sp = sub.add_parser("oracle", help="exact noiseless error probability")
    common(sp)
    sp.add_argument("--design", required=True, help="rows:0101,1100")
    sp.add_argument("--qmax", type=int, default=0)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("figure1", help="f(r) table for several pi vectors")
    common(sp, need_pi=False)
    sp.add_argument("--d", type=int, default=10)
    sp.add_argument("--random", type=int, default=0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--plot", default=None,
                    help="render the f(r) curves to this image file")
    sp.set_defaults(func=cmd_figure1)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EnumerationGuardError as exc:
        print(f"guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except QuadratureError as exc:
        print(f"numeric: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
