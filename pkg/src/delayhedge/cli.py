"""Command-line interface.

Exit codes: 0 success, 2 usage or validation error, 3 numerical failure,
4 Monte Carlo verification failure.  Set ``DELAYHEDGE_LOG`` (e.g. ``DEBUG``)
for diagnostics on standard error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .decomposition import METHODS
from .errors import (
    DelayHedgeError,
    DimensionMismatch,
    InvalidParameter,
    NotPositiveDefinite,
    ParseError,
    ResultNotPD,
    SingularPrincipalMinor,
    UtilityDiverges,
)
from .hedging import solve
from .models import FbmSpec, MarketModel, fbm_model, kms_model, load_model
from .montecarlo import delayed_martingale_check, mc_expected_utility, qhat_weights, simulate
from .plotting import line_plot

log = logging.getLogger("delayhedge")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4
SWEEP_HEADER = ("family", "param", "n", "dt", "delay", "value", "logdet_sigma", "logdet_q")
VALUE_HEADER = ("value", "c_constant", "logdet_sigma", "logdet_q", "quad_term")

_VALIDATION_ERRORS = (InvalidParameter, ParseError, DimensionMismatch, NotPositiveDefinite, OSError)
_NUMERIC_ERRORS = (SingularPrincipalMinor, ResultNotPD, UtilityDiverges, ZeroDivisionError)


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """Shortest round-trip decimal."""
    return repr(float(x))


def format_matrix(name: str, M) -> str:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    lines = [f"# {name} {M.shape[0]} {M.shape[1]}"]
    lines += [" ".join(fmt(v) for v in row) for row in M]
    return "\n".join(lines) + "\n"


def _write(text: str, output):
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def parse_mu(value, n):
    if value is None:
        return np.zeros(n)
    try:
        return np.full(n, float(value))
    except ValueError:
        pass
    try:
        tokens = Path(value).read_text(encoding="utf-8").split()
    except OSError as exc:
        raise UsageError(f"--mu is neither a number nor a readable file: {exc}") from None
    try:
        mu = np.array([float(t) for t in tokens])
    except ValueError:
        raise ParseError(f"{value}: mu file must hold whitespace-separated reals") from None
    if mu.shape != (n,):
        raise DimensionMismatch(f"mu file has {mu.size} entries, expected n={n}")
    return mu


def build_model(args, param=None) -> MarketModel:
    family = "file" if args.file else args.family
    if family == "file":
        if not args.file:
            raise UsageError("--family file needs --file PATH")
        model = load_model(args.file)
        if args.mu is not None:
            model = MarketModel(parse_mu(args.mu, model.n), model.sigma, model.s0, model.name)
        return model
    if args.n is None:
        raise UsageError(f"--n is required for --family {family}")
    mu = parse_mu(args.mu, args.n)
    if family == "kms":
        rho = args.rho if param is None else param
        if rho is None:
            raise UsageError("--rho is required for --family kms")
        return kms_model(rho, args.n, mu, allow_negative=args.allow_negative_rho)
    if family == "fbm":
        hurst = args.hurst if param is None else param
        if hurst is None:
            raise UsageError("--hurst is required for --family fbm")
        dt = args.dt if args.dt is not None else 1.0 / args.n
        return fbm_model(FbmSpec(hurst, args.n, dt), mu)
    raise UsageError(f"unknown family {family!r}")


def _check_delay(delay, n):
    if delay is None:
        raise UsageError("--delay is required")
    if not 0 <= delay <= n - 1:
        raise UsageError(f"--delay must lie in [0, {n - 1}] for n={n}, got {delay}")


def cmd_decompose(args) -> int:
    model = build_model(args)
    _check_delay(args.delay, model.n)
    dec, _, _ = solve(model, args.delay, method=args.method)
    text = format_matrix("R", dec.r) + format_matrix("gamma", dec.gamma) + format_matrix("q_logdet", [[dec.q_logdet]])
    _write(text, args.output)
    return EXIT_OK


def cmd_value(args) -> int:
    model = build_model(args)
    _check_delay(args.delay, model.n)
    _, _, report = solve(model, args.delay, method=args.method)
    row = report.as_row()
    lines = [",".join(VALUE_HEADER)] if args.header else []
    lines.append(",".join(fmt(row[k]) for k in VALUE_HEADER))
    _write("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def cmd_strategy(args) -> int:
    if not args.alpha > 0:
        raise UsageError("--alpha must be positive")
    model = build_model(args)
    _check_delay(args.delay, model.n)
    _, strat, _ = solve(model, args.delay, method=args.method)
    strat = strat.scaled(1.0 / args.alpha)
    _write(format_matrix("intercept", strat.intercept[None, :]) + format_matrix("loading", strat.loading), args.output)
    return EXIT_OK


@dataclass(frozen=True)
class SweepSpec:
    family: str
    params: tuple
    n: int
    dt: float | None
    delays: tuple
    output: str | None = None

    def __post_init__(self):
        if not self.params:
            raise UsageError("parameter grid is empty")
        if not self.delays:
            raise UsageError("no delays given")
        bad = [d for d in self.delays if not 0 <= d <= self.n - 1]
        if bad:
            raise UsageError(f"delays {bad} outside [0, {self.n - 1}]")


def param_grid(lo, hi, step):
    if step <= 0:
        raise UsageError("--param-step must be positive")
    if hi < lo:
        raise UsageError("--param-max must be >= --param-min")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return tuple(round(lo + k * step, 12) for k in range(count))


def _sweep_point(job):
    """Rows for one parameter value, all delays.  Top level so it pickles."""
    spec, param, model_args = job
    rows = []
    delay = None
    try:
        model = build_model(model_args, param)
        for delay in spec.delays:
            _, _, report = solve(model, delay)
            dt = "" if spec.family != "fbm" else fmt(spec.dt if spec.dt is not None else 1.0 / spec.n)
            rows.append(
                (spec.family, "" if param is None else fmt(param), str(model.n), dt, str(delay),
                 fmt(report.value), fmt(report.logdet_sigma), fmt(report.logdet_q))
            )
    except (DelayHedgeError, ZeroDivisionError) as exc:
        raise RuntimeError(f"grid point param={param} delay={delay}: {exc}") from None
    return rows


def run_sweep(spec: SweepSpec, model_args, jobs: int = 1):
    """Evaluate the grid; rows come back ordered by (param, delay)."""
    jobs_list = [(spec, p, model_args) for p in spec.params]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_sweep_point, jobs_list))
    else:
        chunks = [_sweep_point(j) for j in jobs_list]
    return [row for chunk in chunks for row in chunk]


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    writer.writerows(rows)
    return buf.getvalue()


def sweep_svg(rows, family) -> str:
    series = {}
    for fam, param, n, dt, delay, value, *_ in rows:
        xs, ys = series.setdefault(f"D={delay}", ([], []))
        xs.append(float(param) if param else 0.0)
        ys.append(float(value))
    xlabel = {"kms": "rho", "fbm": "H"}.get(family, "param")
    n = rows[0][2] if rows else "?"
    return line_plot(series, xlabel=xlabel, ylabel="value", title=f"{family}, n={n}")


def cmd_sweep(args) -> int:
    family = "file" if args.file else args.family
    if family == "file":
        params = (None,)
        n = build_model(args).n
    else:
        if args.n is None:
            raise UsageError(f"--n is required for --family {family}")
        params = param_grid(args.param_min, args.param_max, args.param_step)
        n = args.n
    delays = tuple(sorted(set(args.delays))) if args.delays is not None else tuple(range(min(8, n)))
    spec = SweepSpec(family, params, n, args.dt, delays, args.output)
    # fail fast on invalid parameters before spinning up workers
    build_model(args, params[0])
    t0 = time.perf_counter()
    try:
        rows = run_sweep(spec, args, jobs=args.jobs)
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    log.info("sweep of %d rows took %.2fs", len(rows), time.perf_counter() - t0)
    _write(sweep_csv(rows), args.output)
    if args.plot:
        Path(args.plot).write_text(sweep_svg(rows, family), encoding="utf-8")
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.paths is None or args.paths < 1:
        raise UsageError("--paths must be a positive integer")
    model = build_model(args)
    _check_delay(args.delay, model.n)
    dec, strat, report = solve(model, args.delay, method=args.method)
    batch = simulate(model, args.paths, args.seed)
    estimate, se = mc_expected_utility(batch, strat)
    weights = qhat_weights(batch, model, dec)
    stat = delayed_martingale_check(batch, weights, args.delay)
    weight_mean = float(np.sum(weights) / weights.size)
    header = ("analytic", "estimate", "std_error", "martingale_stat", "weight_mean")
    print(",".join(header))
    print(",".join(fmt(v) for v in (report.value, estimate, se, stat, weight_mean)))
    ok = abs(estimate - report.value) <= 3.0 * se
    if not ok:
        print(f"verification failed: |estimate - analytic| = {abs(estimate - report.value):.3e} > 3 SE", file=sys.stderr)
    return EXIT_OK if ok else EXIT_VERIFY


def _delays(text):
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _model_parent():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("model")
    g.add_argument("--family", choices=("kms", "fbm", "file"), default="kms", help="covariance family (default kms)")
    g.add_argument("--file", help="model file; implies --family file")
    g.add_argument("--rho", type=float, help="KMS correlation parameter in (0, 1)")
    g.add_argument("--allow-negative-rho", action="store_true", help="admit any |rho| < 1 for KMS")
    g.add_argument("--hurst", type=float, help="fBm Hurst index in (0, 1)")
    g.add_argument("--n", type=int, help="number of trading periods")
    g.add_argument("--dt", type=float, help="fBm time step (default 1/n)")
    g.add_argument("--mu", help="increment mean: a scalar broadcast to all periods, or a file of n reals (default 0)")
    g.add_argument("--method", choices=METHODS, default="auto", help="decomposition route (default auto)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delayhedge",
        description="Optimal exponential-utility trading with delayed price information.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    model = _model_parent()

    p = sub.add_parser("decompose", parents=[model], help="write R, gamma and log det Q")
    p.add_argument("--delay", type=int, required=True, help="information delay D")
    p.add_argument("--output", help="output path (default stdout)")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("value", parents=[model], help="print the optimal value as a CSV row")
    p.add_argument("--delay", type=int, required=True, help="information delay D")
    p.add_argument("--header", action="store_true", help="print a header line first: " + ",".join(VALUE_HEADER))
    p.add_argument("--output", help="output path (default stdout)")
    p.set_defaults(func=cmd_value)

    p = sub.add_parser("strategy", parents=[model], help="write intercept and loading of the optimal strategy")
    p.add_argument("--delay", type=int, required=True, help="information delay D")
    p.add_argument("--alpha", type=float, default=1.0,
                   help="risk aversion; positions are divided by alpha, the attained utility is unchanged")
    p.add_argument("--output", help="output path (default stdout)")
    p.set_defaults(func=cmd_strategy)

    p = sub.add_parser("sweep", parents=[model], help="value over a parameter grid and several delays")
    p.add_argument("--param-min", type=float, default=0.01, help="smallest rho or H (default 0.01)")
    p.add_argument("--param-max", type=float, default=0.99, help="largest rho or H (default 0.99)")
    p.add_argument("--param-step", type=float, default=0.01, help="grid step (default 0.01)")
    p.add_argument("--delays", type=_delays, help="comma-separated delays (default 0,...,7)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--plot", help="also write an SVG plot to this path")
    p.add_argument("--output", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", parents=[model], help="Monte Carlo check of the optimal value")
    p.add_argument("--delay", type=int, required=True, help="information delay D")
    p.add_argument("--paths", type=int, default=100_000, help="number of simulated paths (default 100000)")
    p.add_argument("--seed", type=int, default=0, help="PCG64 seed (default 0)")
    p.set_defaults(func=cmd_simulate)
    return parser


def _configure_logging():
    level = os.environ.get("DELAYHEDGE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, *_VALIDATION_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (*_NUMERIC_ERRORS, DelayHedgeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
