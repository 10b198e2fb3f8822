"""hphc command line: exact tables, simulations, local-time experiments and checks."""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import artifacts
from .exact import (
    SizeBoundError,
    central_return_1d,
    negbin_cdf,
    negbin_pmf,
    p2n,
    q_ratio,
)
from .localtime import (
    InvariantMeasure,
    comparison_asymptotics,
    exponential_law_samples,
    green_table,
    invariant_residual,
    lil_diagnostic,
    ratio_experiment,
)
from .profiles import LatticeSite, PJProfile
from .returnprob import EXACT_BOUND, scaled_convergence_table
from .verify import CHECKS, run_checks
from .walk import TrajectoryStream, endpoint_distribution

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SIZE = 3
EXIT_VERIFY = 4

EXACT_TABLE_BOUND = 4096
OUTPUT_DIR_ENV = "HPHC_OUTPUT_DIR"
# Flags that change where or how fast a run happens but never what it produces.
NOT_IN_CONFIG = {"output", "workers", "config", "handler"}


class UsageError(Exception):
    pass


def _default_workers() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def _ints(text: str) -> list[int]:
    try:
        vals = [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise UsageError("empty integer list")
    return vals


def _site(text: str) -> LatticeSite:
    parts = _ints(text)
    if len(parts) != 2:
        raise UsageError(f"a site is written k,j; got {text!r}")
    return LatticeSite(*parts)


def _profile(text: str) -> PJProfile:
    try:
        return PJProfile.parse(text)
    except (ValueError, ZeroDivisionError) as e:
        raise UsageError(f"invalid profile {text!r}: {e}") from None


def _fracs(text: str) -> list[Fraction]:
    try:
        return [Fraction(x.strip()) for x in str(text).split(",") if x.strip()]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"expected comma-separated rationals, got {text!r}") from None


def _n_list(args) -> list[int]:
    if args.grid is not None:
        return _ints(args.grid)
    if args.n is not None:
        return [int(args.n)]
    raise UsageError("give --n or --grid")


def _fr(x: Fraction):
    return (x.numerator, x.denominator)


# ---- subcommands: each returns (columns, rows, exit_code) ----


def cmd_return_prob(args):
    N_list = _n_list(args)
    if any(N < 1 for N in N_list):
        raise UsageError("N must be positive")
    if N_list != sorted(set(N_list)):
        raise UsageError("the N grid must be strictly increasing")
    recs = scaled_convergence_table(N_list, mode=args.mode, exact_bound=args.exact_bound)
    rows = []
    for r in recs:
        num, den = _fr(r.exact) if r.exact is not None else (None, None)
        rows.append((r.N, num, den, r.approx.log_value, r.scaled))
    return ["N", "exact_num", "exact_den", "log_prob", "scaled"], rows, EXIT_OK


def cmd_exact(args):
    q = args.quantity
    n = args.n
    if q in ("p2n", "q", "central"):
        if n is None:
            raise UsageError(f"--n is required for {q}")
        if n > EXACT_TABLE_BOUND:
            raise SizeBoundError(f"exact tables are limited to n <= {EXACT_TABLE_BOUND}, got {n}")
    if q == "p2n":
        if n < 1:
            raise UsageError("--n must be >= 1")
        if args.r is not None:
            if not 1 <= args.r <= n:
                raise UsageError(f"--r must lie in [1, {n}]")
            gs = [2 * args.r - 1, 2 * args.r]
        else:
            gs = range(1, 2 * n + 1)
        rows = [(n, g, *_fr(p2n(n, g))) for g in gs]
        return ["n", "g", "num", "den"], rows, EXIT_OK
    if q == "q":
        if n < 1:
            raise UsageError("--n must be >= 1")
        rows = [(n, r, *_fr(q_ratio(r, n))) for r in range(n + 1)]
        return ["n", "r", "num", "den"], rows, EXIT_OK
    if q == "central":
        if n < 0:
            raise UsageError("--n must be >= 0")
        rows = [(m, *_fr(central_return_1d(m))) for m in range(n + 1)]
        return ["n", "num", "den"], rows, EXIT_OK
    # negbin
    if args.k is None or args.k < 1:
        raise UsageError("negbin needs --k >= 1")
    if args.r_max < 0:
        raise UsageError("--r-max must be >= 0")
    if args.r_max > EXACT_TABLE_BOUND:
        raise SizeBoundError(f"--r-max is limited to {EXACT_TABLE_BOUND}")
    rows = [(args.k, r, *_fr(negbin_pmf(args.k, r)), *_fr(negbin_cdf(args.k, r))) for r in range(args.r_max + 1)]
    return ["K", "r", "pmf_num", "pmf_den", "cdf_num", "cdf_den"], rows, EXIT_OK


def cmd_simulate(args):
    prof = _profile(args.profile)
    start = _site(args.start)
    if args.steps is None:
        raise UsageError("--steps is required")
    if args.steps < 0:
        raise UsageError("--steps must be non-negative")
    if args.replicas < 1:
        raise UsageError("--replicas must be >= 1")
    if args.replicas == 1:
        stream = TrajectoryStream(args.steps, args.seed, args.method, prof, start)
        rows = [(t, k, j) for t, (k, j) in enumerate(stream)]
        return ["step", "k", "j"], rows, EXIT_OK
    if start != LatticeSite(0, 0):
        raise UsageError("endpoint distributions start at the origin")
    dist = endpoint_distribution(args.steps, args.replicas, args.seed, args.method, prof, args.workers)
    rows = [(s.k, s.j, c) for s, c in dist.items()]
    return ["k", "j", "count"], rows, EXIT_OK


def _lt_ratio(args):
    try:
        a_txt, b_txt = args.ratio.split(":")
    except ValueError:
        raise UsageError(f"--ratio is written ka,ja:kb,jb; got {args.ratio!r}") from None
    a, b = _site(a_txt), _site(b_txt)
    st = ratio_experiment(a, b, args.steps, args.replicas, args.seed, args.workers, _profile(args.profile))
    cols = ["a_k", "a_j", "b_k", "b_j", "N", "replicas", "mean", "ci_lo", "ci_hi",
            "zero_denominator_count", "degenerate"]
    row = (a.k, a.j, b.k, b.j, st.steps, st.replicas, st.mean, st.ci_lo, st.ci_hi,
           st.zero_denominator_count, st.degenerate)
    return cols, [row]


def _lt_exponential(args):
    grid = _ints(args.grid) if args.grid else [args.steps]
    rows = []
    for N in grid:
        res = exponential_law_samples(N, args.replicas, args.seed, args.workers)
        rows.append((N, res.replicas, res.ks_distance, res.low_power))
    return ["N", "replicas", "ks_distance", "low_power"], rows


def _lt_green(args):
    grid = _ints(args.grid) if args.grid else [args.steps]
    rows = []
    for g in green_table(grid, mode=args.mode):
        num, den = _fr(g.g) if isinstance(g.g, Fraction) else (None, None)
        rows.append((g.N, num, den, float(g.g), g.scaled))
    return ["N", "g_num", "g_den", "g", "g_over_logN"], rows


def _lt_lil(args):
    grid = _ints(args.grid) if args.grid else [args.steps]
    d = lil_diagnostic(grid, args.replicas, args.seed, args.workers)
    rows = []
    for r in range(d.scaled.shape[0]):
        for i, N in enumerate(d.grid.tolist()):
            rows.append((r, N, float(d.scaled[r, i]), float(d.running_max[r, i]), d.target))
    return ["replica", "N", "scaled", "running_max", "target"], rows


def _lt_residual(args):
    prof = _profile(args.profile)
    if args.mu == "inverse-p":
        mu = InvariantMeasure.from_profile(prof)
    elif args.mu.startswith("constant:"):
        mu = InvariantMeasure.constant(_fracs(args.mu.split(":", 1)[1])[0])
    else:
        raise UsageError(f"--mu is inverse-p or constant:c, got {args.mu!r}")
    if args.radius < 0:
        raise UsageError("--radius must be non-negative")
    res = invariant_residual(prof, mu, args.radius)
    rows = [(s.k, s.j, *_fr(v)) for s, v in sorted(res.items())]
    return ["k", "j", "residual_num", "residual_den"], rows


def cmd_local_time(args):
    chosen = [args.ratio is not None, args.exponential, args.green, args.lil, args.residual]
    if sum(map(bool, chosen)) != 1:
        raise UsageError("choose exactly one of --ratio, --exponential, --green, --lil, --residual")
    if args.ratio is not None:
        cols, rows = _lt_ratio(args)
    elif args.exponential:
        cols, rows = _lt_exponential(args)
    elif args.green:
        cols, rows = _lt_green(args)
    elif args.lil:
        cols, rows = _lt_lil(args)
    else:
        cols, rows = _lt_residual(args)
    return cols, rows, EXIT_OK


def cmd_compare(args):
    models = [m.strip() for m in args.models.split(",") if m.strip()]
    p = _fracs(args.periodic_p) if args.periodic_p else None
    for m in models:
        if m not in ("simple", "hphc", "comb", "periodic"):
            raise UsageError(f"unknown model {m!r}")
    if "periodic" in models and not p:
        raise UsageError("the periodic model needs --periodic-p")
    rows = []
    for N in _n_list(args):
        if N < 1:
            raise UsageError("N must be positive")
        rows.append((N, *(comparison_asymptotics(m, N, p) for m in models)))
    return ["N", *models], rows, EXIT_OK


def cmd_verify(args):
    results = run_checks(args.max_n, args.inject_fault)
    rows = [(r.name, "pass" if r.passed else "FAIL", r.checked, r.failures, r.detail) for r in results]
    for r in results:
        if not r.passed:
            print(f"verification failed: {r.name}: {r.detail}", file=sys.stderr)
    code = EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY
    return ["check", "status", "checked", "failures", "detail"], rows, code


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("-o", "--output", help=f"output file (default: ${OUTPUT_DIR_ENV}/<command>.<format> or stdout)")
    common.add_argument("--config", help="JSON config or earlier artifact; its values override flags")
    common.add_argument("--workers", type=int, default=_default_workers())
    common.add_argument("--seed", type=int, default=0, help="master seed")

    ap = argparse.ArgumentParser(prog="hphc", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("return-prob", parents=[common], help="P(C(2N) = 0) and its scaled form")
    p.add_argument("--n", type=int)
    p.add_argument("--grid")
    p.add_argument("--mode", choices=("auto", "exact", "log"), default="auto")
    p.add_argument("--exact-bound", type=int, default=EXACT_BOUND)
    p.set_defaults(handler=cmd_return_prob)

    p = sub.add_parser("exact", parents=[common], help="exact fluctuation and negative binomial tables")
    p.add_argument("--quantity", choices=("p2n", "q", "negbin", "central"), default="p2n")
    p.add_argument("--n", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--r-max", type=int, default=20)
    p.set_defaults(handler=cmd_exact)

    p = sub.add_parser("simulate", parents=[common], help="trajectories or endpoint distributions")
    p.add_argument("--profile", default="hphc")
    p.add_argument("--steps", type=int)
    p.add_argument("--method", choices=("kernel", "construction"), default="kernel")
    p.add_argument("--replicas", type=int, default=1)
    p.add_argument("--start", default="0,0")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("local-time", parents=[common], help="local-time experiments")
    what = p.add_mutually_exclusive_group()
    what.add_argument("--ratio", help="ka,ja:kb,jb")
    what.add_argument("--exponential", action="store_true")
    what.add_argument("--green", action="store_true")
    what.add_argument("--lil", action="store_true")
    what.add_argument("--residual", action="store_true")
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--grid")
    p.add_argument("--replicas", type=int, default=200)
    p.add_argument("--profile", default="hphc")
    p.add_argument("--mode", choices=("auto", "exact", "log"), default="auto")
    p.add_argument("--mu", default="inverse-p")
    p.add_argument("--radius", type=int, default=20)
    p.set_defaults(handler=cmd_local_time)

    p = sub.add_parser("compare", parents=[common], help="leading-order return probabilities of reference walks")
    p.add_argument("--models", default="simple,hphc")
    p.add_argument("--periodic-p")
    p.add_argument("--n", type=int)
    p.add_argument("--grid")
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("verify", parents=[common], help="exact cross-checks")
    p.add_argument("--max-n", type=int, default=12)
    p.add_argument("--inject-fault", choices=sorted(CHECKS), help=argparse.SUPPRESS)
    p.set_defaults(handler=cmd_verify)
    return ap


def run_config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in NOT_IN_CONFIG}


def _apply_config(args, path: str) -> None:
    try:
        cfg = artifacts.read_config(path)
    except (OSError, ValueError) as e:
        raise UsageError(f"cannot read config {path}: {e}") from None
    if cfg.get("command", args.command) != args.command:
        raise UsageError(f"config is for {cfg['command']!r}, not {args.command!r}")
    known = vars(args)
    for k, v in cfg.items():
        if k in NOT_IN_CONFIG:
            continue
        if k not in known:
            raise UsageError(f"unknown config key {k!r} for {args.command}")
        setattr(args, k, v)


def _destination(args) -> Path | None:
    if args.output:
        return Path(args.output)
    d = os.environ.get(OUTPUT_DIR_ENV)
    if d:
        return Path(d) / f"{args.command}.{args.format}"
    return None


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.config:
            _apply_config(args, args.config)
        if args.workers < 1:
            raise UsageError("--workers must be >= 1")
        cols, rows, code = args.handler(args)
        text = artifacts.render(run_config(args), cols, rows, args.format)
    except UsageError as e:
        print(f"hphc {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SizeBoundError as e:
        print(f"hphc {args.command}: size bound: {e}", file=sys.stderr)
        return EXIT_SIZE
    except (ValueError, TypeError) as e:
        print(f"hphc {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    dest = _destination(args)
    if dest is None:
        sys.stdout.write(text)
    else:
        dest.parent.mkdir(parents=True, exist_ok=True)
        with open(dest, "w", newline="") as fh:
            fh.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
