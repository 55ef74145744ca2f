"""Command-line front end: ``tre-kit compute | verify | sweep | limits``.

Exit codes: 0 success, 1 verification found violations, 2 malformed input
or flags, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import divergences as dv
from .checks import linear_coefficient, tight_bound_second
from .errors import (
    EigensolverFailure,
    InvalidSpec,
    QuadratureNonConvergence,
    SupportMismatch,
    TreKitError,
)
from .matrix_io import matrix_to_json, read_matrix
from .operators import ToleranceConfig
from .suite import CHECKS, EQUALITY_GRID, THEOREMS, SuiteConfig, run_suite, suite_document, suite_passed

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
NUMERICAL_ERRORS = (EigensolverFailure, QuadratureNonConvergence, SupportMismatch,
                    np.linalg.LinAlgError, FloatingPointError)
SEED_ENV = "TRE_KIT_SEED"
SWEEP_HEADER = ["a", "t", "bound_tight", "bound_linear", "coefficient", "achieved"]


class UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _tolerances(args) -> ToleranceConfig:
    try:
        return ToleranceConfig(rank_tol=args.rank_tol, confluence_tol=args.confluence_tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _load(path: str) -> np.ndarray:
    try:
        return read_matrix(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _matrix_dict(M: np.ndarray) -> dict:
    # round-trips through the file writer so both paths format numbers alike
    return json.loads(matrix_to_json(M))


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- compute -------------------------------------------------------------------


def cmd_compute(args) -> int:
    tol = _tolerances(args)
    rho, sigma = _load(args.rho), _load(args.sigma)
    if args.ordinary:
        result = dv.rel_entropy(rho, sigma, tol)
    else:
        result = dv.tre(args.a, rho, sigma, tol)
    out = result.to_dict()
    if args.gradient:
        if args.ordinary:
            fn = dv.grad1_rel if args.gradient == 1 else dv.grad2_rel
            grad = fn(rho, sigma, tol)
        else:
            fn = dv.grad1_tre if args.gradient == 1 else dv.grad2_tre
            grad = fn(args.a, rho, sigma, tol)
        out["gradient"] = {"argument": args.gradient, **_matrix_dict(grad)}
    _emit(json.dumps(out, indent=2) + "\n", args.report)
    return EXIT_OK


# -- verify --------------------------------------------------------------------


def _verify_config(args) -> SuiteConfig:
    seed = args.seed
    if seed is None:
        env = os.environ.get(SEED_ENV)
        try:
            seed = int(env) if env else 0
        except ValueError:
            raise UsageError(f"{SEED_ENV}={env!r} is not an integer")
    names = THEOREMS if args.theorem == "all" else (args.theorem,)
    dims = tuple(args.dim)
    extra = {}
    if args.equality_family:
        if args.theorem not in ("triangle1", "triangle2", "all"):
            raise UsageError("--equality-family applies to triangle1 and triangle2 only")
        names = tuple(f"{n}_equality" for n in names if n in ("triangle1", "triangle2"))
        a_values = tuple([args.a] if args.a is not None else args.a_values or EQUALITY_GRID)
        t_values = tuple([args.t] if args.t is not None else EQUALITY_GRID)
        extra["t_values"] = t_values
        trials = args.trials if args.trials is not None else len(dims) * len(a_values) * len(t_values)
    else:
        a_values = tuple([args.a] if args.a is not None else args.a_values or (0.05, 0.5, 0.95))
        trials = args.trials if args.trials is not None else 10_000
    return SuiteConfig(
        checks=names,
        trials=trials,
        seed=seed,
        tol=args.tol,
        dims=dims,
        a_values=a_values,
        rank_profiles=tuple(args.rank_profiles),
        rank_tol=args.rank_tol,
        confluence_tol=args.confluence_tol,
        keep_per_trial=args.per_trial,
        **extra,
    )


def _reports_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["check_name", "trials", "violations", "failures", "min_margin",
                     "p1", "p50", "p99", "max_margin", "seed", "tol", "config_digest"])
    for r in reports:
        d = r.to_dict()
        q = d["quantiles"]
        writer.writerow([d["check_name"], d["trials"], d["violations"], d["failures"],
                         repr(d["min_margin"]), repr(q["p1"]), repr(q["p50"]), repr(q["p99"]),
                         repr(d["max_margin"]), d["seed"], repr(d["tol"]), d["config_digest"]])
    return buf.getvalue()


def cmd_verify(args) -> int:
    try:
        config = _verify_config(args)
    except InvalidSpec as exc:
        raise UsageError(str(exc)) from exc
    reports = run_suite(config, workers=args.workers, dump_failures=args.dump_failures)
    if args.format == "csv":
        text = _reports_csv(reports)
    else:
        text = json.dumps(suite_document(config, reports), indent=2) + "\n"
    _emit(text, args.report)
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.check_name}: {r.trials} trials, {r.violations} violations, "
              f"min margin {r.min_margin:.3e}", file=sys.stderr)
    return EXIT_OK if suite_passed(reports) else EXIT_VIOLATION


# -- sweep ---------------------------------------------------------------------


def equality_family_gap(a: float, t: float) -> float:
    """``|S_a(rho||sigma1) - S_a(rho||sigma2)|`` for ``rho`` orthogonal to ``sigma1``
    and ``sigma2 = t rho + (1-t) sigma1`` (qubit basis states)."""
    rho = np.diag([1.0, 0.0]).astype(complex)
    sigma1 = np.diag([0.0, 1.0]).astype(complex)
    sigma2 = t * rho + (1.0 - t) * sigma1
    return abs(dv.tre(a, rho, sigma1).value - dv.tre(a, rho, sigma2).value)


def sweep_rows(a_grid: Sequence[float], t_grid: Sequence[float]) -> list[list[float]]:
    rows = []
    for a in a_grid:
        dv.check_a(a)
        coeff = linear_coefficient(a)
        for t in t_grid:
            if not 0.0 <= t <= 1.0:
                raise UsageError(f"t={t!r} outside [0, 1]")
            rows.append([a, t, tight_bound_second(a, t), coeff * t, coeff, equality_family_gap(a, t)])
    return rows


def cmd_sweep(args) -> int:
    try:
        rows = sweep_rows(args.a_grid, args.t_grid)
    except dv.ParameterOutOfRange as exc:
        raise UsageError(str(exc)) from exc
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row in rows:
        writer.writerow([repr(float(v)) for v in row])
    _emit(buf.getvalue(), args.report)
    return EXIT_OK


# -- limits --------------------------------------------------------------------


def cmd_limits(args) -> int:
    tol = _tolerances(args)
    rho, sigma = _load(args.rho), _load(args.sigma)
    s0 = dv.tre_limit(0, rho, sigma, tol)
    s1 = dv.tre_limit(1, rho, sigma, tol)
    out = {
        "S0": s0,
        "S1": s1,
        "support_contained": dv.rel_entropy(rho, sigma, tol).support_contained,
    }
    if args.a_schedule:
        schedule = []
        for a in args.a_schedule:
            value = dv.tre(a, rho, sigma, tol).value
            schedule.append({"a": a, "value": value, "gap_S0": abs(value - s0), "gap_S1": abs(value - s1)})
        gaps0 = [row["gap_S0"] for row in schedule]
        gaps1 = [row["gap_S1"] for row in schedule]
        out["schedule"] = schedule
        out["gap_S0_strictly_decreasing"] = all(x > y for x, y in zip(gaps0, gaps0[1:]))
        out["gap_S1_strictly_decreasing"] = all(x > y for x, y in zip(gaps1, gaps1[1:]))
    _emit(json.dumps(out, indent=2) + "\n", args.report)
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tre-kit", description="Telescopic relative entropy toolkit")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rank-tol", type=float, default=1e-10)
    common.add_argument("--confluence-tol", type=float, default=1e-7)
    common.add_argument("--report", metavar="PATH", help="write output here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", parents=[common], help="divergence (and gradient) of two matrix files")
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--a", type=float)
    mode.add_argument("--ordinary", action="store_true", help="ordinary relative entropy")
    p.add_argument("--gradient", type=int, choices=(1, 2))
    p.add_argument("--format", choices=("json",), default="json")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("verify", parents=[common], help="randomised certification of the inequalities")
    p.add_argument("--theorem", required=True, choices=(*THEOREMS, "all", *sorted(set(CHECKS) - set(THEOREMS))))
    p.add_argument("--trials", type=int)
    p.add_argument("--dim", type=_int_list, default=[2, 3, 4, 8], help="comma-separated dimensions")
    p.add_argument("--seed", type=int, help=f"falls back to ${SEED_ENV}, then 0")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--a", type=float)
    p.add_argument("--a-values", type=_float_list)
    p.add_argument("--t", type=float)
    p.add_argument("--rank-profiles", type=lambda s: s.split(","), default=["full", "deficient", "pure"])
    p.add_argument("--equality-family", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--dump-failures", metavar="DIR")
    p.add_argument("--per-trial", action="store_true", help="include per-trial margins in the report")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", parents=[common], help="bounds on an (a, t) grid as CSV")
    p.add_argument("--a-grid", type=_float_list, required=True)
    p.add_argument("--t-grid", type=_float_list, required=True)
    p.add_argument("--format", choices=("csv",), default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("limits", parents=[common], help="closed-form a -> 0 and a -> 1 limits")
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--a-schedule", type=_float_list)
    p.set_defaults(func=cmd_limits)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags and 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"tre-kit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERICAL_ERRORS as exc:
        print(f"tre-kit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except TreKitError as exc:
        print(f"tre-kit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"tre-kit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
