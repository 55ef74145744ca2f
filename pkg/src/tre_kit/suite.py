"""Randomised certification runs.

A check draws its inputs from a per-trial generator and returns named
margins; the trial margin is the smallest of them. Trials are independent,
so they may be farmed out to worker processes; results are gathered by
trial index and the report does not depend on the worker count.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from . import checks
from .divergences import _rel_entropy_value, _tre_value, tre_scalar
from .ensembles import (
    orthogonal_block_states,
    parse_rank_profile,
    random_hermitian,
    random_psd,
    random_state,
    trial_rng,
)
from .errors import InvalidSpec, TreKitError
from .frechet import DividedDifferenceKernel
from .matrix_io import write_matrix
from .operators import DEFAULT_TOL, ToleranceConfig

DEFAULT_DIMS = (2, 3, 4, 8)
DEFAULT_A = (0.05, 0.5, 0.95)
DEFAULT_PROFILES = ("full", "deficient", "pure")
EQUALITY_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)


@dataclass(frozen=True)
class Trial:
    index: int
    dim: int
    a: float
    rank: int
    t: Optional[float] = None


@dataclass(frozen=True)
class Check:
    draw: Callable[[np.random.Generator, Trial], dict]
    evaluate: Callable[[dict, Trial, ToleranceConfig], dict]
    equality: bool = False


# -- trial definitions ---------------------------------------------------------


def _states(n):
    def draw(rng, trial):
        return {f"rho{i}": random_state(rng, trial.dim, trial.rank) for i in range(n)}
    return draw


def _psd_triple(rng, trial):
    return {name: random_psd(rng, trial.dim, trial.rank) for name in ("A", "B", "X")}


def _eval_triangle1(m, trial, tol):
    return {"margin": checks._triangle1(trial.a, m["rho0"], m["rho1"], m["rho2"], tol)}


def _eval_triangle2(m, trial, tol):
    return checks._triangle2(trial.a, m["rho0"], m["rho1"], m["rho2"], tol)._asdict()


def _eval_rbts(m, trial, tol):
    return checks._rbts(m["A"], m["B"], m["X"], tol)._asdict()


def _eval_rbts2(m, trial, tol):
    return checks._rbts2(m["A"], m["B"], m["X"], tol)._asdict()


def _eval_tderiv(m, trial, tol):
    return checks._tderiv(m["A"], m["B"], m["X"], tol)._asdict()


def _draw_aux(rng, trial):
    m = _psd_triple(rng, trial)
    m.update(_states(3)(rng, trial))
    alpha = rng.exponential()
    gamma = -rng.exponential()
    beta = gamma + rng.exponential()
    m["quadratic"] = np.array([alpha, beta, gamma])
    m["lam"] = np.array([rng.uniform()])
    return m


def _eval_aux(m, trial, tol):
    alpha, beta, gamma = m["quadratic"]
    return {
        "lieb1": checks.lieb1_margin(m["A"], m["B"], tol),
        "lieb2": checks.lieb2_margin(m["A"], m["B"], tol),
        "lemma_f": checks.lemma_f_margin(alpha, beta, gamma),
        "s0_linearity": checks.s0_linearity_margin(float(m["lam"][0]), m["rho0"], m["rho1"], m["rho2"], tol),
    }


def _draw_monoboth(rng, trial):
    return _psd_triple(rng, trial)


def _eval_monoboth(m, trial, tol):
    A, B, X, a = m["A"], m["B"], m["X"], trial.a
    out = {}
    s_ab = _rel_entropy_value(A, B, tol)
    if math.isfinite(s_ab):
        out["rel_shift_both"] = s_ab - _rel_entropy_value(A + X, B + X, tol)
        out["rel_shift_second"] = s_ab - _rel_entropy_value(A, B + X, tol)
    ta_ab = _tre_value(a, A, B, tol)
    out["tre_shift_both"] = ta_ab - _tre_value(a, A + X, B + X, tol)
    out["tre_shift_second"] = ta_ab - _tre_value(a, A, B + X, tol)
    return out


def _draw_convexity(rng, trial):
    m = _states(4)(rng, trial)
    m["A1"] = random_state(rng, trial.dim)
    m["A2"] = random_state(rng, trial.dim)
    m["X1"] = random_hermitian(rng, trial.dim)
    m["X2"] = random_hermitian(rng, trial.dim)
    return m


def _t_form(A, X, tol):
    return checks._quadratic_form(DividedDifferenceKernel.from_matrix(A, tol), X)


def _eval_convexity(m, trial, tol):
    a = trial.a
    r1, r2, s1, s2 = m["rho0"], m["rho1"], m["rho2"], m["rho3"]
    mid = _tre_value(a, 0.5 * (r1 + r2), 0.5 * (s1 + s2), tol)
    ends = 0.5 * (_tre_value(a, r1, s1, tol) + _tre_value(a, r2, s2, tol))
    A1, A2, X1, X2 = m["A1"], m["A2"], m["X1"], m["X2"]
    t_mid = _t_form(0.5 * (A1 + A2), 0.5 * (X1 + X2), tol)
    t_ends = 0.5 * (_t_form(A1, X1, tol) + _t_form(A2, X2, tol))
    return {"tre": ends - mid, "t_form": t_ends - t_mid}


def _draw_scaling(rng, trial):
    m = _states(2)(rng, trial)
    m["bc"] = np.exp(rng.uniform(np.log(1e-2), np.log(1e2), size=2))
    return m


def _eval_scaling(m, trial, tol):
    a, X, Y = trial.a, m["rho0"], m["rho1"]
    base = _tre_value(a, X, Y, tol)
    out = {}
    for b in (0.5, 2.0, 10.0):
        scaled = _tre_value(a, b * X, b * Y, tol)
        out[f"homogeneity_{b:g}"] = -abs(scaled - b * base) / max(b * abs(base), b)
    b, c = m["bc"]
    ref = tre_scalar(a, b, c)
    out["collapse"] = -abs(_tre_value(a, b * X, c * X, tol) - ref) / max(abs(ref), 1.0)
    return out


def _draw_range(rng, trial):
    m = _states(2)(rng, trial)
    m["orth0"], m["orth1"] = orthogonal_block_states(rng, trial.dim, 2, trial.rank)
    return m


def _eval_range(m, trial, tol):
    a, rho, sigma = trial.a, m["rho0"], m["rho1"]
    value = _tre_value(a, rho, sigma, tol)
    o1, o2 = m["orth0"], m["orth1"]
    return {
        "lower": value,
        "upper": 1.0 - value,
        "self": -abs(_tre_value(a, rho, rho, tol)),
        "orthogonal": -abs(_tre_value(a, o1, o2, tol) - 1.0),
    }


def _eval_s1_fannes(m, trial, tol):
    return {
        "fannes": checks.s1_fannes_margin(m["rho0"], m["rho1"], m["rho2"], tol),
        "coefficient": checks.linear_coefficient(trial.a) - 1.0,
    }


def _draw_equality1(rng, trial):
    rho1, sigma = orthogonal_block_states(rng, trial.dim, 2, trial.rank)
    return {"rho1": rho1, "rho2": trial.t * sigma + (1.0 - trial.t) * rho1, "sigma": sigma}


def _eval_equality1(m, trial, tol):
    return {"margin": checks._triangle1(trial.a, m["rho1"], m["rho2"], m["sigma"], tol)}


def _draw_equality2(rng, trial):
    rho, sigma1 = orthogonal_block_states(rng, trial.dim, 2, trial.rank)
    return {"rho": rho, "sigma1": sigma1, "sigma2": trial.t * rho + (1.0 - trial.t) * sigma1}


def _eval_equality2(m, trial, tol):
    margins = checks._triangle2(trial.a, m["rho"], m["sigma1"], m["sigma2"], tol)
    return {"tight": margins.tight}


CHECKS: dict[str, Check] = {
    "triangle1": Check(_states(3), _eval_triangle1),
    "triangle2": Check(_states(3), _eval_triangle2),
    "rbts": Check(_psd_triple, _eval_rbts),
    "rbts2": Check(_psd_triple, _eval_rbts2),
    "tderiv": Check(_psd_triple, _eval_tderiv),
    "aux": Check(_draw_aux, _eval_aux),
    "monoboth": Check(_draw_monoboth, _eval_monoboth),
    "convexity": Check(_draw_convexity, _eval_convexity),
    "scaling": Check(_draw_scaling, _eval_scaling),
    "range": Check(_draw_range, _eval_range),
    "s1_fannes": Check(_states(3), _eval_s1_fannes),
    "triangle1_equality": Check(_draw_equality1, _eval_equality1, equality=True),
    "triangle2_equality": Check(_draw_equality2, _eval_equality2, equality=True),
}
THEOREMS = ("triangle1", "triangle2", "rbts", "rbts2", "tderiv", "aux")


# -- configuration and reports --------------------------------------------------


@dataclass(frozen=True)
class SuiteConfig:
    checks: tuple[str, ...] = THEOREMS
    trials: int = 10_000
    seed: int = 0
    tol: float = 1e-9
    dims: tuple[int, ...] = DEFAULT_DIMS
    a_values: tuple[float, ...] = DEFAULT_A
    rank_profiles: tuple[str, ...] = DEFAULT_PROFILES
    t_values: tuple[float, ...] = EQUALITY_GRID
    rank_tol: float = DEFAULT_TOL.rank_tol
    confluence_tol: float = DEFAULT_TOL.confluence_tol
    keep_per_trial: bool = False

    def __post_init__(self):
        for name in ("checks", "dims", "a_values", "rank_profiles", "t_values"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        unknown = [c for c in self.checks if c not in CHECKS]
        if unknown:
            raise InvalidSpec(f"unknown checks {unknown}")
        if not (isinstance(self.tol, (int, float)) and self.tol > 0 and math.isfinite(self.tol)):
            raise InvalidSpec(f"tol must be positive, got {self.tol!r}")
        if self.trials < 1:
            raise InvalidSpec("trials must be >= 1")
        if self.seed < 0:
            raise InvalidSpec("seed must be non-negative")
        if not self.dims or any(d < 2 for d in self.dims):
            raise InvalidSpec("dims must be a non-empty list of integers >= 2")
        if not self.a_values or any(not (0.0 < a < 1.0) for a in self.a_values):
            raise InvalidSpec("a_values must be a non-empty list inside (0, 1)")
        if not self.t_values or any(not (0.0 <= t <= 1.0) for t in self.t_values):
            raise InvalidSpec("t_values must be a non-empty list inside [0, 1]")
        if not self.rank_profiles:
            raise InvalidSpec("rank_profiles must be non-empty")
        for d in self.dims:
            for p in self.rank_profiles:
                parse_rank_profile(p, d)
        try:
            self.tolerances()
        except ValueError as exc:
            raise InvalidSpec(str(exc)) from exc

    def tolerances(self) -> ToleranceConfig:
        return ToleranceConfig(rank_tol=self.rank_tol, confluence_tol=self.confluence_tol)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SuiteConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise InvalidSpec(f"unknown configuration keys {sorted(extra)}")
        return cls(**data)

    def digest(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def trial(self, check: str, index: int) -> Trial:
        """Deterministic assignment of ensemble parameters to a trial index."""
        dims, avals, profiles = self.dims, self.a_values, self.rank_profiles
        dim = dims[index % len(dims)]
        rest = index // len(dims)
        a = avals[rest % len(avals)]
        rest //= len(avals)
        t = None
        if CHECKS[check].equality:
            t = self.t_values[rest % len(self.t_values)]
            rest //= len(self.t_values)
        rank = parse_rank_profile(profiles[rest % len(profiles)], dim)
        return Trial(index, dim, a, rank, t)


@dataclass
class CheckReport:
    check_name: str
    trials: int
    violations: int
    min_margin: float
    max_margin: float
    margin_quantiles: tuple[float, float, float]
    seed: int
    tol: float
    failures: int = 0
    config_digest: str = ""
    worst_trial: Optional[int] = None
    sub_min_margins: dict = field(default_factory=dict)
    per_trial: Optional[list] = None

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        p1, p50, p99 = self.margin_quantiles
        out = {
            "check_name": self.check_name,
            "trials": self.trials,
            "violations": self.violations,
            "min_margin": _json_float(self.min_margin),
            "max_margin": _json_float(self.max_margin),
            "quantiles": {"p1": _json_float(p1), "p50": _json_float(p50), "p99": _json_float(p99)},
            "seed": self.seed,
            "tol": self.tol,
            "failures": self.failures,
            "worst_trial": self.worst_trial,
            "sub_min_margins": {k: _json_float(v) for k, v in self.sub_min_margins.items()},
            "config_digest": self.config_digest,
        }
        if self.per_trial is not None:
            out["per_trial"] = [[digest, _json_float(m)] for digest, m in self.per_trial]
        return out


def _json_float(x: float):
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


# -- execution -----------------------------------------------------------------


def run_trial(config: SuiteConfig, check: str, index: int) -> tuple[dict, dict]:
    """Regenerate the inputs of one trial and evaluate its margins."""
    spec = CHECKS[check]
    trial = config.trial(check, index)
    inputs = spec.draw(trial_rng(config.seed, index), trial)
    return inputs, spec.evaluate(inputs, trial, config.tolerances())


def _run_indices(config_dict: dict, check: str, indices: list[int]) -> list[tuple[int, Optional[dict], str]]:
    config = SuiteConfig.from_dict(config_dict)
    out = []
    for index in indices:
        try:
            _, margins = run_trial(config, check, index)
            margins = {k: float(v) for k, v in margins.items()}
            error = ""
        except (TreKitError, np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
            margins, error = None, f"{type(exc).__name__}: {exc}"
        out.append((index, margins, error))
    return out


def _chunks(n: int, parts: int) -> list[list[int]]:
    size = max(1, math.ceil(n / parts))
    return [list(range(i, min(n, i + size))) for i in range(0, n, size)]


def run_check(config: SuiteConfig, check: str, workers: int = 1,
              dump_failures: Optional[str] = None) -> CheckReport:
    if check not in CHECKS:
        raise InvalidSpec(f"unknown check {check!r}")
    cfg = config.to_dict()
    if workers <= 1:
        results = _run_indices(cfg, check, list(range(config.trials)))
    else:
        chunks = _chunks(config.trials, 4 * workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_run_indices, [cfg] * len(chunks), [check] * len(chunks), chunks)
            results = [r for part in parts for r in part]
    results.sort(key=lambda r: r[0])
    return _aggregate(config, check, results, dump_failures)


def _aggregate(config, check, results, dump_failures) -> CheckReport:
    margins = np.full(len(results), np.nan)
    sub_min: dict[str, float] = {}
    failures = 0
    for pos, (index, trial_margins, _) in enumerate(results):
        values = [] if trial_margins is None else list(trial_margins.values())
        if not values or any(math.isnan(v) for v in values):
            failures += 1
            continue
        margins[pos] = min(values)
        for name, v in trial_margins.items():
            sub_min[name] = min(sub_min.get(name, math.inf), v)

    ok = ~np.isnan(margins)
    good = margins[ok]
    violations = int(np.count_nonzero(good < -config.tol)) + failures
    if good.size:
        p1, p50, p99 = (float(q) for q in np.quantile(good, [0.01, 0.5, 0.99]))
        worst_pos = int(np.flatnonzero(ok)[np.argmin(good)])
        worst = results[worst_pos][0]
        lo, hi = float(good.min()), float(good.max())
    else:
        p1 = p50 = p99 = lo = hi = math.nan
        worst = None

    per_trial = None
    if config.keep_per_trial:
        per_trial = [(f"{config.seed}:{index}", float(m)) for (index, _, _), m in zip(results, margins)]

    if dump_failures:
        bad = [results[i][0] for i in range(len(results)) if not ok[i] or margins[i] < -config.tol]
        for index in bad:
            dump_trial(config, check, index, dump_failures)

    return CheckReport(
        check_name=check,
        trials=len(results),
        violations=violations,
        min_margin=lo,
        max_margin=hi,
        margin_quantiles=(p1, p50, p99),
        seed=config.seed,
        tol=config.tol,
        failures=failures,
        config_digest=config.digest(),
        worst_trial=worst,
        sub_min_margins=dict(sorted(sub_min.items())),
        per_trial=per_trial,
    )


def dump_trial(config: SuiteConfig, check: str, index: int, directory: str) -> list[str]:
    """Write the matrices of one trial in the JSON matrix format."""
    os.makedirs(directory, exist_ok=True)
    spec = CHECKS[check]
    inputs = spec.draw(trial_rng(config.seed, index), config.trial(check, index))
    paths = []
    for name, value in inputs.items():
        if value.ndim != 2:
            continue
        path = os.path.join(directory, f"{check}_{config.seed}_{index}_{name}.json")
        write_matrix(path, value)
        paths.append(path)
    return paths


def run_suite(config: SuiteConfig, workers: int = 1, dump_failures: Optional[str] = None) -> list[CheckReport]:
    """Run every configured check; the suite passes iff no report has violations."""
    return [run_check(config, name, workers, dump_failures) for name in config.checks]


def suite_passed(reports: list[CheckReport]) -> bool:
    return all(r.passed for r in reports)


def suite_document(config: SuiteConfig, reports: list[CheckReport]) -> dict:
    return {
        "status": "pass" if suite_passed(reports) else "fail",
        "config": config.to_dict(),
        "config_digest": config.digest(),
        "reports": [r.to_dict() for r in reports],
    }


def check_aux_lemmas(spec, tol: float = 1e-9, numerics: ToleranceConfig = DEFAULT_TOL) -> CheckReport:
    """Run the auxiliary trials (lieb1, lieb2, convex-quadratic bound, S_0 linearity) for one ensemble."""
    config = SuiteConfig(
        checks=("aux",),
        trials=spec.trials,
        seed=spec.seed,
        tol=tol,
        dims=(spec.dim,),
        rank_profiles=(spec.rank_profile,),
        rank_tol=numerics.rank_tol,
        confluence_tol=numerics.confluence_tol,
    )
    return run_check(config, "aux")
