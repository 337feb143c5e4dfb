"""Experiment definitions, configuration merging and CSV output.

Each experiment declares its parameters with text defaults (the same
grammar as config files), produces named curves and a list of built-in
checks.  Grids are approximations of the plotted axis ranges.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import asymptotics as asy
from .config import (
    ConfigError,
    format_grid,
    parse_float_grid,
    parse_int_grid,
    parse_mixture,
    parse_pairs,
)
from .measures import GammaJump, Mixture1D, ScaledLevyIntensity
from .posterior import (
    LatentLaw,
    PosteriorState,
    dw_posterior_dp,
    dw_posterior_gengamma_vs_dp,
    posterior_gamma,
)
from .simulate import (
    ClampedLinear,
    DataSequence,
    Tanh,
    check_integral_bound,
    gen_crp,
    gen_iid,
    gen_pitman_yor,
    substream,
)
from .transport import (
    constant_C,
    jump_gamma_gamma,
    jump_gengamma_gamma,
    jump_gengamma_gamma_slope_at_zero,
    w1_mixture,
)


class NumericalFailure(RuntimeError):
    """An experiment produced a non-finite value."""


# --------------------------------------------------------------------------
# results
# --------------------------------------------------------------------------


@dataclass
class Curve:
    columns: tuple
    rows: list = field(default_factory=list)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError("row length does not match the header")
        self.rows.append(tuple(float(v) for v in values))

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for r in self.rows:
            if not all(math.isfinite(v) for v in r):
                raise NumericalFailure(f"non-finite row {r!r}")
            lines.append(",".join(repr(v) for v in r))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ExperimentResult:
    curves: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def check(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(Check(name, bool(passed), detail))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


# --------------------------------------------------------------------------
# parameters and configuration
# --------------------------------------------------------------------------


def _parse_test_function(text: str):
    from .config import _call, _float

    name, args = _call(text)
    vals = {k: _float(v) for k, v in args.items()}
    try:
        if name == "clamped_linear":
            return ClampedLinear(**vals)
        if name == "tanh":
            return Tanh(**vals)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    raise ConfigError(f"unknown test function {name!r}")


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise ConfigError(f"expected a positive number, got {text!r}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise ConfigError(f"expected a positive integer, got {text!r}")
    return v


def _increasing(vals, what):
    if not vals:
        raise ConfigError(f"{what} grid is empty")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ConfigError(f"{what} grid must be strictly increasing")
    return vals


def _n_grid(text):
    vals = _increasing(parse_int_grid(text), "n")
    if vals[0] < 0:
        raise ConfigError("n grid must be nonnegative")
    return vals


def _float_grid(text):
    vals = parse_float_grid(text)
    if not vals:
        raise ConfigError("empty grid")
    return vals


def _sigma_grid(text):
    vals = _float_grid(text)
    if any(not 0 < s < 1 for s in vals):
        raise ConfigError("sigma values must lie in (0, 1)")
    return vals


def _sigma(text):
    s = float(text)
    if not 0 < s < 1:
        raise ConfigError("sigma must lie in (0, 1)")
    return s


PARSERS: dict[str, Callable[[str], object]] = {
    "float": _positive_float,
    "int": _positive_int,
    "sigma": _sigma,
    "float_grid": _float_grid,
    "sigma_grid": _sigma_grid,
    "n_grid": _n_grid,
    "mixture": parse_mixture,
    "test_function": _parse_test_function,
    "path": str,
}


@dataclass(frozen=True)
class Param:
    name: str
    kind: str
    default: Optional[str]
    help: str = ""

    def parse(self, text: str):
        try:
            return PARSERS[self.kind](text)
        except ConfigError as exc:
            raise ConfigError(f"{self.name}: {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"{self.name}: {exc}") from None


@dataclass(frozen=True)
class Experiment:
    name: str
    stochastic: bool
    params: tuple
    runner: Callable
    description: str = ""

    def param(self, name: str) -> Param:
        for p in self.params:
            if p.name == name:
                return p
        raise KeyError(name)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: Optional[int]
    params: dict
    raw: dict
    sources: dict
    notes: tuple = ()
    workers: int = 1


COMMON = (Param("workers", "int", "1", "threads for grid points"),)


def parse_seed(text) -> int:
    try:
        v = int(str(text), 0)
    except ValueError:
        raise ConfigError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    return v


def parse_config(
    experiment: Optional[str] = None,
    seed=None,
    config_text: Optional[str] = None,
    overrides: Optional[dict] = None,
) -> ExperimentConfig:
    """Merge defaults, a config document and command-line overrides (flags win)."""
    overrides = dict(overrides or {})
    file_vals: dict[str, str] = {}
    if config_text is not None:
        for k, v in parse_pairs(config_text):
            file_vals[k] = v
    notes = []
    name = experiment
    if "experiment" in file_vals:
        if name is not None and name != file_vals["experiment"]:
            notes.append(f"experiment: flag {name!r} overrides file {file_vals['experiment']!r}")
        name = name or file_vals["experiment"]
    if name is None:
        raise ConfigError("no experiment given")
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
    exp = EXPERIMENTS[name]
    seed_val = None
    if seed is not None:
        seed_val = parse_seed(seed)
        if "seed" in file_vals and parse_seed(file_vals["seed"]) != seed_val:
            notes.append(f"seed: flag {seed_val} overrides file {file_vals['seed']}")
    elif "seed" in file_vals:
        seed_val = parse_seed(file_vals["seed"])
    if exp.stochastic and seed_val is None:
        raise ConfigError(f"experiment {name!r} is stochastic and needs --seed")
    known = {p.name: p for p in exp.params + COMMON}
    for k in list(file_vals) + list(overrides):
        if k not in known and k not in ("experiment", "seed"):
            raise ConfigError(f"unknown parameter {k!r} for experiment {name!r}")
    raw, sources, params = {}, {}, {}
    for pname, p in known.items():
        if pname in overrides and overrides[pname] is not None:
            raw[pname], sources[pname] = str(overrides[pname]), "flag"
            if pname in file_vals and file_vals[pname].strip() != raw[pname].strip():
                notes.append(f"{pname}: flag {raw[pname]!r} overrides file {file_vals[pname]!r}")
        elif pname in file_vals:
            raw[pname], sources[pname] = file_vals[pname], "file"
        elif p.default is not None:
            raw[pname], sources[pname] = p.default, "default"
        else:
            continue
        params[pname] = p.parse(raw[pname])
    workers = params.pop("workers", 1)
    return ExperimentConfig(name, seed_val, params, raw, sources, tuple(notes), workers)


def _pmap(fn, items, workers: int):
    """Ordered map, threaded when ``workers > 1``."""
    items = list(items)
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _label(v: float) -> str:
    return repr(float(v)).replace(".", "p").replace("-", "m")


def _log_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


def _load_or_generate(cfg: ExperimentConfig, gen: Callable[[np.random.Generator], DataSequence], n: int):
    path = cfg.params.get("data_file")
    if path:
        data = DataSequence.from_csv(path)
        if len(data) < n:
            raise ConfigError(f"data file has {len(data)} values, need {n}")
        return data
    return gen(substream(cfg.seed, cfg.experiment, "data"))


# --------------------------------------------------------------------------
# experiment runners
# --------------------------------------------------------------------------

TOL = 1e-12


def run_prior_gamma_jump(cfg: ExperimentConfig) -> ExperimentResult:
    a1 = cfg.params["alpha1"]
    grid = cfg.params["alpha2_grid"]
    C = constant_C()
    res = ExperimentResult()
    curve = Curve(("x", "value", "bound"))
    for a2, j in zip(grid, _pmap(lambda a: jump_gamma_gamma(a1, a), grid, cfg.workers)):
        curve.add(a2, j, C * abs(math.log(a2 / a1)))
    res.curves["jump.csv"] = curve
    v, b = curve.column("value"), curve.column("bound")
    res.check("J below C log(alpha2/alpha1)", np.all(v <= b + TOL), f"max excess {np.max(v - b):.3e}")
    right = np.array(grid) >= a1
    res.check("J nondecreasing in alpha2 >= alpha1", np.all(np.diff(v[right]) >= -TOL))
    return res


def run_prior_gengamma_jump(cfg: ExperimentConfig) -> ExperimentResult:
    grid = cfg.params["sigma_grid"]
    res = ExperimentResult()
    curve = Curve(("x", "value"))
    for s, j in zip(grid, _pmap(jump_gengamma_gamma, grid, cfg.workers)):
        curve.add(s, j)
    res.curves["jump.csv"] = curve
    v = curve.column("value")
    res.check("J(sigma) increasing", np.all(np.diff(v) > 0))
    slope = jump_gengamma_gamma_slope_at_zero()
    fd = jump_gengamma_gamma(1e-3) / 1e-3
    res.check("J(1e-3)/1e-3 close to J'(0)", abs(fd / slope - 1) < 0.01, f"J'(0) = {slope:.6f}, J(1e-3)/1e-3 = {fd:.6f}")
    return res


def run_posterior_dp_jump(cfg: ExperimentConfig) -> ExperimentResult:
    a1 = cfg.params["alpha1"]
    ns = cfg.params["n_grid"]
    C = constant_C()
    res = ExperimentResult()
    for a2 in cfg.params["alpha2_grid"]:
        lo, hi = min(a1, a2), max(a1, a2)
        curve = Curve(("x", "value", "bound"))
        for n, j in zip(ns, _pmap(lambda n: jump_gamma_gamma(lo + n, hi + n), ns, cfg.workers)):
            curve.add(n, j, C * math.log((hi + n) / (lo + n)))
        res.curves[f"jump_alpha2_{_label(a2)}.csv"] = curve
        v, b = curve.column("value"), curve.column("bound")
        res.check(f"alpha2={a2!r}: J below C log((a2+n)/(a1+n))", np.all(v <= b + TOL))
        if lo != hi:
            res.check(f"alpha2={a2!r}: J decreasing in n", np.all(np.diff(v) < 0))
            n_last = ns[-1]
            if n_last > 0:
                ratio = n_last * v[-1] / (C * (hi - lo))
                res.check(
                    f"alpha2={a2!r}: n J / (C (a2 - a1)) at n={n_last}",
                    True,
                    f"{ratio:.6f} (tends to 1)",
                )
    return res


def _poisson_data(cfg, n):
    law = cfg.params["data_law"]
    return _load_or_generate(cfg, lambda rng: gen_iid(law, n, rng), n)


def atom_component(alpha1, base1, alpha2, base2, data: PosteriorState) -> float:
    """``A``: the classical ``W1`` between the two gamma posterior bases."""
    return w1_mixture(posterior_gamma(alpha1, base1, data).base, posterior_gamma(alpha2, base2, data).base)


def run_posterior_dp_atoms_same_alpha(cfg: ExperimentConfig) -> ExperimentResult:
    b1, b2 = cfg.params["base1"], cfg.params["base2"]
    ns = cfg.params["n_grid"]
    data = _poisson_data(cfg, max(ns))
    res = ExperimentResult(data={"data.csv": data})
    w = w1_mixture(b1, b2)
    for a in cfg.params["alpha_grid"]:
        curve = Curve(("x", "value", "bound"))
        vals = _pmap(lambda n: atom_component(a, b1, a, b2, data.summary(n)), ns, cfg.workers)
        for n, v in zip(ns, vals):
            curve.add(n, v, a / (a + n) * w)
        res.curves[f"atoms_alpha_{_label(a)}.csv"] = curve
        gap = np.max(np.abs(curve.column("value") - curve.column("bound")))
        res.check(f"alpha={a!r}: A equals alpha/(alpha+n) W1(P0^1, P0^2)", gap <= 1e-8, f"max gap {gap:.3e}")
    return res


def run_posterior_dp_atoms_same_base(cfg: ExperimentConfig) -> ExperimentResult:
    a1, base = cfg.params["alpha1"], cfg.params["base"]
    ns = [n for n in cfg.params["n_grid"] if n >= 1]
    if not ns:
        raise ConfigError("n grid needs positive values")
    data = _poisson_data(cfg, max(ns))
    res = ExperimentResult(data={"data.csv": data})
    for a2 in cfg.params["alpha2_grid"]:
        lo, hi = min(a1, a2), max(a1, a2)
        curve = Curve(("x", "value", "bound"))
        vals = _pmap(lambda n: atom_component(a1, base, a2, base, data.summary(n)), ns, cfg.workers)
        for n, v in zip(ns, vals):
            curve.add(n, v, asy.dp_atom_bound(lo, base, hi, base, data.values[:n]))
        res.curves[f"atoms_alpha2_{_label(a2)}.csv"] = curve
        v = curve.column("value")
        gap = np.max(np.abs(v - curve.column("bound")))
        res.check(f"alpha2={a2!r}: A equals its upper bound (same base)", gap <= 1e-8, f"max gap {gap:.3e}")
        n_star = ns[int(np.argmax(v))]
        res.check(
            f"alpha2={a2!r}: A is not decreasing in n",
            n_star > ns[0],
            f"argmax n* = {n_star}, sqrt(alpha1 alpha2) = {math.sqrt(a1 * a2):.2f}",
        )
    return res


REGIMES = {
    "sub_critical": lambda lam: asy.RegimeSpec(asy.Regime.SUB_CRITICAL),
    "critical": lambda lam: asy.RegimeSpec(asy.Regime.CRITICAL, lam),
    "super_critical": lambda lam: asy.RegimeSpec(asy.Regime.SUPER_CRITICAL),
}


def run_latent_phase(cfg: ExperimentConfig) -> ExperimentResult:
    a, s, lam = cfg.params["alpha"], cfg.params["sigma"], cfg.params["lam"]
    ns = [n for n in cfg.params["n_grid"] if n >= 1]
    res = ExperimentResult()
    targets = {"sub_critical": s / (1 + s), "critical": s / (1 + s), "super_critical": 0.9}
    for label, make in REGIMES.items():
        reg = make(lam)

        def point(n):
            k = asy.canonical_k(reg, s, n)
            return LatentLaw(a, s, n, k).expectation(), asy.latent_rate(a, s, reg, n, k)

        curve = Curve(("x", "value"))
        rate = Curve(("x", "value"))
        for n, (e, r) in zip(ns, _pmap(point, ns, cfg.workers)):
            curve.add(n, e)
            rate.add(n, r)
        res.curves[f"latent_{label}.csv"] = curve
        res.curves[f"rate_{label}.csv"] = rate
        e, r = curve.column("value"), rate.column("value")
        ratio = e[-1] / r[-1]
        res.check(f"{label}: E[(1+U)^sigma]/r_n in [0.8, 1.25] at n={ns[-1]}", 0.8 <= ratio <= 1.25, f"{ratio:.4f}")
        if len(ns) >= 4:
            half = len(ns) // 2
            slope = _log_slope(ns[half:], e[half:])
            res.check(f"{label}: log-log slope", True, f"{slope:.4f} (asymptotic {targets[label]:.4f})")
    return res


def _merging(cfg: ExperimentConfig, gen) -> ExperimentResult:
    a, base = cfg.params["alpha"], cfg.params["base"]
    ns = [n for n in cfg.params["n_grid"] if n >= 1]
    mc = cfg.params["mc_budget"]
    data = _load_or_generate(cfg, lambda rng: gen(base, max(ns), rng), max(ns))
    res = ExperimentResult(data={"data.csv": data})
    kcurve = Curve(("x", "value"))
    ks = data.distinct_counts()
    for n in ns:
        kcurve.add(n, ks[n - 1])
    res.curves["k.csv"] = kcurve
    for si, s in enumerate(cfg.params["sigma_grid"]):

        def point(item):
            i, n = item
            rng = substream(cfg.seed, cfg.experiment, "latent", si, i)
            return dw_posterior_gengamma_vs_dp(a, s, base, data.summary(n), mc=mc, rng=rng)

        reports = _pmap(point, list(enumerate(ns)), cfg.workers)
        curve = Curve(("x", "value", "std_error"))
        rate = Curve(("x", "value"))
        for n, r in zip(ns, reports):
            curve.add(n, r.total, r.mc_std_error)
            rate.add(n, asy.gengamma_merge_rate(s, n, int(ks[n - 1])))
        res.curves[f"distance_sigma_{_label(s)}.csv"] = curve
        res.curves[f"rate_sigma_{_label(s)}.csv"] = rate
        v = curve.column("value")
        res.check(f"sigma={s!r}: distance decreases from first to last n", v[-1] < v[0], f"{v[0]:.4g} -> {v[-1]:.4g}")
        if len(ns) >= 4:
            half = len(ns) // 2
            slope = _log_slope(ns[half:], v[half:])
            ref = _log_slope(ns[half:], rate.column("value")[half:])
            res.check(f"sigma={s!r}: log-log slope", True, f"{slope:.4f} (reference rate slope {ref:.4f})")
    return res


def run_merging_dp_data(cfg: ExperimentConfig) -> ExperimentResult:
    ab = cfg.params["alpha_bar"]
    return _merging(cfg, lambda base, n, rng: gen_crp(ab, base, n, rng))


def run_merging_py_data(cfg: ExperimentConfig) -> ExperimentResult:
    ab, sb = cfg.params["alpha_bar"], cfg.params["sigma_bar"]
    return _merging(cfg, lambda base, n, rng: gen_pitman_yor(ab, sb, base, n, rng))


def run_continuous_limit(cfg: ExperimentConfig) -> ExperimentResult:
    a, base, law = cfg.params["alpha"], cfg.params["base"], cfg.params["data_law"]
    ns = [n for n in cfg.params["n_grid"] if n >= 1]
    mc = cfg.params["mc_budget"]
    data = _load_or_generate(cfg, lambda rng: gen_iid(law, max(ns), rng), max(ns))
    res = ExperimentResult(data={"data.csv": data})
    for si, s in enumerate(cfg.params["sigma_grid"]):

        def point(item):
            i, n = item
            rng = substream(cfg.seed, cfg.experiment, "latent", si, i)
            est = dw_posterior_gengamma_vs_dp(a, s, base, data.summary(n), mc=mc, rng=rng)
            lim = asy.continuous_data_limit(s, base, Mixture1D.empirical(data.values[:n]))
            return est, lim

        out = _pmap(point, list(enumerate(ns)), cfg.workers)
        curve = Curve(("x", "value", "std_error"))
        limit = Curve(("x", "value"))
        for n, (est, lim) in zip(ns, out):
            curve.add(n, est.total, est.mc_std_error)
            limit.add(n, lim)
        res.curves[f"distance_sigma_{_label(s)}.csv"] = curve
        res.curves[f"limit_sigma_{_label(s)}.csv"] = limit
        rel = curve.column("value") / limit.column("value") - 1.0
        res.check(
            f"sigma={s!r}: relative gap to the limit shrinks from n={ns[0]} to n={ns[-1]}",
            abs(rel[-1]) < abs(rel[0]),
            f"{rel[0]:+.4f} -> {rel[-1]:+.4f}",
        )
    return res


def run_bound_check(cfg: ExperimentConfig) -> ExperimentResult:
    p = cfg.params
    i1 = ScaledLevyIntensity(GammaJump(p["alpha1"]), p["base1"])
    i2 = ScaledLevyIntensity(GammaJump(p["alpha2"]), p["base2"])
    f = p["test_function"]
    reps = list(range(p["replicates"]))

    def point(r):
        rng = substream(cfg.seed, cfg.experiment, "replicate", r)
        return check_integral_bound(i1, i2, f, p["epsilon"], p["mc_budget"], rng)

    res = ExperimentResult()
    curve = Curve(("x", "value", "std_error", "bound"))
    out = _pmap(point, reps, cfg.workers)
    for r, b in zip(reps, out):
        curve.add(r, b.lhs, b.std_error, b.rhs)
    res.curves["bound.csv"] = curve
    held = sum(b.holds for b in out)
    res.check("lhs <= rhs + 3 standard errors in every replicate", held == len(out), f"{held}/{len(out)}")
    return res


_GAUSS01 = "gaussian(mean=0.0, var=1.0)"
_POWERS_OF_TWO = "2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096"

EXPERIMENTS: dict[str, Experiment] = {
    e.name: e
    for e in [
        Experiment(
            "prior_gamma_jump",
            False,
            (Param("alpha1", "float", "1.0"), Param("alpha2_grid", "float_grid", "1:20:0.5")),
            run_prior_gamma_jump,
            "J(alpha1, alpha2) for scaled gamma priors with its C log bound",
        ),
        Experiment(
            "prior_gengamma_jump",
            False,
            (Param("sigma_grid", "sigma_grid", "0.05:0.95:0.05"),),
            run_prior_gengamma_jump,
            "J(sigma) between scaled generalized gamma and gamma priors",
        ),
        Experiment(
            "posterior_dp_jump",
            False,
            (
                Param("alpha1", "float", "1.0"),
                Param("alpha2_grid", "float_grid", "2, 5, 10"),
                Param("n_grid", "n_grid", "0:100"),
            ),
            run_posterior_dp_jump,
            "posterior jump component of two gamma CRMs as n grows",
        ),
        Experiment(
            "posterior_dp_atoms_same_alpha",
            True,
            (
                Param("alpha_grid", "float_grid", "1, 10, 100"),
                Param("base1", "mixture", "gaussian(mean=1.0, var=1.0)"),
                Param("base2", "mixture", "gaussian(mean=2.0, var=1.0)"),
                Param("data_law", "mixture", "poisson(mean=1.0)"),
                Param("n_grid", "n_grid", "0:200"),
                Param("data_file", "path", None, "CSV with one observation per line"),
            ),
            run_posterior_dp_atoms_same_alpha,
            "posterior atom component with equal alpha and different bases",
        ),
        Experiment(
            "posterior_dp_atoms_same_base",
            True,
            (
                Param("alpha1", "float", "10.0"),
                Param("alpha2_grid", "float_grid", "50, 100, 500"),
                Param("base", "mixture", "gaussian(mean=1.0, var=1.0)"),
                Param("data_law", "mixture", "poisson(mean=1.0)"),
                Param("n_grid", "n_grid", "1:200"),
                Param("data_file", "path", None, "CSV with one observation per line"),
            ),
            run_posterior_dp_atoms_same_base,
            "posterior atom component with a common base and different alphas",
        ),
        Experiment(
            "latent_phase",
            False,
            (
                Param("alpha", "float", "1.0"),
                Param("sigma", "sigma", "0.3"),
                Param("lam", "float", "1.0"),
                Param("n_grid", "n_grid", "16, 64, 256, 1024, 4096, 16384, 65536"),
            ),
            run_latent_phase,
            "E[(1+U)^sigma] against r_n in the three k regimes",
        ),
        Experiment(
            "merging_dp_data",
            True,
            (
                Param("alpha", "float", "100.0"),
                Param("sigma_grid", "sigma_grid", "0.25, 0.5, 0.75"),
                Param("base", "mixture", _GAUSS01),
                Param("alpha_bar", "float", "1.0"),
                Param("n_grid", "n_grid", _POWERS_OF_TWO),
                Param("mc_budget", "int", "100"),
                Param("data_file", "path", None, "CSV with one observation per line"),
            ),
            run_merging_dp_data,
            "generalized gamma vs gamma posteriors on Dirichlet process data",
        ),
        Experiment(
            "merging_py_data",
            True,
            (
                Param("alpha", "float", "100.0"),
                Param("sigma_grid", "sigma_grid", "0.25, 0.5, 0.75"),
                Param("base", "mixture", _GAUSS01),
                Param("alpha_bar", "float", "1.0"),
                Param("sigma_bar", "sigma", "0.9"),
                Param("n_grid", "n_grid", _POWERS_OF_TWO),
                Param("mc_budget", "int", "100"),
                Param("data_file", "path", None, "CSV with one observation per line"),
            ),
            run_merging_py_data,
            "generalized gamma vs gamma posteriors on Pitman-Yor data",
        ),
        Experiment(
            "continuous_limit",
            True,
            (
                Param("alpha", "float", "100.0"),
                Param("sigma_grid", "sigma_grid", "0.25, 0.5, 0.75"),
                Param("base", "mixture", _GAUSS01),
                Param("data_law", "mixture", _GAUSS01),
                Param("n_grid", "n_grid", "250, 500, 1000, 2000"),
                Param("mc_budget", "int", "100"),
                Param("data_file", "path", None, "CSV with one observation per line"),
            ),
            run_continuous_limit,
            "posterior distance for i.i.d. continuous data against its limit",
        ),
        Experiment(
            "bound_check",
            True,
            (
                Param("alpha1", "float", "1.0"),
                Param("alpha2", "float", "2.0"),
                Param("base1", "mixture", _GAUSS01),
                Param("base2", "mixture", _GAUSS01),
                Param("test_function", "test_function", "clamped_linear(lo=-1.0, hi=1.0, slope=1.0)"),
                Param("epsilon", "float", "1e-06"),
                Param("mc_budget", "int", "4000"),
                Param("replicates", "int", "20"),
            ),
            run_bound_check,
            "integral functional W1 against max(sup f, Lip f) d_W",
        ),
    ]
}


# --------------------------------------------------------------------------
# running and writing
# --------------------------------------------------------------------------


def run(cfg: ExperimentConfig) -> ExperimentResult:
    return EXPERIMENTS[cfg.experiment].runner(cfg)


def summary_text(cfg: ExperimentConfig, result: ExperimentResult) -> str:
    lines = [f"experiment: {cfg.experiment}", f"seed: {cfg.seed if cfg.seed is not None else '-'}"]
    for k in sorted(cfg.raw):
        lines.append(f"param {k} = {cfg.raw[k]}  [{cfg.sources[k]}]")
    for note in cfg.notes:
        lines.append(f"note: {note}")
    for name in sorted(result.curves):
        lines.append(f"curve: {name} ({len(result.curves[name].rows)} rows)")
    for c in result.checks:
        status = "PASS" if c.passed else "FAIL"
        lines.append(f"{status} {c.name}" + (f": {c.detail}" if c.detail else ""))
    lines.append(f"overall: {'PASS' if result.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def write_outputs(cfg: ExperimentConfig, result: ExperimentResult, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    # render everything first so a numerical failure leaves no partial output
    rendered = {name: curve.to_csv() for name, curve in result.curves.items()}
    for name, text in sorted(rendered.items()):
        (out / name).write_text(text)
    for name, seq in result.data.items():
        seq.to_csv(out / name)
    (out / "summary.txt").write_text(summary_text(cfg, result))
    return out


def format_defaults(name: str) -> str:
    """A config document listing every parameter of ``name`` with its default."""
    exp = EXPERIMENTS[name]
    lines = [f"experiment = {name}"]
    for p in exp.params:
        if p.default is not None:
            lines.append(f"{p.name} = {p.default}")
    return "\n".join(lines) + "\n"


__all__ = [
    "EXPERIMENTS",
    "Experiment",
    "ExperimentConfig",
    "ExperimentResult",
    "Curve",
    "Check",
    "NumericalFailure",
    "parse_config",
    "parse_seed",
    "run",
    "write_outputs",
    "summary_text",
    "format_defaults",
    "format_grid",
    "atom_component",
]
