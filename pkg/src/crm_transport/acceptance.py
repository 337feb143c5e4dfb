"""Acceptance suite: thirteen numbered criteria with tolerances and runtime limits.

Every criterion writes one CSV (``criterion_NN.csv``) so that the
determinism criterion can compare two runs byte for byte.
"""

from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy import special as sps

from . import asymptotics as asy
from .experiments import Curve, atom_component
from .measures import Atom, Empirical, GammaJump, Gaussian, GenGammaJump, Mixture1D, PoissonLaw, ScaledLevyIntensity
from .posterior import LatentLaw, PosteriorState, dw_posterior_dp, dw_posterior_gengamma_vs_dp, latent_sample
from .simulate import ClampedLinear, check_integral_bound, gen_iid, substream
from .transport import (
    constant_C,
    jump_gamma_gamma,
    jump_gengamma_gamma,
    w1_extended,
    w1_mixture,
)

DEFAULT_SEED = 0


@dataclass(frozen=True)
class Outcome:
    passed: bool
    detail: str
    curve: Curve


@dataclass(frozen=True)
class Criterion:
    number: int
    title: str
    limit_seconds: Optional[float]
    fn: Callable[[int], Outcome]


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float
    limit_seconds: Optional[float]

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        limit = f" (limit {self.limit_seconds:g} s)" if self.limit_seconds is not None else ""
        return f"[{status}] {self.number:2d}. {self.title}: {self.detail}; {self.seconds:.2f} s{limit}"


def _rng(seed: int, number: int) -> np.random.Generator:
    return substream(seed, "acceptance", number)


# --------------------------------------------------------------------------
# criteria
# --------------------------------------------------------------------------


def riemann_C(points: int = 2_000_000) -> float:
    """Midpoint sum of ``|E1(t) - exp(-t)|`` on a log grid, with scipy's ``exp1`` as an independent oracle."""
    y = np.linspace(math.log(1e-14), math.log(60.0), points + 1)
    mid = 0.5 * (y[:-1] + y[1:])
    t = np.exp(mid)
    return float(np.sum(np.abs(sps.exp1(t) - np.exp(-t)) * t) * (y[1] - y[0]))


def c01_constant(seed: int) -> Outcome:
    C = constant_C()
    oracle = riemann_C()
    curve = Curve(("x", "value"))
    curve.add(0, C)
    curve.add(1, oracle)
    ok = 0.55 <= C <= 0.57 and abs(C - oracle) <= 1e-6
    return Outcome(ok, f"C = {C:.10f}, Riemann oracle {oracle:.10f}", curve)


def c02_slope(seed: int) -> Outcome:
    s = 1e-3
    slope = jump_gengamma_gamma(s) / s
    curve = Curve(("x", "value"))
    curve.add(s, slope)
    return Outcome(0.77 <= slope <= 0.81, f"J(1e-3)/1e-3 = {slope:.6f}", curve)


def c03_prior_gamma(seed: int) -> Outcome:
    C = constant_C()
    grid = [1.5, 2.0, 5.0, 10.0, 20.0]
    vals = [jump_gamma_gamma(1.0, a) for a in grid]
    curve = Curve(("x", "value", "bound"))
    for a, v in zip(grid, vals):
        curve.add(a, v, C * math.log(a))
    bound_ok = all(v <= C * math.log(a) for a, v in zip(grid, vals))
    incr = all(b > a for a, b in zip(vals, vals[1:]))
    eps = 0.02
    resid = abs(jump_gamma_gamma(1.0, 1.0 + eps) - C * eps + C * eps**2 / 2) / eps**2
    curve.add(1.0 + eps, resid, 0.2 * C)
    ok = bound_ok and incr and resid <= 0.2 * C
    return Outcome(ok, f"bound {bound_ok}, increasing {incr}, expansion residual/eps^2 = {resid:.4f} <= {0.2 * C:.4f}", curve)


def c04_dp_jump(seed: int) -> Outcome:
    C = constant_C()
    a1, a2 = 1.0, 5.0
    ns = list(range(1, 101)) + [1000]
    vals = [jump_gamma_gamma(a1 + n, a2 + n) for n in ns]
    curve = Curve(("x", "value", "bound"))
    for n, v in zip(ns, vals):
        curve.add(n, v, C * math.log((a2 + n) / (a1 + n)))
    ratio = 1000 * vals[-1] / (C * (a2 - a1))
    decreasing = all(b < a for a, b in zip(vals[:100], vals[1:100]))
    bound = all(v <= C * math.log((a2 + n) / (a1 + n)) for n, v in zip(ns, vals))
    ok = abs(ratio - 1) <= 0.05 and decreasing and bound
    return Outcome(ok, f"nJ/(4C) at n=1000 = {ratio:.5f}, decreasing {decreasing}, bound {bound}", curve)


def c05_atoms_same_alpha(seed: int) -> Outcome:
    b1, b2 = Mixture1D.gaussian(1.0, 1.0), Mixture1D.gaussian(2.0, 1.0)
    data = gen_iid(Mixture1D.poisson(1.0), 100, _rng(seed, 5))
    w = w1_mixture(b1, b2)
    curve = Curve(("x", "value", "bound"))
    gap = 0.0
    for a in (1.0, 10.0, 100.0):
        for n in (0, 10, 100):
            v = atom_component(a, b1, a, b2, data.summary(n))
            ref = a / (a + n) * w
            gap = max(gap, abs(v - ref))
            curve.add(n, v, ref)
    return Outcome(gap <= 1e-8, f"max |A - alpha/(alpha+n) W1| = {gap:.2e}", curve)


def c06_atoms_same_base(seed: int) -> Outcome:
    base = Mixture1D.gaussian(1.0, 1.0)
    data = gen_iid(Mixture1D.poisson(1.0), 200, _rng(seed, 6))
    curve = Curve(("x", "value"))
    vals = []
    for n in range(1, 201):
        v = atom_component(10.0, base, 500.0, base, data.summary(n))
        vals.append(v)
        curve.add(n, v)
    n_star = 1 + int(np.argmax(vals))
    return Outcome(40 <= n_star <= 100, f"argmax n* = {n_star} (window [40, 100])", curve)


def c07_dp_merging(seed: int) -> Outcome:
    b1, b2 = Mixture1D.gaussian(1.0, 1.0), Mixture1D.gaussian(2.0, 1.0)
    data = gen_iid(Mixture1D.poisson(1.0), 10_000, _rng(seed, 7))
    curve = Curve(("x", "value"))
    scaled = []
    for n in (100, 1000, 10_000):
        d = dw_posterior_dp(1.0, b1, 5.0, b2, data.summary(n)).total
        scaled.append(n * d)
        curve.add(n, n * d)
    ratio = max(scaled) / min(scaled)
    return Outcome(ratio <= 5.0, "n d_W = " + ", ".join(f"{v:.4f}" for v in scaled) + f"; max/min = {ratio:.3f}", curve)


def c08_latent_phase(seed: int) -> Outcome:
    sigma, alpha, n = 0.3, 1.0, 10_000
    curve = Curve(("x", "value", "bound"))
    ratios = []
    for i, reg in enumerate(
        [asy.RegimeSpec("sub_critical"), asy.RegimeSpec("critical", 1.0), asy.RegimeSpec("super_critical")]
    ):
        k = asy.canonical_k(reg, sigma, n)
        e = LatentLaw(alpha, sigma, n, k).expectation()
        r = asy.latent_rate(alpha, sigma, reg, n, k)
        ratios.append(e / r)
        curve.add(i, e, r)
    ok = all(0.8 <= q <= 1.25 for q in ratios)
    return Outcome(ok, "E/r_n = " + ", ".join(f"{q:.4f}" for q in ratios), curve)


def c09_sampler(seed: int) -> Outcome:
    n = 1000
    law = LatentLaw(100.0, 0.3, n, math.ceil(math.log(n)))
    smp = latent_sample(law, _rng(seed, 9), 100_000)
    x = np.sort(smp.x)
    F = law.cdf_x(x)
    m = x.size
    ks = float(max(np.max(np.arange(1, m + 1) / m - F), np.max(F - np.arange(m) / m)))
    curve = Curve(("x", "value"))
    curve.add(0, ks)
    curve.add(1, smp.acceptance_rate)
    ok = ks < 0.02 and smp.acceptance_rate > 0.2
    return Outcome(ok, f"KS = {ks:.5f}, acceptance rate = {smp.acceptance_rate:.3f}", curve)


def c10_continuous_limit(seed: int) -> Outcome:
    alpha, sigma, n = 100.0, 0.5, 2000
    base = Mixture1D.gaussian(0.0, 1.0)
    data = gen_iid(base, n, _rng(seed, 10))
    est = dw_posterior_gengamma_vs_dp(alpha, sigma, base, data.summary(n), mc=500, rng=substream(seed, "acceptance", 10, 1))
    lim = asy.continuous_data_limit(sigma, base, Mixture1D.empirical(data.values))
    rel = est.total / lim - 1.0
    curve = Curve(("x", "value", "std_error", "bound"))
    curve.add(n, est.total, est.mc_std_error, lim)
    return Outcome(
        abs(rel) <= 0.15,
        f"estimate {est.total:.5f} +- {est.mc_std_error:.5f}, limit {lim:.5f}, relative gap {rel:+.4f}",
        curve,
    )


def random_jump(rng: np.random.Generator):
    rate = float(10.0 ** rng.uniform(-1.0, 2.0))
    if rng.random() < 0.5:
        return GammaJump(rate)
    return GenGammaJump(rate, float(rng.uniform(0.05, 0.95)))


def random_mixture(rng: np.random.Generator) -> Mixture1D:
    m = int(rng.integers(1, 4))
    w = rng.dirichlet(np.ones(m))
    w[-1] = 1.0 - float(np.sum(w[:-1]))
    parts = []
    for wi in w:
        kind = int(rng.integers(4))
        if kind == 0:
            parts.append((wi, Gaussian(float(rng.uniform(-3, 3)), float(10.0 ** rng.uniform(-1, 0.5)))))
        elif kind == 1:
            parts.append((wi, Atom(float(rng.uniform(-3, 3)))))
        elif kind == 2:
            parts.append((wi, PoissonLaw(float(rng.uniform(0.5, 3.0)))))
        else:
            parts.append((wi, Empirical(rng.uniform(-3, 3, size=3))))
    return Mixture1D(parts)


def _metric_violations(dist, items, slack=1e-9):
    a, b, c = items
    sym = 0
    tri = 0
    vals = {}
    for (p, q), (x, y) in {("a", "b"): (a, b), ("b", "c"): (b, c), ("a", "c"): (a, c)}.items():
        d1, d2 = dist(x, y), dist(y, x)
        if d1 != d2:
            sym += 1
        vals[p + q] = d1
    ab, bc, ac = vals["ab"], vals["bc"], vals["ac"]
    for lhs, r1, r2 in ((ac, ab, bc), (ab, ac, bc), (bc, ab, ac)):
        if lhs > r1 + r2 + slack:
            tri += 1
    ident = sum(dist(x, x) != 0.0 for x in items)
    ident += sum((vals[k] > 0.0) != (x != y) for k, (x, y) in zip(("ab", "bc", "ac"), ((a, b), (b, c), (a, c))))
    return sym, tri, ident, max(ab, bc, ac)


def c11_metric(seed: int) -> Outcome:
    rng = _rng(seed, 11)
    curve = Curve(("x", "value"))
    totals = {"jump": [0, 0, 0, 0.0], "mixture": [0, 0, 0, 0.0]}
    for i in range(200):
        js = [random_jump(rng) for _ in range(3)]
        s, t, d, mx = _metric_violations(w1_extended, js)
        tj = totals["jump"]
        tj[0] += s
        tj[1] += t
        tj[2] += d
        tj[3] = max(tj[3], mx)
        ms = [random_mixture(rng) for _ in range(3)]
        s, t, d, _ = _metric_violations(w1_mixture, ms)
        tm = totals["mixture"]
        tm[0] += s
        tm[1] += t
        tm[2] += d
        curve.add(i, mx)
    ok = all(v[0] == 0 and v[1] == 0 and v[2] == 0 for v in totals.values()) and totals["jump"][3] <= 2.0
    detail = "; ".join(
        f"{k}: symmetry {v[0]}, triangle {v[1]}, identity {v[2]} violations" for k, v in totals.items()
    )
    return Outcome(ok, detail + f"; max W* = {totals['jump'][3]:.4f}", curve)


def c12_bound(seed: int) -> Outcome:
    base = Mixture1D.gaussian(0.0, 1.0)
    i1, i2 = ScaledLevyIntensity(GammaJump(1.0), base), ScaledLevyIntensity(GammaJump(2.0), base)
    f = ClampedLinear(-1.0, 1.0, 1.0)
    curve = Curve(("x", "value", "std_error", "bound"))
    held = 0
    for r in range(20):
        b = check_integral_bound(i1, i2, f, 1e-6, 4000, substream(seed, "acceptance", 12, r))
        held += b.holds
        curve.add(r, b.lhs, b.std_error, b.rhs)
    return Outcome(held == 20, f"bound held in {held}/20 seeds", curve)


CRITERIA: list[Criterion] = [
    Criterion(1, "constant C", 1.0, c01_constant),
    Criterion(2, "J'(0) by finite difference", 5.0, c02_slope),
    Criterion(3, "prior gamma jump bound and expansion", 10.0, c03_prior_gamma),
    Criterion(4, "DP posterior jump asymptotics", 30.0, c04_dp_jump),
    Criterion(5, "DP atom component, same alpha", 10.0, c05_atoms_same_alpha),
    Criterion(6, "DP atom component, same base", 60.0, c06_atoms_same_base),
    Criterion(7, "DP merging rate", 120.0, c07_dp_merging),
    Criterion(8, "latent phase transition", 60.0, c08_latent_phase),
    Criterion(9, "latent sampler", 60.0, c09_sampler),
    Criterion(10, "continuous-data limit", 300.0, c10_continuous_limit),
    Criterion(11, "metric properties", 60.0, c11_metric),
    Criterion(12, "integral functional bound", 120.0, c12_bound),
]


def _write(curve: Curve, out_dir: Path, number: int) -> None:
    (out_dir / f"criterion_{number:02d}.csv").write_text(curve.to_csv())


def _run_one(c: Criterion, seed: int, out_dir: Path) -> CriterionResult:
    t0 = time.perf_counter()
    try:
        outcome = c.fn(seed)
    except Exception as exc:  # a crash is a failed criterion, reported with its message
        return CriterionResult(c.number, c.title, False, f"error: {exc!r}", time.perf_counter() - t0, c.limit_seconds)
    secs = time.perf_counter() - t0
    _write(outcome.curve, out_dir, c.number)
    in_time = c.limit_seconds is None or secs < c.limit_seconds
    detail = outcome.detail if in_time else outcome.detail + "; over time limit"
    return CriterionResult(c.number, c.title, outcome.passed and in_time, detail, secs, c.limit_seconds)


def _determinism(seed: int, first_dir: Path, numbers) -> CriterionResult:
    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        second = Path(tmp)
        for c in CRITERIA:
            if c.number in numbers:
                _write(c.fn(seed).curve, second, c.number)
        names = sorted(p.name for p in first_dir.glob("criterion_*.csv") if p.name != "criterion_13.csv")
        differ = [n for n in names if not (second / n).exists() or (second / n).read_bytes() != (first_dir / n).read_bytes()]
        curve = Curve(("x", "value"))
        for n in names:
            curve.add(int(n[10:12]), float(n not in differ))
        _write(curve, first_dir, 13)
    ok = bool(names) and not differ
    detail = f"{len(names) - len(differ)}/{len(names)} CSVs byte-identical" + (f"; differ: {', '.join(differ)}" if differ else "")
    return CriterionResult(13, "determinism", ok, detail, time.perf_counter() - t0, None)


def run_acceptance(
    seed: int = DEFAULT_SEED,
    out_dir=None,
    only=None,
    echo: Optional[Callable[[str], None]] = print,
) -> list[CriterionResult]:
    """Run the criteria (all, or the numbers in ``only``) and return their results."""
    numbers = set(only) if only else set(range(1, 14))
    results = []
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(out_dir) if out_dir is not None else Path(tmp)
        out.mkdir(parents=True, exist_ok=True)
        for c in CRITERIA:
            if c.number in numbers:
                r = _run_one(c, seed, out)
                results.append(r)
                if echo:
                    echo(r.line())
        if 13 in numbers:
            r = _determinism(seed, out, numbers - {13})
            results.append(r)
            if echo:
                echo(r.line())
    return results
