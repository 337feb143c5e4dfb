"""Posterior scaled intensities of gamma and generalized gamma CRMs.

The generalized gamma posterior depends on a latent variable ``U``.  Its
transform ``x = (1 + U)**sigma`` has the log-concave density
``exp(-f(x))`` on ``(1, inf)`` with

    f(x) = -(k - 1) log x + (alpha / sigma) x - (n - 1) log(1 - x**(-1/sigma)),

which is what the sampler and the quadrature routines work with.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional

import numpy as np

from .measures import Atom, FixedAtom, GammaJump, GenGammaJump, Mixture1D, ScaledLevyIntensity
from .quadrature import bisect, gk15, integrate
from .transport import DistanceReport, Method, dw_homogeneous, jump_gengamma_gamma, w1_extended, w1_mixture

DEFAULT_MC_BUDGET = 1000

# smallest float above 1, where f is still finite
_X_MIN = float(np.nextafter(1.0, 2.0))


@dataclass(frozen=True)
class PosteriorState:
    """Observation summary: distinct values in order of first appearance with multiplicities."""

    n: int
    distinct: tuple = ()

    def __post_init__(self):
        distinct = tuple((float(x), int(m)) for x, m in self.distinct)
        object.__setattr__(self, "distinct", distinct)
        if any(m < 1 for _, m in distinct):
            raise ValueError("multiplicities must be positive")
        if sum(m for _, m in distinct) != self.n:
            raise ValueError("multiplicities must sum to n")
        if len({x for x, _ in distinct}) != len(distinct):
            raise ValueError("distinct values must be pairwise different")

    @classmethod
    def from_values(cls, values: Iterable[float]) -> "PosteriorState":
        counts: dict[float, int] = {}
        for v in values:
            v = float(v)
            counts[v] = counts.get(v, 0) + 1
        return cls(sum(counts.values()), tuple(counts.items()))

    @property
    def k(self) -> int:
        return len(self.distinct)

    @property
    def values(self) -> np.ndarray:
        return np.array([x for x, _ in self.distinct], dtype=float)

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([m for _, m in self.distinct], dtype=float)


# --------------------------------------------------------------------------
# posterior intensities
# --------------------------------------------------------------------------


def posterior_gamma(alpha: float, base: Mixture1D, data: PosteriorState) -> ScaledLevyIntensity:
    """Scaled gamma posterior: jump ``Gamma(alpha + n)`` on ``alpha/(alpha+n) P0 + sum n_i/(alpha+n) delta``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    total = alpha + data.n
    parts = [(alpha / total, base)] + [(m / total, Mixture1D.atom(x)) for x, m in data.distinct]
    return ScaledLevyIntensity(GammaJump(total), Mixture1D.combine(parts))


def c_factor(alpha: float, sigma: float, data: PosteriorState, u: float) -> float:
    """``c = alpha (1 + u)**sigma + n - k sigma``."""
    return alpha * (1.0 + u) ** sigma + data.n - data.k * sigma


def posterior_gengamma(
    alpha: float, sigma: float, base: Mixture1D, data: PosteriorState, u: float
) -> ScaledLevyIntensity:
    """Scaled generalized gamma posterior given the latent draw ``u``."""
    if not 0 < sigma < 1:
        raise ValueError("sigma must lie in (0, 1)")
    if not u >= 0:
        raise ValueError("latent draw must be nonnegative")
    c = c_factor(alpha, sigma, data, u)
    atoms = tuple(FixedAtom(x, GammaJump(c), (m - sigma) / c) for x, m in data.distinct)
    return ScaledLevyIntensity(GenGammaJump(c, sigma), base, alpha * (1.0 + u) ** sigma / c, atoms)


# --------------------------------------------------------------------------
# latent variable
# --------------------------------------------------------------------------


class EnvelopeError(RuntimeError):
    """The rejection envelope could not be built."""


@dataclass(frozen=True)
class LatentLaw:
    alpha: float
    sigma: float
    n: int
    k: int

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not 0 < self.sigma < 1:
            raise ValueError("sigma must lie in (0, 1)")
        if self.n < 0 or self.k < 0 or self.k > self.n or (self.n > 0 and self.k < 1):
            raise ValueError(f"need 1 <= k <= n, got n={self.n}, k={self.k}")

    @classmethod
    def from_state(cls, alpha: float, sigma: float, data: PosteriorState) -> "LatentLaw":
        return cls(alpha, sigma, data.n, data.k)

    # x-space potential ------------------------------------------------
    def _log1m(self, x):
        # log(1 - x**(-1/sigma)) without cancellation near x = 1
        return np.log(-np.expm1(-np.log(x) / self.sigma))

    def f(self, x):
        """Convex potential ``f`` (density of ``(1+U)**sigma`` is ``exp(-f)``)."""
        x = np.asarray(x, dtype=float)
        out = -(self.k - 1) * np.log(x) + (self.alpha / self.sigma) * x
        if self.n > 1:
            out = out - (self.n - 1) * self._log1m(x)
        return out

    def _gap(self, x):
        # x**(1 + 1/sigma) - x
        return x * np.expm1(np.log(x) / self.sigma)

    def f_prime(self, x):
        x = np.asarray(x, dtype=float)
        out = -(self.k - 1) / x + self.alpha / self.sigma
        if self.n > 1:
            out = out - (self.n - 1) / (self.sigma * self._gap(x))
        return out

    def f_second(self, x):
        x = np.asarray(x, dtype=float)
        out = (self.k - 1) / x**2
        if self.n > 1:
            # d/dx of -(n-1) / (sigma g(x)) with g' = (1 + 1/sigma) x**(1/sigma) - 1
            g = self._gap(x)
            gp = (1.0 + 1.0 / self.sigma) * np.exp(np.log(x) / self.sigma) - 1.0
            out = out + (self.n - 1) * gp / (self.sigma * g**2)
        return out

    @cached_property
    def mode(self) -> float:
        return latent_mode(self.alpha, self.sigma, self.n, self.k)

    @cached_property
    def _window(self) -> tuple[float, float]:
        """Interval of ``x`` outside which ``exp(f(mode) - f)`` is below ``e**-45``."""
        m = self.mode
        fm = float(self.f(m))
        level = 45.0

        def h(x):
            return float(self.f(x)) - fm - level

        if m <= 1.0 or h(_X_MIN) <= 0:
            lo = 1.0
        else:
            lo = bisect(h, _X_MIN, m, xtol=0.0, rtol=1e-13)
        hi = m + 1.0
        while h(hi) <= 0:
            hi = m + 2.0 * (hi - m)
        hi = bisect(h, m, hi, xtol=0.0, rtol=1e-13)
        return lo, hi

    @cached_property
    def _panels(self):
        lo, hi = self._window
        m = self.mode
        fm = float(self.f(m))
        pts = np.union1d(np.linspace(lo, hi, 401), [m] if lo < m < hi else [])

        def dens(x):
            return np.exp(fm - self.f(x))

        a, b = pts[:-1], pts[1:]
        vals, _ = gk15(dens, a, b)
        return pts, np.concatenate([[0.0], np.cumsum(vals)]), dens

    def normalizer(self) -> float:
        """``int exp(f(mode) - f(x)) dx`` by adaptive quadrature."""
        lo, hi = self._window
        fm = float(self.f(self.mode))
        pts = np.union1d([lo, hi], [self.mode] if lo < self.mode < hi else [])
        pts = np.union1d(pts, np.linspace(lo, hi, 33))
        return integrate(lambda x: np.exp(fm - self.f(x)), pts, rtol=1e-12, atol=1e-300)

    def expectation(self, g=lambda x: x) -> float:
        """``E[g((1 + U)**sigma)]`` by quadrature."""
        lo, hi = self._window
        fm = float(self.f(self.mode))
        pts = np.union1d(np.linspace(lo, hi, 33), [self.mode] if lo < self.mode < hi else [])
        num = integrate(lambda x: g(x) * np.exp(fm - self.f(x)), pts, rtol=1e-12, atol=1e-300)
        return num / self.normalizer()

    def cdf_x(self, x):
        """CDF of ``(1 + U)**sigma`` by quadrature on a fixed panel grid."""
        pts, cum, dens = self._panels
        scalar = np.ndim(x) == 0
        x = np.clip(np.atleast_1d(np.asarray(x, dtype=float)), pts[0], pts[-1])
        idx = np.clip(np.searchsorted(pts, x, side="right") - 1, 0, pts.size - 2)
        partial, _ = gk15(dens, pts[idx], x)
        out = (cum[idx] + partial) / cum[-1]
        return float(out[0]) if scalar else out


def latent_logdensity(law: LatentLaw, u):
    """``(n-1) log u + (k sigma - n) log(1+u) - (alpha/sigma)(1+u)**sigma`` up to a constant."""
    u = np.asarray(u, dtype=float)
    if np.any(~(u > 0)):
        raise ValueError("latent density is defined for u > 0")
    a, s = law.alpha, law.sigma
    return (law.n - 1) * np.log(u) + (law.k * s - law.n) * np.log1p(u) - (a / s) * np.exp(s * np.log1p(u))


def latent_mode(alpha: float, sigma: float, n: int, k: int) -> float:
    """Minimizer on ``(1, inf)`` of ``f``, i.e. the root of
    ``(k-1)/x + (n-1)/(sigma (x**(1+1/sigma) - x)) = alpha/sigma``.

    Returns ``1`` when the left side is below ``alpha/sigma`` everywhere
    (``n = k = 1``: the density of ``x`` is then a shifted exponential).
    """
    law = LatentLaw(alpha, sigma, n, k)
    if n <= 1:
        return 1.0

    def fp(x):
        return float(law.f_prime(x))

    # f' -> -inf at 1+ and f' -> alpha/sigma > 0 at infinity
    lo = _X_MIN
    hi = 2.0
    while fp(hi) <= 0:
        hi *= 2.0
    return bisect(fp, lo, hi, xtol=1e-13, rtol=1e-15)


@dataclass(frozen=True)
class _Piece:
    lo: float
    hi: float
    x0: float  # tangent point
    slope: float


@dataclass(frozen=True)
class LatentSample:
    u: np.ndarray
    x: np.ndarray
    acceptance_rate: float


def _tangent_points(law: LatentLaw) -> list[float]:
    """Mode plus the two points where ``f`` exceeds its minimum by one."""
    m = law.mode
    if m <= 1.0:
        # n = 1: f is linear, a single tangent is exact
        return [1.0]
    fm = float(law.f(m))
    lo_win, hi_win = law._window

    def h(x):
        return float(law.f(x)) - fm - 1.0

    pts = []
    if m > 1.0 and lo_win > 1.0 and h(lo_win) > 0:
        pts.append(bisect(h, lo_win, m, xtol=0.0, rtol=1e-12))
    pts.append(m)
    pts.append(bisect(h, m, hi_win, xtol=0.0, rtol=1e-12))
    return pts


def _envelope(law: LatentLaw):
    """Pieces of ``exp(-L)`` with ``L = max`` of tangents of the convex ``f``; ``L <= f`` everywhere."""
    xs = _tangent_points(law)
    fs = [float(law.f(x)) for x in xs]
    ds = [float(law.f_prime(x)) for x in xs]
    if law.mode > 1.0:
        ds[xs.index(law.mode)] = 0.0
    if not ds[-1] > 0:
        raise EnvelopeError(f"right tangent slope {ds[-1]!r} is not positive")
    # intersections of consecutive tangents
    edges = [1.0]
    for i in range(len(xs) - 1):
        if ds[i + 1] == ds[i]:
            raise EnvelopeError("parallel tangents")
        z = (fs[i] - fs[i + 1] + ds[i + 1] * xs[i + 1] - ds[i] * xs[i]) / (ds[i + 1] - ds[i])
        if not xs[i] <= z <= xs[i + 1]:
            raise EnvelopeError(f"tangent intersection {z!r} outside [{xs[i]!r}, {xs[i + 1]!r}]")
        edges.append(z)
    edges.append(math.inf)
    pieces = [_Piece(edges[i], edges[i + 1], xs[i], ds[i]) for i in range(len(xs))]
    return pieces, xs, fs, ds


def _piece_mass(p: _Piece, fx0: float, fref: float) -> float:
    """``int_lo^hi exp(fref - fx0 - slope (x - x0)) dx``."""
    c = fref - fx0
    if p.slope == 0.0:
        return math.exp(c) * (p.hi - p.lo)
    e_lo = c - p.slope * (p.lo - p.x0)
    if math.isinf(p.hi):
        return math.exp(e_lo) / p.slope
    e_hi = c - p.slope * (p.hi - p.x0)
    # (exp(e_lo) - exp(e_hi)) / slope, stable for either sign of the slope
    big = max(e_lo, e_hi)
    return math.exp(big) * abs(-math.expm1(-abs(e_lo - e_hi))) / abs(p.slope)


def _piece_inverse(p: _Piece, v: np.ndarray) -> np.ndarray:
    """Inverse CDF of the truncated exponential ``exp(-slope x)`` on the piece, ``v`` uniform."""
    if p.slope == 0.0:
        return p.lo + v * (p.hi - p.lo)
    if math.isinf(p.hi):
        return p.lo - np.log1p(-v) / p.slope
    width = p.hi - p.lo
    # solve (1 - exp(-s y)) / (1 - exp(-s w)) = v for y in [0, w]
    return p.lo - np.log1p(v * np.expm1(-p.slope * width)) / p.slope


def latent_sample(
    law: LatentLaw, rng: np.random.Generator, count: int, batch: Optional[int] = None
) -> LatentSample:
    """I.i.d. draws of ``U`` by rejection from a three-tangent piecewise-exponential envelope in ``x``."""
    if count < 1:
        raise ValueError("count must be at least 1")
    if law.n == 0:
        raise ValueError("latent variable is undefined without observations")
    pieces, xs, fs, _ = _envelope(law)
    fref = min(fs)
    masses = np.array([_piece_mass(p, fx, fref) for p, fx in zip(pieces, fs)])
    if not np.all(np.isfinite(masses)) or masses.sum() <= 0:
        raise EnvelopeError(f"envelope masses {masses!r} are not usable")
    probs = masses / masses.sum()
    batch = batch or max(64, 2 * count)
    accepted: list[np.ndarray] = []
    n_acc = 0
    n_prop = 0
    while n_acc < count:
        which = rng.choice(len(pieces), size=batch, p=probs)
        v = rng.random(batch)
        w = rng.random(batch)
        x = np.empty(batch)
        lenv = np.empty(batch)
        for i, p in enumerate(pieces):
            sel = which == i
            xi = _piece_inverse(p, v[sel])
            x[sel] = xi
            lenv[sel] = fs[i] + p.slope * (xi - p.x0)
        # accept with probability exp(L - f) <= 1
        ok = (x > 1.0) & (np.log(w) <= lenv - law.f(np.maximum(x, _X_MIN)))
        accepted.append(x[ok])
        n_acc += int(ok.sum())
        n_prop += batch
    xs_out = np.concatenate(accepted)[:count]
    u = np.expm1(np.log(xs_out) / law.sigma)
    return LatentSample(u=u, x=xs_out, acceptance_rate=n_acc / n_prop)


# --------------------------------------------------------------------------
# posterior distances
# --------------------------------------------------------------------------


def _require_atomless(base: Mixture1D):
    if not base.is_atomless:
        raise ValueError("base measure must be atomless")


def dw_posterior_dp(
    alpha1: float, base1: Mixture1D, alpha2: float, base2: Mixture1D, data: PosteriorState
) -> DistanceReport:
    """Distance between the posteriors of two scaled gamma CRMs given the same data."""
    _require_atomless(base1)
    _require_atomless(base2)
    return dw_homogeneous(posterior_gamma(alpha1, base1, data), posterior_gamma(alpha2, base2, data))


@dataclass(frozen=True)
class LatentTerms:
    """Summands of the posterior distance for one latent draw."""

    u: float
    jump_diffuse: float
    jump_atoms: float
    atom: float

    @property
    def total(self) -> float:
        return self.jump_diffuse + self.jump_atoms + self.atom


def gengamma_vs_dp_terms(
    alpha: float,
    sigma: float,
    base: Mixture1D,
    data: PosteriorState,
    u: float,
    dp_base: Optional[Mixture1D] = None,
) -> LatentTerms:
    """``J1^u``, ``J2^u`` and ``A^u`` for a fixed latent value ``u``.

    ``dp_base`` (the gamma posterior base, which does not depend on ``u``)
    may be passed in to avoid rebuilding it for every draw.
    """
    c = c_factor(alpha, sigma, data, u)
    dp_rate = alpha + data.n
    diffuse_w = alpha * (1.0 + u) ** sigma / c
    j1 = diffuse_w * w1_extended(GenGammaJump(c, sigma), GammaJump(dp_rate))
    if data.n > 0:
        j2 = (data.n - data.k * sigma) / c * w1_extended(GammaJump(c), GammaJump(dp_rate))
    else:
        j2 = 0.0
    if dp_base is None:
        dp_base = posterior_gamma(alpha, base, data).base
    gg_base = Mixture1D(
        [(diffuse_w * w, p) for w, p in base.components] + [((m - sigma) / c, Atom(x)) for x, m in data.distinct]
    )
    a = w1_mixture(gg_base, dp_base)
    return LatentTerms(float(u), j1, j2, a)


def dw_posterior_gengamma_vs_dp(
    alpha: float,
    sigma: float,
    base: Mixture1D,
    data: PosteriorState,
    mc: int = DEFAULT_MC_BUDGET,
    rng: Optional[np.random.Generator] = None,
    workers: int = 1,
) -> DistanceReport:
    """Monte Carlo estimate of the distance between generalized gamma and gamma posteriors.

    Both priors share ``alpha`` and ``base``.  The latent draws are made up
    front from ``rng``, so the estimate does not depend on ``workers``.
    """
    _require_atomless(base)
    if data.n == 0:
        j = jump_gengamma_gamma(sigma)
        return DistanceReport(total=j, jump_part=j, atom_part=0.0, method=Method.CLOSED_FORM_QUADRATURE)
    if mc < 2:
        raise ValueError("need at least two Monte Carlo draws for a standard error")
    if rng is None:
        raise ValueError("a seeded generator is required for Monte Carlo")
    draws = latent_sample(LatentLaw.from_state(alpha, sigma, data), rng, mc).u

    dp_base = posterior_gamma(alpha, base, data).base

    def one(u):
        return gengamma_vs_dp_terms(alpha, sigma, base, data, float(u), dp_base)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            terms = list(pool.map(one, draws))
    else:
        terms = [one(u) for u in draws]
    totals = np.array([t.total for t in terms])
    jumps = np.array([t.jump_diffuse + t.jump_atoms for t in terms])
    atoms = np.array([t.atom for t in terms])
    return DistanceReport(
        total=float(totals.mean()),
        jump_part=float(jumps.mean()),
        atom_part=float(atoms.mean()),
        method=Method.MONTE_CARLO,
        mc_std_error=float(totals.std(ddof=1) / math.sqrt(mc)),
        n_samples=mc,
    )
