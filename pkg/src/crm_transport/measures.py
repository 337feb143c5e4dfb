"""Scaled Levy intensities and mixed probability measures on the real line.

A scaled Levy intensity is stored in canonical form: a jump family (a measure
on ``(0, inf)`` with unit first moment) attached to a base probability
measure, plus optional fixed atoms carrying their own jump families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Union

import numpy as np
from scipy import special as sps

from . import specfun
from .quadrature import integrate

WEIGHT_TOL = 1e-12


# --------------------------------------------------------------------------
# jump families
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GammaJump:
    """Scaled gamma jumps: density ``rate * exp(-rate*s) / s``."""

    rate: float

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"rate must be positive and finite, got {self.rate!r}")

    def density(self, s):
        s = np.asarray(s, dtype=float)
        return self.rate * np.exp(-self.rate * s) / s

    def tail_integral(self, u):
        return self.rate * specfun.gamma_upper(0.0, self.rate * np.asarray(u, dtype=float))

    def partial_mean(self, u):
        """``int_0^u s rho(ds)``."""
        return -np.expm1(-self.rate * np.asarray(u, dtype=float))

    def first_moment(self) -> float:
        return 1.0

    def with_rate(self, rate: float) -> "GammaJump":
        return GammaJump(rate)


@dataclass(frozen=True)
class GenGammaJump:
    """Scaled generalized gamma jumps: ``rate**(1-sigma)/Gamma(1-sigma) * exp(-rate*s) / s**(1+sigma)``."""

    rate: float
    sigma: float

    def __post_init__(self):
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"rate must be positive and finite, got {self.rate!r}")
        if not 0 < self.sigma < 1:
            raise ValueError(f"sigma must lie in (0, 1), got {self.sigma!r}")

    def density(self, s):
        s = np.asarray(s, dtype=float)
        logc = (1 - self.sigma) * math.log(self.rate) - math.lgamma(1 - self.sigma)
        return np.exp(logc - self.rate * s - (1 + self.sigma) * np.log(s))

    def tail_integral(self, u):
        t = self.rate * np.asarray(u, dtype=float)
        return self.rate / specfun.gamma(1 - self.sigma) * specfun.gamma_upper(-self.sigma, t)

    def partial_mean(self, u):
        return specfun.gamma_lower_regularized(1 - self.sigma, self.rate * np.asarray(u, dtype=float))

    def first_moment(self) -> float:
        return 1.0

    def with_rate(self, rate: float) -> "GenGammaJump":
        return GenGammaJump(rate, self.sigma)


JumpFamily = Union[GammaJump, GenGammaJump]


def tail_integral(j: JumpFamily, u):
    """Mass of ``j`` on ``(u, inf)``."""
    u = np.asarray(u, dtype=float)
    if np.any(~(u > 0)):
        raise ValueError("tail integral requires u > 0")
    out = j.tail_integral(u)
    return float(out) if np.ndim(out) == 0 else out


def integrated_tail(j: JumpFamily, u):
    """``int_0^u U(v) dv = u U(u) + int_0^u s rho(ds)`` in closed form."""
    u = np.asarray(u, dtype=float)
    return u * j.tail_integral(u) + j.partial_mean(u)


def integrated_tail_beyond(j: JumpFamily, u):
    """``int_u^inf U(v) dv = int_u^inf (s - u) rho(ds)`` in closed form."""
    u = np.asarray(u, dtype=float)
    return (1.0 - j.partial_mean(u)) - u * j.tail_integral(u)


def first_moment_by_quadrature(log_density, scale: float = 1.0) -> float:
    """``int_0^inf s * rho(s) ds`` from ``log rho`` for a density decaying like ``exp(-s/scale)``."""
    # in y = log s the integrand s**2 rho(s) decays at both ends, even for sigma near 1
    # exp(-700) stays a normal double, so log_density sees a positive argument
    lo, hi = max(math.log(scale) - 700.0, -700.0), math.log(scale * 800.0)
    pts = np.linspace(lo, hi, int(math.ceil((hi - lo) / 2.0)) + 1)
    return integrate(lambda y: np.exp(2.0 * y + log_density(np.exp(y))), pts, rtol=1e-12, atol=1e-300)


@dataclass(frozen=True)
class LevyDensity:
    """Unnormalized homogeneous jump density ``mass/Gamma(1-sigma) * exp(-rate*s) / s**(1+sigma)``.

    ``sigma = 0`` is the gamma CRM with total base measure ``mass`` and scale
    ``rate``; ``0 < sigma < 1`` is the generalized gamma CRM.
    """

    mass: float
    rate: float = 1.0
    sigma: float = 0.0

    def __post_init__(self):
        if not self.mass > 0 or not self.rate > 0:
            raise ValueError("mass and rate must be positive")
        if not 0 <= self.sigma < 1:
            raise ValueError(f"sigma must lie in [0, 1), got {self.sigma!r}")

    def log_density(self, s):
        s = np.asarray(s, dtype=float)
        logc = math.log(self.mass) - math.lgamma(1 - self.sigma)
        return logc - self.rate * s - (1 + self.sigma) * np.log(s)

    def density(self, s):
        return np.exp(self.log_density(s))

    def expected_total_mass(self) -> float:
        """Closed form ``mass * rate**(sigma-1)``."""
        return self.mass * self.rate ** (self.sigma - 1.0)


# --------------------------------------------------------------------------
# probability measures on the real line
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    x: float


@dataclass(frozen=True)
class Gaussian:
    mean: float
    var: float

    def __post_init__(self):
        if not self.var > 0:
            raise ValueError(f"variance must be positive, got {self.var!r}")

    @property
    def sd(self) -> float:
        return math.sqrt(self.var)


@dataclass(frozen=True)
class PoissonLaw:
    mean: float

    def __post_init__(self):
        if not self.mean > 0:
            raise ValueError(f"Poisson mean must be positive, got {self.mean!r}")

    def upper_cutoff(self, tol: float = 1e-15) -> int:
        """Smallest ``K`` with ``E[(X - K)+] < tol``."""
        k = int(math.ceil(self.mean))
        while sps.pdtrc(k, self.mean) * (k + 1) > tol and k < 10 ** 7:
            k += 1
        return k + 1


@dataclass(frozen=True)
class Empirical:
    points: tuple

    def __init__(self, points):
        pts = tuple(float(p) for p in points)
        if not pts:
            raise ValueError("empirical measure needs at least one point")
        object.__setattr__(self, "points", pts)


Part = Union[Atom, Gaussian, PoissonLaw, Empirical]


@dataclass(frozen=True)
class Mixture1D:
    """Finite mixture of atoms, Gaussians, Poisson laws and empirical measures."""

    components: tuple = field(default_factory=tuple)

    def __init__(self, components: Sequence[tuple]):
        comps = tuple((float(w), p) for w, p in components if float(w) != 0.0)
        if not comps:
            raise ValueError("mixture needs at least one component with positive weight")
        for w, p in comps:
            if w < 0 or not math.isfinite(w):
                raise ValueError(f"invalid weight {w!r}")
            if not isinstance(p, (Atom, Gaussian, PoissonLaw, Empirical)):
                raise TypeError(f"unsupported component {p!r}")
        total = math.fsum(w for w, _ in comps)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {total!r}, not 1")
        object.__setattr__(self, "components", comps)

    # constructors -------------------------------------------------------
    @classmethod
    def atom(cls, x: float) -> "Mixture1D":
        return cls([(1.0, Atom(x))])

    @classmethod
    def gaussian(cls, mean: float, var: float) -> "Mixture1D":
        return cls([(1.0, Gaussian(mean, var))])

    @classmethod
    def poisson(cls, mean: float) -> "Mixture1D":
        return cls([(1.0, PoissonLaw(mean))])

    @classmethod
    def empirical(cls, points) -> "Mixture1D":
        return cls([(1.0, Empirical(points))])

    @classmethod
    def from_atoms(cls, locations, weights) -> "Mixture1D":
        return cls([(w, Atom(x)) for x, w in zip(locations, weights)])

    @classmethod
    def combine(cls, parts: Sequence[tuple]) -> "Mixture1D":
        """Flatten ``[(weight, Mixture1D), ...]`` into one mixture."""
        comps = []
        for w, m in parts:
            for cw, p in m.components:
                comps.append((w * cw, p))
        return cls(comps)

    # compiled representation ---------------------------------------------
    @cached_property
    def _atoms(self):
        locs, wts = [], []
        for w, p in self.components:
            if isinstance(p, Atom):
                locs.append(p.x)
                wts.append(w)
            elif isinstance(p, Empirical):
                locs.extend(p.points)
                wts.extend([w / len(p.points)] * len(p.points))
        if not locs:
            return np.zeros(0), np.zeros(0)
        locs = np.asarray(locs, dtype=float)
        wts = np.asarray(wts, dtype=float)
        order = np.argsort(locs, kind="stable")
        locs, wts = locs[order], wts[order]
        uniq, start = np.unique(locs, return_index=True)
        merged = np.add.reduceat(wts, start)
        return uniq, np.cumsum(merged)

    @cached_property
    def _gauss(self):
        g = [(w, p.mean, p.sd) for w, p in self.components if isinstance(p, Gaussian)]
        arr = np.asarray(g, dtype=float).reshape(-1, 3)
        return arr[:, 0], arr[:, 1], arr[:, 2]

    @cached_property
    def _poisson(self):
        return [(w, p) for w, p in self.components if isinstance(p, PoissonLaw)]

    @property
    def has_continuous_part(self) -> bool:
        return self._gauss[0].size > 0

    @property
    def atom_locations(self) -> np.ndarray:
        return self._atoms[0]

    @property
    def is_atomless(self) -> bool:
        return all(isinstance(p, Gaussian) for _, p in self.components)

    # evaluation ----------------------------------------------------------
    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        locs, cum = self._atoms
        if locs.size:
            idx = np.searchsorted(locs, x, side="right")
            out += np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)
        w, m, s = self._gauss
        if w.size:
            out += (w[:, None] * sps.ndtr((x.reshape(1, -1) - m[:, None]) / s[:, None])).sum(0).reshape(x.shape)
        for wp, p in self._poisson:
            k = np.floor(x)
            out += wp * np.where(k >= 0, sps.pdtr(np.maximum(k, 0), p.mean), 0.0)
        return np.clip(out, 0.0, 1.0) if out.ndim else float(min(max(out, 0.0), 1.0))

    def first_moment(self) -> float:
        total = 0.0
        for w, p in self.components:
            if isinstance(p, Atom):
                total += w * p.x
            elif isinstance(p, Gaussian):
                total += w * p.mean
            elif isinstance(p, PoissonLaw):
                total += w * p.mean
            else:
                total += w * math.fsum(p.points) / len(p.points)
        return total

    def abs_moment(self, y0: float = 0.0) -> float:
        """``E|X - y0|``."""
        total = 0.0
        for w, p in self.components:
            if isinstance(p, Atom):
                total += w * abs(p.x - y0)
            elif isinstance(p, Gaussian):
                d = p.mean - y0
                s = p.sd
                total += w * (d * (1 - 2 * sps.ndtr(-d / s)) + 2 * s * math.exp(-0.5 * (d / s) ** 2) / math.sqrt(2 * math.pi))
            elif isinstance(p, PoissonLaw):
                kmax = p.upper_cutoff()
                ks = np.arange(kmax + 1)
                pm = np.exp(ks * math.log(p.mean) - p.mean - sps.gammaln(ks + 1.0))
                total += w * float(np.sum(pm * np.abs(ks - y0)))
            else:
                total += w * math.fsum(abs(q - y0) for q in p.points) / len(p.points)
        return total

    def support_bounds(self, z: float = 9.0) -> tuple[float, float]:
        """Interval outside which both CDF tails contribute less than ``sd * phi(z)/z**2``."""
        lo, hi = math.inf, -math.inf
        locs = self._atoms[0]
        if locs.size:
            lo, hi = min(lo, locs[0]), max(hi, locs[-1])
        for _, m, s in zip(*self._gauss):
            lo, hi = min(lo, m - z * s), max(hi, m + z * s)
        for _, p in self._poisson:
            lo, hi = min(lo, 0.0), max(hi, float(p.upper_cutoff()))
        return float(lo), float(hi)

    def breakpoints(self) -> np.ndarray:
        pts = [self._atoms[0]]
        for _, p in self._poisson:
            pts.append(np.arange(0, p.upper_cutoff() + 1, dtype=float))
        return np.unique(np.concatenate(pts)) if pts else np.zeros(0)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        weights = np.array([w for w, _ in self.components])
        comp = rng.choice(len(weights), size=size, p=weights / weights.sum())
        out = np.empty(size)
        for i, (_, p) in enumerate(self.components):
            sel = comp == i
            m = int(sel.sum())
            if m == 0:
                continue
            if isinstance(p, Atom):
                out[sel] = p.x
            elif isinstance(p, Gaussian):
                out[sel] = p.mean + p.sd * rng.standard_normal(m)
            elif isinstance(p, PoissonLaw):
                out[sel] = rng.poisson(p.mean, m)
            else:
                out[sel] = np.asarray(p.points)[rng.integers(len(p.points), size=m)]
        return out


def cdf(m: Mixture1D, x):
    return m.cdf(x)


def first_moment(m: Mixture1D) -> float:
    return m.first_moment()


# --------------------------------------------------------------------------
# scaled Levy intensities
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FixedAtom:
    location: float
    jump: JumpFamily
    weight: float


@dataclass(frozen=True)
class ScaledLevyIntensity:
    """``weight * jump (x) base + sum_i w_i * jump_i (x) delta_{x_i}``.

    The mean measure ``weight * base + sum_i w_i delta_{x_i}`` is a probability.
    """

    jump: JumpFamily
    base: Mixture1D
    weight: float = 1.0
    fixed_atoms: tuple = ()

    def __post_init__(self):
        atoms = tuple(self.fixed_atoms)
        object.__setattr__(self, "fixed_atoms", atoms)
        if self.weight < 0 or any(a.weight < 0 for a in atoms):
            raise ValueError("weights must be nonnegative")
        total = math.fsum([self.weight] + [a.weight for a in atoms])
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"mean measure has mass {total!r}, not 1")
        for j in [self.jump] + [a.jump for a in atoms]:
            if abs(j.first_moment() - 1.0) > WEIGHT_TOL:
                raise ValueError(f"jump family {j!r} is not normalized")

    @property
    def is_homogeneous(self) -> bool:
        return all(a.jump == self.jump for a in self.fixed_atoms)

    def base_measure(self) -> Mixture1D:
        """The mean probability measure ``P0``."""
        parts = [(self.weight, self.base)] if self.weight > 0 else []
        parts += [(a.weight, Mixture1D.atom(a.location)) for a in self.fixed_atoms if a.weight > 0]
        return Mixture1D.combine(parts)

    def jump_components(self):
        """``[(weight, jump, location law), ...]`` covering the whole intensity."""
        out = [(self.weight, self.jump, self.base)] if self.weight > 0 else []
        out += [(a.weight, a.jump, Mixture1D.atom(a.location)) for a in self.fixed_atoms if a.weight > 0]
        return out


def scale_to_unit_mean(levy: LevyDensity, base: Mixture1D, mean: float | None = None) -> ScaledLevyIntensity:
    """Rescale a homogeneous CRM so that its expected total mass is one.

    The scaled intensity is ``m * rho(m s)`` with ``m`` the expected total
    mass, computed by quadrature when not supplied.
    """
    if mean is None:
        mean = first_moment_by_quadrature(levy.log_density, scale=1.0 / levy.rate)
    if not (math.isfinite(mean) and mean > 0):
        raise ValueError(f"expected total mass must be positive and finite, got {mean!r}")
    rate = levy.rate * mean
    if levy.sigma == 0.0:
        # m * mass * exp(-rate m s) / (m s) keeps coefficient mass; unit mean forces rate == mass
        jump = GammaJump(rate)
        coef = levy.mass
    else:
        jump = GenGammaJump(rate, levy.sigma)
        coef = levy.mass * mean ** (-levy.sigma)
    expected = rate ** (1.0 - levy.sigma)
    if abs(coef - expected) > 1e-8 * expected:
        raise ValueError(f"supplied mean {mean!r} does not normalize the jump density")
    return ScaledLevyIntensity(jump, base)
