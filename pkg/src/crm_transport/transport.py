"""Optimal transport distances between jump measures, base laws and scaled intensities.

``w1_extended`` is the extended Wasserstein distance between two measures on
``(0, inf)`` with unit first moment, computed as the L1 distance between
their tail integrals.  ``dw_homogeneous`` combines it with the classical
``W1`` between base laws into the nested distance between scaled Levy
intensities, when at least one of them is homogeneous.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import specfun
from .measures import (
    GammaJump,
    GenGammaJump,
    JumpFamily,
    Mixture1D,
    ScaledLevyIntensity,
    integrated_tail,
    integrated_tail_beyond,
)
from .quadrature import bisect, geometric_grid, integrate, scan_sign_changes

RTOL = 1e-11
ATOL = 1e-14
NORMALIZATION_TOL = 1e-9


class Method(str, enum.Enum):
    CLOSED_FORM_QUADRATURE = "closed_form_quadrature"
    CDF_INTEGRATION = "cdf_integration"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class DistanceReport:
    total: float
    jump_part: float
    atom_part: float
    method: Method
    mc_std_error: Optional[float] = None
    n_samples: Optional[int] = None


class CrossingError(RuntimeError):
    """The difference of two tail integrals has no detectable sign change."""


@dataclass(frozen=True)
class _ExpLaw:
    """Exponential(1) probability law on (0, inf); tail ``exp(-u)``, unit first moment."""

    def tail_integral(self, u):
        return np.exp(-np.asarray(u, dtype=float))

    def partial_mean(self, u):
        u = np.asarray(u, dtype=float)
        return -np.expm1(-u) - u * np.exp(-u)

    def first_moment(self) -> float:
        return 1.0


# --------------------------------------------------------------------------
# crossings of tail integrals
# --------------------------------------------------------------------------

_TBAR_LOCK = threading.Lock()
_TBAR: list[float] = []


def tbar() -> float:
    """Maximizer of ``t * Gamma(0, t)``, i.e. the root of ``Gamma(0, t) = exp(-t)``."""
    with _TBAR_LOCK:
        if not _TBAR:
            _TBAR.append(bisect(lambda t: specfun.exp1(t) - math.exp(-t), 0.05, 3.0, xtol=1e-15))
        return _TBAR[0]


def _difference(j1, j2):
    def d(u):
        return j1.tail_integral(u) - j2.tail_integral(u)

    return d


def _gamma_crossing(a1: float, a2: float) -> float:
    """Positive root of ``a1 Gamma(0, a1 u) = a2 Gamma(0, a2 u)`` using the bracket ``[tbar/r, tbar]``."""
    lo_rate, hi_rate = min(a1, a2), max(a1, a2)
    r = hi_rate / lo_rate
    tb = tbar()

    def g(t):
        return specfun.exp1(t) - r * specfun.exp1(r * t)

    t_star = bisect(g, tb / r, tb, xtol=0.0, rtol=1e-15)
    return t_star / lo_rate


def _rates(j) -> list[float]:
    return [getattr(j, "rate", 1.0)]


def crossings(j1, j2, n_scan: int = 300) -> list[float]:
    """All positive points where the tail integrals of ``j1`` and ``j2`` cross."""
    if isinstance(j1, GammaJump) and isinstance(j2, GammaJump):
        if j1.rate == j2.rate:
            return []
        return [_gamma_crossing(j1.rate, j2.rate)]
    rates = _rates(j1) + _rates(j2)
    lo = 1e-12 / max(rates)
    hi = 720.0 / min(rates)
    grid = np.geomspace(lo, hi, n_scan)
    d = _difference(j1, j2)

    def masked(u):
        u1 = j1.tail_integral(u)
        u2 = j2.tail_integral(u)
        diff = u1 - u2
        # differences at rounding level carry no sign information
        return np.where(np.abs(diff) > 1e-13 * (np.abs(u1) + np.abs(u2)), diff, 0.0)

    brackets = scan_sign_changes(masked, grid)
    return [bisect(lambda u: float(d(u)), a, b, xtol=0.0, rtol=1e-15) for a, b in brackets]


def _check_normalized(j):
    m = j.first_moment()
    if not abs(m - 1.0) <= NORMALIZATION_TOL:
        raise ValueError(f"{j!r} has first moment {m!r}, expected 1")


def _tail_l1(j1, j2, cross: list[float], rtol: float = RTOL, atol: float = ATOL) -> float:
    """``int_0^inf |U1 - U2|`` given every crossing point of the tails."""
    rates = _rates(j1) + _rates(j2)
    if cross:
        lo = min(cross) * 2.0 ** -30
        hi = max(cross) * 2.0 ** 12
    else:
        lo = 1e-9 / max(rates)
        hi = 100.0 / min(rates)
    # no crossing below lo or above hi: those pieces are exact differences of closed forms
    head = abs(float(integrated_tail(j1, lo) - integrated_tail(j2, lo)))
    tail = abs(float(integrated_tail_beyond(j1, hi) - integrated_tail_beyond(j2, hi)))
    pts = np.union1d(geometric_grid(lo, hi, 2.0), np.asarray(cross, dtype=float))
    d = _difference(j1, j2)
    middle = integrate(lambda u: np.abs(d(u)), pts, rtol=rtol, atol=atol)
    return head + middle + tail


def w1_extended(j1: JumpFamily, j2: JumpFamily, method: str = "quadrature") -> float:
    """Extended Wasserstein distance ``int_0^inf |U1(u) - U2(u)| du`` between unit-mean jump measures.

    ``method="quadrature"`` integrates ``|U1 - U2|`` adaptively with the
    integrand split at every crossing; ``method="exact"`` uses the closed-form
    integrated tails between crossings instead.
    """
    _check_normalized(j1)
    _check_normalized(j2)
    if j1 == j2:
        return 0.0
    cross = crossings(j1, j2)
    if method == "quadrature":
        return _tail_l1(j1, j2, cross)
    if method == "exact":
        if not cross:
            raise CrossingError(f"no crossing found between {j1!r} and {j2!r}")
        # Delta(u) = int_0^u (U1 - U2) vanishes at 0 and at infinity
        delta = [0.0] + [float(integrated_tail(j1, c) - integrated_tail(j2, c)) for c in cross] + [0.0]
        return math.fsum(abs(b - a) for a, b in zip(delta[:-1], delta[1:]))
    raise ValueError(f"unknown method {method!r}")


def jump_gamma_gamma(a1: float, a2: float) -> float:
    """Jump component between scaled gamma CRMs with total base measures ``a1`` and ``a2``."""
    if not (a1 > 0 and a2 > 0):
        raise ValueError("total base measures must be positive")
    return w1_extended(GammaJump(a1), GammaJump(a2))


_C_LOCK = threading.Lock()
_C_CACHE: dict[str, float] = {}


def constant_C() -> float:
    """``int_0^inf |Gamma(0, t) - exp(-t)| dt``, computed once per process."""
    with _C_LOCK:
        if "C" not in _C_CACHE:
            _C_CACHE["C"] = _tail_l1(GammaJump(1.0), _ExpLaw(), [tbar()], rtol=1e-13, atol=1e-15)
        return _C_CACHE["C"]


def jump_gengamma_gamma(sigma: float) -> float:
    """Prior distance between scaled generalized gamma and gamma CRMs with common ``alpha`` and base."""
    if not 0 < sigma < 1:
        raise ValueError(f"sigma must lie in (0, 1), got {sigma!r}")
    return w1_extended(GenGammaJump(1.0, sigma), GammaJump(1.0))


def jump_gengamma_gamma_slope_at_zero(rtol: float = 1e-8) -> float:
    """Derivative at ``sigma = 0`` of ``jump_gengamma_gamma``, via the order-derivative of ``Gamma(z, t)``."""
    deriv = np.vectorize(lambda t: specfun.gamma_upper_deriv_order(0.0, t, rtol=1e-12))

    def integrand(t):
        return np.abs(specfun.EULER_GAMMA * specfun.exp1(t) + deriv(t))

    pts = geometric_grid(1e-14, 64.0, 4.0)
    return integrate(integrand, pts, rtol=rtol, atol=1e-12)


# --------------------------------------------------------------------------
# classical W1 on the real line
# --------------------------------------------------------------------------


def w1_mixture(m1: Mixture1D, m2: Mixture1D, rtol: float = 1e-11, atol: float = 1e-14) -> float:
    """``W1(m1, m2) = int |F1(x) - F2(x)| dx`` on the real line."""
    if m1 == m2:
        return 0.0
    lo1, hi1 = m1.support_bounds()
    lo2, hi2 = m2.support_bounds()
    lo, hi = min(lo1, lo2), max(hi1, hi2)
    if not hi > lo:
        return 0.0
    pts = np.union1d(np.union1d(m1.breakpoints(), m2.breakpoints()), [lo, hi])
    pts = pts[(pts >= lo) & (pts <= hi)]
    if not (m1.has_continuous_part or m2.has_continuous_part):
        # both CDFs are step functions: the integrand is constant between breakpoints
        mids = 0.5 * (pts[:-1] + pts[1:])
        return float(np.sum(np.abs(m1.cdf(mids) - m2.cdf(mids)) * np.diff(pts)))
    sds = [s for m in (m1, m2) for s in m._gauss[2]]
    width = 0.5 * min(sds)
    gaps = np.diff(pts)
    extra = [np.linspace(a, b, int(math.ceil(g / width)) + 1)[1:-1] for a, b, g in zip(pts[:-1], pts[1:], gaps) if g > width]
    if extra:
        pts = np.union1d(pts, np.concatenate(extra))
    return integrate(lambda x: np.abs(m1.cdf(x) - m2.cdf(x)), pts, rtol=rtol, atol=atol)


# --------------------------------------------------------------------------
# nested distance between scaled intensities
# --------------------------------------------------------------------------


def _mixed_jump_distance(rho: JumpFamily, other: ScaledLevyIntensity) -> float:
    """``E_{Y ~ P0} W*(rho, rho_Y)`` for the location-dependent jumps of ``other``."""
    grouped: dict = {}
    for w, j, _ in other.jump_components():
        grouped[j] = grouped.get(j, 0.0) + w
    return math.fsum(w * w1_extended(rho, j) for j, w in grouped.items())


def dw_homogeneous(i1: ScaledLevyIntensity, i2: ScaledLevyIntensity) -> DistanceReport:
    """Nested OT distance when at least one intensity is homogeneous.

    ``d_W = W1(P0^1, P0^2) + E_{Y ~ P0^2} W*(rho^1, rho^2_Y)`` with ``rho^1``
    the location-free jump family.
    """
    if i1.is_homogeneous:
        jump = _mixed_jump_distance(i1.jump, i2)
    elif i2.is_homogeneous:
        jump = _mixed_jump_distance(i2.jump, i1)
    else:
        raise ValueError("no closed form: neither intensity is homogeneous")
    atom = w1_mixture(i1.base_measure(), i2.base_measure())
    return DistanceReport(total=jump + atom, jump_part=jump, atom_part=atom, method=Method.CLOSED_FORM_QUADRATURE)
