"""Closed-form asymptotic quantities for posterior merging.

Rates for the latent variable in the three regimes of ``k`` versus
``n**(sigma/(1+sigma))``, the Dirichlet process atom prefactor, the
generalized gamma merging rate and the continuous-data limit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .measures import Mixture1D
from .posterior import latent_mode
from .quadrature import bisect
from .transport import jump_gengamma_gamma, w1_mixture

__all__ = [
    "Regime",
    "RegimeSpec",
    "critical_gamma",
    "latent_rate",
    "latent_mode",
    "canonical_k",
    "dp_atom_prefactor",
    "dp_atom_argmax",
    "dp_atom_bound",
    "gengamma_merge_rate",
    "continuous_data_limit",
]


class Regime(str, enum.Enum):
    SUB_CRITICAL = "sub_critical"
    CRITICAL = "critical"
    SUPER_CRITICAL = "super_critical"


@dataclass(frozen=True)
class RegimeSpec:
    kind: Regime
    lam: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Regime(self.kind))
        if (self.kind is Regime.CRITICAL) != (self.lam is not None):
            raise ValueError("lam is required for the critical regime and only there")
        if self.lam is not None and not self.lam > 0:
            raise ValueError("lam must be positive")


def critical_gamma(alpha: float, sigma: float, lam: float) -> float:
    """Unique root of ``sigma lam / x + x**(-(1+sigma)/sigma) = alpha``.

    The left side decreases from ``+inf`` to ``0`` on ``(0, inf)``.
    """

    def g(x):
        return sigma * lam / x + x ** (-(1.0 + sigma) / sigma) - alpha

    lo, hi = 1.0, 1.0
    while g(lo) <= 0:
        lo *= 0.5
    while g(hi) >= 0:
        hi *= 2.0
    return bisect(g, lo, hi, xtol=1e-15, rtol=1e-16)


def latent_rate(alpha: float, sigma: float, regime: RegimeSpec, n: int, k: Optional[int] = None) -> float:
    """Rate ``r_n`` with ``(1 + U)**sigma / r_n -> 1``; ``k`` is needed only in the super-critical regime."""
    if n < 1:
        raise ValueError("n must be at least 1")
    p = sigma / (1.0 + sigma)
    if regime.kind is Regime.SUB_CRITICAL:
        return alpha ** (-p) * n**p
    if regime.kind is Regime.CRITICAL:
        return critical_gamma(alpha, sigma, regime.lam) * n**p
    if k is None:
        raise ValueError("the super-critical rate needs k")
    return sigma / alpha * k


def canonical_k(regime: RegimeSpec, sigma: float, n: int) -> int:
    """Reference sequences ``ceil(log n)``, ``ceil(lam n**(sigma/(1+sigma)))`` and ``ceil(n**0.9)``, capped at ``n``."""
    if regime.kind is Regime.SUB_CRITICAL:
        k = math.ceil(math.log(n))
    elif regime.kind is Regime.CRITICAL:
        k = math.ceil(regime.lam * n ** (sigma / (1.0 + sigma)))
    else:
        k = math.ceil(n**0.9)
    return max(1, min(n, k))


def dp_atom_prefactor(alpha1: float, alpha2: float, n: float) -> float:
    """``omega(n) = (alpha2 - alpha1) n / ((alpha1 + n)(alpha2 + n))``."""
    if not 0 < alpha1 <= alpha2:
        raise ValueError("need 0 < alpha1 <= alpha2")
    return (alpha2 - alpha1) * n / ((alpha1 + n) * (alpha2 + n))


def dp_atom_argmax(alpha1: float, alpha2: float) -> int:
    """Integer maximizer of ``omega``: the better of floor and ceil of ``sqrt(alpha1 alpha2)``."""
    root = math.sqrt(alpha1 * alpha2)
    cands = {max(0, math.floor(root)), math.ceil(root)}
    return max(sorted(cands), key=lambda m: dp_atom_prefactor(alpha1, alpha2, m))


def gengamma_merge_rate(sigma: float, n: int, k: int) -> float:
    """``max(n**(-1/(1+sigma)), k/n)``."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    return max(n ** (-1.0 / (1.0 + sigma)), k / n)


def continuous_data_limit(sigma: float, base: Mixture1D, data_law: Mixture1D) -> float:
    """``sigma (J(sigma) + W1(P0, P))``: the limiting distance for i.i.d. continuous data."""
    return sigma * (jump_gengamma_gamma(sigma) + w1_mixture(base, data_law))


def dp_atom_bound(alpha1: float, base1: Mixture1D, alpha2: float, base2: Mixture1D, values) -> float:
    """Upper bound on the atom component for data ``values`` (``alpha1 <= alpha2``):
    ``alpha1/(alpha1+n) W1(P0^1, P0^2) + omega(n) W1(P_n, P0^2)`` with ``P_n`` the empirical law.
    """
    n = len(values)
    if n < 1:
        raise ValueError("need at least one observation")
    first = alpha1 / (alpha1 + n) * w1_mixture(base1, base2)
    return first + dp_atom_prefactor(alpha1, alpha2, n) * w1_mixture(Mixture1D.empirical(values), base2)
