"""Gamma and upper incomplete gamma functions of real order.

``gamma_upper(z, t)`` is the non-regularized upper incomplete gamma
function ``int_t^inf x**(z-1) exp(-x) dx`` for orders ``z`` in ``[-1, 1]``,
including the exponential integral ``E1(t) = gamma_upper(0, t)``.
All functions accept scalars or numpy arrays for ``t``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import zeta as _zeta

EULER_GAMMA = 0.57721566490153286060651209008240243

# below this point the power series is used, above it the continued fraction
SERIES_SWITCH = 1.0

_MAX_TERMS = 500
_EPS = 1e-17


def gamma(z: float) -> float:
    """Gamma function for ``z > 0``."""
    if not z > 0:
        raise ValueError(f"gamma requires z > 0, got {z!r}")
    return math.gamma(z)


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise ValueError("incomplete gamma requires t > 0")
    return t


def _cf_upper(z, t):
    """Modified Lentz continued fraction for Gamma(z, t), valid for any real z and t >~ 1."""
    tiny = 1e-300
    b = t + 1.0 - z
    c = np.full_like(t, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(t.shape, dtype=bool)
    for i in range(1, _MAX_TERMS):
        an = -i * (i - z)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > _EPS
        if not active.any():
            break
    # exp(-t) t**z computed in log space to delay underflow
    return np.exp(z * np.log(t) - t) * h


# log Gamma(1 + z) = -EULER_GAMMA z + sum_{k>=2} (-1)^k zeta(k) z^k / k, |z| < 1
_ZETA = [float(v) for v in _zeta(np.arange(2, 48), 1.0)]


def lgamma1p(z: float) -> float:
    """``log Gamma(1 + z)`` without forming ``1 + z`` (accurate for small ``|z|``)."""
    if abs(z) >= 0.3:
        return math.lgamma(1.0 + z)
    acc = 0.0
    zk = -z
    for k, zeta_k in enumerate(_ZETA, start=2):
        zk *= -z
        acc += zeta_k * zk / k
    return -EULER_GAMMA * z + acc


def _head(z, t):
    """Gamma(z) - t**z / z, stable as z -> 0; equals -EULER_GAMMA - log(t) at z = 0."""
    logt = np.log(t)
    if z == 0.0:
        return -EULER_GAMMA - logt
    a = z * logt
    b = lgamma1p(z)
    return np.exp(a) * np.expm1(b - a) / z


def _series_upper(z, t):
    """Gamma(z, t) = [Gamma(z) - t^z/z] - sum_{k>=1} (-1)^k t^(z+k) / (k! (z+k)); needs z > -1."""
    total = _head(z, t)
    tz = np.exp(z * np.log(t))
    term = np.ones_like(t)
    acc = np.zeros_like(t)
    for k in range(1, _MAX_TERMS):
        term = term * (-t) / k
        contrib = term / (z + k)
        acc += contrib
        if np.all(np.abs(contrib) <= _EPS * np.abs(acc)):
            break
    return total - tz * acc


def _cf_upper_scalar(z: float, t: float) -> float:
    tiny = 1e-300
    b = t + 1.0 - z
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -i * (i - z)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) <= _EPS:
            break
    return math.exp(z * math.log(t) - t) * h


def _series_upper_scalar(z: float, t: float) -> float:
    logt = math.log(t)
    if z == 0.0:
        total = -EULER_GAMMA - logt
    else:
        a = z * logt
        total = math.exp(a) * math.expm1(lgamma1p(z) - a) / z
    term = 1.0
    acc = 0.0
    for k in range(1, _MAX_TERMS):
        term *= -t / k
        contrib = term / (z + k)
        acc += contrib
        if abs(contrib) <= _EPS * abs(acc):
            break
    return total - math.exp(z * logt) * acc


def _gamma_upper_scalar(z: float, t: float) -> float:
    if z == 1.0:
        return math.exp(-t)
    if t > SERIES_SWITCH:
        return _cf_upper_scalar(z, t)
    if z >= -0.5:
        return _series_upper_scalar(z, t)
    return (_series_upper_scalar(z + 1.0, t) - math.exp(z * math.log(t) - t)) / z


def gamma_upper(z: float, t):
    """Upper incomplete gamma ``Gamma(z, t)`` for ``z`` in ``[-1, 1]`` and ``t > 0``."""
    z = float(z)
    if not -1.0 <= z <= 1.0:
        raise ValueError(f"order z must lie in [-1, 1], got {z!r}")
    if isinstance(t, (float, int)) and not isinstance(t, bool):
        if not t > 0:
            raise ValueError("incomplete gamma requires t > 0")
        # plain-float fast path for root finding
        return _gamma_upper_scalar(z, float(t))
    t = _check_t(t)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    out = np.empty_like(t)
    if z == 1.0:
        out = np.exp(-t)
        return float(out[0]) if scalar else out
    large = t > SERIES_SWITCH
    if large.any():
        out[large] = _cf_upper(z, t[large])
    small = ~large
    if small.any():
        ts = t[small]
        if z >= -0.5:
            out[small] = _series_upper(z, ts)
        else:
            # one downward recurrence step from order z + 1 in (0, 0.5)
            out[small] = (_series_upper(z + 1.0, ts) - np.exp(z * np.log(ts) - ts)) / z
    return float(out[0]) if scalar else out


def exp1(t):
    """Exponential integral ``E1(t) = Gamma(0, t)``."""
    return gamma_upper(0.0, t)


def gamma_upper_regularized(a: float, t):
    """``Gamma(a, t) / Gamma(a)`` for ``a`` in ``(0, 1]``."""
    return gamma_upper(a, t) / gamma(a)


def gamma_lower_regularized(a: float, t):
    """``gamma(a, t) / Gamma(a)`` for ``a`` in ``(0, 1]``, accurate for small ``t``."""
    if not 0.0 < a <= 1.0:
        raise ValueError(f"order a must lie in (0, 1], got {a!r}")
    t = _check_t(t)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    out = np.empty_like(t)
    large = t > SERIES_SWITCH
    if large.any():
        out[large] = 1.0 - gamma_upper_regularized(a, t[large])
    small = ~large
    if small.any():
        ts = t[small]
        # t^a e^-t sum_k t^k / (a (a+1) ... (a+k))
        term = np.full_like(ts, 1.0 / a)
        acc = term.copy()
        for k in range(1, _MAX_TERMS):
            term = term * ts / (a + k)
            acc += term
            if np.all(term <= _EPS * acc):
                break
        out[small] = np.exp(a * np.log(ts) - ts - math.lgamma(a)) * acc
    return float(out[0]) if scalar else out


def gamma_upper_deriv_order(z: float, t: float, rtol: float = 1e-12) -> float:
    """Derivative of ``Gamma(z, t)`` with respect to the order ``z``.

    Evaluates ``int_t^inf log(x) x**(z-1) exp(-x) dx`` by adaptive quadrature.
    """
    from .quadrature import integrate

    if not t > 0:
        raise ValueError(f"t must be positive, got {t!r}")

    def integrand(x):
        return np.log(x) * np.exp((z - 1.0) * np.log(x) - x)

    # past t + 800 the integrand underflows
    upper = t + 800.0
    pts = [t]
    x = max(t, 1e-300)
    while x * 2.0 < upper:
        x = x * 2.0 if x >= 1.0 else min(x * 2.0, 1.0)
        pts.append(x)
    pts.append(upper)
    if t < 1.0 < upper and 1.0 not in pts:
        pts.append(1.0)
    pts = sorted(set(pts))
    return integrate(integrand, pts, rtol=rtol, atol=1e-300)
