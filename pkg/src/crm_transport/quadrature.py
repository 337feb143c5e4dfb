"""Adaptive Gauss-Kronrod quadrature and bracketing root finders.

The integrators evaluate the integrand on whole arrays of nodes at once, so
integrands must be numpy-vectorized.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

# 15-point Kronrod nodes (non-negative half) and weights, with the embedded 7-point Gauss rule
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG_FULL = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes: +-xgk[1], +-xgk[3], +-xgk[5], 0
_WG_FULL[[1, 3, 5]] = _WG[:3]
_WG_FULL[7] = _WG[3]
_WG_FULL[[13, 11, 9]] = _WG[:3]


class QuadratureError(RuntimeError):
    """Adaptive integration failed to reach the requested tolerance."""


def gk15(f: Callable[[np.ndarray], np.ndarray], a: np.ndarray, b: np.ndarray):
    """Kronrod estimate and |Kronrod - Gauss| error for each panel ``[a_i, b_i]``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    k = half * (fx @ _WK)
    g = half * (fx @ _WG_FULL)
    return k, np.abs(k - g)


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    breakpoints: Sequence[float],
    rtol: float = 1e-10,
    atol: float = 1e-13,
    max_iter: int = 60,
    max_panels: int = 200_000,
    full_output: bool = False,
):
    """Integrate ``f`` over ``[breakpoints[0], breakpoints[-1]]``.

    Each interval between consecutive breakpoints starts as one panel; panels
    are bisected until the summed error estimate is below
    ``max(atol, rtol * |integral|)``.
    """
    pts = np.asarray(breakpoints, dtype=float)
    if pts.ndim != 1 or pts.size < 2:
        raise ValueError("need at least two breakpoints")
    if np.any(np.diff(pts) < 0):
        raise ValueError("breakpoints must be nondecreasing")
    keep = np.diff(pts) > 0
    a = pts[:-1][keep]
    b = pts[1:][keep]
    if a.size == 0:
        return (0.0, 0.0) if full_output else 0.0
    done_val = 0.0
    done_err = 0.0
    val, err = gk15(f, a, b)
    for _ in range(max_iter):
        total = done_val + val.sum()
        total_err = done_err + err.sum()
        tol = max(atol, rtol * abs(total))
        if total_err <= tol or not np.isfinite(total_err):
            break
        # retire panels whose error is already negligible, bisect the rest
        share = tol / (2.0 * max(a.size, 1))
        refine = err > share
        if not refine.any():
            refine = err >= err.max()
        done_val += val[~refine].sum()
        done_err += err[~refine].sum()
        a, b = a[refine], b[refine]
        m = 0.5 * (a + b)
        # stop splitting once panels hit floating resolution
        splittable = (m > a) & (m < b)
        if not splittable.all():
            v, e = gk15(f, a[~splittable], b[~splittable])
            done_val += v.sum()
            done_err += e.sum()
            a, b, m = a[splittable], b[splittable], m[splittable]
            if a.size == 0:
                val = np.zeros(0)
                err = np.zeros(0)
                break
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
        if a.size > max_panels:
            raise QuadratureError(f"panel budget exceeded ({a.size} panels)")
        val, err = gk15(f, a, b)
    total = done_val + val.sum()
    total_err = done_err + err.sum()
    if not np.isfinite(total):
        raise QuadratureError("non-finite integral")
    if total_err > 1e3 * max(atol, rtol * abs(total)):
        raise QuadratureError(f"tolerance not reached: estimate {total!r}, error {total_err!r}")
    if full_output:
        return float(total), float(total_err)
    return float(total)


def geometric_grid(lo: float, hi: float, ratio: float = 2.0) -> np.ndarray:
    """Points ``lo, lo*ratio, ...`` up to and including ``hi`` (requires ``0 < lo < hi``)."""
    if not 0 < lo < hi:
        raise ValueError(f"need 0 < lo < hi, got {lo!r}, {hi!r}")
    n = max(1, int(math.ceil(math.log(hi / lo) / math.log(ratio))))
    return np.geomspace(lo, hi, n + 1)


def bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: float = 1e-12,
    rtol: float = 4e-16,
    max_iter: int = 400,
) -> float:
    """Root of a continuous ``f`` inside a sign-changing bracket ``[lo, hi]``."""
    flo = f(lo)
    fhi = f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError(f"no sign change on [{lo!r}, {hi!r}]: f = {flo!r}, {fhi!r}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= max(xtol, rtol * abs(mid)) or mid in (lo, hi):
            return mid
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bisect_vec(
    f: Callable[[np.ndarray], np.ndarray],
    lo: np.ndarray,
    hi: np.ndarray,
    iters: int = 60,
    log_space: bool = False,
) -> np.ndarray:
    """Elementwise bisection for an increasing-or-decreasing ``f`` with ``f(lo) * f(hi) <= 0``.

    A fixed iteration count keeps the work (and therefore results) independent
    of the batch composition.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    if log_space:
        lo, hi = np.log(lo), np.log(hi)
        g = lambda y: f(np.exp(y))  # noqa: E731
    else:
        g = f
    flo_pos = g(lo) > 0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        same = (g(mid) > 0) == flo_pos
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    mid = 0.5 * (lo + hi)
    return np.exp(mid) if log_space else mid


def scan_sign_changes(f: Callable[[np.ndarray], np.ndarray], grid: np.ndarray, floor: float = 0.0):
    """Brackets ``(grid[i], grid[i+1])`` on which ``f`` changes sign.

    Grid points where ``|f| <= floor`` are ignored.
    """
    vals = np.asarray(f(grid), dtype=float)
    usable = np.abs(vals) > floor
    xs = grid[usable]
    signs = np.sign(vals[usable])
    idx = np.nonzero(signs[:-1] != signs[1:])[0]
    return [(float(xs[i]), float(xs[i + 1])) for i in idx]
