"""Data generators and a truncated CRM sampler.

Random streams are numpy ``PCG64`` generators seeded by
``SeedSequence(seed, spawn_key=keys)``, so every named substream is a pure
function of the master seed and its key path.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Union

import numpy as np

from .measures import Mixture1D, ScaledLevyIntensity
from .posterior import PosteriorState
from .quadrature import bisect_vec
from .transport import dw_homogeneous

# --------------------------------------------------------------------------
# random streams
# --------------------------------------------------------------------------


def _key(k: Union[int, str]) -> int:
    if isinstance(k, str):
        return zlib.crc32(k.encode("utf-8"))
    if k < 0:
        raise ValueError("stream keys must be nonnegative")
    return int(k)


def substream(seed: int, *keys: Union[int, str]) -> np.random.Generator:
    """Independent generator for the key path ``keys`` under the master ``seed``."""
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_key(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


# --------------------------------------------------------------------------
# data sequences
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DataSequence:
    values: tuple

    def __init__(self, values):
        object.__setattr__(self, "values", tuple(float(v) for v in values))

    def __len__(self) -> int:
        return len(self.values)

    def summary(self, m: int) -> PosteriorState:
        """Counts of the first ``m`` observations."""
        if not 0 <= m <= len(self.values):
            raise ValueError(f"prefix length {m} outside [0, {len(self.values)}]")
        return PosteriorState.from_values(self.values[:m])

    def distinct_counts(self) -> np.ndarray:
        """``k_m`` for ``m = 1, ..., len``."""
        seen: set = set()
        out = np.empty(len(self.values), dtype=np.int64)
        for i, v in enumerate(self.values):
            seen.add(v)
            out[i] = len(seen)
        return out

    def to_csv(self, path) -> None:
        Path(path).write_text("".join(f"{v!r}\n" for v in self.values))

    @classmethod
    def from_csv(cls, path) -> "DataSequence":
        lines = Path(path).read_text().splitlines()
        return cls(float(s) for s in (ln.strip() for ln in lines) if s)


def gen_iid(law: Mixture1D, n: int, rng: np.random.Generator) -> DataSequence:
    if n < 1:
        raise ValueError("n must be at least 1")
    return DataSequence(law.sample(rng, n))


def gen_crp(alpha_bar: float, base: Mixture1D, n: int, rng: np.random.Generator) -> DataSequence:
    """Blackwell-MacQueen urn for a Dirichlet process with concentration ``alpha_bar``."""
    return gen_pitman_yor(alpha_bar, 0.0, base, n, rng)


def gen_pitman_yor(
    alpha_bar: float, sigma_bar: float, base: Mixture1D, n: int, rng: np.random.Generator
) -> DataSequence:
    """Two-parameter urn: a new value with probability ``(a + k s)/(a + i)``,
    value ``j`` with probability ``(n_j - s)/(a + i)``.

    Each step uses one uniform from ``rng`` plus one base draw when a new
    value appears, so a shorter run is a prefix of a longer one.
    """
    if not alpha_bar > 0:
        raise ValueError("alpha_bar must be positive")
    if not 0 <= sigma_bar < 1:
        raise ValueError("sigma_bar must lie in [0, 1)")
    if n < 1:
        raise ValueError("n must be at least 1")
    if not base.is_atomless:
        raise ValueError("base must be atomless so that new values are a.s. new")
    tables: list[float] = []
    counts = np.zeros(n, dtype=float)
    out = np.empty(n)
    for i in range(n):
        k = len(tables)
        w = rng.random() * (alpha_bar + i)
        if w < alpha_bar + k * sigma_bar:
            v = float(base.sample(rng, 1)[0])
            tables.append(v)
            j = k
        else:
            cum = np.cumsum(counts[:k] - sigma_bar)
            j = min(int(np.searchsorted(cum, w - alpha_bar - k * sigma_bar, side="right")), k - 1)
            v = tables[j]
        counts[j] += 1.0
        out[i] = v
    return DataSequence(out)


# --------------------------------------------------------------------------
# truncated CRM
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncatedCRM:
    sizes: np.ndarray
    locations: np.ndarray
    epsilon: float

    def total_mass(self) -> float:
        return float(self.sizes.sum())

    def integral(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.sum(self.sizes * f(self.locations)))


def _inverse_tail(jump, epsilon: float, targets: np.ndarray) -> np.ndarray:
    """Sizes ``s > epsilon`` with ``U(s) = targets`` (targets in ``(0, U(epsilon))``)."""
    if targets.size == 0:
        return targets
    lo = np.full_like(targets, epsilon)
    hi = np.full_like(targets, max(epsilon, 1.0 / jump.rate))
    for _ in range(200):
        short = jump.tail_integral(hi) > targets
        if not short.any():
            break
        hi = np.where(short, 2.0 * hi, hi)
    # 46 halvings of a log-bracket of width < 30 give 12 significant digits
    return bisect_vec(lambda s: jump.tail_integral(s) - targets, lo, hi, iters=46, log_space=True)


def _component_draws(intensity: ScaledLevyIntensity, epsilon: float, rng: np.random.Generator, reps: int):
    """Jumps above ``epsilon`` for ``reps`` independent replicas, as (replica index, size, location)."""
    idx_all, size_all, loc_all = [], [], []
    for w, jump, law in intensity.jump_components():
        rate = w * float(jump.tail_integral(epsilon))
        counts = rng.poisson(rate, size=reps)
        total = int(counts.sum())
        if total == 0:
            continue
        u_eps = float(jump.tail_integral(epsilon))
        targets = u_eps * (1.0 - rng.random(total))
        idx_all.append(np.repeat(np.arange(reps), counts))
        size_all.append(_inverse_tail(jump, epsilon, targets))
        loc_all.append(law.sample(rng, total))
    if not idx_all:
        return np.zeros(0, dtype=np.int64), np.zeros(0), np.zeros(0)
    return np.concatenate(idx_all), np.concatenate(size_all), np.concatenate(loc_all)


def sample_crm_truncated(intensity: ScaledLevyIntensity, epsilon: float, rng: np.random.Generator) -> TruncatedCRM:
    """Compound Poisson approximation keeping the jumps larger than ``epsilon``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    _, sizes, locs = _component_draws(intensity, epsilon, rng, 1)
    return TruncatedCRM(sizes, locs, epsilon)


def truncated_rate(intensity: ScaledLevyIntensity, epsilon: float) -> float:
    """Expected number of jumps above ``epsilon``."""
    return math.fsum(w * float(j.tail_integral(epsilon)) for w, j, _ in intensity.jump_components())


def sample_integrals(
    intensity: ScaledLevyIntensity,
    f: Callable[[np.ndarray], np.ndarray],
    epsilon: float,
    count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """``count`` independent draws of ``int f d mu`` under the truncated CRM."""
    idx, sizes, locs = _component_draws(intensity, epsilon, rng, count)
    return np.bincount(idx, weights=sizes * f(locs), minlength=count)


# --------------------------------------------------------------------------
# bound check for integral functionals
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ClampedLinear:
    """``f(x) = clip(slope * x, lo, hi)``."""

    lo: float = -1.0
    hi: float = 1.0
    slope: float = 1.0

    def __call__(self, x):
        return np.clip(self.slope * np.asarray(x, dtype=float), self.lo, self.hi)

    @property
    def sup(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    @property
    def lipschitz(self) -> float:
        return abs(self.slope)


@dataclass(frozen=True)
class Tanh:
    """``f(x) = tanh(x / scale)``."""

    scale: float = 1.0

    def __call__(self, x):
        return np.tanh(np.asarray(x, dtype=float) / self.scale)

    @property
    def sup(self) -> float:
        return 1.0

    @property
    def lipschitz(self) -> float:
        return 1.0 / self.scale


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    std_error: float
    rhs: float
    epsilon: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 3.0 * self.std_error


def empirical_w1(a: np.ndarray, b: np.ndarray) -> float:
    """``W1`` between two empirical laws of the same size (sorted coupling)."""
    if a.shape != b.shape:
        raise ValueError("samples must have the same size")
    return float(np.mean(np.abs(np.sort(a) - np.sort(b))))


def check_integral_bound(
    i1: ScaledLevyIntensity,
    i2: ScaledLevyIntensity,
    f,
    epsilon: float = 1e-6,
    mc_budget: int = 4000,
    rng: np.random.Generator = None,
    batches: int = 20,
) -> BoundCheck:
    """Compare ``W1(int f d mu1, int f d mu2)`` with ``max(sup|f|, Lip f) d_W(mu1, mu2)``.

    The standard error comes from the spread of the distance over
    ``batches`` disjoint batches.
    """
    if rng is None:
        raise ValueError("a seeded generator is required")
    if mc_budget % batches:
        raise ValueError("mc_budget must be a multiple of batches")
    a = sample_integrals(i1, f, epsilon, mc_budget, rng)
    b = sample_integrals(i2, f, epsilon, mc_budget, rng)
    lhs = empirical_w1(a, b)
    per = [empirical_w1(x, y) for x, y in zip(np.split(a, batches), np.split(b, batches))]
    se = float(np.std(per, ddof=1) / math.sqrt(batches))
    rhs = max(f.sup, f.lipschitz) * dw_homogeneous(i1, i2).total
    return BoundCheck(lhs, se, rhs, epsilon)
