"""Finite-blocklength achievability and converse rates, Gaussian-input
capacity and the required-blocklength planner.

All rates are in bits per channel use. The O(n^-3/2) remainders of the
normal approximations are not estimable and are dropped.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy import integrate

from . import mc
from .channel import SystemConfig, eigen_density, eigenvalues, sample_channel_batch
from .errors import DomainError
from .info_metrics import InfoStats, estimate_moments
from .modulation import make_constellation
from .special_fn import q_inv

LN2 = math.log(2.0)
DELTA_GRID = tuple(np.logspace(-1.0, 1.0, 41))

# Additive constant of the achievability bound, in bits. The printed bound
# carries +1/n; the DT-bound constant log2(2)/n coincides with it in bits.
ACH_CONSTANT_BITS = 1.0


def achievability_rate(stats: InfoStats, n: int, eps: float, constant_bits: float = ACH_CONSTANT_BITS) -> float:
    """I - sqrt(U/n) Q^-1(eps) + c/n, floored at 0."""
    if n < 1:
        raise DomainError(f"blocklength must be >= 1, got {n!r}")
    u = stats.dispersion
    rate = stats.i_bits - math.sqrt(u / n) * q_inv(eps) + constant_bits / n
    return max(rate, 0.0)


def berry_esseen_penalty(stats: InfoStats, n: int, delta: float) -> float:
    """Finite-n term subtracted from eps before inverting Q in the refined bound.

    (1/sqrt(n)) (6T/U^1.5) (1 + 2 e^D/(e^D - 1) + U D e^D / (sqrt(2 pi) 6T (e^D - 1)))

    D is a step of the (natural-log) information density, so U and T are
    converted to nats before use; the ratio T/U^1.5 is unit-free.
    """
    u = stats.dispersion * LN2 ** 2
    t3 = stats.t_bits3 * LN2 ** 3
    ed = math.exp(delta)
    ratio = ed / (ed - 1.0)
    inner = 1.0 + 2.0 * ratio + u * delta * ratio / (math.sqrt(2.0 * math.pi) * 6.0 * t3)
    return 6.0 * t3 / (math.sqrt(n) * u ** 1.5) * inner


def achievability_refined(stats: InfoStats, n: int, eps: float, deltas: Sequence[float] = DELTA_GRID) -> float:
    """Achievability rate with the explicit Berry-Esseen correction.

    tau = Q^-1(eps - penalty(n, D)), with D chosen on ``deltas`` to minimize
    the penalty; rate = I - tau sqrt(U/n) + 1/n. Returns NaN where the
    argument of Q^-1 leaves (0, 1) for every D.
    """
    if n < 1:
        raise DomainError(f"blocklength must be >= 1, got {n!r}")
    if stats.dispersion <= 0 or stats.t_bits3 <= 0:
        return float("nan")
    penalty = min(berry_esseen_penalty(stats, n, d) for d in deltas)
    arg = eps - penalty
    if not (0.0 < arg < 1.0):
        return float("nan")
    tau = q_inv(arg)
    return stats.i_bits - tau * math.sqrt(stats.dispersion / n) + ACH_CONSTANT_BITS / n


def refined_threshold(stats: InfoStats, eps: float, deltas: Sequence[float] = DELTA_GRID) -> int:
    """Smallest n for which the refined bound is applicable."""
    best = min(berry_esseen_penalty(stats, 1, d) for d in deltas)
    # penalty(n) = best / sqrt(n) < eps
    n = max(1, math.floor((best / eps) ** 2))
    while best / math.sqrt(n) >= eps:
        n += 1
    return n


def converse_rate(stats: InfoStats, n: int, eps: float, m: int) -> float:
    """I - sqrt(U/n) Q^-1(eps + eps/sqrt(n)) + (m+1) log2(n) / (2n)."""
    if n < 1:
        raise DomainError(f"blocklength must be >= 1, got {n!r}")
    arg = eps + eps / math.sqrt(n)
    if not arg < 1.0:
        raise DomainError(f"eps + eps/sqrt(n) = {arg} must stay below 1")
    u = stats.dispersion
    return stats.i_bits - math.sqrt(u / n) * q_inv(arg) + (m + 1) * math.log2(n) / (2.0 * n)


def required_blocklength(stats: InfoStats, eps: float, eta: float) -> int:
    """Blocklength at which the normal approximation reaches eta * I."""
    if not (0.0 < eta < 1.0):
        raise DomainError(f"eta must lie in (0, 1), got {eta!r}")
    if stats.i_bits <= 0:
        raise DomainError("mutual information must be positive")
    n = stats.dispersion / stats.i_bits ** 2 * (q_inv(eps) / (1.0 - eta)) ** 2
    return int(math.ceil(n))


def threshold_blocklength(stats: InfoStats, eps: float, eta: float, n_max: int = 10 ** 7) -> int:
    """Smallest integer n with achievability_rate(n) >= eta * I (bisection on a monotone tail)."""
    target = eta * stats.i_bits

    def ok(n):
        return achievability_rate(stats, n, eps) >= target

    if not ok(n_max):
        raise DomainError(f"fraction {eta} not reached by n = {n_max}")
    lo, hi = 1, n_max
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


@dataclass(frozen=True)
class CapacityEstimate:
    mc_bits: float
    stderr: float
    quad_bits: float
    samples: int
    seed: int

    @property
    def value(self) -> float:
        return self.mc_bits

    @property
    def discrepancy(self) -> float:
        return self.quad_bits - self.mc_bits


def capacity_quadrature(cfg: SystemConfig) -> float:
    """m * int log2(1 + (P/t) g) p(g) dg with the unordered-eigenvalue density."""
    scale = cfg.power / cfg.t

    def f(g):
        return math.log2(1.0 + scale * g) * eigen_density(g, cfg)

    n = cfg.n_ris
    # split at a few scale lengths so quad sees the bulk
    pieces = [0.0, n, 5.0 * n, 20.0 * n, 60.0 * n]
    total = sum(integrate.quad(f, a, b, epsabs=1e-12, epsrel=1e-10, limit=200)[0]
                for a, b in zip(pieces[:-1], pieces[1:]))
    total += integrate.quad(f, pieces[-1], np.inf, epsabs=1e-13, limit=200)[0]
    return cfg.m * total


def gaussian_capacity(cfg: SystemConfig, samples: int, seed: int, workers=None) -> CapacityEstimate:
    """Ergodic capacity with i.i.d. CN(0, P/t) inputs.

    MC path: E[log2 det(I_r + (P/t) H H^H)] over channel draws.
    Quadrature path: the eigenvalue-density integral.
    """
    scale = cfg.power / cfg.t

    def chunk(rng, size):
        g = eigenvalues(sample_channel_batch(cfg, size, rng), cfg.m)
        return mc.Moments.of(np.sum(np.log2(1.0 + scale * g), axis=1))

    total = mc.Moments()
    for part in mc.map_chunks(chunk, samples, seed, workers=workers):
        total = total.merge(part)
    return CapacityEstimate(
        mc_bits=total.mean,
        stderr=math.sqrt(total.variance / total.count),
        quad_bits=capacity_quadrature(cfg),
        samples=total.count,
        seed=int(seed),
    )


@dataclass
class BoundCurve:
    n_values: List[int]
    ach_rate: List[float]
    ach_refined: List[float]
    conv_rate: List[float]
    capacity_ref: float
    stats: InfoStats
    n_cross: Optional[int] = None
    meta: dict = field(default_factory=dict)


def bound_curve(
    cfg: SystemConfig,
    scheme: str,
    n_grid: Sequence[int],
    eps: float,
    samples: int,
    seed: int,
    stats: Optional[InfoStats] = None,
    capacity: Optional[CapacityEstimate] = None,
    workers=None,
) -> BoundCurve:
    """Achievability/converse series over ``n_grid`` from one moment estimate."""
    n_grid = [int(n) for n in n_grid]
    if not n_grid:
        raise DomainError("n_grid must be nonempty")
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])) or n_grid[0] < 1:
        raise DomainError("n_grid must be strictly ascending positive integers")
    cfg = cfg.replace(scheme=scheme)
    if stats is None:
        stats = estimate_moments(cfg, make_constellation(scheme, cfg), samples, seed, workers=workers)
    if capacity is None:
        capacity = gaussian_capacity(cfg, samples, seed, workers=workers)
    ach = [achievability_rate(stats, n, eps) for n in n_grid]
    refined = [achievability_refined(stats, n, eps) for n in n_grid]
    conv = [converse_rate(stats, n, eps, cfg.m) for n in n_grid]
    # first n after which achievability stays below the converse
    n_cross = None
    for i in range(len(n_grid) - 1, -1, -1):
        if ach[i] > conv[i]:
            break
        n_cross = n_grid[i]
    return BoundCurve(
        n_values=n_grid,
        ach_rate=ach,
        ach_refined=refined,
        conv_rate=conv,
        capacity_ref=capacity.mc_bits,
        stats=stats,
        n_cross=n_cross,
    )

