"""Monte Carlo estimation of the information density and its moments.

The information density of an input x at output y under channel H is

    i(x; y | H) = log2 p(y | x, H) - log2 sum_x' P(x') p(y | x', H)

with p(y | x, H) = pi^-r exp(-||y - H x||^2). The channel prior p(H)
appears in numerator and denominator and cancels, so expectations over H
are realized by sampling H directly.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import logsumexp

from . import mc
from .channel import ChannelRealization, SystemConfig, sample_channel_batch
from .errors import InsufficientSamplesError, ShapeError
from .modulation import Constellation, input_matrix

MIN_SAMPLES = 1000
LOG2E = 1.0 / math.log(2.0)
U_FALLBACK_THRESHOLD = 1e-9

# (cfg, size, rng) -> (size, r, t) complex channel stack
ChannelSampler = Callable[[SystemConfig, int, np.random.Generator], np.ndarray]


@dataclass(frozen=True)
class InfoStats:
    i_bits: float
    u_bits2: float
    t_bits3: float
    stderr_i: float
    samples: int
    seed: int
    v_bits2: Optional[float] = None
    max_abs_dev: float = float("nan")

    @property
    def dispersion(self) -> float:
        """Variance driving the backoff; V replaces U when U vanishes."""
        if self.u_bits2 < U_FALLBACK_THRESHOLD and self.v_bits2 is not None:
            return self.v_bits2
        return self.u_bits2


def log_pdf_y_given_xh(y, x, real: ChannelRealization) -> float:
    """Natural-log density of y given x and H: -r ln(pi) - ||y - H x||^2."""
    y = np.asarray(y, dtype=complex)
    x = np.asarray(x, dtype=complex)
    if y.shape != (real.r,) or x.shape != (real.t,):
        raise ShapeError(
            f"y {y.shape} / x {x.shape} incompatible with channel {real.h.shape}"
        )
    resid = y - real.h @ x
    return -real.r * math.log(math.pi) - float(np.vdot(resid, resid).real)


def info_density_sample(x, real: ChannelRealization, y, c: Constellation) -> float:
    """Information density in bits for one (x, y, H) triple."""
    xs = input_matrix(c, real.t)
    num = log_pdf_y_given_xh(y, x, real)
    resid = np.asarray(y, dtype=complex)[None, :] - xs @ real.h.T
    logs = -real.r * math.log(math.pi) - np.sum(np.abs(resid) ** 2, axis=1)
    den = logsumexp(logs) - math.log(xs.shape[0])
    return (num - den) * LOG2E


def info_density_batch(h: np.ndarray, w: np.ndarray, x_idx: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Vectorized information density (bits) for a stack of draws.

    h: (S, r, t) channels; w: (S, r) noise; x_idx: (S,) indices into the
    (K, t) input matrix ``xs``. The output is y = H x + w. The -r ln(pi)
    constant cancels and is omitted.
    """
    hx_all = h @ xs.T  # (S, r, K)
    y = np.take_along_axis(hx_all, x_idx[:, None, None], axis=2)[:, :, 0] + w
    dist = np.sum(np.abs(y[:, :, None] - hx_all) ** 2, axis=1)  # (S, K)
    num = -np.sum(np.abs(w) ** 2, axis=1)
    den = logsumexp(-dist, axis=1) - math.log(xs.shape[0])
    return (num - den) * LOG2E


def _default_sampler(cfg, size, rng):
    return sample_channel_batch(cfg, size, rng)


def _draw_chunk(cfg, xs, sampler, rng, size):
    h = sampler(cfg, size, rng)
    x_idx = rng.integers(0, xs.shape[0], size=size)
    w = np.sqrt(0.5) * (rng.standard_normal((size, cfg.r)) + 1j * rng.standard_normal((size, cfg.r)))
    return info_density_batch(h, w, x_idx, xs), x_idx


def estimate_moments(
    cfg: SystemConfig,
    c: Constellation,
    samples: int,
    seed: int,
    *,
    sampler: Optional[ChannelSampler] = None,
    workers: Optional[int] = None,
) -> InfoStats:
    """Estimate I, U, T (and the conditional variance V) by plain i.i.d. MC.

    Each chunk of draws comes from its own seeded substream; the mean and
    variance are merged pairwise in chunk order, and the third absolute
    central moment is accumulated about the merged mean with compensated
    summation.
    """
    samples = int(samples)
    if samples < MIN_SAMPLES:
        raise InsufficientSamplesError(f"need at least {MIN_SAMPLES} samples, got {samples}")
    xs = input_matrix(c, cfg.t)
    k = xs.shape[0]
    sampler = sampler or _default_sampler

    chunks = mc.map_chunks(
        lambda rng, size: _draw_chunk(cfg, xs, sampler, rng, size), samples, seed, workers=workers
    )

    total = mc.Moments()
    per_input = [mc.Moments() for _ in range(k)]
    for dens, idx in chunks:
        total = total.merge(mc.Moments.of(dens))
        for j in np.unique(idx):
            per_input[j] = per_input[j].merge(mc.Moments.of(dens[idx == j]))

    mean = total.mean
    third = math.fsum(float(np.sum(np.abs(d - mean) ** 3)) for d, _ in chunks) / total.count
    max_dev = max(float(np.max(np.abs(d - mean))) for d, _ in chunks)
    # E_X[Var(i | X)] with the true (uniform) input weights
    v = math.fsum(pm.variance for pm in per_input if pm.count) / sum(1 for pm in per_input if pm.count)
    u = total.variance

    return InfoStats(
        i_bits=mean,
        u_bits2=u,
        t_bits3=third,
        stderr_i=math.sqrt(u / total.count) if u > 0 else 0.0,
        samples=total.count,
        seed=int(seed),
        v_bits2=v,
        max_abs_dev=max_dev,
    )


def conditional_variance(
    cfg: SystemConfig,
    c: Constellation,
    samples: int,
    seed: int,
    *,
    sampler: Optional[ChannelSampler] = None,
    workers: Optional[int] = None,
) -> float:
    """E_X[Var(i | X)] in bits^2, channel realization integrated out."""
    return estimate_moments(cfg, c, samples, seed, sampler=sampler, workers=workers).v_bits2
