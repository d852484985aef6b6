"""Distribution of a product of independent Gamma variables.

The density of z = x_1 * ... * x_N with x_j ~ Gamma(k, theta_j) is recovered
from its Mellin transform

    M(s) = prod_j theta_j^(s-1) Gamma(k+s-1) / Gamma(k)

by numerical inversion along the vertical line Re(s) = c:

    g(z) = (1/pi) int_0^inf Re[z^-s M(s)] du,   s = c + i u.

For equal scales this is the normalized Meijer G-function
theta^-N Gamma(k)^-N G^{N,0}_{0,N}(z / theta^N | k-1, ..., k-1).
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from . import mc
from .channel import SystemConfig, eigenvalues, sample_channel_batch
from .errors import DomainError, NumericError
from .special_fn import gamma_pdf

# integrand magnitudes below exp(-_TAIL_LOG) of the peak are dropped
_TAIL_LOG = 45.0
_REL_TOL = 1e-9
_MAX_REFINE = 12


@dataclass(frozen=True)
class GammaProductParams:
    k: float
    theta: float
    n_copies: int = 1

    def __post_init__(self):
        if not (self.k > 0 and self.theta > 0):
            raise DomainError(f"need k > 0 and theta > 0, got k={self.k!r}, theta={self.theta!r}")
        if int(self.n_copies) != self.n_copies or self.n_copies < 1:
            raise DomainError(f"n_copies must be a positive integer, got {self.n_copies!r}")
        object.__setattr__(self, "n_copies", int(self.n_copies))

    @property
    def thetas(self):
        return (float(self.theta),) * self.n_copies


def _log_mellin(s, k, thetas):
    s = np.asarray(s, dtype=complex)
    out = np.zeros_like(s)
    lg_k = math.lgamma(k)
    for th in thetas:
        out = out + (s - 1.0) * math.log(th) + special.loggamma(k + s - 1.0) - lg_k
    return out


def mellin_gamma(s, p: GammaProductParams) -> complex:
    """Mellin transform E[z^(s-1)] of the product of ``p.n_copies`` Gamma variables."""
    s = complex(s)
    if s.real <= 1.0 - p.k:
        raise DomainError(f"Re(s) = {s.real} is at or left of the first pole at {1.0 - p.k}")
    return complex(np.exp(_log_mellin(s, p.k, p.thetas)))


def _saddle(log_z, k, thetas):
    """Real c minimizing -c ln z + ln M(c); keeps cancellation in the inversion small."""
    n = len(thetas)
    target = (log_z - sum(math.log(th) for th in thetas)) / n
    # solve digamma(k + c - 1) = target for a = k + c - 1 > 0
    a = math.exp(target) + 0.5 if target > -2.0 else -1.0 / (target - special.digamma(1.0))
    a = max(a, 1e-8)
    for _ in range(100):
        f = special.digamma(a) - target
        step = f / special.polygamma(1, a)
        new = a - step
        if new <= 0:
            new = a / 2.0
        if abs(new - a) <= 1e-14 * max(1.0, a):
            a = new
            break
        a = new
    c = a - k + 1.0
    # stay strictly inside the pole-free half-plane
    return max(c, 1.0 - k + 1e-3)


def _log_product_pdf(z, k, thetas):
    log_z = math.log(z)
    n = len(thetas)
    c = _saddle(log_z, k, thetas)
    phi0 = float((-c * log_z + _log_mellin(c, k, thetas)).real)
    curv = n * float(special.polygamma(1, k + c - 1.0))
    width = 1.0 / math.sqrt(curv)

    # |Gamma(a + iu)| decays at least like a Gaussian of this width near u=0
    # and like exp(-pi |u| / 2) further out; march outward to find the cutoff.
    u_max = width
    while True:
        val = float((-(c + 1j * u_max) * log_z + _log_mellin(c + 1j * u_max, k, thetas)).real)
        if val - phi0 < -_TAIL_LOG:
            break
        u_max *= 1.5
        if u_max > 1e8:
            raise NumericError("contour truncation did not converge", z=z, k=k, thetas=thetas)

    def trapezoid(h):
        u = np.arange(0.0, u_max + h, h)
        s = c + 1j * u
        vals = np.exp(-s * log_z + _log_mellin(s, k, thetas) - phi0).real
        vals[0] *= 0.5
        return h * float(np.sum(vals)) / math.pi

    h = width / 2.0
    prev = trapezoid(h)
    for _ in range(_MAX_REFINE):
        h /= 2.0
        cur = trapezoid(h)
        if abs(cur - prev) <= _REL_TOL * abs(cur) + 1e-300:
            if cur <= 0:
                return -math.inf
            return math.log(cur) + phi0
        prev = cur
    raise NumericError(
        "inverse Mellin quadrature did not converge", z=z, k=k, thetas=tuple(thetas),
        last=cur, previous=prev, step=h,
    )


def product_pdf_general(z, k: float, thetas: Sequence[float]):
    """Density of a product of Gamma(k, theta_j) variables with per-factor scales."""
    if not k > 0 or any(th <= 0 for th in thetas) or len(thetas) < 1:
        raise DomainError("need k > 0, at least one factor and positive scales")
    zs = np.asarray(z, dtype=float)
    if np.any(~(zs > 0)):
        raise DomainError("product Gamma density requires z > 0")
    flat = [math.exp(_log_product_pdf(float(v), float(k), tuple(thetas))) for v in zs.ravel()]
    out = np.array(flat).reshape(zs.shape)
    return float(out) if out.ndim == 0 else out


def product_gamma_pdf(z, p: GammaProductParams):
    """Density of the product of ``p.n_copies`` i.i.d. Gamma(k, theta) variables.

    Always evaluated through the inverse Mellin transform, including N = 1.
    """
    return product_pdf_general(z, p.k, p.thetas)


def aux_channel_pdf(s_val, omega: Sequence[float], n: int):
    """Density of the product of the m auxiliary-channel statistics.

    Stream j contributes Gamma(shape=n, scale=omega_j/n); a single stream
    uses the Gamma density directly.
    """
    omega = [float(w) for w in np.atleast_1d(omega)]
    if n < 2:
        raise DomainError(f"blocklength must be >= 2, got {n!r}")
    if any(w < 1.0 for w in omega):
        raise DomainError("omega entries are eigenvalues of I + H P H^H and must be >= 1")
    if len(omega) == 1:
        sv = np.asarray(s_val, dtype=float)
        if np.any(~(sv > 0)):
            raise DomainError("aux_channel_pdf requires s > 0")
        return gamma_pdf(s_val, n, omega[0] / n)
    return product_pdf_general(s_val, n, [w / n for w in omega])


def log_gamma_pdf_peak(n: int, omega: float) -> float:
    if n < 2:
        raise DomainError(f"blocklength must be >= 2, got {n!r}")
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega!r}")
    return math.log(n / omega) + (n - 1) * math.log(n - 1) - (n - 1) - math.lgamma(n)


def gamma_pdf_peak(n: int, omega: float) -> float:
    """max_s Gamma(s; n, omega/n) = (n/omega) (n-1)^(n-1) e^-(n-1) / Gamma(n)."""
    return math.exp(log_gamma_pdf_peak(n, omega))


def mean_omega_product(cfg: SystemConfig, samples: int, seed: int, workers=None) -> float:
    """MC estimate of E[prod_j omega_j], omega the m largest eigenvalues of I + (P/t) H H^H."""
    scale = cfg.power / cfg.t

    def chunk(rng, size):
        g = eigenvalues(sample_channel_batch(cfg, size, rng), cfg.m)
        return float(np.sum(np.prod(1.0 + scale * g, axis=1)))

    parts = mc.map_chunks(chunk, samples, seed, workers=workers)
    return math.fsum(parts) / samples


def aux_converse_diagnostic(M: float, n: int, cfg: SystemConfig, samples: int, seed: int) -> float:
    """Upper bound on 1 - eps' over the auxiliary channel (diagnostic only).

    Returns the smaller of the MC-evaluated peak-density form
    (1/M) [(n-1)^n e^-(n-1) / Gamma(n)]^m E[prod omega_j] and the closed
    form n^(m/2) / M.
    """
    if M < 2:
        raise DomainError(f"codebook size must be >= 2, got {M!r}")
    if n < 2:
        raise DomainError(f"blocklength must be >= 2, got {n!r}")
    m = cfg.m
    log_peak = n * math.log(n - 1) - (n - 1) - math.lgamma(n)
    log_mc = -math.log(M) + m * log_peak + math.log(mean_omega_product(cfg, samples, seed))
    log_closed = 0.5 * m * math.log(n) - math.log(M)
    return math.exp(min(log_mc, log_closed))


def closed_form_converse_diagnostic(M: float, n: int, m: int) -> float:
    return math.exp(0.5 * m * math.log(n) - math.log(M))
