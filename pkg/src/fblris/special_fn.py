"""Scalar special functions: Gaussian tail and its inverse, log-Gamma,
generalized Laguerre polynomials and the Gamma density.

Functions accept Python floats or numpy arrays where noted and return a
float for scalar input.
"""

import math

import numpy as np
from scipy import special

from .errors import DomainError, UnsupportedError

LAGUERRE_MAX_DEGREE = 64
_Q_SATURATION = 40.0
_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Abramowitz & Stegun 26.2.23 rational approximation, |error| < 4.5e-4.
_AS_C = (2.515517, 0.802853, 0.010328)
_AS_D = (1.432788, 0.189269, 0.001308)


def _scalar_or_array(arr):
    return float(arr) if arr.ndim == 0 else arr


def q_func(x):
    """Gaussian tail probability Q(x) = P[N(0,1) > x].

    Saturates to exactly 0 / 1 for |x| > 40.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"q_func requires finite input, got {x!r}")
    out = 0.5 * special.erfc(arr / _SQRT2)
    out = np.where(arr > _Q_SATURATION, 0.0, out)
    out = np.where(arr < -_Q_SATURATION, 1.0, out)
    return _scalar_or_array(out)


def _normal_pdf(x):
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def _q_inv_guess(p):
    # valid for 0 < p <= 0.5
    t = math.sqrt(-2.0 * math.log(p))
    c0, c1, c2 = _AS_C
    d1, d2, d3 = _AS_D
    return t - (c0 + c1 * t + c2 * t * t) / (1.0 + d1 * t + d2 * t * t + d3 * t ** 3)


def q_inv(p, tol=1e-14, max_iter=50):
    """Inverse of :func:`q_func` on (0, 1).

    Rational starting point refined by Halley iterations on ``q_func``.
    """
    p = float(p)
    if not (0.0 < p < 1.0):
        raise DomainError(f"q_inv requires 0 < p < 1, got {p!r}")
    if p == 0.5:
        return 0.0
    if p > 0.5:
        # 1 - p is exact for p in (0.5, 1)
        return -q_inv(1.0 - p, tol=tol, max_iter=max_iter)

    x = _q_inv_guess(p)
    for _ in range(max_iter):
        f = q_func(x) - p
        phi = _normal_pdf(x)
        if phi == 0.0:
            break
        # f' = -phi, f'' = x*phi
        step = f / phi
        step = step / (1.0 - 0.5 * x * step)
        x += step
        if abs(step) <= tol * max(1.0, abs(x)):
            break
    return x


def log_gamma(x):
    """Natural log of the Gamma function for x > 0."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    if arr.ndim == 0:
        return math.lgamma(float(arr))
    return special.gammaln(arr)


def laguerre(i, a, x):
    """Generalized Laguerre polynomial L_i^a(x) via the three-term recurrence."""
    if int(i) != i or i < 0:
        raise DomainError(f"Laguerre degree must be a nonnegative integer, got {i!r}")
    i = int(i)
    if i > LAGUERRE_MAX_DEGREE:
        raise UnsupportedError(
            f"Laguerre degree {i} exceeds the supported cap {LAGUERRE_MAX_DEGREE}"
        )
    if a < 0:
        raise DomainError(f"Laguerre parameter must be >= 0, got {a!r}")
    xs = np.asarray(x, dtype=float)
    prev = np.ones_like(xs)
    if i == 0:
        return _scalar_or_array(prev)
    cur = 1.0 + a - xs
    for k in range(1, i):
        prev, cur = cur, ((2 * k + 1 + a - xs) * cur - (k + a) * prev) / (k + 1)
    return _scalar_or_array(cur)


def log_gamma_pdf(x, k, theta):
    """Log density of Gamma(shape=k, scale=theta); -inf outside the support."""
    if not (k > 0 and theta > 0):
        raise DomainError(f"gamma_pdf requires k > 0 and theta > 0, got k={k!r}, theta={theta!r}")
    xs = np.asarray(x, dtype=float)
    norm = math.lgamma(k) + k * math.log(theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        if k == 1.0:
            body = -xs / theta
        else:
            body = (k - 1.0) * np.log(xs) - xs / theta
        out = np.where(xs < 0, -np.inf, body - norm)
    return _scalar_or_array(out)


def gamma_pdf(x, k, theta):
    """Gamma(shape=k, scale=theta) density, evaluated in log space.

    Survives shapes in the 1e4 range where Gamma(k) overflows; results that
    underflow are returned as 0.
    """
    return _scalar_or_array(np.exp(np.asarray(log_gamma_pdf(x, k, theta))))
