"""RIS-assisted MIMO channel: configuration, sampling, and channel densities.

Two channel models are available:

``"rayleigh"`` (default)
    The composite channel H has i.i.d. CN(0, N_ris) entries. This is the
    large-N_ris limit of the cascade, where each effective scalar gain is
    Rayleigh with E|h|^2 = N_ris, and it is the model under which the
    Laguerre eigenvalue density below is exact.

``"cascaded"``
    H = H2 diag(theta) H1 with H1, H2 i.i.d. CN(0, 1) and RIS phases
    uniform on [0, 2*pi).

Both models share E||H||_F^2 = r * t * N_ris.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate

from .errors import DomainError, ShapeError, UnsupportedError
from .special_fn import LAGUERRE_MAX_DEGREE, laguerre

CHANNEL_MODELS = ("rayleigh", "cascaded")
SCHEMES = ("bpsk", "qpsk")


def as_generator(seed):
    """Turn an int, SeedSequence or Generator into a numpy Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class SystemConfig:
    t: int
    r: int
    n_ris: int
    snr_db: float
    epsilon: float = 1e-3
    scheme: str = "bpsk"
    channel: str = "rayleigh"

    def __post_init__(self):
        for name in ("t", "r", "n_ris"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise DomainError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if not math.isfinite(self.snr_db):
            raise DomainError(f"snr_db must be finite, got {self.snr_db!r}")
        if not (0.0 < self.epsilon < 1.0):
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        scheme = str(self.scheme).lower()
        if scheme not in SCHEMES:
            raise UnsupportedError(f"unknown modulation scheme {self.scheme!r}")
        object.__setattr__(self, "scheme", scheme)
        channel = str(self.channel).lower()
        if channel not in CHANNEL_MODELS:
            raise UnsupportedError(f"unknown channel model {self.channel!r}")
        object.__setattr__(self, "channel", channel)

    @property
    def m(self) -> int:
        return min(self.t, self.r)

    @property
    def power(self) -> float:
        """Linear total transmit power P (noise variance is 1)."""
        return 10.0 ** (self.snr_db / 10.0)

    def replace(self, **changes) -> "SystemConfig":
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return SystemConfig(**values)


@dataclass(frozen=True)
class ChannelRealization:
    h: np.ndarray
    g: np.ndarray
    h1: Optional[np.ndarray] = None
    h2: Optional[np.ndarray] = None
    theta: Optional[np.ndarray] = None
    model: str = field(default="rayleigh")

    @property
    def r(self) -> int:
        return self.h.shape[0]

    @property
    def t(self) -> int:
        return self.h.shape[1]


def _complex_normal(rng, shape, variance=1.0):
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def eigenvalues(h: np.ndarray, m: Optional[int] = None) -> np.ndarray:
    """The m largest eigenvalues of H^H H, descending, clipped at 0.

    Works on a single (r, t) matrix or a stack (..., r, t). The smaller of
    the two Gram matrices is decomposed.
    """
    r, t = h.shape[-2:]
    if m is None:
        m = min(r, t)
    hh = np.conj(np.swapaxes(h, -1, -2))
    gram = hh @ h if t <= r else h @ hh
    vals = np.linalg.eigvalsh(gram)[..., ::-1]
    return np.clip(vals[..., :m], 0.0, None)


def sample_channel_batch(cfg: SystemConfig, size: int, rng) -> np.ndarray:
    """Draw ``size`` composite channel matrices, shape (size, r, t)."""
    rng = as_generator(rng)
    if cfg.channel == "rayleigh":
        return _complex_normal(rng, (size, cfg.r, cfg.t), variance=cfg.n_ris)
    h1 = _complex_normal(rng, (size, cfg.n_ris, cfg.t))
    h2 = _complex_normal(rng, (size, cfg.r, cfg.n_ris))
    theta = np.exp(1j * rng.uniform(0.0, 2.0 * math.pi, (size, cfg.n_ris)))
    return h2 @ (theta[:, :, None] * h1)


def sample_ris_channel(cfg: SystemConfig, seed) -> ChannelRealization:
    """Draw one channel realization; deterministic given ``seed``."""
    rng = as_generator(seed)
    if cfg.channel == "rayleigh":
        h = _complex_normal(rng, (cfg.r, cfg.t), variance=cfg.n_ris)
        return ChannelRealization(h=h, g=eigenvalues(h, cfg.m), model="rayleigh")
    h1 = _complex_normal(rng, (cfg.n_ris, cfg.t))
    h2 = _complex_normal(rng, (cfg.r, cfg.n_ris))
    theta = np.exp(1j * rng.uniform(0.0, 2.0 * math.pi, cfg.n_ris))
    h = h2 @ (theta[:, None] * h1)
    return ChannelRealization(
        h=h, g=eigenvalues(h, cfg.m), h1=h1, h2=h2, theta=theta, model="cascaded"
    )


def effective_scalar_pdf(h_mag, n_ris: int):
    """Rayleigh density of an effective scalar gain magnitude with E[h^2] = n_ris."""
    hs = np.asarray(h_mag, dtype=float)
    if np.any(hs < 0):
        raise DomainError("effective_scalar_pdf requires h_mag >= 0")
    out = (2.0 * hs / n_ris) * np.exp(-hs * hs / n_ris)
    return float(out) if out.ndim == 0 else out


def _laguerre_sum(x, m, a, form):
    x = np.asarray(x, dtype=float)
    base = x ** a * np.exp(-x)
    total = np.zeros_like(x)
    if form == "unordered":
        for i in range(m):
            coef = math.exp(math.lgamma(i + 1) - math.lgamma(i + a + 1)) / m
            total = total + coef * laguerre(i, a, x) ** 2
    else:
        # literal printed sum: i = 0..m with coefficient i!/(2 (i+a)!)
        for i in range(m + 1):
            coef = 0.5 * math.exp(math.lgamma(i + 1) - math.lgamma(i + a + 1))
            total = total + coef * laguerre(i, a, x) ** 2
    return total * base


_NORM_CACHE = {}


def _eigen_norm(m, a, form):
    key = (m, a, form)
    if key not in _NORM_CACHE:
        val, _ = integrate.quad(lambda x: float(_laguerre_sum(x, m, a, form)), 0.0, np.inf,
                                epsabs=1e-13, epsrel=1e-12, limit=200)
        _NORM_CACHE[key] = val
    return _NORM_CACHE[key]


def eigen_density(g_val, cfg: SystemConfig, form: str = "unordered"):
    """Density of an unordered eigenvalue of H^H H under the Rayleigh model.

    ``form="unordered"`` is the Wishart/Laguerre marginal
    (1/m) sum_{i<m} i!/(i+a)! [L_i^a(x)]^2 x^a e^{-x}, with x = g/N_ris and the
    1/N_ris Jacobian. ``form="printed"`` evaluates the variant summing
    i = 0..m with coefficient i!/(2 (i+a)!) in the same variable. Either
    form is renormalized numerically to integrate to 1 over [0, inf).
    """
    m = cfg.m
    if m > LAGUERRE_MAX_DEGREE:
        raise UnsupportedError(f"m = {m} exceeds the Laguerre degree cap")
    if form not in ("unordered", "printed"):
        raise DomainError(f"unknown eigen_density form {form!r}")
    gs = np.asarray(g_val, dtype=float)
    if np.any(gs < 0):
        raise DomainError("eigen_density requires g >= 0")
    a = max(cfg.r, cfg.t) - m
    x = gs / cfg.n_ris
    out = _laguerre_sum(x, m, a, form) / (_eigen_norm(m, a, form) * cfg.n_ris)
    return float(out) if out.ndim == 0 else out


def apply_channel(real: ChannelRealization, x, seed, noise_scale: float = 1.0) -> np.ndarray:
    """y = H x + w with w ~ CN(0, I_r).

    ``noise_scale`` multiplies w; set it to 0 to obtain the noiseless output.
    """
    x = np.asarray(x, dtype=complex)
    if x.ndim != 1 or x.shape[0] != real.t:
        raise ShapeError(f"input has shape {x.shape}, channel expects ({real.t},)")
    if not np.all(np.isfinite(x)):
        raise DomainError("input vector must be finite")
    rng = as_generator(seed)
    w = _complex_normal(rng, (real.r,))
    return real.h @ x + noise_scale * w
