"""Fast invariant suite behind ``fblris selftest``."""

import math
from dataclasses import dataclass
from typing import Callable, List

import numpy as np
from scipy import integrate

from . import bounds, special_fn
from .channel import SystemConfig
from .gamma_product import GammaProductParams, mellin_gamma, product_gamma_pdf
from .info_metrics import estimate_moments
from .modulation import make_constellation


@dataclass
class CheckResult:
    name: str
    measured: float
    threshold: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<38s} measured={self.measured:.3e}  threshold={self.threshold:.1e}"


def _q_roundtrip():
    ps = np.logspace(-15, math.log10(0.5), 400)
    ps = np.concatenate([ps, 1.0 - ps[::-1]])
    err = max(abs(special_fn.q_func(special_fn.q_inv(p)) - p) for p in ps)
    return err, 1e-9


def _laguerre_closed_form():
    xs = np.linspace(0.0, 10.0, 41)
    err = 0.0
    for a in (0.0, 1.0, 2.5):
        closed = [
            np.ones_like(xs),
            1.0 + a - xs,
            0.5 * (xs ** 2 - 2 * (a + 2) * xs + (a + 1) * (a + 2)),
            (-xs ** 3 + 3 * (a + 3) * xs ** 2 - 3 * (a + 2) * (a + 3) * xs
             + (a + 1) * (a + 2) * (a + 3)) / 6.0,
        ]
        for i, ref in enumerate(closed):
            err = max(err, float(np.max(np.abs(special_fn.laguerre(i, a, xs) - ref))))
    return err, 1e-12


def _gamma_normalization():
    err = 0.0
    for k, th in ((1.0, 1.0), (2.0, 0.5), (50.0, 0.1)):
        val, _ = integrate.quad(lambda x: special_fn.gamma_pdf(x, k, th), 0, np.inf,
                                epsabs=1e-12, epsrel=1e-12, limit=200)
        err = max(err, abs(val - 1.0))
    return err, 1e-8


def _product_normalization():
    p = GammaProductParams(3.0, 0.7, 3)
    val, _ = integrate.quad(lambda lz: float(product_gamma_pdf(math.exp(lz), p)) * math.exp(lz),
                            -30.0, 12.0, epsabs=1e-12, limit=200)
    return abs(val - 1.0), 1e-6


def _mellin_consistency():
    p = GammaProductParams(2.0, 0.8, 2)
    err = 0.0
    for s in (1.0, 2.0, 3.0):
        val, _ = integrate.quad(
            lambda lz: float(product_gamma_pdf(math.exp(lz), p)) * math.exp(s * lz), -30.0, 12.0,
            epsabs=1e-13, limit=200,
        )
        ref = mellin_gamma(s, p).real
        err = max(err, abs(val - ref) / ref)
    return err, 1e-5


def _single_factor_equivalence():
    zs = np.logspace(-2, 1.5, 100)
    p = GammaProductParams(2.5, 0.9, 1)
    err = float(np.max(np.abs(product_gamma_pdf(zs, p) - special_fn.gamma_pdf(zs, 2.5, 0.9))))
    return err, 1e-8


_SANDWICH_CFG = SystemConfig(2, 1, 4, -5.0)


def _sandwich():
    cfg = _SANDWICH_CFG
    st = estimate_moments(cfg, make_constellation("bpsk", cfg), 20_000, 11)
    worst = -math.inf
    for n in range(50, 5001, 10):
        gap = bounds.achievability_rate(st, n, cfg.epsilon) - bounds.converse_rate(st, n, cfg.epsilon, cfg.m)
        worst = max(worst, gap)
    # measured: largest achievability - converse excess; must stay <= 0
    return worst, 0.0


def _determinism():
    cfg = SystemConfig(2, 2, 4, -5.0, scheme="qpsk")
    c = make_constellation("qpsk", cfg)
    a = estimate_moments(cfg, c, 20_000, 5, workers=1)
    b = estimate_moments(cfg, c, 20_000, 5, workers=3)
    diff = max(abs(a.i_bits - b.i_bits), abs(a.u_bits2 - b.u_bits2), abs(a.t_bits3 - b.t_bits3))
    return diff, 0.0


def _capacity_paths():
    cfg = SystemConfig(2, 2, 4, -5.0)
    cap = bounds.gaussian_capacity(cfg, 50_000, 3)
    return abs(cap.discrepancy), 4.0 * cap.stderr + 1e-6


CHECKS: List = [
    ("q_func/q_inv round trip", _q_roundtrip),
    ("laguerre vs closed form (deg<=3)", _laguerre_closed_form),
    ("gamma_pdf normalization", _gamma_normalization),
    ("product_gamma_pdf normalization", _product_normalization),
    ("mellin moment consistency (rel)", _mellin_consistency),
    ("N=1 Meijer-G path vs gamma_pdf", _single_factor_equivalence),
    ("sandwich ach <= conv (n>=50)", _sandwich),
    ("seed determinism across workers", _determinism),
    ("capacity MC vs quadrature", _capacity_paths),
]


def run_selftest(checks=None, out: Callable[[str], None] = print) -> List[CheckResult]:
    results = []
    for name, fn in checks or CHECKS:
        try:
            measured, threshold = fn()
            passed = bool(measured <= threshold)
        except Exception as exc:  # a crashing check is a failed check
            out(f"ERROR {name}: {exc}")
            measured, threshold, passed = float("nan"), float("nan"), False
        res = CheckResult(name, float(measured), float(threshold), passed)
        out(res.line())
        results.append(res)
    return results
