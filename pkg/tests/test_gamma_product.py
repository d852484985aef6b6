import math

import numpy as np
import pytest
from scipy import integrate, special

from fblris.channel import SystemConfig
from fblris.errors import DomainError
from fblris.gamma_product import (
    GammaProductParams,
    aux_channel_pdf,
    aux_converse_diagnostic,
    closed_form_converse_diagnostic,
    gamma_pdf_peak,
    mean_omega_product,
    mellin_gamma,
    product_gamma_pdf,
    product_pdf_general,
)
from fblris.special_fn import gamma_pdf


def test_mellin_values():
    p = GammaProductParams(1.0, 1.0, 2)
    assert mellin_gamma(1.0, p).real == pytest.approx(1.0)
    assert mellin_gamma(2.0, p).real == pytest.approx(1.0)
    assert mellin_gamma(3.0, p).real == pytest.approx(4.0)
    q = GammaProductParams(2.0, 0.5, 3)
    # E[Z] = (k theta)^N
    assert mellin_gamma(2.0, q).real == pytest.approx(1.0)
    with pytest.raises(DomainError):
        mellin_gamma(-1.5, q)


@pytest.mark.parametrize("k,theta", [(1.0, 1.0), (2.5, 0.9), (40.0, 0.05)])
def test_single_factor_equals_gamma_pdf(k, theta):
    z = np.logspace(-2, 1.5, 120) * k * theta
    ref = gamma_pdf(z, k, theta)
    assert np.max(np.abs(product_gamma_pdf(z, GammaProductParams(k, theta, 1)) - ref)) <= 1e-8


def test_two_exponentials_closed_form():
    # product of two Exp(1) has density 2 K_0(2 sqrt z)
    z = np.logspace(-2, 1, 50)
    ref = 2.0 * special.k0(2.0 * np.sqrt(z))
    assert np.allclose(product_gamma_pdf(z, GammaProductParams(1.0, 1.0, 2)), ref, rtol=1e-9)


def test_histogram_oracle_two_factors():
    rng = np.random.default_rng(20240101)
    z = rng.gamma(1.0, 1.0, 10_000_000) * rng.gamma(1.0, 1.0, 10_000_000)
    edges = np.arange(0.01, 10.0 + 1e-9, 0.05)
    counts, _ = np.histogram(z, bins=edges)
    emp = counts / (z.size * np.diff(edges))
    p = GammaProductParams(1.0, 1.0, 2)
    avg = np.array([integrate.quad(lambda x: float(product_gamma_pdf(x, p)), a, b)[0] / (b - a)
                    for a, b in zip(edges[:-1], edges[1:])])
    assert np.max(np.abs(emp - avg)) <= 0.01


@pytest.mark.parametrize("k,theta,n", [(1.0, 1.0, 2), (3.0, 0.7, 3), (0.6, 2.0, 2), (20.0, 0.05, 2), (2.0, 1.0, 4)])
def test_normalization(k, theta, n):
    p = GammaProductParams(k, theta, n)
    val = integrate.quad(lambda lz: float(product_gamma_pdf(math.exp(lz), p)) * math.exp(lz),
                         -60.0, 25.0, epsabs=1e-12, limit=400)[0]
    assert abs(val - 1.0) <= 1e-6


def test_moment_consistency():
    p = GammaProductParams(2.0, 0.8, 2)
    for s in (1.0, 2.0, 3.0):
        val = integrate.quad(lambda lz: float(product_gamma_pdf(math.exp(lz), p)) * math.exp(s * lz),
                             -30.0, 12.0, epsabs=1e-13, limit=200)[0]
        ref = mellin_gamma(s, p).real
        assert val == pytest.approx(ref, rel=1e-5)


def test_distinct_scales_match_sampling():
    rng = np.random.default_rng(3)
    k, thetas = 3.0, [0.5, 2.0]
    z = rng.gamma(k, thetas[0], 2_000_000) * rng.gamma(k, thetas[1], 2_000_000)
    edges = np.linspace(0.5, 15.0, 30)
    counts, _ = np.histogram(z, bins=edges)
    emp = counts / (z.size * np.diff(edges))
    mids = 0.5 * (edges[1:] + edges[:-1])
    assert np.max(np.abs(emp - product_pdf_general(mids, k, thetas))) < 0.005


def test_product_pdf_domain():
    with pytest.raises(DomainError):
        product_gamma_pdf(0.0, GammaProductParams(1.0, 1.0, 2))
    with pytest.raises(DomainError):
        GammaProductParams(0.0, 1.0, 2)
    with pytest.raises(DomainError):
        GammaProductParams(1.0, 1.0, 0)


def test_gamma_peak_n2():
    assert gamma_pdf_peak(2, 1.0) == pytest.approx(2.0 / math.e, rel=1e-14)


@pytest.mark.parametrize("n,omega", [(2, 1.0), (10, 3.0), (200, 1.7)])
def test_gamma_peak_matches_grid_search(n, omega):
    s = np.linspace(1e-6, 3 * omega, 200_001)
    assert gamma_pdf_peak(n, omega) == pytest.approx(np.max(gamma_pdf(s, n, omega / n)), rel=1e-6)


def test_gamma_peak_scaling():
    # peak grows like sqrt(n / (2 pi)) / omega
    n, omega = 10_000, 2.0
    assert gamma_pdf_peak(n, omega) == pytest.approx(math.sqrt(n / (2 * math.pi)) / omega, rel=1e-3)
    assert gamma_pdf_peak(n, 2 * omega) == pytest.approx(gamma_pdf_peak(n, omega) / 2, rel=1e-9)


def test_aux_pdf_single_stream_mode_and_mean():
    n, omega = 100, 1.0
    s = np.linspace(0.5, 1.5, 100_001)
    f = aux_channel_pdf(s, [omega], n)
    assert s[np.argmax(f)] == pytest.approx(0.99, abs=1e-4)
    mean = integrate.quad(lambda x: x * aux_channel_pdf(x, [omega], n), 0, 5)[0]
    assert mean == pytest.approx(omega, rel=1e-8)


def test_aux_pdf_two_streams_normalized():
    n, om = 50, [1.5, 3.0]
    val = integrate.quad(lambda lz: float(aux_channel_pdf(math.exp(lz), om, n)) * math.exp(lz),
                         -3.0, 5.0, limit=200)[0]
    assert val == pytest.approx(1.0, abs=1e-6)


def test_aux_pdf_domain():
    with pytest.raises(DomainError):
        aux_channel_pdf(1.0, [1.0], 1)
    with pytest.raises(DomainError):
        aux_channel_pdf(1.0, [0.5], 10)
    with pytest.raises(DomainError):
        aux_channel_pdf(-1.0, [1.0], 10)


def test_closed_form_diagnostic_value():
    # 2^-50 * sqrt(100) for m = 1
    assert closed_form_converse_diagnostic(2.0 ** 50, 100, 1) == pytest.approx(8.881784197001252e-15, rel=1e-12)


def test_mc_diagnostic_not_above_closed_form():
    cfg = SystemConfig(2, 1, 4, -5.0)
    n, M = 100, 2.0 ** 50
    e_omega = mean_omega_product(cfg, 50_000, 1)
    log_peak = n * math.log(n - 1) - (n - 1) - math.lgamma(n)
    mc_form = math.exp(log_peak - math.log(M)) * e_omega
    assert mc_form <= closed_form_converse_diagnostic(M, n, cfg.m)
    assert aux_converse_diagnostic(M, n, cfg, 50_000, 1) == pytest.approx(mc_form, rel=1e-12)


def test_diagnostic_vanishes_with_codebook_size():
    cfg = SystemConfig(2, 1, 4, -5.0)
    vals = [aux_converse_diagnostic(2.0 ** b, 100, cfg, 5000, 1) for b in (10, 40, 200)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 1e-50
    with pytest.raises(DomainError):
        aux_converse_diagnostic(1.0, 100, cfg, 5000, 1)
