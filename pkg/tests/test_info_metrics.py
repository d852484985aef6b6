import math

import numpy as np
import pytest

from fblris.channel import SystemConfig, sample_ris_channel
from fblris.errors import InsufficientSamplesError, ShapeError
from fblris.info_metrics import (
    InfoStats,
    conditional_variance,
    estimate_moments,
    info_density_batch,
    info_density_sample,
    log_pdf_y_given_xh,
)
from fblris.modulation import input_matrix, make_constellation


def _stats(cfg, scheme="bpsk", samples=40_000, seed=1, **kw):
    return estimate_moments(cfg, make_constellation(scheme, cfg), samples, seed, **kw)


def _zero_channel(cfg, size, rng):
    return np.zeros((size, cfg.r, cfg.t), dtype=complex)


def test_zero_channel_carries_no_information():
    cfg = SystemConfig(2, 1, 4, 0.0)
    st = _stats(cfg, sampler=_zero_channel, samples=5000)
    assert abs(st.i_bits) < 1e-12
    assert st.u_bits2 < 1e-20
    assert st.v_bits2 < 1e-20


def test_dispersion_fallback_to_v():
    st = InfoStats(1.0, 0.0, 0.0, 0.0, 1000, 0, v_bits2=0.3)
    assert st.dispersion == 0.3
    st = InfoStats(1.0, 0.5, 0.0, 0.0, 1000, 0, v_bits2=0.3)
    assert st.dispersion == 0.5


def test_low_snr_vanishes():
    cfg = SystemConfig(2, 1, 4, -60.0)
    assert _stats(cfg, samples=20_000).i_bits <= 0.01


@pytest.mark.parametrize("scheme", ["bpsk", "qpsk"])
def test_information_bounds(scheme):
    cfg = SystemConfig(2, 2, 16, 20.0)
    st = _stats(cfg, scheme, samples=20_000)
    c = make_constellation(scheme, cfg)
    assert -3 * st.stderr_i <= st.i_bits <= cfg.t * c.bits_per_symbol + 3 * st.stderr_i
    # at high SNR the rate saturates near t log2|A|
    assert st.i_bits > 0.9 * cfg.t * c.bits_per_symbol


def test_conditional_variance_not_above_total():
    cfg = SystemConfig(2, 1, 4, -5.0)
    st = _stats(cfg)
    se_u = math.sqrt(max(st.t_bits3 ** (4 / 3), st.u_bits2 ** 2) / st.samples)
    assert st.v_bits2 <= st.u_bits2 + 3 * se_u
    assert conditional_variance(cfg, make_constellation("bpsk", cfg), 40_000, 1) == st.v_bits2


def test_monotone_in_snr():
    rates = [_stats(SystemConfig(2, 1, 4, snr), "qpsk", samples=40_000).i_bits for snr in (-10, -5, 0, 5)]
    assert all(b > a for a, b in zip(rates, rates[1:]))


def test_qpsk_above_bpsk():
    cfg = SystemConfig(2, 1, 4, -5.0)
    assert _stats(cfg, "qpsk").i_bits > _stats(cfg, "bpsk").i_bits


def test_deterministic_across_workers():
    cfg = SystemConfig(3, 2, 4, -5.0, scheme="qpsk")
    a = _stats(cfg, "qpsk", samples=30_000, seed=9, workers=1)
    b = _stats(cfg, "qpsk", samples=30_000, seed=9, workers=4)
    assert a == b
    assert _stats(cfg, "qpsk", samples=30_000, seed=10).i_bits != a.i_bits


def test_insufficient_samples():
    with pytest.raises(InsufficientSamplesError):
        _stats(SystemConfig(2, 1, 4, 0.0), samples=999)


def test_sample_and_batch_agree():
    cfg = SystemConfig(2, 2, 4, 0.0)
    c = make_constellation("qpsk", cfg)
    real = sample_ris_channel(cfg, 4)
    xs = input_matrix(c, 2)
    rng = np.random.default_rng(2)
    w = np.sqrt(0.5) * (rng.standard_normal(2) + 1j * rng.standard_normal(2))
    y = real.h @ xs[5] + w
    single = info_density_sample(xs[5], real, y, c)
    batch = info_density_batch(real.h[None], w[None], np.array([5]), xs)[0]
    assert single == pytest.approx(batch, abs=1e-12)


def test_log_pdf_value_and_shape():
    cfg = SystemConfig(2, 1, 4, 0.0)
    real = sample_ris_channel(cfg, 0)
    x = np.array([1.0, 1.0])
    y = real.h @ x
    assert log_pdf_y_given_xh(y, x, real) == pytest.approx(-math.log(math.pi))
    with pytest.raises(ShapeError):
        log_pdf_y_given_xh(np.zeros(2), x, real)
