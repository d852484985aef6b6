import math

import numpy as np
import pytest

from fblris.channel import SystemConfig
from fblris.errors import CombinatorialBlowupError, DomainError, UnsupportedError
from fblris.modulation import ENUMERATION_CAP, enumerate_inputs, input_matrix, make_constellation


@pytest.mark.parametrize("scheme,size", [("bpsk", 2), ("qpsk", 4)])
def test_symbol_energy(scheme, size):
    cfg = SystemConfig(2, 1, 4, -5.0)
    c = make_constellation(scheme, cfg)
    assert c.size == size
    assert c.bits_per_symbol == math.log2(size)
    energies = np.abs(np.array(c.symbols)) ** 2
    assert np.allclose(energies, cfg.power / cfg.t, rtol=1e-14)
    assert sum(c.probs) == pytest.approx(1.0)
    assert abs(sum(c.symbols)) < 1e-15


def test_bpsk_is_real():
    c = make_constellation("BPSK", SystemConfig(2, 1, 4, 0.0))
    assert all(s.imag == 0 for s in c.symbols)


def test_input_matrix_enumeration():
    cfg = SystemConfig(3, 2, 4, 0.0)
    c = make_constellation("qpsk", cfg)
    xs = input_matrix(c, 3)
    assert xs.shape == (64, 3)
    assert len({tuple(row) for row in xs}) == 64
    pairs = enumerate_inputs(c, 3)
    assert len(pairs) == 64
    assert sum(p for _, p in pairs) == pytest.approx(1.0)


def test_input_matrix_cap():
    c = make_constellation("qpsk", SystemConfig(2, 1, 4, 0.0))
    t = int(math.log(ENUMERATION_CAP, 4)) + 1
    with pytest.raises(CombinatorialBlowupError):
        input_matrix(c, t)
    with pytest.raises(DomainError):
        input_matrix(c, 0)


def test_unknown_scheme():
    with pytest.raises(UnsupportedError):
        make_constellation("8psk", SystemConfig(2, 1, 4, 0.0))
