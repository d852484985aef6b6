"""Equiprobable BPSK/QPSK constellations under equal per-antenna power."""

import itertools
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .channel import SCHEMES, SystemConfig
from .errors import CombinatorialBlowupError, DomainError, UnsupportedError

ENUMERATION_CAP = 2 ** 20


@dataclass(frozen=True)
class Constellation:
    scheme: str
    symbols: Tuple[complex, ...]
    probs: Tuple[float, ...]
    per_antenna_power: float

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def bits_per_symbol(self) -> float:
        return math.log2(self.size)


def make_constellation(scheme: str, cfg: SystemConfig) -> Constellation:
    """BPSK {+-a} or QPSK a*(+-1 +-j)/sqrt(2) with a^2 = P/t."""
    scheme = str(scheme).lower()
    if scheme not in SCHEMES:
        raise UnsupportedError(f"unknown modulation scheme {scheme!r}")
    power = cfg.power / cfg.t
    amp = math.sqrt(power)
    if scheme == "bpsk":
        symbols = (complex(amp, 0.0), complex(-amp, 0.0))
    else:
        s = amp / math.sqrt(2.0)
        symbols = (complex(s, s), complex(s, -s), complex(-s, s), complex(-s, -s))
    probs = (1.0 / len(symbols),) * len(symbols)
    return Constellation(scheme=scheme, symbols=symbols, probs=probs, per_antenna_power=power)


def input_matrix(c: Constellation, t: int) -> np.ndarray:
    """All |A|^t input vectors as rows of a (|A|^t, t) complex array."""
    if t < 1:
        raise DomainError(f"t must be >= 1, got {t!r}")
    count = c.size ** t
    if count > ENUMERATION_CAP:
        raise CombinatorialBlowupError(
            f"{c.size}^{t} = {count} input vectors exceeds the cap {ENUMERATION_CAP}"
        )
    return np.array(list(itertools.product(c.symbols, repeat=t)), dtype=complex).reshape(count, t)


def enumerate_inputs(c: Constellation, t: int) -> List[Tuple[np.ndarray, float]]:
    """Every input vector of length t with its (uniform) probability."""
    xs = input_matrix(c, t)
    prob = 1.0 / xs.shape[0]
    return [(row, prob) for row in xs]
