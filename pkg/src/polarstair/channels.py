"""BPSK/AWGN and Gilbert-Elliott burst channels with LLR outputs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


@dataclass(frozen=True)
class AwgnParams:
    eb_n0_db: float
    rate: Fraction = Fraction(1)

    def __post_init__(self):
        if not 0 < float(self.rate) <= 1:
            raise ValueError(f"rate must lie in (0, 1], got {self.rate}")
        if math.isnan(self.eb_n0_db):
            raise ValueError("eb_n0_db is NaN")

    @property
    def sigma2(self):
        return 1.0 / (2.0 * float(self.rate) * 10.0 ** (self.eb_n0_db / 10.0))

    @property
    def llr_mean(self):
        """Mean channel LLR of a transmitted zero, 2 / sigma2."""
        return 2.0 / self.sigma2


@dataclass(frozen=True)
class GilbertElliottParams:
    """Two-state Markov channel with mean burst length ``delta`` and
    stationary bad-state probability ``p_be``."""

    delta: float
    p_be: float

    def __post_init__(self):
        if self.delta < 1:
            raise ValueError(f"mean burst length must be >= 1, got {self.delta}")
        if not 0 <= self.p_be < 1:
            raise ValueError(f"p_be must lie in [0, 1), got {self.p_be}")
        if self.p_gb >= 1:
            raise ValueError("p_be too large for this burst length")

    @property
    def p_bb(self):
        return 1.0 - 1.0 / self.delta

    @property
    def p_gb(self):
        return self.p_be / ((1.0 - self.p_be) * self.delta)

    @property
    def stationary_bad(self):
        return self.p_gb / (self.p_gb + 1.0 - self.p_bb)


def awgn_transmit(bits, params, seed=None):
    rng = np.random.default_rng(seed)
    bits = np.asarray(bits)
    sigma = math.sqrt(params.sigma2)
    y = 1.0 - 2.0 * bits.astype(float) + rng.normal(0.0, sigma, bits.shape)
    return 2.0 * y / params.sigma2


def ge_states(length, ge, seed=None):
    """Boolean bad-state sequence started from the stationary distribution."""
    rng = np.random.default_rng(seed)
    states = np.zeros(length, dtype=bool)
    if ge.p_be == 0 or length == 0:
        return states
    # alternate geometric sojourns; memorylessness makes the first one exact
    bad = rng.random() < ge.stationary_bad
    pos = 0
    p_leave_bad = 1.0 - ge.p_bb
    while pos < length:
        p = p_leave_bad if bad else ge.p_gb
        run = int(rng.geometric(p))
        if bad:
            states[pos:pos + run] = True
        pos += run
        bad = not bad
    return states


def ge_transmit(bits, awgn, ge, seed=None, mode="erase"):
    """AWGN plus Gilbert-Elliott bursts.

    In ``erase`` mode a bad-state symbol loses its signal and the receiver
    sees pure noise; ``flip`` mode inverts the symbol with probability 1/2.
    Returns ``(llrs, burst_indices)`` where the indices are the exact
    bad-state positions (genie side information).
    """
    rng = np.random.default_rng(seed)
    bits = np.asarray(bits)
    flat = bits.reshape(-1)
    sigma = math.sqrt(awgn.sigma2)
    x = 1.0 - 2.0 * flat.astype(float)
    noise = rng.normal(0.0, sigma, flat.shape)
    bad = ge_states(flat.size, ge, rng)
    if mode == "erase":
        x[bad] = 0.0
    elif mode == "flip":
        flips = bad & (rng.random(flat.size) < 0.5)
        x[flips] = -x[flips]
    else:
        raise ValueError(f"unknown burst mode {mode!r}")
    llr = 2.0 * (x + noise) / awgn.sigma2
    return llr.reshape(bits.shape), np.flatnonzero(bad)


def detect_bursts(llrs, threshold):
    """Flag positions whose |LLR| falls below ``threshold``."""
    return np.flatnonzero(np.abs(np.asarray(llrs).reshape(-1)) < threshold)


def run_lengths(mask):
    """Lengths of the maximal runs of True in a boolean vector."""
    m = np.concatenate([[False], np.asarray(mask, dtype=bool), [False]])
    d = np.diff(m.astype(np.int8))
    return np.flatnonzero(d == -1) - np.flatnonzero(d == 1)
