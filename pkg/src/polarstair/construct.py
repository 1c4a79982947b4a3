"""Polar code construction by Gaussian-approximation density evolution.

Subchannel indices are 0-based and in natural (bit-reversal-free) order.
The leaf order follows the successive-cancellation tree used by the
decoder: the most significant bit of an index selects the operation
applied first to the channel LLRs (0 = check node, 1 = variable node).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import erfc

from .llr import check_combine

MAX_LEVELS = 20

# Chung et al. two-piece approximation of the GA check-node function.
# The pieces cross at PHI_SWITCH, so switching there keeps phi continuous
# and strictly decreasing. Below PHI_LOW the power-law piece exceeds 1 and
# flattens after clamping, so it is replaced by its tangent through the
# origin (log phi = PHI_LOW_SLOPE * x), which keeps phi C1 and invertible.
PHI_ALPHA = -0.4527
PHI_BETA = 0.86
PHI_GAMMA = 0.0218
PHI_SWITCH = 6.177975866159402
PHI_LOW = (PHI_GAMMA / (PHI_ALPHA * (PHI_BETA - 1))) ** (1 / PHI_BETA)
PHI_LOW_SLOPE = PHI_ALPHA * PHI_BETA * PHI_LOW ** (PHI_BETA - 1)


@dataclass(frozen=True)
class ReliabilityProfile:
    means: np.ndarray
    p_err: np.ndarray

    @property
    def N(self):
        return len(self.means)


@dataclass(frozen=True)
class CodeConfig:
    """One component polar code.

    ``A`` and ``A_c`` are 0-based index arrays sorted by descending
    reliability (ties by ascending index). Information bit ``u[j]`` is
    carried at codeword position ``A[j]``.
    """

    N: int
    K: int
    A: np.ndarray
    A_c: np.ndarray
    design_llr_mean: float
    order: np.ndarray = field(repr=False)

    @property
    def n(self):
        return self.N.bit_length() - 1

    @property
    def rate(self):
        return Fraction(self.K, self.N)

    @property
    def frozen_mask(self):
        mask = np.zeros(self.N, dtype=bool)
        mask[self.A_c] = True
        return mask

    def to_dict(self):
        return {
            "N": self.N,
            "K": self.K,
            "rate": f"{self.K}/{self.N}",
            "design_llr_mean": self.design_llr_mean,
            "reliability_order": [int(i) for i in self.order],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d):
        order = np.asarray(d["reliability_order"], dtype=np.int64)
        N, K = int(d["N"]), int(d["K"])
        if sorted(order.tolist()) != list(range(N)):
            raise ValueError("reliability_order is not a permutation of 0..N-1")
        return cls(N=N, K=K, A=order[:K].copy(), A_c=order[K:].copy(),
                   design_llr_mean=float(d["design_llr_mean"]), order=order)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _check_mean(m):
    if not np.all(np.isfinite(m)) or np.any(np.asarray(m) < 0):
        raise ValueError("LLR means must be finite and non-negative")


def phi(x):
    """GA check-node function, vectorised; phi(0) = 1."""
    x = np.asarray(x, dtype=float)
    return np.exp(log_phi(x))


def log_phi(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    out[...] = PHI_LOW_SLOPE * x
    mid = (x >= PHI_LOW) & (x < PHI_SWITCH)
    hi = x >= PHI_SWITCH
    out[mid] = PHI_ALPHA * x[mid] ** PHI_BETA + PHI_GAMMA
    xh = x[hi]
    out[hi] = 0.5 * np.log(np.pi / xh) - xh / 4 + np.log1p(-10.0 / (7.0 * xh))
    return out


def check_mean(m, iterations=64):
    """GA image of the check-node convolution of two N(m, 2m) densities.

    Solves phi(out) = 1 - (1 - phi(m))^2 in the log domain. When phi is
    close to 1 the target is formed through expm1/log1p, and inside the
    linear low piece the inverse is exact, so tiny means keep their full
    relative precision. Otherwise bisection on [PHI_LOW, m] runs a fixed
    number of halvings (64 reaches double precision relative to m), which
    keeps each element independent of the rest of the batch.
    """
    m = np.asarray(m, dtype=float)
    lp = log_phi(m)
    with np.errstate(divide="ignore"):
        target = np.where(lp < -np.log(2.0),
                          lp + np.log(2.0 - np.exp(lp)),
                          np.log1p(-np.expm1(lp) ** 2))
    low = target >= PHI_LOW_SLOPE * PHI_LOW
    lo = np.full_like(m, PHI_LOW)
    hi = np.maximum(m, PHI_LOW)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        # log_phi is decreasing: too small a value means mid is too large
        too_big = log_phi(mid) < target
        hi = np.where(too_big, mid, hi)
        lo = np.where(too_big, lo, mid)
    return np.where(low, target / PHI_LOW_SLOPE, 0.5 * (lo + hi))


def ga_evolve(n, design_llr_mean, max_levels=MAX_LEVELS):
    """Per-subchannel GA mean LLRs for a length-2**n code."""
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ValueError(f"level count must be a non-negative integer, got {n!r}")
    if n > max_levels:
        raise ValueError(f"n={n} exceeds the configured maximum of {max_levels}")
    m = float(design_llr_mean)
    if not math.isfinite(m) or m <= 0:
        raise ValueError(f"design_llr_mean must be positive and finite, got {design_llr_mean!r}")
    means = np.array([m])
    for _ in range(n):
        # each node splits into (check child, variable child); children of
        # node i end up at 2i and 2i+1, so after n levels the MSB of the
        # leaf index records the first operation
        out = np.empty(2 * len(means))
        out[0::2] = check_mean(means)
        out[1::2] = 2.0 * means
        means = out
    return means


def error_prob(mean):
    """P(LLR < 0) for LLR ~ N(mean, 2*mean), i.e. Q(sqrt(mean/2))."""
    m = np.asarray(mean, dtype=float)
    _check_mean(m)
    p = 0.5 * erfc(np.sqrt(m / 2.0) / np.sqrt(2.0))
    return p if p.ndim else float(p)


def reliability_profile(n, design_llr_mean):
    means = ga_evolve(n, design_llr_mean)
    return ReliabilityProfile(means=means, p_err=np.asarray(error_prob(means)))


def reliability_order(profile):
    """Indices by descending reliability, ascending index on ties."""
    N = profile.N
    # p_err underflows to 0 for the best channels, so rank by mean instead
    return np.lexsort((np.arange(N), -profile.means))


def select_info_set(profile, K, design_llr_mean=float("nan")):
    N = profile.N
    if not 1 <= K <= N:
        raise ValueError(f"K must lie in [1, {N}], got {K}")
    order = reliability_order(profile)
    return CodeConfig(N=N, K=int(K), A=order[:K].copy(), A_c=order[K:].copy(),
                      design_llr_mean=float(design_llr_mean), order=order)


def dimension_for_rate(N, rate):
    """K = round(N * rate), rounding halves up."""
    k = int(Fraction(rate) * N + Fraction(1, 2))
    return max(1, min(N, k))


def build_code(N, K, design_llr_mean):
    if N < 1 or N & (N - 1):
        raise ValueError(f"N must be a power of two, got {N}")
    n = N.bit_length() - 1
    profile = reliability_profile(n, design_llr_mean)
    return select_info_set(profile, K, design_llr_mean)


def mc_density_evolution(n, design_llr_mean, samples=10**5, seed=0, chunk=1 << 16):
    """Sampled density evolution under the all-zero codeword.

    Channel LLRs are drawn from N(m, 2m) and pushed through the genie-aided
    SC recursion with the exact check-node rule; returns the fraction of
    negative samples for every subchannel.
    """
    if samples < 10**4:
        raise ValueError("need at least 1e4 samples")
    if n < 0 or n > MAX_LEVELS:
        raise ValueError(f"bad level count {n}")
    m = float(design_llr_mean)
    if not math.isfinite(m) or m <= 0:
        raise ValueError("design_llr_mean must be positive and finite")
    N = 1 << n
    rng = np.random.default_rng(seed)
    neg = np.zeros(N, dtype=np.int64)
    done = 0
    while done < samples:
        s = min(chunk, samples - done)
        llr = rng.normal(m, math.sqrt(2 * m), size=(s, N))
        h = N // 2
        while h >= 1:
            blocks = llr.reshape(s, -1, 2, h)
            a, b = blocks[:, :, 0, :], blocks[:, :, 1, :]
            # children sit side by side: check child first, variable second
            llr = np.stack([check_combine(a, b), a + b], axis=2).reshape(s, N)
            h //= 2
        neg += np.count_nonzero(llr < 0, axis=0)
        done += s
    return neg / samples
