"""Systematic polar encoding and two-stage SCAN soft decoding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .llr import LLR_MAX, hard_decision

RULES = {"exact": K.RULE_EXACT, "minsum": K.RULE_MINSUM}


def _log2(N):
    if N < 1 or N & (N - 1):
        raise ValueError(f"length must be a power of two, got {N}")
    return N.bit_length() - 1


def polar_transform(v):
    """v @ F^{(x)n} over GF(2), F = [[1, 0], [1, 1]], natural order.

    Works on the last axis, so a (batch, N) array is transformed row-wise.
    """
    x = np.array(v, dtype=np.uint8, copy=True)
    N = x.shape[-1]
    _log2(N)
    lead = x.shape[:-1]
    h = N // 2
    while h >= 1:
        y = x.reshape(*lead, N // (2 * h), 2, h)
        y[..., 0, :] ^= y[..., 1, :]
        h //= 2
    return x


def generator_matrix(N):
    n = _log2(N)
    G = np.ones((1, 1), dtype=np.uint8)
    F = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    for _ in range(n):
        G = np.kron(G, F)
    return G


def systematic_encode(u, cfg):
    """Two-step systematic encoding; ``u[..., j]`` lands at position ``A[j]``."""
    u = np.asarray(u, dtype=np.uint8)
    if u.shape[-1] != cfg.K:
        raise ValueError(f"expected {cfg.K} information bits, got {u.shape[-1]}")
    w = np.zeros(u.shape[:-1] + (cfg.N,), dtype=np.uint8)
    w[..., cfg.A] = u
    w = polar_transform(w)
    w[..., cfg.A_c] = 0
    return polar_transform(w)


def systematic_encode_matrix(u, cfg):
    """Reference encoder: x_A = u, x_Ac = u G_AA G_AAc (mod 2)."""
    u = np.asarray(u, dtype=np.int64)
    if u.shape[-1] != cfg.K:
        raise ValueError(f"expected {cfg.K} information bits, got {u.shape[-1]}")
    G = generator_matrix(cfg.N).astype(np.int64)
    G_aa = G[np.ix_(cfg.A, cfg.A)]
    G_aac = G[np.ix_(cfg.A, cfg.A_c)]
    x = np.zeros(u.shape[:-1] + (cfg.N,), dtype=np.uint8)
    x[..., cfg.A] = u
    x[..., cfg.A_c] = ((u @ G_aa) % 2 @ G_aac) % 2
    return x


def is_codeword(x, cfg):
    """True where x = vG for some v with v_Ac = 0."""
    v = polar_transform(x)
    return ~np.any(v[..., cfg.A_c], axis=-1)


@dataclass
class SoftState:
    """The four message planes of the systematic SCAN decoder.

    Arrays are (..., n+1, N); row 0 faces the channel, row n the source.
    A leading batch axis holds independent codewords.
    """

    L1: np.ndarray
    R1: np.ndarray
    L2: np.ndarray
    R2: np.ndarray
    iteration_count: int = 0

    @property
    def extrinsic(self):
        """Soft output on the codeword bits, excluding their own channel LLRs."""
        return self.R1[..., 0, :]

    def copy(self):
        return SoftState(self.L1.copy(), self.R1.copy(), self.L2.copy(),
                         self.R2.copy(), self.iteration_count)


def init_state(cfg, batch=None):
    shape = (cfg.n + 1, cfg.N) if batch is None else (batch, cfg.n + 1, cfg.N)
    planes = [np.zeros(shape) for _ in range(4)]
    for R in (planes[1], planes[3]):
        R[..., cfg.n, cfg.A_c] = LLR_MAX
    return SoftState(*planes)


def update_llr_map(L, R, phase, rule="exact", alpha=1.0):
    """One SC-ordered L refresh, in place, ending at source leaf ``phase``."""
    _check_phase(L, phase)
    K.llr_phase(L, R, int(phase), RULES[rule], float(alpha))
    return L


def update_bit_map(L, R, phase, rule="exact", alpha=1.0):
    """R propagation after leaf ``phase``; only odd phases move anything."""
    _check_phase(L, phase)
    K.bit_phase(L, R, int(phase), RULES[rule], float(alpha))
    return R


def _check_phase(L, phase):
    if L.ndim != 2 or L.shape[0] != _log2(L.shape[1]) + 1:
        raise ValueError(f"plane must be (n+1, N), got {L.shape}")
    if not 0 <= phase < L.shape[1]:
        raise ValueError(f"phase {phase} outside 0..{L.shape[1] - 1}")


def scan_decode_systematic(channel_llrs, cfg, iters=1, state=None, rule="exact", alpha=1.0):
    """Run ``iters`` SCAN sweeps on each stage; warm-starts from ``state``.

    ``channel_llrs`` is (N,) or (B, N). The state is updated in place when
    given and returned either way.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    chan = np.asarray(channel_llrs, dtype=float)
    single = chan.ndim == 1
    chan2 = np.ascontiguousarray(chan.reshape(-1, chan.shape[-1]))
    if chan2.shape[1] != cfg.N:
        raise ValueError(f"expected {cfg.N} LLRs per codeword, got {chan2.shape[1]}")
    if state is None:
        state = init_state(cfg, None if single else chan2.shape[0])
    planes = [p.reshape(-1, cfg.n + 1, cfg.N) for p in (state.L1, state.R1, state.L2, state.R2)]
    if planes[0].shape[0] != chan2.shape[0]:
        raise ValueError("state batch does not match channel LLRs")
    K.decode_batch(chan2, *planes, ~cfg.frozen_mask, int(iters), RULES[rule], float(alpha))
    state.iteration_count += iters
    return state


def decision_llrs(state, cfg):
    """L2 + R2 on the source row at the information positions, in A order."""
    n = cfg.n
    return state.L2[..., n, cfg.A] + state.R2[..., n, cfg.A]


def decide(state, cfg):
    return hard_decision(decision_llrs(state, cfg))
