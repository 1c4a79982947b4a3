"""Polar-staircase framing, sliding-window decoding and burst patching.

A stair is an M x N block: M systematic codewords, one per row. Inside a
row, positions are in natural codeword order. The *column layout* (used
for transmission and for burst coordinates) reorders each row as::

    [receiver positions | middle positions | donor positions]
      M columns            N - 2M            M columns

Receiver positions are the M most reliable information positions and
carry the previous stair's donor block. Donor positions are the
``overlap_info_count`` least reliable information positions followed by
the check positions. Donor entry (row j, slot t) of stair i reappears in
stair i+1 at receiver (row t, slot M-1-j).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .codec import decide, init_state, scan_decode_systematic, systematic_encode
from .construct import CodeConfig
from .llr import LLR_MAX


@dataclass(frozen=True)
class StaircaseConfig:
    code: CodeConfig
    M: int
    k: int
    terminate: bool = False

    def __post_init__(self):
        N, K, M = self.code.N, self.code.K, self.M
        if not N - K < M <= N // 2:
            raise ValueError(f"stair width M={M} must satisfy {N - K} < M <= {N // 2}")
        if self.k < 1:
            raise ValueError(f"need at least one stair, got k={self.k}")

    @property
    def overlap_info_count(self):
        return self.M - (self.code.N - self.code.K)

    @property
    def new_info_per_row(self):
        return self.code.K - self.M

    @property
    def payload_len(self):
        return self.k * self.M * self.new_info_per_row

    @property
    def stairs(self):
        """Stairs actually transmitted, counting the terminating stair."""
        return self.k + int(self.terminate)


@dataclass(frozen=True)
class OverlapSchedule:
    donor_positions: np.ndarray
    receiver_positions: np.ndarray
    middle_positions: np.ndarray
    M: int

    @property
    def columns(self):
        """Natural position of each column in the column layout."""
        return np.concatenate([self.receiver_positions, self.middle_positions, self.donor_positions])

    def row_map(self, j, t):
        """Donor (row j, slot t) -> receiver (row, slot) in the next stair."""
        return t, self.M - 1 - j

    def row_map_inverse(self, r, s):
        """Receiver (row r, slot s) -> donor (row, slot) in the previous stair."""
        return self.M - 1 - s, r


def make_schedule(cfg):
    A, A_c, M = cfg.code.A, cfg.code.A_c, cfg.M
    K = cfg.code.K
    o = cfg.overlap_info_count
    return OverlapSchedule(
        donor_positions=np.concatenate([A[K - o:], A_c]),
        receiver_positions=A[:M].copy(),
        middle_positions=A[M:K - o].copy(),
        M=M,
    )


def frame_rate(cfg):
    """New information bits per transmitted stair bit, (K - M) / N."""
    return Fraction(cfg.new_info_per_row * cfg.k, cfg.code.N * cfg.stairs)


def donor_to_receiver(block):
    """Place a donor block (rows j, slots t) at receiver coordinates (t, M-1-j)."""
    return block[::-1, :].T


def receiver_to_donor(block):
    return block.T[::-1, :]


@dataclass
class Frame:
    """Stairs as a (stairs, M, N) array of bits or LLRs in natural position order."""

    stairs: np.ndarray
    cfg: StaircaseConfig

    def to_columns(self):
        return self.stairs[:, :, make_schedule(self.cfg).columns]

    @classmethod
    def from_columns(cls, data, cfg):
        sched = make_schedule(cfg)
        data = np.asarray(data).reshape(cfg.stairs, cfg.M, cfg.code.N)
        out = np.empty_like(data)
        out[:, :, sched.columns] = data
        return cls(out, cfg)

    def transmit_order(self):
        return self.to_columns().reshape(-1)


def encode_frame(payload, cfg):
    payload = np.asarray(payload, dtype=np.uint8)
    if payload.shape != (cfg.payload_len,):
        raise ValueError(f"payload must hold {cfg.payload_len} bits, got {payload.shape}")
    code, M = cfg.code, cfg.M
    sched = make_schedule(cfg)
    chunks = payload.reshape(cfg.k, M, cfg.new_info_per_row)
    stairs = np.empty((cfg.stairs, M, code.N), dtype=np.uint8)
    recv = np.zeros((M, M), dtype=np.uint8)
    for i in range(cfg.stairs):
        u = np.empty((M, code.K), dtype=np.uint8)
        u[:, :M] = recv
        u[:, M:] = chunks[i] if i < cfg.k else 0
        stairs[i] = systematic_encode(u, code)
        recv = donor_to_receiver(stairs[i][:, sched.donor_positions])
    return Frame(stairs, cfg)


def combine_extrinsic(stair_llrs, next_extrinsic, schedule):
    """Add the next stair's receiver extrinsics onto this stair's donor LLRs.

    ``next_extrinsic`` is an (M, N) array or a SoftState of M rows.
    Returns a new array; the input is left untouched.
    """
    ext = getattr(next_extrinsic, "extrinsic", next_extrinsic)
    M = schedule.M
    stair_llrs = np.asarray(stair_llrs, dtype=float)
    if ext.shape[0] != M or stair_llrs.shape[0] != M or ext.shape[1] != stair_llrs.shape[1]:
        raise ValueError("extrinsic and stair dimensions do not match the schedule")
    out = stair_llrs.copy()
    block = receiver_to_donor(ext[:, schedule.receiver_positions])
    out[:, schedule.donor_positions] = np.clip(
        out[:, schedule.donor_positions] + block, -LLR_MAX, LLR_MAX)
    return out


class StaircaseDecoder:
    """Sliding-window decoder with persistent per-row SCAN states.

    ``run(i)`` continues from wherever the previous call stopped, so
    ``run(a); run(b)`` equals ``run(a + b)``.
    """

    def __init__(self, frame_llrs, cfg, rule="exact", alpha=1.0):
        llrs = np.asarray(getattr(frame_llrs, "stairs", frame_llrs), dtype=float)
        shape = (cfg.stairs, cfg.M, cfg.code.N)
        if llrs.shape != shape:
            raise ValueError(f"frame LLRs must be {shape}, got {llrs.shape}")
        self.cfg = cfg
        self.schedule = make_schedule(cfg)
        self.channel = np.clip(llrs, -LLR_MAX, LLR_MAX)
        if cfg.terminate:
            # the terminating stair's fresh positions are known zeros
            self.channel[-1][:, cfg.code.A[cfg.M:]] = LLR_MAX
        self.states = [init_state(cfg.code, cfg.M) for _ in range(cfg.stairs)]
        self.rule = rule
        self.alpha = alpha
        self.iterations = 0

    def run(self, iters=1):
        if iters < 1:
            raise ValueError("I_max must be >= 1")
        last = self.cfg.stairs - 1
        for _ in range(iters):
            for i in range(last, -1, -1):
                llr = self.channel[i]
                if i < last:
                    llr = combine_extrinsic(llr, self.states[i + 1], self.schedule)
                scan_decode_systematic(llr, self.cfg.code, 1, state=self.states[i],
                                       rule=self.rule, alpha=self.alpha)
            self.iterations += 1
        return self

    def decisions(self):
        """Hard information bits per stair, (stairs, M, K) in A order."""
        return np.stack([decide(s, self.cfg.code) for s in self.states])

    def payload(self):
        return extract_payload(self.decisions(), self.cfg)


def extract_payload(decisions, cfg):
    """Payload from per-stair decisions; overlapped bits come from the receiver copy."""
    M, K, o = cfg.M, cfg.code.K, cfg.overlap_info_count
    bits = decisions[:cfg.k, :, M:].copy()
    for i in range(min(cfg.k, cfg.stairs - 1)):
        # donor info slots t < o live at receiver (t, M-1-j) of stair i+1
        recv = receiver_to_donor(decisions[i + 1][:, :M])
        bits[i][:, K - o - M:] = recv[:, :o]
    return bits.reshape(-1)


def decode_frame(frame_llrs, cfg, I_max=4, rule="exact", alpha=1.0):
    return StaircaseDecoder(frame_llrs, cfg, rule=rule, alpha=alpha).run(I_max).payload()


def _burst_mask(bursts, cfg):
    shape = (cfg.stairs, cfg.M, cfg.code.N)
    if isinstance(bursts, np.ndarray) and bursts.dtype == bool:
        if bursts.shape != shape:
            raise ValueError(f"burst mask must be {shape}")
        return bursts
    mask = np.zeros(shape, dtype=bool)
    for phi, m, c in bursts:
        if not (0 <= phi < shape[0] and 0 <= m < shape[1] and 0 <= c < shape[2]):
            raise ValueError(f"burst coordinate {(phi, m, c)} out of range")
        mask[phi, m, c] = True
    return mask


def burst_patch(frame_llrs, bursts, cfg):
    """Replace flagged overlap observations with their clean duplicates.

    ``frame_llrs`` is (stairs, M, N) in natural order. ``bursts`` holds
    (stair, row, column) triples in the column layout, or a boolean mask of
    that shape. Receiver columns of the first stair fall back to the known
    zero (+LLR_MAX); donor columns of the final stair have no duplicate.
    """
    cfg_shape = (cfg.stairs, cfg.M, cfg.code.N)
    llrs = np.asarray(getattr(frame_llrs, "stairs", frame_llrs), dtype=float)
    if llrs.shape != cfg_shape:
        raise ValueError(f"frame LLRs must be {cfg_shape}, got {llrs.shape}")
    mask = _burst_mask(bursts, cfg)
    sched = make_schedule(cfg)
    M, N = cfg.M, cfg.code.N
    cols = llrs[:, :, sched.columns]
    out = cols.copy()

    recv_bad = mask[:, :, :M]
    donor_bad = mask[:, :, N - M:]
    recv_vals = cols[:, :, :M]
    donor_vals = cols[:, :, N - M:]

    # receiver (r, s) of stair i <- donor of stair i-1
    dup = np.empty_like(recv_vals)
    dup_bad = np.zeros_like(recv_bad)
    dup[0] = LLR_MAX
    for i in range(1, cfg.stairs):
        dup[i] = donor_to_receiver(donor_vals[i - 1])
        dup_bad[i] = donor_to_receiver(donor_bad[i - 1])
    take = recv_bad & ~dup_bad
    out[:, :, :M][take] = dup[take]

    # donor (j, t) of stair i <- receiver of stair i+1
    dup = np.empty_like(donor_vals)
    dup_bad = np.ones_like(donor_bad)
    for i in range(cfg.stairs - 1):
        dup[i] = receiver_to_donor(recv_vals[i + 1])
        dup_bad[i] = receiver_to_donor(recv_bad[i + 1])
    take = donor_bad & ~dup_bad
    out[:, :, N - M:][take] = dup[take]

    res = np.empty_like(out)
    res[:, :, sched.columns] = out
    return res


def bursts_from_indices(indices, cfg):
    """Map flat transmit-order indices to a (stairs, M, N) column-layout mask."""
    mask = np.zeros(cfg.stairs * cfg.M * cfg.code.N, dtype=bool)
    mask[np.asarray(indices, dtype=np.int64)] = True
    return mask.reshape(cfg.stairs, cfg.M, cfg.code.N)
