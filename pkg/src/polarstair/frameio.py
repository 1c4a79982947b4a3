"""Binary frame files.

Layout, little-endian: a 48-byte header followed by the payload::

    magic "PSTF" | version u8 | kind u8 | flags u8 | pad u8
    N u32 | K u32 | M u32 | k u32 | seed u64 | design_llr_mean f64 | n_bursts u64

``kind`` 0 holds packed bits (stairs x M x N, row-major, transmit order),
kind 1 holds float32 LLRs in the same order, kind 2 holds a packed
payload. ``flags`` bit 0 marks a terminated frame. LLR files may end with
``n_bursts`` uint64 transmit-order burst indices.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"PSTF"
VERSION = 1
_HEADER = struct.Struct("<4sBBBxIIIIQdQ")

BITS, LLRS, PAYLOAD = 0, 1, 2


@dataclass
class FrameFile:
    kind: int
    N: int
    K: int
    M: int
    k: int
    seed: int
    design_llr_mean: float
    terminate: bool
    data: np.ndarray
    bursts: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint64))

    @property
    def stairs(self):
        return self.k + int(self.terminate)


def write_frame(path, ff):
    if ff.kind == LLRS:
        body = np.asarray(ff.data, dtype="<f4").tobytes()
    elif ff.kind in (BITS, PAYLOAD):
        body = np.packbits(np.asarray(ff.data, dtype=np.uint8).reshape(-1)).tobytes()
    else:
        raise ValueError(f"unknown frame kind {ff.kind}")
    bursts = np.asarray(ff.bursts, dtype="<u8")
    head = _HEADER.pack(MAGIC, VERSION, ff.kind, int(ff.terminate), ff.N, ff.K, ff.M, ff.k,
                        ff.seed, ff.design_llr_mean, len(bursts))
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(body)
        fh.write(bursts.tobytes())


def read_frame(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, ver, kind, flags, N, K, M, k, seed, mean, nb = _HEADER.unpack_from(raw)
    if magic != MAGIC or ver != VERSION:
        raise ValueError(f"{path}: not a frame file")
    terminate = bool(flags & 1)
    stairs = k + int(terminate)
    if kind == PAYLOAD:
        count = k * M * (K - M)
    else:
        count = stairs * M * N
    off = _HEADER.size
    if kind == LLRS:
        size = 4 * count
        data = np.frombuffer(raw, "<f4", count, off).astype(np.float64)
    elif kind in (BITS, PAYLOAD):
        size = (count + 7) // 8
        data = np.unpackbits(np.frombuffer(raw, np.uint8, size, off))[:count]
    else:
        raise ValueError(f"{path}: unknown frame kind {kind}")
    if len(raw) != off + size + 8 * nb:
        raise ValueError(f"{path}: size does not match header")
    bursts = np.frombuffer(raw, "<u8", nb, off + size).astype(np.int64)
    return FrameFile(kind, N, K, M, k, seed, mean, terminate, data, bursts)
