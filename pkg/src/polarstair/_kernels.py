"""Numba kernels for SCAN message passing.

Planes are (n+1) x N arrays. Row 0 is the channel side, row n the source
side. At row ``lam`` the columns split into groups of ``N >> lam``
consecutive entries; the children of a group are its first and second
halves. The check-node combine has two modes: RULE_EXACT evaluates
2*atanh(tanh(a/2)tanh(b/2)) as sign-min plus a tabulated log1p(exp(-x))
correction (max abs error 5e-7), RULE_MINSUM is scaled min-sum.
"""

import math
import os

import numba as nb
import numpy as np

if "NUMBA_THREADING_LAYER" not in os.environ:
    # the TBB layer warns on older TBB builds; OpenMP ships with numba wheels
    nb.config.THREADING_LAYER = "omp"

RULE_EXACT = 0
RULE_MINSUM = 1

LLR_MAX = 60.0

_STEPS = 256.0
_XMAX = 36.0
_CORR = np.log1p(np.exp(-np.arange(0, int(_XMAX * _STEPS) + 2) / _STEPS))


@nb.njit(inline="always", cache=True)
def _corr(x):
    if x >= _XMAX:
        return 0.0
    y = x * _STEPS
    i = int(y)
    return _CORR[i] + (y - i) * (_CORR[i + 1] - _CORR[i])


@nb.njit(inline="always", cache=True)
def _f(a, b, rule, alpha):
    aa = abs(a)
    bb = abs(b)
    m = min(aa, bb)
    if rule == RULE_EXACT:
        m = m + _corr(aa + bb) - _corr(abs(aa - bb))
    else:
        m = alpha * m
    # branch-free sign; a zero product only occurs when m is zero too
    return math.copysign(m, a * b)


@nb.njit(inline="always", cache=True)
def _sat(x):
    return min(max(x, -LLR_MAX), LLR_MAX)


@nb.njit(inline="always", cache=True)
def llr_phase(L, R, phase, rule, alpha):
    """Refresh L along the path from the channel to source leaf ``phase``."""
    n = L.shape[0] - 1
    if phase == 0:
        start = 1
    else:
        tz = 0
        while (phase >> tz) & 1 == 0:
            tz += 1
        start = n - tz
    for lam in range(start, n + 1):
        s = L.shape[1] >> (lam - 1)
        h = s // 2
        base = (phase >> (n - lam + 1)) * s
        if (phase >> (n - lam)) & 1:
            for j in range(h):
                L[lam, base + h + j] = _sat(
                    L[lam - 1, base + h + j] + _f(L[lam - 1, base + j], R[lam, base + j], rule, alpha))
        else:
            for j in range(h):
                L[lam, base + j] = _sat(
                    _f(L[lam - 1, base + j], L[lam - 1, base + h + j] + R[lam, base + h + j], rule, alpha))


@nb.njit(inline="always", cache=True)
def bit_phase(L, R, phase, rule, alpha):
    """Push R back towards the channel after an odd (right-leaf) phase."""
    n = L.shape[0] - 1
    lam = n
    while lam >= 1 and (phase >> (n - lam)) & 1:
        s = L.shape[1] >> (lam - 1)
        h = s // 2
        base = (phase >> (n - lam + 1)) * s
        for j in range(h):
            r1 = R[lam, base + j]
            r2 = R[lam, base + h + j]
            R[lam - 1, base + j] = _sat(_f(r1, L[lam - 1, base + h + j] + r2, rule, alpha))
            R[lam - 1, base + h + j] = _sat(r2 + _f(r1, L[lam - 1, base + j], rule, alpha))
        lam -= 1


@nb.njit(cache=True)
def sweeps(L, R, iters, rule, alpha):
    N = L.shape[1]
    for _ in range(iters):
        for phase in range(N):
            llr_phase(L, R, phase, rule, alpha)
            if phase & 1:
                bit_phase(L, R, phase, rule, alpha)


@nb.njit(cache=True, parallel=True)
def decode_batch(chan, L1, R1, L2, R2, info, iters, rule, alpha):
    """Two-stage systematic SCAN on every row of ``chan`` in place."""
    B, N = chan.shape
    n = L1.shape[1] - 1
    for b in nb.prange(B):
        for j in range(N):
            L1[b, 0, j] = _sat(chan[b, j])
        sweeps(L1[b], R1[b], iters, rule, alpha)
        for j in range(N):
            L2[b, 0, j] = L1[b, n, j] if info[j] else 0.0
        sweeps(L2[b], R2[b], iters, rule, alpha)


@nb.njit(cache=True)
def f_vec(a, b, rule, alpha):
    out = np.empty(a.shape[0])
    for i in range(a.shape[0]):
        out[i] = _f(a[i], b[i], rule, alpha)
    return out
