"""Scalar LLR arithmetic shared by construction and decoding."""

import numpy as np

LLR_MAX = 60.0


def saturate(x, bound=LLR_MAX):
    return np.clip(x, -bound, bound)


def check_combine(a, b):
    """Exact check-node rule 2*atanh(tanh(a/2)*tanh(b/2)), vectorised.

    Uses the tanh form while either input is small (keeps relative
    precision near zero) and the Jacobian-logarithm form once both are
    large, where tanh would round to one.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    small = np.minimum(np.abs(a), np.abs(b)) < 20.0
    t = np.where(small, np.tanh(a / 2) * np.tanh(b / 2), 0.0)
    out = 2 * np.arctanh(t)
    s = np.where((a >= 0) == (b >= 0), 1.0, -1.0)
    jac = (s * np.minimum(np.abs(a), np.abs(b))
           + np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b))))
    res = np.where(small, out, jac)
    return res if res.ndim else float(res)


def hard_decision(llr):
    """0 for llr >= 0, else 1 (a zero LLR decides 0)."""
    d = (np.asarray(llr) < 0).astype(np.uint8)
    return d if d.ndim else int(d)
