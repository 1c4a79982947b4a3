"""Monte Carlo BLER/BER harness and the decoding-complexity estimator.

Every trial owns an RNG seeded from (point seed, trial index), so a point's
result depends only on the configuration and the root seed. Trials run in
chunks; the stop rule is applied per trial afterwards, which keeps the
tally independent of chunk size and thread count.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache

import numba
import numpy as np
from scipy.stats import binomtest

from .channels import AwgnParams, GilbertElliottParams, awgn_transmit, ge_transmit
from .codec import decide, scan_decode_systematic, systematic_encode
from .construct import build_code, dimension_for_rate
from .staircase import (Frame, StaircaseConfig, StaircaseDecoder, burst_patch,
                        bursts_from_indices, encode_frame)

log = logging.getLogger(__name__)

CSV_FIELDS = ("point", "trials", "block_errors", "bit_errors", "bler", "ber",
              "ci_lo", "ci_hi", "seed", "wall_seconds")


@dataclass(frozen=True)
class SimConfig:
    N: int = 1024
    K: int | None = None
    rate: Fraction = Fraction(5, 6)
    M: int = 300
    k: int = 5
    terminate: bool = False
    scheme: str = "staircase"          # staircase | component
    channel: str = "awgn"              # awgn | ge
    ebn0_db: tuple = (4.0,)
    pbe: tuple = ()
    delta: float = 20.0
    burst_mode: str = "erase"
    patch: bool = True
    iters: int = 4
    rule: str = "exact"
    alpha: float = 1.0
    rate_basis: str = "component"      # component | frame
    design_ebn0_db: float | None = None
    min_block_errors: int = 100
    max_trials: int = 100_000
    seed: int = 0
    batch: int = 64

    def __post_init__(self):
        if self.min_block_errors < 1 or self.max_trials < 1:
            raise ValueError("stop rule needs min_block_errors >= 1 and max_trials >= 1")
        if self.scheme not in ("staircase", "component"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.channel not in ("awgn", "ge"):
            raise ValueError(f"unknown channel {self.channel!r}")
        if self.rate_basis not in ("component", "frame"):
            raise ValueError(f"unknown rate basis {self.rate_basis!r}")
        if self.iters < 1:
            raise ValueError("iters must be >= 1")
        if self.N < 2 or self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two, got {self.N}")
        axis = self.axis
        if len(axis) == 0:
            raise ValueError("sweep axis is empty")
        d = np.diff(np.asarray(axis, dtype=float))
        if len(d) and not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("sweep axis must be strictly monotone")
        if self.channel == "ge" and len(self.ebn0_db) != 1:
            raise ValueError("a burst-channel sweep needs exactly one Eb/N0 value")
        if self.scheme == "staircase":
            self.staircase(build=False)

    @property
    def dimension(self):
        return self.K if self.K is not None else dimension_for_rate(self.N, self.rate)

    @property
    def axis(self):
        return tuple(self.pbe) if self.channel == "ge" else tuple(self.ebn0_db)

    def staircase(self, build=True, design_llr_mean=1.0):
        code = _code(self.N, self.dimension, design_llr_mean) if build else _Dummy(self.N, self.dimension)
        return StaircaseConfig(code, self.M, self.k, self.terminate)

    def ebn0_at(self, point):
        return float(self.ebn0_db[0]) if self.channel == "ge" else float(point)

    def rate_for_ebn0(self):
        K = self.dimension
        if self.rate_basis == "component" or self.scheme == "component":
            return Fraction(K, self.N)
        stairs = self.k + int(self.terminate)
        return Fraction((K - self.M) * self.k, self.N * stairs)


@dataclass(frozen=True)
class _Dummy:
    N: int
    K: int


@lru_cache(maxsize=64)
def _code(N, K, design_llr_mean):
    return build_code(N, K, design_llr_mean)


@dataclass
class SimResult:
    point: float
    trials: int
    block_errors: int
    bit_errors: int
    bler: float
    ber: float
    ci_lo: float
    ci_hi: float
    seed: int
    wall_seconds: float = 0.0
    bits_per_trial: int = 0
    rows: int = 0
    row_errors: int = 0
    stair_row_errors: list = field(default_factory=list)

    @property
    def row_bler(self):
        """Per-codeword error rate, counting every row of every stair."""
        return self.row_errors / self.rows if self.rows else float("nan")

    def csv_row(self, timing=False):
        vals = [repr(float(self.point)), str(self.trials), str(self.block_errors),
                str(self.bit_errors), repr(float(self.bler)), repr(float(self.ber)),
                repr(float(self.ci_lo)), repr(float(self.ci_hi)), str(self.seed),
                repr(round(self.wall_seconds, 3)) if timing else ""]
        return ",".join(vals)

    def to_dict(self, timing=False):
        d = asdict(self)
        d["row_bler"] = self.row_bler
        if not timing:
            d.pop("wall_seconds")
        return d


def wilson_interval(errors, trials, confidence=0.95):
    ci = binomtest(int(errors), int(trials)).proportion_ci(confidence, method="wilson")
    return float(ci.low), float(ci.high)


def point_seed(root_seed, index):
    return int(np.random.SeedSequence([int(root_seed), int(index)]).generate_state(1)[0])


def trial_rng(seed, trial):
    return np.random.default_rng([int(seed), int(trial)])


def run_trials(batch_fn, seed, min_block_errors, max_trials, batch=64):
    """Drive ``batch_fn(seed, trial_indices) -> dict of per-trial arrays``.

    Required keys: ``block`` (bool) and ``bits`` (bit errors). Other keys
    are summed too. Stops at the first trial where the block-error count
    reaches ``min_block_errors``, or at ``max_trials``.
    """
    sums = {}
    done = 0
    errs = 0
    while done < max_trials and errs < min_block_errors:
        idx = np.arange(done, min(done + batch, max_trials))
        out = batch_fn(seed, idx)
        block = np.asarray(out["block"], dtype=bool)
        cum = errs + np.cumsum(block)
        hit = np.flatnonzero(cum >= min_block_errors)
        take = hit[0] + 1 if len(hit) else len(idx)
        for key, val in out.items():
            val = np.asarray(val)[:take]
            sums[key] = sums.get(key, 0) + val.astype(np.int64).sum(axis=0)
        errs = int(cum[take - 1])
        done += int(take)
    sums["trials"] = done
    return sums


def _component_batch(cfg, point):
    ebn0 = cfg.ebn0_at(point)
    awgn = AwgnParams(ebn0, cfg.rate_for_ebn0())
    design = awgn if cfg.design_ebn0_db is None else AwgnParams(cfg.design_ebn0_db, cfg.rate_for_ebn0())
    code = _code(cfg.N, cfg.dimension, design.llr_mean)
    ge = GilbertElliottParams(cfg.delta, float(point)) if cfg.channel == "ge" else None

    def fn(seed, idx):
        u = np.empty((len(idx), code.K), dtype=np.uint8)
        llr = np.empty((len(idx), code.N))
        for r, t in enumerate(idx):
            rng = trial_rng(seed, t)
            u[r] = rng.integers(0, 2, code.K, dtype=np.uint8)
            x = systematic_encode(u[r], code)
            if ge is None:
                llr[r] = awgn_transmit(x, awgn, rng)
            else:
                llr[r] = ge_transmit(x, awgn, ge, rng, cfg.burst_mode)[0]
        st = scan_decode_systematic(llr, code, cfg.iters, rule=cfg.rule, alpha=cfg.alpha)
        err = decide(st, code) != u
        block = err.any(axis=1)
        return {"block": block, "bits": err.sum(axis=1), "rows": np.ones(len(idx)),
                "row_errors": block}

    return fn, code.K


def _staircase_batch(cfg, point):
    ebn0 = cfg.ebn0_at(point)
    awgn = AwgnParams(ebn0, cfg.rate_for_ebn0())
    design = awgn if cfg.design_ebn0_db is None else AwgnParams(cfg.design_ebn0_db, cfg.rate_for_ebn0())
    sc = cfg.staircase(design_llr_mean=design.llr_mean)
    code = sc.code
    ge = GilbertElliottParams(cfg.delta, float(point)) if cfg.channel == "ge" else None

    def fn(seed, idx):
        out = {"block": [], "bits": [], "rows": [], "row_errors": [], "stair_row_errors": []}
        for t in idx:
            rng = trial_rng(seed, t)
            payload = rng.integers(0, 2, sc.payload_len, dtype=np.uint8)
            frame = encode_frame(payload, sc)
            if ge is None:
                llr = awgn_transmit(frame.stairs, awgn, rng)
            else:
                flat, bad = ge_transmit(frame.transmit_order(), awgn, ge, rng, cfg.burst_mode)
                llr = Frame.from_columns(flat, sc).stairs
                if cfg.patch:
                    llr = burst_patch(llr, bursts_from_indices(bad, sc), sc)
            dec = StaircaseDecoder(llr, sc, rule=cfg.rule, alpha=cfg.alpha).run(cfg.iters)
            bit_err = int(np.count_nonzero(dec.payload() != payload))
            rows_bad = np.any(dec.decisions() != frame.stairs[:, :, code.A], axis=2).sum(axis=1)
            out["block"].append(bit_err > 0)
            out["bits"].append(bit_err)
            out["rows"].append(sc.stairs * sc.M)
            out["row_errors"].append(int(rows_bad.sum()))
            out["stair_row_errors"].append(rows_bad)
        return out

    return fn, sc.payload_len


def run_point(cfg, point, seed=None, index=0, batch_fn=None, bits_per_trial=None):
    """Estimate BLER/BER at one axis value.

    ``seed`` defaults to the per-point seed derived from ``cfg.seed`` and
    ``index``. ``batch_fn`` replaces the coding chain (used for harness
    calibration).
    """
    if seed is None:
        seed = point_seed(cfg.seed, index)
    if batch_fn is None:
        maker = _staircase_batch if cfg.scheme == "staircase" else _component_batch
        batch_fn, bits_per_trial = maker(cfg, point)
    batch = cfg.batch if cfg.scheme == "component" else max(1, min(cfg.batch, 8))
    t0 = time.perf_counter()
    sums = run_trials(batch_fn, seed, cfg.min_block_errors, cfg.max_trials, batch)
    wall = time.perf_counter() - t0
    trials = sums["trials"]
    blocks = int(sums["block"])
    bits = int(sums["bits"])
    lo, hi = wilson_interval(blocks, trials)
    res = SimResult(
        point=float(point), trials=trials, block_errors=blocks, bit_errors=bits,
        bler=float(blocks / trials), ber=float(bits / (trials * bits_per_trial)) if bits_per_trial else float("nan"),
        ci_lo=lo, ci_hi=hi, seed=int(seed), wall_seconds=wall,
        bits_per_trial=int(bits_per_trial or 0),
        rows=int(sums.get("rows", 0)), row_errors=int(sums.get("row_errors", 0)),
        stair_row_errors=[int(v) for v in np.atleast_1d(sums.get("stair_row_errors", []))],
    )
    log.info("point %g: %d/%d block errors, bler %.4g (%.1fs)", point, blocks, trials, res.bler, wall)
    return res


def run_sweep(cfg, threads=None):
    if threads is not None:
        numba.set_num_threads(int(threads))
    return [run_point(cfg, p, index=i) for i, p in enumerate(cfg.axis)]


def frame_normalized(p, rows):
    """Per-codeword rate that would give frame error rate ``p`` over ``rows`` independent rows."""
    return 1.0 - (1.0 - p) ** (1.0 / rows)


def separation_sigmas(a, b):
    """|p_a - p_b| in units of the combined Agresti-Coull standard error."""
    def adj(r):
        n = r.trials + 4
        p = (r.block_errors + 2) / n
        return p, p * (1 - p) / n
    pa, va = adj(a)
    pb, vb = adj(b)
    return abs(a.bler - b.bler) / math.sqrt(va + vb)


def complexity_estimate(k, M, N, rate, d_v, d_c):
    """Operation counts for one sliding-window iteration with one inner
    iteration, polar-staircase versus LDPC-staircase.

    Exact rational arithmetic when the inputs are integers or decimal
    strings; log N is base 2.
    """
    k, M, N = Fraction(k), Fraction(M), Fraction(N)
    R, d_v, d_c = Fraction(rate), Fraction(str(d_v)), Fraction(str(d_c))
    if k < 0 or M < 0:
        raise ValueError("k and M must be non-negative")
    if N <= 0 or d_v <= 0 or d_c <= 0 or not 0 < R <= 1:
        raise ValueError("N, d_v, d_c must be positive and rate in (0, 1]")
    n_int = int(N)
    if N == n_int and n_int & (n_int - 1) == 0:
        log_n = Fraction(n_int.bit_length() - 1)
    else:
        log_n = Fraction(math.log2(N))
    kmn = k * M * N
    polar = {
        "sign": 6 * kmn * log_n,
        "mult": 2 * kmn * log_n,
        "div": Fraction(0),
        "add": 2 * kmn * log_n + k * M * M,
        "total": 10 * kmn * log_n + k * M * M,
    }
    ldpc = {
        "sign": kmn * (1 - R) * (d_c + 1),
        "mult": kmn * (1 - R) * (d_c - 1),
        "div": kmn * (1 - R) * d_c,
        "add": 2 * kmn * d_v + k * M * M,
        "total": 5 * kmn * d_v + k * M * M,
    }
    return {"polar": polar, "ldpc": ldpc}
