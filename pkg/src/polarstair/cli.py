"""Command-line entry point: construct, encode, transmit, decode, simulate, complexity, plot."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction

import numpy as np

from . import frameio
from .channels import AwgnParams, GilbertElliottParams, awgn_transmit, ge_transmit
from .construct import build_code, dimension_for_rate
from .simkit import CSV_FIELDS, SimConfig, complexity_estimate, run_sweep
from .staircase import Frame, StaircaseConfig, StaircaseDecoder, burst_patch, bursts_from_indices, encode_frame

log = logging.getLogger("polarstair")


def _floats(values):
    out = []
    for v in values:
        out.extend(float(x) for x in str(v).split(",") if x.strip())
    return out


def _rate(text):
    try:
        r = Fraction(text).limit_denominator(1 << 16)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad rate {text!r}")
    if not 0 < r < 1:
        raise argparse.ArgumentTypeError(f"rate must lie in (0, 1), got {text}")
    return r


def _code_args(p, stairs=True):
    p.add_argument("--n", type=int, default=1024, help="component code length N")
    p.add_argument("--rate", type=_rate, default=Fraction(5, 6), help="component rate, e.g. 5/6")
    p.add_argument("--dimension", type=int, help="component dimension K (overrides --rate)")
    if stairs:
        p.add_argument("--m", type=int, default=300, help="stair width M")
        p.add_argument("--stairs", type=int, default=5, help="information stairs k")
        p.add_argument("--terminate", action="store_true", help="append a terminating stair")


def _design_mean(args, K):
    if getattr(args, "design_mean", None) is not None:
        return args.design_mean
    return AwgnParams(args.design_ebn0, Fraction(K, args.n)).llr_mean


def _dimension(args):
    return args.dimension if args.dimension is not None else dimension_for_rate(args.n, args.rate)


def cmd_construct(args):
    K = _dimension(args)
    code = build_code(args.n, K, _design_mean(args, K))
    text = code.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _staircase_from_args(args):
    K = _dimension(args)
    mean = _design_mean(args, K)
    return StaircaseConfig(build_code(args.n, K, mean), args.m, args.stairs, args.terminate), mean


def cmd_encode(args):
    sc, mean = _staircase_from_args(args)
    if args.payload:
        pf = frameio.read_frame(args.payload)
        if pf.kind != frameio.PAYLOAD:
            raise ValueError(f"{args.payload} is not a payload file")
        payload = pf.data
    else:
        payload = np.random.default_rng(args.seed).integers(0, 2, sc.payload_len, dtype=np.uint8)
        if args.payload_out:
            frameio.write_frame(args.payload_out, frameio.FrameFile(
                frameio.PAYLOAD, sc.code.N, sc.code.K, sc.M, sc.k, args.seed, mean, sc.terminate, payload))
    frame = encode_frame(payload, sc)
    frameio.write_frame(args.out, frameio.FrameFile(
        frameio.BITS, sc.code.N, sc.code.K, sc.M, sc.k, args.seed, mean, sc.terminate,
        frame.transmit_order()))
    log.info("wrote %d stairs of %d x %d to %s", sc.stairs, sc.M, sc.code.N, args.out)
    return 0


def cmd_transmit(args):
    ff = frameio.read_frame(args.input)
    if ff.kind != frameio.BITS:
        raise ValueError(f"{args.input} does not hold encoded bits")
    awgn = AwgnParams(args.ebn0, Fraction(ff.K, ff.N))
    rng = np.random.default_rng(args.seed)
    bursts = np.zeros(0, dtype=np.int64)
    if args.channel == "ge":
        llr, bursts = ge_transmit(ff.data, awgn, GilbertElliottParams(args.delta, args.pbe), rng,
                                  args.burst_mode)
    else:
        llr = awgn_transmit(ff.data, awgn, rng)
    frameio.write_frame(args.out, frameio.FrameFile(
        frameio.LLRS, ff.N, ff.K, ff.M, ff.k, args.seed, ff.design_llr_mean, ff.terminate,
        llr, bursts))
    return 0


def cmd_decode(args):
    ff = frameio.read_frame(args.input)
    if ff.kind != frameio.LLRS:
        raise ValueError(f"{args.input} does not hold LLRs")
    sc = StaircaseConfig(build_code(ff.N, ff.K, ff.design_llr_mean), ff.M, ff.k, ff.terminate)
    llr = Frame.from_columns(ff.data, sc).stairs
    if args.patch and len(ff.bursts):
        llr = burst_patch(llr, bursts_from_indices(ff.bursts, sc), sc)
    payload = StaircaseDecoder(llr, sc, rule=args.rule, alpha=args.alpha).run(args.iters).payload()
    frameio.write_frame(args.out, frameio.FrameFile(
        frameio.PAYLOAD, ff.N, ff.K, ff.M, ff.k, ff.seed, ff.design_llr_mean, ff.terminate, payload))
    if args.truth:
        ref = frameio.read_frame(args.truth).data
        errs = int(np.count_nonzero(ref != payload))
        print(f"bit_errors={errs} block_error={int(errs > 0)}")
    return 0


def cmd_simulate(args):
    ge = args.channel == "ge"
    ebn0 = _floats(args.ebn0) if args.ebn0 else [5.0 if ge else 4.0]
    cfg = SimConfig(
        N=args.n, K=args.dimension, rate=args.rate, M=args.m, k=args.stairs,
        terminate=args.terminate, scheme=args.scheme, channel=args.channel,
        ebn0_db=tuple(ebn0), pbe=tuple(_floats(args.pbe)) if args.pbe else (),
        delta=args.delta, burst_mode=args.burst_mode, patch=not args.no_patch,
        iters=args.iters, rule=args.rule, alpha=args.alpha, rate_basis=args.rate_basis,
        design_ebn0_db=args.design_ebn0, min_block_errors=args.min_block_errors,
        max_trials=args.max_trials, seed=args.seed,
    )
    results = run_sweep(cfg, threads=args.threads)
    if args.json:
        doc = {"config": {k: (str(v) if isinstance(v, Fraction) else v)
                          for k, v in vars(cfg).items()},
               "results": [r.to_dict(timing=args.timing) for r in results]}
        text = json.dumps(doc, indent=2, default=list) + "\n"
    else:
        text = ",".join(CSV_FIELDS) + "\n" + "".join(r.csv_row(args.timing) + "\n" for r in results)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.plot:
        from .plotting import plot_curves
        fig = args.plot if args.plot != "auto" else os.path.splitext(args.out or "simulate")[0] + ".png"
        label = f"{cfg.scheme} N={cfg.N} K={cfg.dimension}"
        plot_curves({label: results}, fig, xlabel="P_BE" if ge else "Eb/N0 [dB]")
        log.info("figure written to %s", fig)
    return 0


def cmd_complexity(args):
    est = complexity_estimate(args.stairs, args.m, args.n, args.rate, args.dv, args.dc)
    rows = ("sign", "mult", "div", "add", "total")
    if args.json:
        print(json.dumps({s: {r: str(v) for r, v in t.items()} for s, t in est.items()}, indent=2))
    else:
        print("operation,polar_staircase,ldpc_staircase")
        for r in rows:
            print(f"{r},{est['polar'][r]},{est['ldpc'][r]}")
    return 0


def cmd_plot(args):
    from .plotting import plot_curves, read_csv
    curves = {os.path.splitext(os.path.basename(p))[0]: read_csv(p) for p in args.csv}
    plot_curves(curves, args.out, xlabel=args.xlabel)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="polarstair", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build a component code and print it as JSON")
    _code_args(p, stairs=False)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--design-ebn0", type=float, default=4.0, help="design Eb/N0 in dB")
    g.add_argument("--design-mean", type=float, help="design channel LLR mean")
    p.add_argument("--out")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("encode", help="encode a random or given payload into a frame file")
    _code_args(p)
    p.add_argument("--design-ebn0", type=float, default=4.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--payload", help="payload file to encode instead of random bits")
    p.add_argument("--payload-out", help="also save the random payload here")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("transmit", help="pass an encoded frame through a channel")
    p.add_argument("input")
    p.add_argument("--channel", choices=("awgn", "ge"), default="awgn")
    p.add_argument("--ebn0", type=float, default=4.0)
    p.add_argument("--pbe", type=float, default=0.0)
    p.add_argument("--delta", type=float, default=20.0)
    p.add_argument("--burst-mode", choices=("erase", "flip"), default="erase")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_transmit)

    p = sub.add_parser("decode", help="decode an LLR frame file")
    p.add_argument("input")
    p.add_argument("--iters", type=int, default=4, help="outer iterations I_max")
    p.add_argument("--rule", choices=("exact", "minsum"), default="exact")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--patch", action="store_true", help="apply burst patching from stored indices")
    p.add_argument("--truth", help="payload file to count errors against")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("simulate", help="Monte Carlo BLER/BER sweep")
    _code_args(p)
    p.add_argument("--scheme", choices=("staircase", "component"), default="staircase")
    p.add_argument("--iters", type=int, default=4)
    p.add_argument("--channel", choices=("awgn", "ge"), default="awgn")
    p.add_argument("--ebn0", nargs="+", help="Eb/N0 values in dB (sweep axis for awgn)")
    p.add_argument("--pbe", nargs="+", help="bad-state probabilities (sweep axis for ge)")
    p.add_argument("--delta", type=float, default=20.0, help="mean burst length")
    p.add_argument("--burst-mode", choices=("erase", "flip"), default="erase")
    p.add_argument("--no-patch", action="store_true", help="skip burst patching")
    p.add_argument("--rule", choices=("exact", "minsum"), default="exact")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--rate-basis", choices=("component", "frame"), default="component",
                   help="rate used to convert Eb/N0 into noise variance")
    p.add_argument("--design-ebn0", type=float, help="fixed design point (default: each operating point)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-block-errors", type=int, default=100)
    p.add_argument("--max-trials", type=int, default=100_000)
    p.add_argument("--threads", type=int)
    p.add_argument("--timing", action="store_true", help="record wall_seconds (breaks byte reproducibility)")
    p.add_argument("--json", action="store_true", help="write a JSON document instead of CSV")
    p.add_argument("--plot", nargs="?", const="auto", help="render a figure (default: next to --out)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("complexity", help="decoding operation counts, polar versus LDPC staircase")
    p.add_argument("--stairs", type=int, default=1)
    p.add_argument("--m", type=int, default=300)
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--rate", type=_rate, default=Fraction(5, 6))
    p.add_argument("--dv", default="3", help="LDPC variable degree (decimal allowed)")
    p.add_argument("--dc", default="18", help="LDPC check degree")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("plot", help="render BLER/BER figures from simulate CSVs")
    p.add_argument("csv", nargs="+")
    p.add_argument("--xlabel", default="Eb/N0 [dB]")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"polarstair: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
