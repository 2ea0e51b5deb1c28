"""Command-line interface: simulate, ambiguity, recover, gen-capture.

All subcommands are deterministic given an explicit --seed.  Errors exit
nonzero after printing a single ``error: <kind>: <reason>`` line to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .ambiguity import ambiguity_report
from .evaluation import run_grid, with_overrides
from .io import Capture, parse_config, read_capture, write_capture, write_results
from .quantization import adapted_quantizer, draw_dither, sense
from .recovery import RecoveryConfig, consistency, pbp, qiht
from .seeding import derive_seed
from .signal_model import (
    RadarParams,
    bin_number,
    bin_to_range,
    forward,
    make_sampling_plan,
    random_profile,
)

__all__ = ["main"]


def _add_simulate(subparsers):
    p = subparsers.add_parser("simulate", help="run a Monte Carlo grid and write a results CSV")
    p.add_argument("--config", required=True, help="experiment configuration (JSON)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--trials", type=int, default=None, help="override the trial count")
    p.add_argument("--seed", type=int, default=None, help="override the master seed")
    p.add_argument("--workers", type=int, default=None, help="worker process count (default: QCS_THREADS or CPU count)")


def _add_ambiguity(subparsers):
    p = subparsers.add_parser("ambiguity", help="demonstrate quantization ambiguity and its removal by dither")
    p.add_argument("--n", type=int, default=256, help="number of range bins")
    p.add_argument("--n0", type=int, default=64, help="range bin of the unit target")
    p.add_argument("--n1", type=int, default=10, help="range bin of the weak second target")
    p.add_argument("--psi0", type=float, default=float(np.pi / 4), help="phase of the unit target")
    p.add_argument("--psi1", type=float, default=0.0, help="phase of the second target")
    p.add_argument("--gamma", type=float, default=0.5, help="amplitude of the second target, in (0, 1)")
    p.add_argument("--meas", type=int, default=1024, help="number of measurements M")
    p.add_argument("--seeds", type=int, default=200, help="number of dither seeds to test")
    p.add_argument("--bits", type=int, default=1, help="bit depth (the b=1 case carries the guarantee)")
    p.add_argument("--seed", type=int, default=0, help="master seed")


def _add_recover(subparsers):
    p = subparsers.add_parser("recover", help="estimate a sparse range profile from a capture file")
    p.add_argument("--capture", required=True, help="capture payload path (sidecar at <path>.json)")
    p.add_argument("--algo", choices=("pbp", "qiht"), default="qiht")
    p.add_argument("--sparsity", type=int, required=True, help="number of targets K")
    p.add_argument("--mu", type=float, default=1.0, help="QIHT step size")
    p.add_argument("--max-iters", type=int, default=None, help="QIHT iteration budget (default max(20, 100K))")
    p.add_argument("--target", type=float, default=0.95, help="QIHT consistency stop target")
    p.add_argument("--out", default=None, help="write the JSON report here instead of stdout")


def _add_gen_capture(subparsers):
    p = subparsers.add_parser("gen-capture", help="synthesize a capture file for testing")
    p.add_argument("--out", required=True, help="capture payload path to write")
    p.add_argument("--n", type=int, default=256, help="number of range bins")
    p.add_argument("--meas", type=int, default=8192, help="number of measurements M")
    p.add_argument("--bits", default="1", help="bit depth per component, or 'unquantized'")
    p.add_argument("--dithered", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--sparsity", type=int, default=2, help="number of targets K")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--store-dither-values", action="store_true", help="embed dither values instead of the seed")
    p.add_argument("--f0", type=float, default=24.125e9, help="carrier frequency (Hz)")
    p.add_argument("--bandwidth", type=float, default=150e6, help="ramp bandwidth (Hz)")
    p.add_argument("--ramp-duration", type=float, default=1e-3, help="ramp duration (s)")


def _emit(payload: dict, out_path) -> None:
    text = json.dumps(payload, sort_keys=True)
    if out_path is None:
        print(text)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _cmd_simulate(args) -> int:
    config = parse_config(args.config)
    overrides = {}
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if overrides:
        config = with_overrides(config, **overrides)
    results = run_grid(config, max_workers=args.workers)
    if not results:
        raise ValueError("config: the grid contains no runnable points")
    write_results(results, args.out)
    print(f"wrote {len(results)} aggregate(s) to {args.out}")
    return 0


def _cmd_ambiguity(args) -> int:
    report = ambiguity_report(
        n_bins=args.n,
        bin_base=args.n0,
        bin_extra=args.n1,
        phase_base=args.psi0,
        phase_extra=args.psi1,
        gamma=args.gamma,
        n_meas=args.meas,
        n_seeds=args.seeds,
        seed=args.seed,
        bit_depth=args.bits,
    )
    print(json.dumps(report, sort_keys=True))
    return 0


def _cmd_recover(args) -> int:
    capture = read_capture(args.capture)
    plan, quantizer, dither = capture.plan, capture.quantizer, capture.dither
    if args.algo == "pbp":
        estimate = pbp(plan, capture.samples, args.sparsity)
        iterations = 0
        stop_reason = None
        final_consistency = (
            consistency(plan, quantizer, dither, capture.samples, estimate)
            if quantizer.quantized
            else None
        )
    else:
        recovery = RecoveryConfig(
            sparsity=args.sparsity,
            step_size=args.mu,
            max_iters=args.max_iters,
            consistency_target=args.target,
        )
        result = qiht(plan, quantizer, dither, capture.samples, recovery)
        estimate = result.estimate
        iterations = result.iterations_run
        stop_reason = result.stop_reason.value
        final_consistency = result.final_consistency

    indices = sorted(estimate.support)
    bins = [bin_number(i, plan.n_bins) for i in indices]
    amplitudes = [
        [float(estimate.amplitudes[i].real), float(estimate.amplitudes[i].imag)] for i in indices
    ]
    report = {
        "algorithm": args.algo,
        "sparsity": args.sparsity,
        "support_indices": indices,
        "support_bins": bins,
        "ranges_m": [bin_to_range(capture.radar, b) for b in bins],
        "amplitudes": amplitudes,
        "iterations": iterations,
        "final_consistency": final_consistency,
        "stop_reason": stop_reason,
    }
    _emit(report, args.out)
    return 0


def _parse_bits(text: str):
    if text in ("unquantized", "none"):
        return None
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"config: --bits must be an integer or 'unquantized', got {text!r}") from None


def _cmd_gen_capture(args) -> int:
    bits = _parse_bits(args.bits)
    radar = RadarParams(
        f0=args.f0, bandwidth=args.bandwidth, ramp_duration=args.ramp_duration, n_bins=args.n
    )
    profile = random_profile(args.n, args.sparsity, derive_seed(args.seed, "capture-profile"))
    plan = make_sampling_plan(args.n, args.meas, derive_seed(args.seed, "capture-plan"))
    raw = forward(plan, profile)
    dithered = args.dithered and bits is not None
    quantizer = adapted_quantizer(raw, bits, dithered)
    dither = (
        draw_dither(quantizer, args.meas, derive_seed(args.seed, "capture-dither"))
        if dithered
        else None
    )
    samples = sense(plan, quantizer, dither, profile)
    capture = Capture(plan=plan, quantizer=quantizer, dither=dither, samples=samples, radar=radar)
    sidecar = write_capture(args.out, capture, store_dither_values=args.store_dither_values)

    indices = sorted(profile.support)
    report = {
        "capture": str(args.out),
        "sidecar": sidecar,
        "n_bins": args.n,
        "n_meas": args.meas,
        "bit_depth": "unquantized" if bits is None else bits,
        "dithered": dithered,
        "seed": args.seed,
        "support_indices": indices,
        "support_bins": [bin_number(i, args.n) for i in indices],
        "amplitudes": [
            [float(profile.amplitudes[i].real), float(profile.amplitudes[i].imag)] for i in indices
        ],
    }
    print(json.dumps(report, sort_keys=True))
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "ambiguity": _cmd_ambiguity,
    "recover": _cmd_recover,
    "gen-capture": _cmd_gen_capture,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcsradar",
        description="Sparse radar range estimation from dithered, severely quantized compressive measurements.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    _add_simulate(subparsers)
    _add_ambiguity(subparsers)
    _add_recover(subparsers)
    _add_gen_capture(subparsers)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
