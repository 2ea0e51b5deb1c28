"""Configuration files, results CSV, and baseband IQ capture files.

A capture is a pair of files: ``<path>`` holds interleaved I/Q samples as
32-bit little-endian IEEE-754 floats, and ``<path>.json`` is a sidecar with
everything needed to replay the measurements through the recovery pipeline
(sampling plan, quantizer, dither as a seed or explicit values, radar ramp
parameters).  Quantized payloads are snapped back onto the exact float64
quantization grid on read, so consistency checks against re-quantized
estimates remain exact after the float32 round trip.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .evaluation import ALGORITHMS, AggregateResult, ExperimentConfig, sort_key
from .quantization import Dither, QuantizerConfig, draw_dither
from .signal_model import RadarParams, SamplingPlan, make_sampling_plan

__all__ = [
    "CAPTURE_SCHEMA_VERSION",
    "Capture",
    "parse_config",
    "config_to_json",
    "write_results",
    "write_capture",
    "read_capture",
]

logger = logging.getLogger(__name__)

CAPTURE_SCHEMA_VERSION = 1

# Max deviation (in steps) treated as float32 storage rounding; anything
# larger is genuinely off-grid data from a foreign/scaled ADC.
_GRID_SNAP_TOL = 1e-3

_CONFIG_FIELDS = {
    "n_bins",
    "sparsities",
    "bit_depths",
    "bitrates",
    "dithered",
    "algorithm",
    "trials",
    "master_seed",
    "mu",
    "consistency_target",
    "max_iters",
}

RESULTS_HEADER = (
    "K,b,log2_bitrate,M,dithered,algorithm,trials,mean_tpr_pct,stderr_pct,mean_l2_error"
)


def _config_error(message: str) -> ValueError:
    return ValueError(f"config: {message}")


def _parse_bit_depth(value):
    if value is None or value == "unquantized":
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise _config_error(f"bit_depths entries must be integers or \"unquantized\", got {value!r}")
    return value


def parse_config(path) -> ExperimentConfig:
    """Load and validate an experiment configuration, filling defaults."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise _config_error(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise _config_error(f"invalid JSON in {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise _config_error("top level must be a JSON object")
    unknown = set(raw) - _CONFIG_FIELDS
    if unknown:
        raise _config_error(f"unknown field(s): {', '.join(sorted(unknown))}")

    fields = dict(raw)
    if "bit_depths" in fields:
        if not isinstance(fields["bit_depths"], list):
            raise _config_error("bit_depths must be a list")
        fields["bit_depths"] = tuple(_parse_bit_depth(b) for b in fields["bit_depths"])
    for key in ("sparsities", "bitrates"):
        if key in fields:
            if not isinstance(fields[key], list) or not all(
                isinstance(v, int) and not isinstance(v, bool) for v in fields[key]
            ):
                raise _config_error(f"{key} must be a list of integers")
    for key in ("n_bins", "trials", "master_seed"):
        if key in fields and (isinstance(fields[key], bool) or not isinstance(fields[key], int)):
            raise _config_error(f"{key} must be an integer")
    for key in ("mu", "consistency_target"):
        if key in fields and not isinstance(fields[key], (int, float)):
            raise _config_error(f"{key} must be a number")
    if "max_iters" in fields and fields["max_iters"] is not None:
        if isinstance(fields["max_iters"], bool) or not isinstance(fields["max_iters"], int):
            raise _config_error("max_iters must be an integer or null")
    if "dithered" in fields and not isinstance(fields["dithered"], bool):
        raise _config_error(f"dithered must be a boolean, got {fields['dithered']!r}")
    if "algorithm" in fields and fields["algorithm"] not in ALGORITHMS:
        raise _config_error(f"algorithm must be one of {ALGORITHMS}, got {fields['algorithm']!r}")
    try:
        return ExperimentConfig(**fields)
    except (ValueError, TypeError) as exc:
        raise _config_error(str(exc)) from None


def config_to_json(config: ExperimentConfig) -> dict:
    """Dump a configuration to its JSON form (round-trips through parse)."""
    return {
        "n_bins": config.n_bins,
        "sparsities": list(config.sparsities),
        "bit_depths": ["unquantized" if b is None else b for b in config.bit_depths],
        "bitrates": list(config.bitrates),
        "dithered": config.dithered,
        "algorithm": config.algorithm,
        "trials": config.trials,
        "master_seed": config.master_seed,
        "mu": config.mu,
        "consistency_target": config.consistency_target,
        "max_iters": config.max_iters,
    }


def _format_result_row(result: AggregateResult) -> str:
    point = result.point
    return ",".join(
        [
            str(point.sparsity),
            point.depth_label,
            f"{math.log2(point.bitrate):g}",
            str(point.n_meas),
            "true" if point.effective_dithered else "false",
            point.algorithm,
            str(result.trials),
            f"{result.mean_tpr_pct:.6f}",
            f"{result.stderr_pct:.6f}",
            f"{result.mean_l2_error:.9e}",
        ]
    )


def write_results(results, path) -> None:
    """Write aggregates as CSV, sorted into the mandated deterministic order."""
    results = list(results)
    if not results:
        raise ValueError("io: refusing to write an empty results file")
    rows = sorted(results, key=lambda r: sort_key(r.point))
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(RESULTS_HEADER + "\n")
            for result in rows:
                fh.write(_format_result_row(result) + "\n")
    except OSError as exc:
        raise OSError(f"io: cannot write results to {path}: {exc}") from None


@dataclass(frozen=True, eq=False)
class Capture:
    """A replayable acquisition: plan, quantizer, dither, samples, radar."""

    plan: SamplingPlan
    quantizer: QuantizerConfig
    dither: Optional[Dither]
    samples: np.ndarray
    radar: RadarParams


def _sidecar_path(path) -> str:
    return f"{path}.json"


def write_capture(path, capture: Capture, *, store_dither_values: bool = False) -> str:
    """Write payload and sidecar; returns the sidecar path.

    The dither is stored as its seed plus step by default (regenerable);
    ``store_dither_values`` embeds the explicit values instead, for rigs
    where the physical dither was recorded rather than synthesized.
    """
    plan = capture.plan
    samples = np.asarray(capture.samples, dtype=np.complex128)
    if samples.shape != (plan.n_meas,):
        raise ValueError(f"capture: sample count {samples.shape} does not match n_meas={plan.n_meas}")

    dither_field = None
    if capture.dither is not None:
        if store_dither_values or capture.dither.seed is None:
            dither_field = {
                "values": [[float(v.real), float(v.imag)] for v in capture.dither.values]
            }
        else:
            dither_field = {
                "seed": capture.dither.seed,
                "delta": capture.quantizer.step,
            }

    sidecar = {
        "schema_version": CAPTURE_SCHEMA_VERSION,
        "n_bins": plan.n_bins,
        "n_meas": plan.n_meas,
        "plan_seed": plan.seed,
        "omega": plan.omega.tolist(),
        "bit_depth": "unquantized" if capture.quantizer.bit_depth is None else capture.quantizer.bit_depth,
        "dynamic_range": capture.quantizer.dynamic_range,
        "dither": dither_field,
        "radar": {
            "f0": capture.radar.f0,
            "bandwidth": capture.radar.bandwidth,
            "ramp_duration": capture.radar.ramp_duration,
            "n_bins": capture.radar.n_bins,
        },
    }
    try:
        with open(path, "wb") as fh:
            fh.write(samples.astype("<c8").tobytes())
        with open(_sidecar_path(path), "w", encoding="utf-8") as fh:
            json.dump(sidecar, fh, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"capture: cannot write {path}: {exc}") from None
    return _sidecar_path(path)


def _capture_error(message: str) -> ValueError:
    return ValueError(f"capture: {message}")


def _snap_to_grid(samples: np.ndarray, step: float, path) -> np.ndarray:
    half = 0.5 * step
    re_cells = (samples.real - half) / step
    im_cells = (samples.imag - half) / step
    deviation = max(
        float(np.max(np.abs(re_cells - np.round(re_cells)))),
        float(np.max(np.abs(im_cells - np.round(im_cells)))),
    )
    if deviation > _GRID_SNAP_TOL:
        logger.warning(
            "capture %s: samples are off the quantization grid "
            "(max deviation %.3g steps); leaving them as stored",
            path,
            deviation,
        )
        return samples
    return (np.round(re_cells) * step + half) + 1j * (np.round(im_cells) * step + half)


def read_capture(path) -> Capture:
    """Load a capture; regenerates the dither when stored as a seed."""
    sidecar_path = _sidecar_path(path)
    try:
        with open(sidecar_path, "r", encoding="utf-8") as fh:
            sidecar = json.load(fh)
    except FileNotFoundError:
        raise _capture_error(f"missing sidecar {sidecar_path}") from None
    except json.JSONDecodeError as exc:
        raise _capture_error(f"invalid sidecar JSON in {sidecar_path}: {exc}") from None
    try:
        with open(path, "rb") as fh:
            payload = fh.read()
    except FileNotFoundError:
        raise _capture_error(f"missing payload {path}") from None

    version = sidecar.get("schema_version")
    if version != CAPTURE_SCHEMA_VERSION:
        raise _capture_error(f"unknown schema version {version!r}")

    try:
        n_bins = int(sidecar["n_bins"])
        n_meas = int(sidecar["n_meas"])
        bit_depth = sidecar["bit_depth"]
        dynamic_range = float(sidecar["dynamic_range"])
        radar_raw = sidecar["radar"]
    except KeyError as exc:
        raise _capture_error(f"sidecar is missing field {exc}") from None

    bit_depth = None if bit_depth in (None, "unquantized") else int(bit_depth)

    if "omega" in sidecar:
        plan = SamplingPlan(
            n_bins=n_bins,
            n_meas=n_meas,
            omega=np.asarray(sidecar["omega"], dtype=np.int64),
            seed=int(sidecar.get("plan_seed", 0)),
        )
    elif "plan_seed" in sidecar:
        plan = make_sampling_plan(n_bins, n_meas, int(sidecar["plan_seed"]))
    else:
        raise _capture_error("sidecar must carry either omega or plan_seed")

    quantizer = QuantizerConfig(bit_depth=bit_depth, dynamic_range=dynamic_range)

    if len(payload) != 8 * n_meas:
        raise _capture_error(
            f"payload holds {len(payload) // 8} samples "
            f"({len(payload)} bytes), sidecar says n_meas={n_meas}"
        )
    samples = np.frombuffer(payload, dtype="<c8").astype(np.complex128)

    dither_field = sidecar.get("dither")
    dither = None
    if dither_field is not None:
        if not quantizer.quantized:
            raise _capture_error("unquantized capture cannot carry a dither")
        if "values" in dither_field:
            values = np.asarray(
                [complex(re, im) for re, im in dither_field["values"]], dtype=np.complex128
            )
            if values.size != n_meas:
                raise _capture_error(
                    f"dither holds {values.size} values, sidecar says n_meas={n_meas}"
                )
            dither = Dither(values=values, seed=None)
        elif "seed" in dither_field:
            delta = float(dither_field.get("delta", quantizer.step))
            if not math.isclose(delta, quantizer.step, rel_tol=1e-9):
                raise _capture_error(
                    f"dither delta {delta!r} inconsistent with quantizer step {quantizer.step!r}"
                )
            dither = draw_dither(quantizer, n_meas, int(dither_field["seed"]))
        else:
            raise _capture_error("dither field must carry either seed or values")

    if quantizer.quantized:
        samples = _snap_to_grid(samples, quantizer.step, path)

    radar = RadarParams(
        f0=float(radar_raw["f0"]),
        bandwidth=float(radar_raw["bandwidth"]),
        ramp_duration=float(radar_raw["ramp_duration"]),
        n_bins=int(radar_raw["n_bins"]),
    )
    return Capture(plan=plan, quantizer=quantizer, dither=dither, samples=samples, radar=radar)
