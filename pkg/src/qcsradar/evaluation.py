"""Monte Carlo harness: parameter grids, seeded trials, TPR aggregation.

A grid point fixes (sparsity, bit depth, total bit-rate, dithering,
algorithm); each trial independently draws a profile, a sampling plan, and a
dither from sub-seeds of the master seed.  Sub-seeds depend only on the
quantities that should vary them — profiles on (K, trial), plans on
(M, trial), dithers on (M, b, trial) — so curves that differ only in
bit-rate or algorithm are compared on common random numbers, mirroring the
exact saturation plateaus of undithered quantization.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .quantization import adapted_quantizer, draw_dither, sense
from .recovery import RecoveryConfig, pbp, qiht
from .seeding import derive_seed
from .signal_model import forward, make_sampling_plan, random_profile

__all__ = [
    "ALGORITHMS",
    "UNQUANTIZED_BITS",
    "MEAS_RANGE",
    "GridPoint",
    "ExperimentConfig",
    "TrialRecord",
    "AggregateResult",
    "tpr",
    "run_trial",
    "run_grid",
]

logger = logging.getLogger(__name__)

ALGORITHMS = ("pbp", "qiht")

# Unquantized samples are accounted as 32-bit floats per real component.
UNQUANTIZED_BITS = 32

# Admissible measurement counts for the evaluation protocol.
MEAS_RANGE = (2**3, 2**13)


@dataclass(frozen=True)
class GridPoint:
    """One cell of the parameter grid."""

    sparsity: int
    bit_depth: Optional[int]  # None = unquantized
    bitrate: int
    dithered: bool
    algorithm: str

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.sparsity < 1:
            raise ValueError("sparsity must be >= 1")
        if self.bitrate % self.bits_per_component != 0:
            raise ValueError(
                f"bitrate {self.bitrate} is not a multiple of {self.bits_per_component} "
                f"bits per component (bit depth {self.depth_label})"
            )

    @property
    def bits_per_component(self) -> int:
        return UNQUANTIZED_BITS if self.bit_depth is None else self.bit_depth

    @property
    def n_meas(self) -> int:
        return self.bitrate // self.bits_per_component

    @property
    def depth_label(self) -> str:
        return "unquantized" if self.bit_depth is None else str(self.bit_depth)

    @property
    def effective_dithered(self) -> bool:
        """Dithering only applies to quantized acquisition."""
        return self.dithered and self.bit_depth is not None

    def describe(self) -> str:
        mode = "dithered" if self.effective_dithered else "undithered"
        return (
            f"{self.algorithm} b={self.depth_label} K={self.sparsity} "
            f"bitrate={self.bitrate} M={self.n_meas} {mode}"
        )


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameter grid definition plus trial count and master seed."""

    n_bins: int = 256
    sparsities: tuple = (2,)
    bit_depths: tuple = (1,)
    bitrates: tuple = tuple(2**j for j in range(3, 14))
    dithered: bool = True
    algorithm: str = "pbp"
    trials: int = 2000
    master_seed: int = 0
    mu: float = 1.0
    consistency_target: float = 0.95
    max_iters: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "sparsities", tuple(int(k) for k in self.sparsities))
        object.__setattr__(
            self, "bit_depths", tuple(None if b is None else int(b) for b in self.bit_depths)
        )
        object.__setattr__(self, "bitrates", tuple(int(b) for b in self.bitrates))
        if self.n_bins < 1:
            raise ValueError("n_bins must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.sparsities or not self.bit_depths or not self.bitrates:
            raise ValueError("sparsities, bit_depths, and bitrates must be nonempty")
        if any(k < 1 or k > self.n_bins for k in self.sparsities):
            raise ValueError("every sparsity must lie in [1, n_bins]")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        for b in self.bit_depths:
            if b is not None and not 1 <= b <= 32:
                raise ValueError(f"bit depths must be in [1, 32] or unquantized, got {b}")
            bits = UNQUANTIZED_BITS if b is None else b
            for rate in self.bitrates:
                if rate % bits != 0:
                    raise ValueError(
                        f"bitrate {rate} with bit depth "
                        f"{'unquantized' if b is None else b} gives a non-integer "
                        f"measurement count ({rate}/{bits})"
                    )

    def grid_points(self) -> list:
        """All grid points in deterministic order (not yet range-checked)."""
        return [
            GridPoint(k, b, rate, self.dithered, self.algorithm)
            for b in self.bit_depths
            for k in self.sparsities
            for rate in self.bitrates
        ]


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of a single recovery trial."""

    trial_index: int
    sparsity: int
    bit_depth: Optional[int]
    n_meas: int
    dithered: bool
    algorithm: str
    true_positives: int
    tpr: float
    l2_error: float
    iterations: int
    seed_tuple: tuple


@dataclass(frozen=True)
class AggregateResult:
    """Mean support-recovery statistics at one grid point."""

    point: GridPoint
    trials: int
    mean_tpr_pct: float
    stderr_pct: float
    mean_l2_error: float


def tpr(true_support, estimated_support, sparsity: int) -> float:
    """True positive rate |supp_est & supp_true| / K."""
    true_support = frozenset(true_support)
    if not true_support:
        raise ValueError("true support must be nonempty")
    if len(true_support) != sparsity:
        raise ValueError(f"true support size {len(true_support)} != sparsity {sparsity}")
    return len(true_support & frozenset(estimated_support)) / sparsity


def run_trial(
    point: GridPoint,
    trial_index: int,
    master_seed: int,
    *,
    n_bins: int = 256,
    mu: float = 1.0,
    consistency_target: float = 0.95,
    max_iters: Optional[int] = None,
) -> TrialRecord:
    """Execute one seeded trial of the grid point.

    Draws the profile, plan, and dither from sub-seeds of ``master_seed``,
    senses the profile with the range-adapted quantizer, recovers with the
    point's algorithm, and scores support recovery and l2 error.
    """
    k = point.sparsity
    m = point.n_meas
    profile_seed = derive_seed(master_seed, "profile", n_bins, k, trial_index)
    plan_seed = derive_seed(master_seed, "plan", n_bins, m, trial_index)
    dither_seed = derive_seed(master_seed, "dither", n_bins, m, point.bit_depth, trial_index)

    profile = random_profile(n_bins, k, profile_seed)
    plan = make_sampling_plan(n_bins, m, plan_seed)
    raw = forward(plan, profile)
    quantizer = adapted_quantizer(raw, point.bit_depth, point.effective_dithered)
    dither = draw_dither(quantizer, m, dither_seed) if point.effective_dithered else None
    y = sense(plan, quantizer, dither, profile)

    if point.algorithm == "pbp":
        estimate = pbp(plan, y, k)
        iterations = 0
    else:
        recovery = RecoveryConfig(
            sparsity=k,
            step_size=mu,
            max_iters=max_iters,
            consistency_target=consistency_target,
        )
        result = qiht(plan, quantizer, dither, y, recovery)
        estimate = result.estimate
        iterations = result.iterations_run

    true_positives = len(profile.support & estimate.support)
    l2_error = float(np.linalg.norm(profile.amplitudes - estimate.amplitudes))
    return TrialRecord(
        trial_index=trial_index,
        sparsity=k,
        bit_depth=point.bit_depth,
        n_meas=m,
        dithered=point.effective_dithered,
        algorithm=point.algorithm,
        true_positives=true_positives,
        tpr=true_positives / k,
        l2_error=l2_error,
        iterations=iterations,
        seed_tuple=(profile_seed, plan_seed, dither_seed),
    )


def point_is_runnable(point: GridPoint) -> tuple:
    """Check the measurement count against the protocol range."""
    m = point.n_meas
    if not MEAS_RANGE[0] <= m <= MEAS_RANGE[1]:
        return False, f"M={m} outside [{MEAS_RANGE[0]}, {MEAS_RANGE[1]}]"
    return True, ""


def _aggregate_point(config: ExperimentConfig, point: GridPoint) -> AggregateResult:
    """Run all trials of one point with streaming aggregation."""
    n = 0
    tpr_sum = 0.0
    tpr_sq_sum = 0.0
    l2_sum = 0.0
    for trial_index in range(config.trials):
        record = run_trial(
            point,
            trial_index,
            config.master_seed,
            n_bins=config.n_bins,
            mu=config.mu,
            consistency_target=config.consistency_target,
            max_iters=config.max_iters,
        )
        n += 1
        tpr_sum += record.tpr
        tpr_sq_sum += record.tpr * record.tpr
        l2_sum += record.l2_error
    mean = tpr_sum / n
    if n > 1:
        var = max(0.0, (tpr_sq_sum - n * mean * mean) / (n - 1))
        stderr = (var / n) ** 0.5
    else:
        stderr = 0.0
    return AggregateResult(
        point=point,
        trials=n,
        mean_tpr_pct=100.0 * mean,
        stderr_pct=100.0 * stderr,
        mean_l2_error=l2_sum / n,
    )


def sort_key(point: GridPoint) -> tuple:
    bits = UNQUANTIZED_BITS if point.bit_depth is None else point.bit_depth
    return (
        point.algorithm,
        point.dithered,
        point.bit_depth is None,
        bits,
        point.sparsity,
        point.bitrate,
    )


def _resolve_workers(max_workers: Optional[int], n_points: int) -> int:
    if max_workers is None:
        max_workers = os.cpu_count() or 1
        cap = os.environ.get("QCS_THREADS")
        if cap is not None:
            try:
                max_workers = min(max_workers, int(cap))
            except ValueError:
                logger.warning("ignoring non-integer QCS_THREADS=%r", cap)
    return max(1, min(max_workers, n_points))


def run_grid(
    config: ExperimentConfig,
    max_workers: Optional[int] = None,
) -> list:
    """Aggregate every runnable grid point; deterministic result order.

    Points whose measurement count falls outside MEAS_RANGE are skipped with
    a warning.  Points run independently (optionally on several worker
    processes, capped by the QCS_THREADS environment variable); the output
    is sorted by (algorithm, dithered, bit depth, sparsity, bitrate)
    regardless of execution order.
    """
    runnable = []
    for point in config.grid_points():
        ok, reason = point_is_runnable(point)
        if ok:
            runnable.append(point)
        else:
            logger.warning("skipping grid point (%s): %s", point.describe(), reason)
    runnable.sort(key=sort_key)

    workers = _resolve_workers(max_workers, len(runnable))
    if workers <= 1 or len(runnable) <= 1:
        results = []
        for point in runnable:
            result = _aggregate_point(config, point)
            logger.info("%s: mean TPR %.2f%%", point.describe(), result.mean_tpr_pct)
            results.append(result)
        return results

    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_aggregate_point, [config] * len(runnable), runnable))
    for result in results:
        logger.info("%s: mean TPR %.2f%%", result.point.describe(), result.mean_tpr_pct)
    return results


def with_overrides(config: ExperimentConfig, **kwargs) -> ExperimentConfig:
    """Functional update helper (configs are frozen)."""
    return replace(config, **kwargs)
