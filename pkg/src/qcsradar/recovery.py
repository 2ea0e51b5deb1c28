"""Sparse range-profile estimation from quantized measurements.

Two estimators: projected back projection (hard-threshold the scaled adjoint
of the measurements) and quantized iterative hard thresholding, which
iterates

    a_{j+1} = H_K[a_j + (mu/M) * adjoint(y - A(a_j))]

from the back-projection estimate, where A re-applies the acquisition map
(forward operator, known dither, quantizer) to the current iterate.  QIHT is
not guaranteed to converge; it runs at least MIN_STOP_ITERS iterations and at
most the configured budget, stopping early once the consistency with the
observed bits reaches the target or strictly decreases.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .quantization import Dither, QuantizerConfig, sense
from .signal_model import RangeProfile, SamplingPlan, adjoint

__all__ = [
    "MIN_STOP_ITERS",
    "RecoveryConfig",
    "RecoveryResult",
    "StopReason",
    "hard_threshold",
    "pbp",
    "consistency",
    "qiht",
]

# Early-stop rules only engage after this many iterations; the iteration
# count therefore lies between MIN_STOP_ITERS and the budget (unless the
# iterate is already perfectly consistent, a provable fixed point).
MIN_STOP_ITERS = 20


class StopReason(str, enum.Enum):
    BUDGET = "budget"
    CONSISTENCY_TARGET = "consistency_target"
    CONSISTENCY_DROP = "consistency_drop"


@dataclass(frozen=True)
class RecoveryConfig:
    """Sparsity level, step size, iteration budget, and stop target."""

    sparsity: int
    step_size: float = 1.0
    max_iters: Optional[int] = None
    consistency_target: float = 0.95

    def __post_init__(self):
        if self.sparsity < 1:
            raise ValueError("sparsity must be >= 1")
        if not self.step_size > 0:
            raise ValueError("step_size must be > 0")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0.0 < self.consistency_target <= 1.0:
            raise ValueError("consistency_target must lie in (0, 1]")

    def resolved_max_iters(self) -> int:
        """Iteration budget: max(20, 100 * K) unless overridden."""
        if self.max_iters is not None:
            return self.max_iters
        return max(MIN_STOP_ITERS, 100 * self.sparsity)


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    estimate: RangeProfile
    iterations_run: int
    final_consistency: float
    stop_reason: StopReason


def hard_threshold(values: np.ndarray, sparsity: int) -> np.ndarray:
    """Keep the K largest-modulus components, zero the rest.

    Ties at the K-th modulus are broken toward the lowest index, so the
    result is deterministic.
    """
    v = np.asarray(values, dtype=np.complex128)
    if not 1 <= sparsity <= v.size:
        raise ValueError(f"sparsity must be in [1, {v.size}], got {sparsity}")
    # Stable sort on descending modulus keeps the lowest index among ties.
    keep = np.argsort(-np.abs(v), kind="stable")[:sparsity]
    out = np.zeros_like(v)
    out[keep] = v[keep]
    return out


def pbp(plan: SamplingPlan, measurements: np.ndarray, sparsity: int) -> RangeProfile:
    """Projected back projection: H_K(adjoint(y) / M)."""
    back = adjoint(plan, measurements) / plan.n_meas
    return RangeProfile(hard_threshold(back, sparsity))


def consistency(
    plan: SamplingPlan,
    config: QuantizerConfig,
    dither: Optional[Dither],
    measurements: np.ndarray,
    estimate,
) -> float:
    """Fraction of measurements the estimate reproduces exactly.

    A measurement counts as reproduced only if re-acquiring the estimate
    through the same plan, dither, and quantizer lands in the same cell for
    both the real and the imaginary part.
    """
    if not config.quantized:
        raise ValueError("consistency is defined for quantized measurements only")
    y = np.asarray(measurements, dtype=np.complex128)
    if y.shape != (plan.n_meas,):
        raise ValueError(f"measurement length {y.shape} does not match n_meas={plan.n_meas}")
    return float(np.mean(sense(plan, config, dither, estimate) == y))


def qiht(
    plan: SamplingPlan,
    config: QuantizerConfig,
    dither: Optional[Dither],
    measurements: np.ndarray,
    recovery: RecoveryConfig,
) -> RecoveryResult:
    """Quantized iterative hard thresholding from the back-projection start.

    The dither must be the vector used during acquisition: the update
    re-applies the full acquisition map to each iterate.  Stopping: a
    perfectly consistent iterate stops immediately (the update vanishes
    identically); otherwise, after at least MIN_STOP_ITERS iterations, the
    loop stops when consistency reaches ``recovery.consistency_target``
    (returning the current iterate) or strictly decreases (returning the
    best iterate so far); exhausting the budget also returns the best
    iterate seen.  With an unquantized configuration the residual norm
    replaces consistency as the stopping score and the recursion is plain
    iterative hard thresholding.
    """
    y = np.asarray(measurements, dtype=np.complex128)
    if y.shape != (plan.n_meas,):
        raise ValueError(f"measurement length {y.shape} does not match n_meas={plan.n_meas}")
    if not config.quantized and dither is not None:
        raise ValueError("unquantized recovery does not accept a dither")
    if config.quantized and dither is not None and dither.n_meas != plan.n_meas:
        raise ValueError(f"dither length {dither.n_meas} does not match n_meas={plan.n_meas}")

    k = recovery.sparsity
    mu = recovery.step_size
    budget = recovery.resolved_max_iters()
    m = plan.n_meas

    def reacquire(amps: np.ndarray) -> np.ndarray:
        return sense(plan, config, dither, amps)

    def score_of(y_hat: np.ndarray) -> float:
        if config.quantized:
            return float(np.mean(y_hat == y))
        return -float(np.linalg.norm(y - y_hat))

    def reached_target(score: float) -> bool:
        if config.quantized:
            return score >= recovery.consistency_target
        return score == 0.0  # exact residual zero

    def match_fraction(y_hat: np.ndarray) -> float:
        return float(np.mean(y_hat == y))

    current = pbp(plan, y, k).amplitudes  # start from the back projection
    y_hat = reacquire(current)
    score = score_of(y_hat)
    best, best_score, best_match = current, score, match_fraction(y_hat)

    if config.quantized and score == 1.0:
        return RecoveryResult(RangeProfile(current), 0, 1.0, StopReason.CONSISTENCY_TARGET)
    if not config.quantized and score == 0.0:
        return RecoveryResult(RangeProfile(current), 0, best_match, StopReason.CONSISTENCY_TARGET)

    prev_score = score
    iterations = 0
    for j in range(1, budget + 1):
        current = hard_threshold(current + (mu / m) * adjoint(plan, y - y_hat), k)
        y_hat = reacquire(current)
        score = score_of(y_hat)
        iterations = j
        if score > best_score:
            best, best_score, best_match = current, score, match_fraction(y_hat)
        if config.quantized and score == 1.0:
            return RecoveryResult(RangeProfile(current), j, 1.0, StopReason.CONSISTENCY_TARGET)
        if j >= MIN_STOP_ITERS:
            if reached_target(score):
                return RecoveryResult(
                    RangeProfile(current), j, match_fraction(y_hat), StopReason.CONSISTENCY_TARGET
                )
            if score < prev_score:
                return RecoveryResult(RangeProfile(best), j, best_match, StopReason.CONSISTENCY_DROP)
        prev_score = score

    return RecoveryResult(RangeProfile(best), iterations, best_match, StopReason.BUDGET)
