"""Uniform mid-rise quantization, dither generation, and the sensing operator.

The quantizer maps a real sample x to delta*floor(x/delta) + delta/2 and is
applied independently to the real and imaginary parts of each measurement.
The step is delta = 2**(1-b) * Delta for bit depth b and dynamic range
[-Delta, Delta]; at b = 1 the quantizer reduces to a voltage comparator.
Inputs beyond +-Delta are not clipped: the dynamic range is adapted to the
signal (plus half a step of dither headroom) rather than saturating.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .seeding import generator
from .signal_model import ProfileLike, SamplingPlan, forward

__all__ = [
    "QuantizerConfig",
    "Dither",
    "quantize_scalar",
    "quantize_complex",
    "dynamic_range_for",
    "adapted_quantizer",
    "draw_dither",
    "sense",
]


@dataclass(frozen=True)
class QuantizerConfig:
    """Bit depth per real component and ADC dynamic range.

    ``bit_depth=None`` models unquantized (full-resolution) acquisition; the
    dynamic range is then only bookkeeping.  Bit-rate accounting maps the
    unquantized mode to 32 bits per component.
    """

    bit_depth: Optional[int]
    dynamic_range: float

    def __post_init__(self):
        if self.bit_depth is not None and not 1 <= self.bit_depth <= 32:
            raise ValueError(f"bit_depth must be None or in [1, 32], got {self.bit_depth}")
        if not self.dynamic_range > 0:
            raise ValueError("dynamic_range must be > 0")

    @property
    def quantized(self) -> bool:
        return self.bit_depth is not None

    @property
    def step(self) -> float:
        """Quantization step delta = 2**(1-b) * Delta."""
        if self.bit_depth is None:
            raise ValueError("unquantized configuration has no step size")
        return 2.0 ** (1 - self.bit_depth) * self.dynamic_range

    @property
    def bits_per_component(self) -> int:
        return 32 if self.bit_depth is None else self.bit_depth


@dataclass(frozen=True, eq=False)
class Dither:
    """Complex dither vector; real/imag parts uniform on (-delta/2, delta/2)."""

    values: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.complex128)
        if vals.ndim != 1:
            raise ValueError("dither values must be a 1-D complex vector")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def n_meas(self) -> int:
        return self.values.size


def _midrise(values: np.ndarray, step: float) -> np.ndarray:
    return step * np.floor(values / step) + 0.5 * step


def quantize_scalar(config: QuantizerConfig, value: float) -> float:
    """Quantize one real sample: delta*floor(x/delta) + delta/2."""
    if not config.quantized:
        raise ValueError("cannot quantize with an unquantized configuration")
    return float(_midrise(np.float64(value), config.step))


def quantize_complex(config: QuantizerConfig, values: np.ndarray) -> np.ndarray:
    """Quantize real and imaginary parts of each component independently."""
    if not config.quantized:
        raise ValueError("cannot quantize with an unquantized configuration")
    v = np.asarray(values, dtype=np.complex128)
    step = config.step
    return _midrise(v.real, step) + 1j * _midrise(v.imag, step)


def dynamic_range_for(measurements: np.ndarray, bit_depth: Optional[int], dithered: bool) -> float:
    """Smallest dynamic range covering the noiseless measurements.

    Undithered: Delta = ||r||_inf (largest modulus).  Dithered: the dither
    adds up to delta/2 = 2**-b * Delta per component, so the smallest Delta
    with Delta >= ||r||_inf + delta/2 is ||r||_inf / (1 - 2**-b).  For the
    unquantized mode the peak itself is returned for bookkeeping.
    """
    r = np.asarray(measurements)
    peak = float(np.max(np.abs(r))) if r.size else 0.0
    if peak == 0.0:
        raise ValueError("cannot size a dynamic range for an all-zero signal")
    if bit_depth is None or not dithered:
        return peak
    return peak / (1.0 - 2.0 ** (-bit_depth))


def adapted_quantizer(measurements: np.ndarray, bit_depth: Optional[int], dithered: bool) -> QuantizerConfig:
    """Build the quantizer whose range is adapted to ``measurements``."""
    return QuantizerConfig(
        bit_depth=bit_depth,
        dynamic_range=dynamic_range_for(measurements, bit_depth, dithered),
    )


def draw_dither(config: QuantizerConfig, n_meas: int, seed: int) -> Dither:
    """Draw 2*n_meas i.i.d. uniforms on (-delta/2, delta/2); deterministic per seed."""
    if not config.quantized:
        raise ValueError("dither is only defined for quantized configurations")
    rng = generator(seed)
    half = 0.5 * config.step
    re = rng.uniform(-half, half, size=n_meas)
    im = rng.uniform(-half, half, size=n_meas)
    return Dither(values=re + 1j * im, seed=int(seed))


def sense(
    plan: SamplingPlan,
    config: QuantizerConfig,
    dither: Optional[Dither],
    profile: ProfileLike,
) -> np.ndarray:
    """Acquire a profile: partial-Fourier measurements, dither, quantization.

    Quantized mode returns Q(forward(profile) + xi) with xi = 0 when no
    dither is given; unquantized mode returns the raw measurements (a dither
    is rejected there, since it would only add noise).
    """
    r = forward(plan, profile)
    if not config.quantized:
        if dither is not None:
            raise ValueError("unquantized sensing does not accept a dither")
        return r
    if dither is not None:
        if dither.n_meas != plan.n_meas:
            raise ValueError(f"dither length {dither.n_meas} does not match n_meas={plan.n_meas}")
        r = r + dither.values
    return quantize_complex(config, r)
