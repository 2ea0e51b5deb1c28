"""Discrete FMCW range-domain sensing model.

A scene is a complex range profile over ``n_bins`` discrete range bins; one
time sample of the demodulated baseband signal probes one row of the DFT of
that profile.  A sampling plan selects which frequency rows are observed
(possibly with repetitions when more than one ramp is sampled), giving the
partial-Fourier forward operator and its adjoint.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

import numpy as np

from .seeding import generator

__all__ = [
    "SPEED_OF_LIGHT",
    "RadarParams",
    "RangeProfile",
    "SamplingPlan",
    "make_sampling_plan",
    "forward",
    "adjoint",
    "random_profile",
    "bin_to_range",
    "bin_number",
]

SPEED_OF_LIGHT = 299_792_458.0  # m/s

ProfileLike = Union["RangeProfile", np.ndarray]


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class RadarParams:
    """Physical ramp parameters; used only for bin <-> meter conversion.

    f0: carrier frequency (Hz); bandwidth: swept bandwidth B (Hz);
    ramp_duration: duration of one ramp T (s); n_bins: samples per ramp N.
    """

    f0: float
    bandwidth: float
    ramp_duration: float
    n_bins: int

    def __post_init__(self):
        if self.f0 <= 0 or self.bandwidth <= 0 or self.ramp_duration <= 0:
            raise ValueError("radar parameters must be strictly positive")
        if self.n_bins < 1:
            raise ValueError("n_bins must be >= 1")

    @property
    def range_resolution(self) -> float:
        """Bin spacing c/(2B) in meters."""
        return SPEED_OF_LIGHT / (2.0 * self.bandwidth)

    @property
    def max_range(self) -> float:
        """Largest observable range N*c/(2B) in meters."""
        return self.n_bins * self.range_resolution


@dataclass(frozen=True, eq=False)
class RangeProfile:
    """Complex target amplitudes over the N range bins (index 0..N-1)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1 or amps.size == 0:
            raise ValueError("amplitudes must be a nonempty 1-D complex vector")
        object.__setattr__(self, "amplitudes", _readonly(amps))

    @property
    def n_bins(self) -> int:
        return self.amplitudes.size

    @property
    def sparsity(self) -> int:
        """Number of nonzero amplitudes."""
        return int(np.count_nonzero(self.amplitudes))

    @property
    def support(self) -> frozenset:
        """Indices of the nonzero amplitudes."""
        return frozenset(np.flatnonzero(self.amplitudes).tolist())


@dataclass(frozen=True, eq=False)
class SamplingPlan:
    """Which DFT rows are observed, in acquisition order.

    ``omega`` is a multiset of M frequency indices in {0..N-1}.  Order is
    preserved so each measurement stays paired with its dither component.
    """

    n_bins: int
    n_meas: int
    omega: np.ndarray
    seed: int

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=np.int64)
        if omega.shape != (self.n_meas,):
            raise ValueError("omega must hold exactly n_meas indices")
        if omega.size and (omega.min() < 0 or omega.max() >= self.n_bins):
            raise ValueError("omega indices must lie in [0, n_bins)")
        object.__setattr__(self, "omega", _readonly(omega))

    def to_json(self) -> dict:
        return {
            "n_bins": self.n_bins,
            "n_meas": self.n_meas,
            "seed": self.seed,
            "omega": self.omega.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "SamplingPlan":
        return cls(
            n_bins=int(data["n_bins"]),
            n_meas=int(data["n_meas"]),
            omega=np.asarray(data["omega"], dtype=np.int64),
            seed=int(data["seed"]),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def make_sampling_plan(n_bins: int, n_meas: int, seed: int) -> SamplingPlan:
    """Draw the acquisition plan for M measurements over N-sample ramps.

    For M < N a uniformly random size-M subset of one ramp is kept (in time
    order).  For M >= N, floor(M/N) ramps are sampled in full and the
    remaining M mod N samples are a uniformly random subset of the last,
    partially sampled ramp.  Deterministic given ``seed``.
    """
    if n_bins < 1 or n_meas < 1:
        raise ValueError("n_bins and n_meas must be >= 1")
    rng = generator(seed)
    if n_meas < n_bins:
        omega = np.sort(rng.choice(n_bins, size=n_meas, replace=False))
    else:
        full = np.tile(np.arange(n_bins, dtype=np.int64), n_meas // n_bins)
        remainder = n_meas % n_bins
        if remainder:
            extra = np.sort(rng.choice(n_bins, size=remainder, replace=False))
            omega = np.concatenate([full, extra])
        else:
            omega = full
    return SamplingPlan(n_bins=n_bins, n_meas=n_meas, omega=omega, seed=int(seed))


def _as_amplitudes(profile: ProfileLike, n_bins: int) -> np.ndarray:
    amps = profile.amplitudes if isinstance(profile, RangeProfile) else profile
    amps = np.asarray(amps, dtype=np.complex128)
    if amps.shape != (n_bins,):
        raise ValueError(f"profile length {amps.shape} does not match n_bins={n_bins}")
    return amps


def forward(plan: SamplingPlan, profile: ProfileLike) -> np.ndarray:
    """Apply the partial-Fourier sensing operator.

    Returns the M-vector r with r[j] = sum_n a[n] exp(-i 2 pi omega[j] n / N),
    ordered as ``plan.omega``.  Computed as one size-N FFT followed by a
    gather, so repeated frequencies cost O(1) each.
    """
    amps = _as_amplitudes(profile, plan.n_bins)
    return np.fft.fft(amps)[plan.omega]


def adjoint(plan: SamplingPlan, measurements: np.ndarray) -> np.ndarray:
    """Apply the adjoint of :func:`forward`.

    Returns the N-vector with components sum_j y[j] exp(+i 2 pi omega[j] n / N).
    Measurements sharing a frequency index are accumulated into one spectral
    bin before a single size-N inverse transform: O(M + N log N).
    """
    y = np.asarray(measurements, dtype=np.complex128)
    if y.shape != (plan.n_meas,):
        raise ValueError(f"measurement length {y.shape} does not match n_meas={plan.n_meas}")
    spectrum = np.bincount(plan.omega, weights=y.real, minlength=plan.n_bins) + 1j * np.bincount(
        plan.omega, weights=y.imag, minlength=plan.n_bins
    )
    return plan.n_bins * np.fft.ifft(spectrum)


def random_profile(n_bins: int, sparsity: int, rng) -> RangeProfile:
    """Draw a K-sparse profile with uniform support and U[0,1] amplitudes.

    The support is uniform over all C(N, K) index subsets; each nonzero is
    C * exp(i psi) with C ~ U[0, 1] and psi ~ U[0, 2 pi), and the result is
    rescaled so the largest modulus is exactly 1.  ``rng`` is a seed or a
    numpy Generator.
    """
    if not 1 <= sparsity <= n_bins:
        raise ValueError(f"sparsity must be in [1, {n_bins}], got {sparsity}")
    rng = generator(rng)
    support = rng.choice(n_bins, size=sparsity, replace=False)
    moduli = rng.uniform(0.0, 1.0, size=sparsity)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=sparsity)
    # U[0,1] puts zero mass at 0, but an exact 0 would silently drop a target.
    while np.any(moduli == 0.0):
        redraw = moduli == 0.0
        moduli[redraw] = rng.uniform(0.0, 1.0, size=int(redraw.sum()))
    amps = np.zeros(n_bins, dtype=np.complex128)
    amps[support] = moduli * np.exp(1j * phases)
    amps /= np.max(np.abs(amps))
    return RangeProfile(amplitudes=amps)


def bin_to_range(params: RadarParams, bin_index: int) -> float:
    """Convert a 1-based range-bin number to meters: n * c / (2B)."""
    if not 1 <= bin_index <= params.n_bins:
        raise ValueError(f"bin index must be in [1, {params.n_bins}], got {bin_index}")
    return bin_index * params.range_resolution


def bin_number(array_index: int, n_bins: int) -> int:
    """Map a 0-based profile index to its 1-based range-bin number.

    DFT index 0 carries the same phase progression as bin N, so it reports
    as bin N.
    """
    if not 0 <= array_index < n_bins:
        raise ValueError(f"array index must be in [0, {n_bins}), got {array_index}")
    return array_index if array_index >= 1 else n_bins
