"""Input field envelopes on uniform time grids."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np

from .errors import CoverageError, ResolutionError

# field FWHM -> Gaussian exponent: |E| = exp(-4 ln2 (t/fwhm)^2)
_GAUSS_K = 4.0 * math.log(2.0)


@dataclass(frozen=True)
class Peak:
    amplitude: complex
    center: float
    fwhm: float

    def __post_init__(self):
        if not self.fwhm > 0:
            raise ValueError(f"peak FWHM must be positive, got {self.fwhm}")


@dataclass(frozen=True)
class PulseSpec:
    """One or more field peaks.

    For ``shape="exponential"`` each peak rises instantly at ``center`` and
    decays with ``decay_constant``; when that is omitted the field FWHM sets
    it (the field drops to half after ``fwhm``).
    """

    peaks: tuple[Peak, ...]
    shape: Literal["gaussian", "exponential"] = "gaussian"
    decay_constant: Optional[float] = None

    def __post_init__(self):
        if not self.peaks:
            raise ValueError("a pulse needs at least one peak")
        if self.shape not in ("gaussian", "exponential"):
            raise ValueError(f"unknown pulse shape {self.shape!r}")
        if self.decay_constant is not None and not self.decay_constant > 0:
            raise ValueError("decay_constant must be positive")

    @classmethod
    def gaussian(cls, fwhm: float, center: float = 0.0, amplitude: complex = 1.0) -> "PulseSpec":
        return cls((Peak(amplitude, center, fwhm),))

    @property
    def t_in(self) -> float:
        """Center of the first peak."""
        return min(p.center for p in self.peaks)

    @property
    def min_fwhm(self) -> float:
        return min(p.fwhm for p in self.peaks)

    @property
    def max_fwhm(self) -> float:
        return max(p.fwhm for p in self.peaks)


@dataclass(frozen=True, eq=False)
class Waveform:
    """Complex field envelope sampled at ``t_start + i*dt``."""

    t_start: float
    dt: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=complex))

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(len(self.samples))

    @property
    def t_end(self) -> float:
        return self.t_start + self.dt * (len(self.samples) - 1)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    def energy(self) -> float:
        """Trapezoid integral of |E|^2 over the whole grid."""
        return float(np.trapezoid(self.intensity, dx=self.dt))

    def same_grid(self, other: "Waveform") -> bool:
        return (len(self) == len(other) and self.dt == other.dt
                and self.t_start == other.t_start)

    def with_samples(self, samples: np.ndarray) -> "Waveform":
        return Waveform(self.t_start, self.dt, samples)

    def __add__(self, other: "Waveform") -> "Waveform":
        if not self.same_grid(other):
            raise ValueError("waveforms live on different grids")
        return self.with_samples(self.samples + other.samples)

    def __mul__(self, alpha: complex) -> "Waveform":
        return self.with_samples(alpha * self.samples)

    __rmul__ = __mul__


def _envelope(spec: PulseSpec, t: np.ndarray) -> np.ndarray:
    out = np.zeros(t.shape, dtype=complex)
    for p in spec.peaks:
        x = t - p.center
        if spec.shape == "gaussian":
            out += p.amplitude * np.exp(-_GAUSS_K * (x / p.fwhm) ** 2)
        else:
            tau = spec.decay_constant or p.fwhm / math.log(2.0)
            env = np.zeros_like(x)
            on = x >= 0
            env[on] = np.exp(-x[on] / tau)
            out += p.amplitude * env
    return out


def build_pulse(spec: PulseSpec, t_start: float, dt: float, n_samples: int) -> Waveform:
    """Sample ``spec`` on the grid ``t_start + i*dt``, ``i < n_samples``.

    Raises ResolutionError when ``dt`` exceeds a twentieth of the narrowest
    FWHM, and CoverageError when some peak's +-5 FWHM span is off the grid.
    """
    if not dt > 0:
        raise ResolutionError(f"dt must be positive, got {dt}")
    if dt > spec.min_fwhm / 20:
        raise ResolutionError(
            f"dt = {dt:.3e} s exceeds FWHM/20 = {spec.min_fwhm / 20:.3e} s")
    t_end = t_start + dt * (n_samples - 1)
    for p in spec.peaks:
        lo = p.center - (5 * p.fwhm if spec.shape == "gaussian" else 0.0)
        hi = p.center + 5 * p.fwhm
        if lo < t_start - 1e-9 * dt or hi > t_end + 1e-9 * dt:
            raise CoverageError(
                f"grid [{t_start:.3e}, {t_end:.3e}] s does not cover peak at "
                f"{p.center:.3e} s +- 5 FWHM")
    t = t_start + dt * np.arange(n_samples)
    return Waveform(t_start, dt, _envelope(spec, t))


def pulse_on_grid(spec: PulseSpec, dt: float, t_end: float, lead: float = 5.0,
                  t_start: Optional[float] = None) -> Waveform:
    """Build ``spec`` on a grid starting ``lead`` FWHM before the first peak.

    An explicit ``t_start`` earlier than that moves the grid start back.
    """
    first = min(p.center - lead * p.fwhm for p in spec.peaks)
    if t_start is not None:
        first = min(first, t_start)
    last = max(p.center + 5 * p.fwhm for p in spec.peaks)
    t_stop = max(t_end, last)
    n = int(math.ceil((t_stop - first) / dt)) + 1
    return build_pulse(spec, first, dt, n)


def intensity_fwhm(wave: Waveform) -> float:
    """FWHM of |E|^2 by linear interpolation at the half-maximum crossings."""
    inten = wave.intensity
    k = int(np.argmax(inten))
    half = inten[k] / 2
    t = wave.times
    i = k
    while i > 0 and inten[i] > half:
        i -= 1
    j = k
    while j < len(inten) - 1 and inten[j] > half:
        j += 1
    left = t[i] + (half - inten[i]) / (inten[i + 1] - inten[i]) * wave.dt
    right = t[j - 1] + (half - inten[j - 1]) / (inten[j] - inten[j - 1]) * wave.dt
    return float(right - left)

