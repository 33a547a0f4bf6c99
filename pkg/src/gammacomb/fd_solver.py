"""Stationary (static comb) solution in the frequency domain.

Fourier convention: ``E(t) = int E(w) exp(-i w t) dw``, so d/dt -> -i w and
each target of optical thickness zeta0 multiplies the spectrum by
``exp(-(zeta0/2) * Gamma / (Gamma + i (Delta_m - w)))``.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .comb import CombConfig, derive_comb
from .errors import PaddingError
from .pulse import Waveform

# the resonant tail must decay below this fraction of its amplitude squared
WRAP_BUDGET = 1e-6


@dataclass(frozen=True, eq=False)
class TransferFunction:
    omega: np.ndarray   # detuning from w0, rad/s
    values: np.ndarray  # complex T(w)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["omega_rad_s", "re", "im"])
            for om, v in zip(self.omega, self.values):
                w.writerow([repr(float(om)), repr(float(v.real)), repr(float(v.imag))])


def _log_transfer(config: CombConfig, omega: np.ndarray) -> np.ndarray:
    g = config.transition.gamma
    half = 0.5 * config.zeta0
    total = np.zeros(omega.shape, dtype=complex)
    for m in config.indices:
        total -= half * g / (g + 1j * (m * config.beta_omega0 - omega))
    return total


def exact_transfer(config: CombConfig, omega) -> TransferFunction:
    omega = np.asarray(omega, dtype=float)
    if config.zeta0 == 0:
        return TransferFunction(omega, np.ones(omega.shape, dtype=complex))
    return TransferFunction(omega, np.exp(_log_transfer(config, omega)))


def default_n_max(finesse: float) -> int:
    return max(1, math.ceil(5 * finesse / math.pi))


def approx_transfer_product(config: CombConfig, omega, n_max: Optional[int] = None) -> TransferFunction:
    """Infinite-comb product form with the inner series summed to an exponential.

    Truncated after ``n_max`` factors (default ``ceil(5F/pi)``).
    """
    omega = np.asarray(omega, dtype=float)
    d = derive_comb(config)
    if d.degenerate:
        raise ValueError("the product form needs a non-zero tooth spacing")
    if d.finesse < 5:
        warnings.warn(f"finesse {d.finesse:.2f} < 5: product form is outside its validity range",
                      stacklevel=2)
    z = d.zeta_eff0
    if n_max is None:
        n_max = default_n_max(d.finesse)
    log_t = np.full(omega.shape, -math.pi * z / 4, dtype=complex)
    for n in range(1, n_max + 1):
        log_t -= (math.pi / 2) * z * math.exp(-math.pi * n / d.finesse) * np.exp(1j * n * omega * d.T0)
    return TransferFunction(omega, np.exp(log_t))


def required_fft_length(config: CombConfig, n_samples: int, dt: float) -> int:
    """Smallest buffer that holds the signal plus the decaying resonant tail."""
    tail = math.log(1 / WRAP_BUDGET) / (2 * config.transition.gamma)
    return n_samples + math.ceil(tail / dt)


def propagate_static(config: CombConfig, input: Waveform, n_fft: Optional[int] = None) -> Waveform:
    """Apply the exact transfer function with a zero-padded FFT.

    The default buffer is the next power of two at least four times the
    input and long enough for the tail to decay by the wrap budget.
    """
    n = len(input)
    need = required_fft_length(config, n, input.dt)
    if n_fft is None:
        n_fft = 1 << (max(4 * n, need) - 1).bit_length()
    elif n_fft < need:
        raise PaddingError(
            f"FFT length {n_fft} leaves wrap-around above {WRAP_BUDGET:g}; need >= {need} samples",
            need)
    if config.zeta0 == 0:
        return input.with_samples(input.samples.copy())
    spectrum = np.fft.fft(input.samples, n_fft)
    # numpy's kernel is exp(-i nu t); in the E(t) = int E(w) exp(-i w t) convention w = -nu
    nu = 2 * np.pi * np.fft.fftfreq(n_fft, input.dt)
    spectrum *= exact_transfer(config, -nu).values
    out = np.fft.ifft(spectrum)[:n]
    return input.with_samples(out)
