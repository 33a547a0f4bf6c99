"""Closed-form results for the gradient frequency comb and its reversal echo."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .bessel import SERIES_LIMIT, j1, j1_over_half_arg
from .pulse import Waveform

GFC_EFFICIENCY_BOUND = (2 / math.e) ** 2


def gfc_first_echo_efficiency(zeta_eff0, finesse):
    """Energy of the first comb echo relative to the input (two-term model)."""
    amp = (math.pi * np.asarray(zeta_eff0) / 2) * np.exp(-math.pi * np.asarray(zeta_eff0) / 4) \
        * np.exp(-math.pi / np.asarray(finesse))
    out = amp ** 2
    return float(out) if np.ndim(out) == 0 else out


def maximize_gfc_efficiency(finesse: float = math.inf) -> tuple[float, float]:
    """Numerically maximise the first-echo efficiency over zeta_eff0.

    Returns ``(zeta_eff0_opt, efficiency_opt)``.
    """
    res = minimize_scalar(lambda z: -gfc_first_echo_efficiency(z, finesse),
                          bounds=(0.0, 10.0), method="bounded",
                          options={"xatol": 1e-10})
    return float(res.x), float(-res.fun)


def _delayed(wave: Waveform, delay: float) -> np.ndarray:
    shift = delay / wave.dt
    k = round(shift)
    n = len(wave)
    if abs(shift - k) < 1e-9:
        out = np.zeros(n, dtype=complex)
        if k < n:
            out[k:] = wave.samples[: n - k]
        return out
    # fractional delay: phase ramp on a zero-padded spectrum
    n_fft = 1 << (2 * n - 1).bit_length()
    nu = 2 * np.pi * np.fft.fftfreq(n_fft, wave.dt)
    spec = np.fft.fft(wave.samples, n_fft) * np.exp(-1j * nu * delay)
    return np.fft.ifft(spec)[:n]


def gfc_two_term_output(input: Waveform, zeta_eff0: float, finesse: float, T0: float) -> Waveform:
    """Leakage plus the first comb echo; meaningful up to ``t_in + T0``."""
    leak = math.exp(-math.pi * zeta_eff0 / 4)
    echo = (math.pi * zeta_eff0 / 2) * leak * math.exp(-math.pi / finesse)
    return input.with_samples(leak * input.samples - echo * _delayed(input, T0))


def echo_series(zeta_eff0: float, finesse: float, k_max: int) -> np.ndarray:
    """Amplitude of the k-th comb echo, k = 0..k_max (k = 0 is the leakage).

    Coefficients of ``exp(-pi z/4) * prod_n exp(-(pi z/2) r^n x^n)`` in powers
    of the delay operator ``x``, with ``r = exp(-pi/F)``; obtained from the
    recurrence ``k f_k = sum_j j g_j f_{k-j}`` for ``f = exp(g)``.
    """
    c = math.pi * zeta_eff0 / 2
    r = math.exp(-math.pi / finesse)
    g = np.array([0.0] + [-c * r ** n for n in range(1, k_max + 1)])
    f = np.zeros(k_max + 1)
    f[0] = 1.0
    for k in range(1, k_max + 1):
        j = np.arange(1, k + 1)
        f[k] = np.dot(j * g[j], f[k - j]) / k
    return math.exp(-math.pi * zeta_eff0 / 4) * f


def optimal_zeta0(finesse: float) -> float:
    """Per-target thickness that maximises the first echo at high finesse."""
    return 4 * finesse / math.pi


@dataclass(frozen=True)
class ConditionReport:
    finesse: float
    finesse_lower: float      # pi / (M dt Gamma)
    finesse_upper: float      # pi / (dt Gamma)
    lower_ok: bool
    upper_ok: bool
    T0: float
    resolvable: bool          # dt < T0
    covered: bool             # T0 < M dt
    lower_margin: float       # finesse / finesse_lower
    upper_margin: float       # finesse_upper / finesse
    high_finesse: bool

    @property
    def feasible(self) -> bool:
        return self.lower_ok and self.upper_ok

    def as_dict(self) -> dict:
        d = asdict(self)
        d["feasible"] = self.feasible
        return d


def check_conditions(m_targets: int, delta_t: float, gamma: float, finesse: float) -> ConditionReport:
    """Spectral coverage and echo resolvability for a pulse of field FWHM ``delta_t``."""
    lower = math.pi / (m_targets * delta_t * gamma)
    upper = math.pi / (delta_t * gamma)
    T0 = math.pi / (gamma * finesse)
    return ConditionReport(
        finesse=finesse,
        finesse_lower=lower,
        finesse_upper=upper,
        lower_ok=finesse > lower,
        upper_ok=finesse < upper,
        T0=T0,
        resolvable=delta_t < T0,
        covered=T0 < m_targets * delta_t,
        lower_margin=finesse / lower,
        upper_margin=upper / finesse,
        high_finesse=finesse >= 10,
    )


def equal_split_zeta(finesse: float) -> float:
    """zeta_eff0 at which leakage and first echo carry equal amplitude."""
    return (2 / math.pi) * math.exp(math.pi / finesse)


def sgem_efficiency_bound(zeta_eff0, gamma, t_sw):
    """Order-of-magnitude ceiling on the reversal-echo efficiency.

    ``zeta_eff0`` is the per-target value zeta0/F.
    """
    stored = 1 - np.exp(-math.pi * np.asarray(zeta_eff0) / 2)
    out = stored ** 2 * np.exp(-4 * np.asarray(gamma) * np.asarray(t_sw))
    return float(out) if np.ndim(out) == 0 else out


def response_kernel(t, zeta0: float, gamma: float):
    """``exp(-Gamma t) J1(y)/(y/2)`` with ``y = 2 sqrt(zeta0 Gamma t / 2)``.

    Normalised to 1 at t = 0. Describes the envelope of the higher echoes.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("response kernel is defined for t >= 0")
    y = 2 * np.sqrt(zeta0 * gamma * t / 2)
    out = np.exp(-gamma * t) * _j1_ratio(y)
    return float(out) if out.ndim == 0 else out


def _j1_ratio(y: np.ndarray) -> np.ndarray:
    flat = np.atleast_1d(y)
    out = np.empty_like(flat)
    small = flat <= SERIES_LIMIT
    out[small] = j1_over_half_arg(flat[small])
    out[~small] = j1(flat[~small]) / (flat[~small] / 2)
    return out.reshape(np.shape(y))


def kernel_first_zero(zeta0: float, gamma: float, j11: float = 3.8317059702075125) -> float:
    """Time of the kernel's first sign change."""
    return j11 ** 2 / (2 * zeta0 * gamma)
