"""Echo detection, storage efficiency and retrieval fidelity.

Times are absolute on the waveform grid; ``t_in`` is the arrival time of
the input (center of its first peak).  The retrieval window
``[t_in + t_ec/2, t_in + 3 t_ec/2]`` and the input window
``[t_in - t_ec/2, t_in + t_ec/2]`` are both referred to ``t_in``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from scipy.signal import find_peaks

from .errors import CoverageError
from .pulse import Waveform

Mode = Literal["gfc", "sgem"]


def _window_mask(wave: Waveform, lo: float, hi: float) -> np.ndarray:
    tol = 1e-9 * wave.dt
    if lo < wave.t_start - wave.dt / 2 - tol or hi > wave.t_end + wave.dt / 2 + tol:
        raise CoverageError(
            f"window [{lo:.4e}, {hi:.4e}] s exceeds grid [{wave.t_start:.4e}, {wave.t_end:.4e}] s")
    t = wave.times
    # nearest samples to the window edges
    i0 = int(np.clip(round((lo - wave.t_start) / wave.dt), 0, len(wave) - 1))
    i1 = int(np.clip(round((hi - wave.t_start) / wave.dt), 0, len(wave) - 1))
    mask = np.zeros(len(t), dtype=bool)
    mask[i0:i1 + 1] = True
    return mask


def window_energy(wave: Waveform, lo: float, hi: float) -> float:
    """Trapezoid integral of |E|^2 over [lo, hi] snapped to the grid."""
    m = _window_mask(wave, lo, hi)
    return float(np.trapezoid(wave.intensity[m], dx=wave.dt))


def efficiency(input: Waveform, output: Waveform, t_in: float, t_ec: float) -> float:
    n_in = window_energy(input, t_in - 0.5 * t_ec, t_in + 0.5 * t_ec)
    n_out = window_energy(output, t_in + 0.5 * t_ec, t_in + 1.5 * t_ec)
    if n_in == 0:
        raise ValueError("input window carries no energy")
    return n_out / n_in


def fidelity(input: Waveform, output: Waveform, t_in: float, t_ec: float,
             mode: Mode = "gfc") -> Optional[float]:
    """Normalised squared overlap of the input with the retrieved pulse.

    GFC compares with ``E_out(t + t_ec)``, SGEM with the time-reversed
    ``E_out(t_ec - (t - t_in) + t_in)``.  Returns None if nothing is retrieved.
    """
    if mode not in ("gfc", "sgem"):
        raise ValueError(f"unknown mode {mode!r}")
    if not input.same_grid(output):
        raise ValueError("fidelity needs input and output on the same grid")
    lo, hi = t_in - 0.5 * t_ec, t_in + 0.5 * t_ec
    m = _window_mask(input, lo, hi)
    _window_mask(output, t_in + 0.5 * t_ec, t_in + 1.5 * t_ec)
    idx = np.nonzero(m)[0]
    shift = t_ec / input.dt
    t_rel = input.times[idx] - t_in
    if mode == "gfc":
        pos = idx + shift
    else:
        pos = (t_in + t_ec - t_rel - input.t_start) / input.dt
    out = _sample(output.samples, pos)
    e_in = input.samples[idx]
    n_in = np.trapezoid(np.abs(e_in) ** 2, dx=input.dt)
    n_out = np.trapezoid(np.abs(out) ** 2, dx=input.dt)
    if n_out == 0 or n_in == 0:
        return None
    overlap = np.trapezoid(np.conj(e_in) * out, dx=input.dt)
    return float(abs(overlap) ** 2 / (n_in * n_out))


def _sample(samples: np.ndarray, pos: np.ndarray) -> np.ndarray:
    # linear interpolation at fractional sample positions
    pos = np.clip(pos, 0, len(samples) - 1)
    i = np.minimum(np.floor(pos).astype(int), len(samples) - 2)
    f = pos - i
    return (1 - f) * samples[i] + f * samples[i + 1]


@dataclass(frozen=True)
class Echo:
    peak_time: float
    window_energy: float
    peak_intensity: float


def detect_echoes(output: Waveform, t_in: float, noise_floor: float = 0.0,
                  exclude: float = 0.0, window: Optional[float] = None,
                  min_separation: Optional[float] = None,
                  rel_prominence: float = 0.05) -> list[Echo]:
    """Local maxima of |E|^2 after ``t_in + exclude``.

    Each peak gets a parabolic sub-sample time and the energy within
    ``+- window/2`` (clipped to the grid). Ringing wiggles are rejected by
    requiring a prominence of ``rel_prominence`` times the largest peak.
    """
    inten = output.intensity
    t = output.times
    start = int(np.searchsorted(t, t_in + exclude, side="right"))
    seg = inten[start:]
    if seg.size < 3 or seg.max() <= noise_floor or seg.max() == 0:
        return []
    distance = max(1, int((min_separation or 0) / output.dt))
    peaks, props = find_peaks(seg, height=max(noise_floor, 0.0) or None,
                              prominence=rel_prominence * seg.max(), distance=distance)
    echoes = []
    for p in peaks:
        k = start + p
        tk = t[k]
        if 0 < k < len(inten) - 1:
            y0, y1, y2 = inten[k - 1], inten[k], inten[k + 1]
            den = y0 - 2 * y1 + y2
            if den != 0:
                tk = t[k] + 0.5 * (y0 - y2) / den * output.dt
        half = (window if window is not None else 2 * (min_separation or output.dt)) / 2
        lo = max(tk - half, output.t_start)
        hi = min(tk + half, output.t_end)
        echoes.append(Echo(float(tk), window_energy(output, lo, hi), float(inten[k])))
    return echoes


def dominant_echo(echoes: list[Echo]) -> Optional[Echo]:
    return max(echoes, key=lambda e: e.window_energy, default=None)


def post_leakage_fraction(input: Waveform, output: Waveform, t_in: float, t_ec: float) -> float:
    """Energy after ``t_in + t_ec/2`` over the input energy."""
    n_in = window_energy(input, t_in - 0.5 * t_ec, t_in + 0.5 * t_ec)
    n_out = window_energy(output, t_in + 0.5 * t_ec, output.t_end)
    if n_in == 0:
        raise ValueError("input window carries no energy")
    return n_out / n_in


@dataclass
class EchoReport:
    echoes: list[Echo]
    efficiency: float
    fidelity: Optional[float]
    t_ec: float
    mode: Mode
    total_retrieved: float = math.nan

    def to_dict(self) -> dict:
        return {
            "echoes": [
                {"peak_time_ns": e.peak_time * 1e9, "window_energy": e.window_energy,
                 "peak_intensity": e.peak_intensity}
                for e in self.echoes
            ],
            "efficiency": self.efficiency,
            "fidelity": self.fidelity,
            "t_ec_ns": self.t_ec * 1e9,
            "mode": self.mode,
            "total_retrieved": self.total_retrieved,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def echo_report(input: Waveform, output: Waveform, t_in: float, t_ec: float, mode: Mode,
                T0: Optional[float] = None, delta_t: Optional[float] = None,
                noise_floor: Optional[float] = None, t_last: Optional[float] = None) -> EchoReport:
    """Efficiency, fidelity and detected echoes for one run.

    Peaks before ``t_last + 1.5 delta_t`` (``t_last`` being the last input
    peak) are treated as leakage and skipped.
    """
    if noise_floor is None:
        noise_floor = 1e-6 * float(input.intensity.max())
    sep = delta_t if delta_t is not None else 0.0
    win = t_ec if sep == 0 else min(t_ec, 3 * sep)
    if T0 is not None and math.isfinite(T0):
        win = min(win, T0)
    span = 0.0 if t_last is None else max(t_last - t_in, 0.0)
    echoes = detect_echoes(output, t_in, noise_floor, exclude=span + 1.5 * sep, window=win,
                           min_separation=sep)
    return EchoReport(
        echoes=echoes,
        efficiency=efficiency(input, output, t_in, t_ec),
        fidelity=fidelity(input, output, t_in, t_ec, mode),
        t_ec=t_ec,
        mode=mode,
        total_retrieved=post_leakage_fraction(input, output, t_in, t_ec),
    )
