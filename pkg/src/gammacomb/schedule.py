"""Global velocity-scaling programs and the phase bookkeeping they imply.

Every target moves at ``v_m(t) = m * delta_v * s(t)``, so target ``m`` carries
the detuning ``m * beta_omega0 * s(t)`` and the accumulated phase
``m * phi(t)`` with ``phi(t) = beta_omega0 * int_0^t s``.  Echoes appear
whenever ``phi`` returns to its value at the arrival time modulo 2*pi.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np
from scipy.optimize import brentq


@dataclass(frozen=True)
class ConstantScale:
    s0: float

    def value(self, u):
        return np.full_like(np.asarray(u, dtype=float), self.s0)

    def excess_integral(self, u):
        """int_0^u (s - 1), with u the time since the segment start."""
        return (self.s0 - 1.0) * np.asarray(u, dtype=float)


@dataclass(frozen=True)
class Sinusoid:
    """``s = base + amplitude * sin(angular_freq * u + phase)``, u from segment start."""

    base: float
    amplitude: float
    angular_freq: float
    phase: float = 0.0

    def __post_init__(self):
        if not self.angular_freq > 0:
            raise ValueError("sinusoid angular_freq must be positive")

    def value(self, u):
        return self.base + self.amplitude * np.sin(self.angular_freq * np.asarray(u, dtype=float) + self.phase)

    def excess_integral(self, u):
        u = np.asarray(u, dtype=float)
        w = self.angular_freq
        return ((self.base - 1.0) * u
                + self.amplitude * (math.cos(self.phase) - np.cos(w * u + self.phase)) / w)


Law = Union[ConstantScale, Sinusoid]


@dataclass(frozen=True)
class Segment:
    t_begin: float
    t_end: float  # may be math.inf
    law: Law

    def __post_init__(self):
        if not math.isfinite(self.t_begin):
            raise ValueError("segment start must be finite")
        if not self.t_end > self.t_begin:
            raise ValueError(f"empty segment [{self.t_begin}, {self.t_end})")


@dataclass(frozen=True)
class VelocitySchedule:
    """Sorted, non-overlapping segments; ``s = 1`` outside all of them."""

    segments: tuple[Segment, ...] = ()

    def __post_init__(self):
        segs = tuple(sorted(self.segments, key=lambda g: g.t_begin))
        for a, b in zip(segs, segs[1:]):
            if b.t_begin < a.t_end:
                raise ValueError(
                    f"segments [{a.t_begin}, {a.t_end}) and [{b.t_begin}, {b.t_end}) overlap")
        object.__setattr__(self, "segments", segs)

    @property
    def is_constant(self) -> bool:
        """True when s(t) = 1 everywhere (static comb)."""
        return all(isinstance(g.law, ConstantScale) and g.law.s0 == 1.0 for g in self.segments)

    def __add__(self, other: "VelocitySchedule") -> "VelocitySchedule":
        return VelocitySchedule(self.segments + other.segments)

    def unit_phase(self, t) -> np.ndarray:
        """int_0^t s(tau) dtau, vectorised over ``t``."""
        t = np.asarray(t, dtype=float)
        return t + self._excess(t) - self._excess(np.zeros(()))

    def _excess(self, t: np.ndarray) -> np.ndarray:
        # int_{-inf}^t (s - 1), each segment in closed form
        total = np.zeros(t.shape)
        for g in self.segments:
            u = np.clip(t, g.t_begin, g.t_end) - g.t_begin
            total = total + g.law.excess_integral(u)
        return total


def scale_at(schedule: VelocitySchedule, t: float) -> float:
    for g in schedule.segments:
        if g.t_begin <= t < g.t_end:
            return float(g.law.value(t - g.t_begin))
    return 1.0


def accumulated_phase(schedule: VelocitySchedule, beta_omega0: float, t):
    """Per-unit-index phase ``beta_omega0 * int_0^t s``; target m carries m times this."""
    phi = beta_omega0 * schedule.unit_phase(t)
    return float(phi) if np.ndim(phi) == 0 else phi


# ---------------------------------------------------------------- factories

def make_gfc() -> VelocitySchedule:
    return VelocitySchedule()


def make_sgem(t_sw: float, t_in: float = 0.0) -> VelocitySchedule:
    """Reverse every velocity at ``t_in + t_sw`` and keep it reversed."""
    if not t_sw > 0:
        raise ValueError("switching time must be positive")
    return VelocitySchedule((Segment(t_in + t_sw, math.inf, ConstantScale(-1.0)),))


def make_hold(t_stop: float, duration: float, resume_scale: float = 1.0) -> VelocitySchedule:
    """Stop all targets for ``duration``; afterwards move at ``resume_scale``.

    ``resume_scale=-1`` resumes with reversed velocities.
    """
    if not duration > 0:
        raise ValueError("hold duration must be positive")
    segs = [Segment(t_stop, t_stop + duration, ConstantScale(0.0))]
    if resume_scale != 1.0:
        segs.append(Segment(t_stop + duration, math.inf, ConstantScale(resume_scale)))
    return VelocitySchedule(tuple(segs))


def make_boost(t_i: float, t_f: float, scale: float) -> VelocitySchedule:
    """Scale the velocity spacing by ``scale`` during ``[t_i, t_f)``."""
    return VelocitySchedule((Segment(t_i, t_f, ConstantScale(scale)),))


def make_sine(t_i: float, t_f: float, amplitude: float, angular_freq: float,
              phase: float = 0.0) -> VelocitySchedule:
    """``s = 1 + amplitude*sin(angular_freq*(t - t_i) + phase)`` on ``[t_i, t_f)``."""
    return VelocitySchedule((Segment(t_i, t_f, Sinusoid(1.0, amplitude, angular_freq, phase)),))


def boost_scale_for_phase(t_i: float, t_f: float, dphi: float, beta_omega0: float) -> float:
    """Square boost scale that adds ``dphi`` between adjacent targets."""
    return 1.0 + dphi / (beta_omega0 * (t_f - t_i))


def boost_echo_time(t_in: float, t_f: float, dphi: float, T0: float) -> float:
    """First echo after a boost ending at ``t_f`` that added ``dphi``."""
    frac = dphi / (2 * math.pi)
    p = math.ceil((t_f - t_in) / T0 + frac)
    return t_in + (p - frac) * T0


def sgem_window_ok(t_sw: float, delta_t: float, T0: float, warn: bool = True) -> bool:
    """Whether the reversal echo arrives before the first comb echo."""
    ok = delta_t / 2 < t_sw < T0 - delta_t / 2
    if not ok and warn:
        warnings.warn(
            f"switching time {t_sw:.3e} s outside ({delta_t / 2:.3e}, {T0 - delta_t / 2:.3e}) s; "
            "the reversal echo will not be the first retrieval", stacklevel=2)
    return ok


# ---------------------------------------------------------- echo prediction

class PredictedEcho(NamedTuple):
    time: float
    held: bool = False


def _pieces(schedule: VelocitySchedule, lo: float, hi: float):
    """Split [lo, hi] into (u0, u1, law, segment_start) with gaps as unit scale."""
    t = lo
    for g in schedule.segments:
        if g.t_end <= t:
            continue
        if g.t_begin >= hi:
            break
        if g.t_begin > t:
            yield t, g.t_begin, ConstantScale(1.0), t
            t = g.t_begin
        end = min(g.t_end, hi)
        yield t, end, g.law, g.t_begin
        t = end
    if t < hi:
        yield t, hi, ConstantScale(1.0), t


def predict_echo_times(schedule: VelocitySchedule, beta_omega0: float, t_in: float,
                       horizon: float, with_flags: bool = False):
    """Times in ``(t_in, t_in + horizon]`` where all target phases realign.

    A hold (s = 0) that starts phase-aligned would realign continuously; it
    is reported once, at the hold's end, with ``held=True``.
    """
    if not math.isfinite(horizon) or horizon <= 0:
        raise ValueError("horizon must be positive and finite")
    T0 = 2 * math.pi / beta_omega0
    tol = 1e-12 * T0
    psi_in = float(schedule.unit_phase(t_in))
    found: list[PredictedEcho] = []

    def psi(u):
        return float(schedule.unit_phase(u)) - psi_in

    for u0, u1, law, seg_start in _pieces(schedule, t_in, t_in + horizon):
        p0, p1 = psi(u0), psi(u1)
        if isinstance(law, ConstantScale):
            if law.s0 == 0.0:
                k = round(p0 / T0)
                if abs(p0 - k * T0) <= 1e-9 * T0 and u1 <= t_in + horizon:
                    found.append(PredictedEcho(u1, True))
                continue
            for k in _levels(p0, p1, T0, tol):
                found.append(PredictedEcho(u0 + (k * T0 - p0) / law.s0))
        else:
            for a, b in _monotone_pieces(law, seg_start, u0, u1):
                pa, pb = psi(a), psi(b)
                for k in _levels(pa, pb, T0, tol):
                    level = k * T0
                    if abs(pb - level) <= tol:
                        found.append(PredictedEcho(b))
                    else:
                        found.append(PredictedEcho(brentq(lambda u: psi(u) - level, a, b, xtol=tol)))
    found.sort()
    return found if with_flags else [e.time for e in found]


def _levels(p0: float, p1: float, T0: float, tol: float) -> list[int]:
    """Integers k with k*T0 in (p0, p1] (increasing) or [p1, p0) (decreasing)."""
    if p1 > p0:
        k0 = math.floor((p0 + tol) / T0) + 1
        k1 = math.floor((p1 + tol) / T0)
        return list(range(k0, k1 + 1))
    if p1 < p0:
        k0 = math.ceil((p1 - tol) / T0)
        k1 = math.ceil((p0 - tol) / T0) - 1
        return list(range(k1, k0 - 1, -1))
    return []


def _monotone_pieces(law: Sinusoid, seg_start: float, u0: float, u1: float):
    """Split [u0, u1] at the zeros of s(t) so the phase is monotone on each piece."""
    cuts = [u0, u1]
    if law.amplitude != 0 and abs(law.base / law.amplitude) <= 1:
        w = law.angular_freq
        x0 = math.asin(-law.base / law.amplitude)
        period = 2 * math.pi / w
        for root in (x0, math.pi - x0):
            # w*(t - seg_start) + phase = root + 2*pi*n
            t = seg_start + (root - law.phase) / w
            n = math.ceil((u0 - t) / period)
            t += n * period
            while t < u1:
                if t > u0:
                    cuts.append(t)
                t += period
    cuts.sort()
    return list(zip(cuts, cuts[1:]))
