"""Nuclear transitions, isotope presets and the Doppler comb configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from scipy.constants import c as C_LIGHT
from scipy.constants import e as ELEMENTARY_CHARGE
from scipy.constants import hbar as HBAR

KEV = 1.0e3 * ELEMENTARY_CHARGE  # J

__all__ = [
    "C_LIGHT",
    "HBAR",
    "KEV",
    "NuclearTransition",
    "CombConfig",
    "DerivedComb",
    "PRESETS",
    "preset",
    "derive_comb",
]


@dataclass(frozen=True)
class NuclearTransition:
    """A recoil-free nuclear transition.

    ``gamma`` is the decay rate of the nuclear coherence in rad/s; config
    files carry it as gamma/2pi in MHz.
    """

    name: str
    energy_kev: float
    gamma: float
    excited_lifetime: Optional[float] = None

    def __post_init__(self):
        if not self.energy_kev > 0:
            raise ValueError(f"transition energy must be positive, got {self.energy_kev}")
        if not self.gamma > 0:
            raise ValueError(f"coherence decay rate must be positive, got {self.gamma}")

    @property
    def omega0(self) -> float:
        """Resonant angular frequency in rad/s."""
        return self.energy_kev * KEV / HBAR

    @property
    def gamma_over_2pi_mhz(self) -> float:
        return self.gamma / (2 * math.pi) / 1e6

    @classmethod
    def from_mhz(cls, name: str, energy_kev: float, gamma_over_2pi_mhz: float,
                 excited_lifetime: Optional[float] = None) -> "NuclearTransition":
        return cls(name, energy_kev, 2 * math.pi * gamma_over_2pi_mhz * 1e6, excited_lifetime)


def _lifetime_limited(name: str, energy_kev: float, lifetime: float) -> NuclearTransition:
    # homogeneous line: coherence decays at half the population rate
    return NuclearTransition(name, energy_kev, 1.0 / (2.0 * lifetime), lifetime)


PRESETS: dict[str, NuclearTransition] = {
    "Fe57": NuclearTransition.from_mhz("Fe57", 14.4, 0.55, excited_lifetime=141e-9),
    "Zn67": NuclearTransition("Zn67", 93.3, 1.0 / 13.6e-6),
    "Sc45": _lifetime_limited("Sc45", 12.4, 0.46),
    "Ag109": _lifetime_limited("Ag109", 88.0, 57.1),
}


def preset(name: str) -> NuclearTransition:
    """Look up an isotope preset by name (case-insensitive)."""
    for key, value in PRESETS.items():
        if key.lower() == name.lower():
            return value
    raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")


@dataclass(frozen=True)
class CombConfig:
    """A stack of ``m_targets`` identical absorbers with velocities m*delta_v.

    ``delta_v`` is in m/s. Thickness and positions are carried for the
    record only; the solvers work in the retarded frame where gaps between
    targets do nothing.
    """

    transition: NuclearTransition
    m_targets: int
    zeta0: float
    delta_v: float
    target_thickness: Optional[float] = None
    target_positions: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if int(self.m_targets) != self.m_targets or self.m_targets < 1 or self.m_targets % 2 == 0:
            raise ValueError(f"m_targets must be an odd positive integer, got {self.m_targets}")
        if not self.zeta0 >= 0:
            raise ValueError(f"zeta0 must be >= 0, got {self.zeta0}")
        if not self.delta_v >= 0:
            raise ValueError(f"delta_v must be >= 0, got {self.delta_v}")
        if self.delta_v * (self.m_targets - 1) / 2 >= 1e-3 * C_LIGHT:
            raise ValueError("target velocities are not small compared to c")

    @property
    def indices(self) -> range:
        """Target indices -(M-1)/2 ... (M-1)/2 in propagation order."""
        half = (self.m_targets - 1) // 2
        return range(-half, half + 1)

    @property
    def beta(self) -> float:
        return self.delta_v / C_LIGHT

    @property
    def beta_omega0(self) -> float:
        return self.beta * self.transition.omega0

    @property
    def coupling(self) -> float:
        """Lumped coupling a = zeta0*Gamma/2 per target, rad/s."""
        return 0.5 * self.zeta0 * self.transition.gamma

    def with_tooth_spacing(self, beta_omega0: float) -> "CombConfig":
        """Same stack with delta_v chosen to give the requested tooth spacing."""
        return CombConfig(self.transition, self.m_targets, self.zeta0,
                          beta_omega0 * C_LIGHT / self.transition.omega0,
                          self.target_thickness, self.target_positions)


@dataclass(frozen=True)
class DerivedComb:
    beta_omega0: float
    T0: float
    finesse: float
    zeta_eff0: Optional[float]
    total_zeta: float
    comb_bandwidth: float
    coupling: float

    @property
    def degenerate(self) -> bool:
        return self.beta_omega0 == 0.0


def derive_comb(config: CombConfig) -> DerivedComb:
    """Tooth spacing, rephasing period, finesse and effective thickness.

    A zero velocity spacing gives a degenerate comb with ``T0 = inf``,
    ``finesse = 0`` and ``zeta_eff0 = None``.
    """
    bw = config.beta_omega0
    gamma = config.transition.gamma
    m = config.m_targets
    if bw == 0.0:
        return DerivedComb(0.0, math.inf, 0.0, None, m * config.zeta0, 0.0, config.coupling)
    finesse = bw / (2.0 * gamma)
    return DerivedComb(
        beta_omega0=bw,
        T0=2.0 * math.pi / bw,
        finesse=finesse,
        zeta_eff0=config.zeta0 / finesse,
        total_zeta=m * config.zeta0,
        comb_bandwidth=m * bw,
        coupling=config.coupling,
    )
