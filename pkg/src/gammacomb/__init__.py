"""Single gamma-photon storage and sequencing in a Doppler frequency comb."""

__version__ = "0.1.0"

from .comb import CombConfig, DerivedComb, NuclearTransition, derive_comb, preset  # noqa: E402
from .pulse import Peak, PulseSpec, Waveform, build_pulse, pulse_on_grid  # noqa: E402
from .schedule import (VelocitySchedule, accumulated_phase, make_boost, make_gfc,  # noqa: E402
                       make_hold, make_sgem, make_sine, predict_echo_times, scale_at)
from .td_solver import SimResult, SolverParams, convergence_probe, simulate  # noqa: E402
from .fd_solver import approx_transfer_product, exact_transfer, propagate_static  # noqa: E402
from .metrics import EchoReport, detect_echoes, efficiency, fidelity  # noqa: E402
