import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from gammacomb import Peak, PulseSpec, Waveform, detect_echoes, efficiency, fidelity, pulse_on_grid
from gammacomb.errors import CoverageError
from gammacomb.metrics import (EchoReport, dominant_echo, echo_report, post_leakage_fraction,
                               window_energy)

NS = 1e-9


def _delayed_copy(w, delay_samples, scale=1.0):
    out = np.zeros_like(w.samples)
    out[delay_samples:] = scale * w.samples[:-delay_samples]
    return w.with_samples(out)


@pytest.fixture
def grid_pulse():
    return pulse_on_grid(PulseSpec.gaussian(7 * NS), 0.1 * NS, 120 * NS)


def test_perfect_delay_line(grid_pulse):
    out = _delayed_copy(grid_pulse, 400, 0.5j)
    assert efficiency(grid_pulse, out, 0.0, 40 * NS) == pytest.approx(0.25, rel=1e-9)
    assert fidelity(grid_pulse, out, 0.0, 40 * NS) == pytest.approx(1.0, abs=1e-12)


def test_sgem_fidelity_uses_time_reversal():
    spec = PulseSpec((Peak(1.0, 0.0, 5 * NS), Peak(0.5, 6 * NS, 5 * NS)))
    w = pulse_on_grid(spec, 0.1 * NS, 120 * NS)
    t = w.times
    # mirror about t_in + t_ec/2 = 20 ns
    mirrored = np.interp(40 * NS - t, t, w.samples.real, left=0, right=0)
    out = w.with_samples(mirrored.astype(complex))
    assert fidelity(w, out, 0.0, 40 * NS, mode="sgem") == pytest.approx(1.0, abs=1e-6)
    assert fidelity(w, out, 0.0, 40 * NS, mode="gfc") < 0.95
    with pytest.raises(ValueError):
        fidelity(w, out, 0.0, 40 * NS, mode="other")


def test_zero_output_has_no_fidelity(grid_pulse):
    zero = grid_pulse.with_samples(np.zeros(len(grid_pulse)))
    assert fidelity(grid_pulse, zero, 0.0, 40 * NS) is None
    assert efficiency(grid_pulse, zero, 0.0, 40 * NS) == 0.0
    assert detect_echoes(zero, 0.0) == []


def test_window_outside_grid(grid_pulse):
    with pytest.raises(CoverageError):
        efficiency(grid_pulse, grid_pulse, 0.0, 100 * NS)
    with pytest.raises(CoverageError):
        window_energy(grid_pulse, -200 * NS, 0.0)


def test_window_energy_closed_form(grid_pulse):
    exact = 7 * NS * math.sqrt(math.pi / (8 * math.log(2)))
    assert window_energy(grid_pulse, -30 * NS, 30 * NS) == pytest.approx(exact, rel=1e-9)


def test_mismatched_grids(grid_pulse):
    other = Waveform(grid_pulse.t_start + 1e-12, grid_pulse.dt, grid_pulse.samples)
    with pytest.raises(ValueError):
        fidelity(grid_pulse, other, 0.0, 40 * NS)


complex_arrays = arrays(np.complex128, 200,
                        elements=st.complex_numbers(max_magnitude=10, allow_nan=False,
                                                    allow_infinity=False))


@given(complex_arrays, complex_arrays, st.sampled_from(["gfc", "sgem"]))
def test_fidelity_bounded(a, b, mode):
    w_in = Waveform(-10.0, 0.1, a)
    w_out = Waveform(-10.0, 0.1, b)
    f = fidelity(w_in, w_out, 0.0, 6.0, mode)
    assert f is None or 0.0 <= f <= 1.0 + 1e-12


@given(complex_arrays, complex_arrays, st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_phase_invariance(a, b, p1, p2):
    w_in = Waveform(-10.0, 0.1, a)
    w_out = Waveform(-10.0, 0.1, b)
    rot_in = w_in * np.exp(1j * p1)
    rot_out = w_out * np.exp(1j * p2)
    if window_energy(w_in, -3.0, 3.0) == 0:
        with pytest.raises(ValueError):
            efficiency(w_in, w_out, 0.0, 6.0)
        return
    e0 = efficiency(w_in, w_out, 0.0, 6.0)
    assert efficiency(rot_in, rot_out, 0.0, 6.0) == pytest.approx(e0, rel=1e-9)
    f0 = fidelity(w_in, w_out, 0.0, 6.0)
    f1 = fidelity(rot_in, rot_out, 0.0, 6.0)
    if f0 is None:
        assert f1 is None
    else:
        assert f1 == pytest.approx(f0, rel=1e-9, abs=1e-12)


@settings(max_examples=15)
@given(st.integers(1, 300), st.floats(-5, 5))
def test_detect_echoes_translation(shift, offset_ns):
    spec = PulseSpec((Peak(1.0, 30 * NS, 6 * NS), Peak(0.4, 60 * NS, 6 * NS)))
    w = pulse_on_grid(spec, 0.1 * NS, 500 * NS, t_start=-40 * NS)
    base = detect_echoes(w, 0.0, exclude=5 * NS)
    rolled = w.with_samples(np.roll(w.samples, shift))
    moved = detect_echoes(rolled, 0.0, exclude=5 * NS)
    assert [e.peak_time for e in moved] == pytest.approx(
        [e.peak_time + shift * w.dt for e in base], abs=1e-6 * NS)
    # moving the whole grid shifts peak times by the same amount
    off = offset_ns * NS
    grid = Waveform(w.t_start + off, w.dt, w.samples)
    moved = detect_echoes(grid, off, exclude=5 * NS)
    assert [e.peak_time for e in moved] == pytest.approx(
        [e.peak_time + off for e in base], abs=1e-6 * NS)


def test_detect_subsample_peak():
    w = pulse_on_grid(PulseSpec.gaussian(7 * NS, center=40.03 * NS), 0.1 * NS, 100 * NS,
                      t_start=-20 * NS)
    (echo,) = detect_echoes(w, 0.0, exclude=5 * NS, window=20 * NS)
    assert echo.peak_time == pytest.approx(40.03 * NS, abs=2e-3 * NS)
    assert dominant_echo([echo]) is echo
    assert dominant_echo([]) is None


def test_prominence_rejects_ripple():
    t = np.arange(0, 2000) * 0.1 * NS
    sig = np.exp(-((t - 100 * NS) / (5 * NS)) ** 2) + 0.01 * np.sin(t / NS)
    echoes = detect_echoes(Waveform(0.0, 0.1 * NS, sig), 0.0, exclude=1 * NS)
    assert [round(e.peak_time / NS) for e in echoes] == [100]


def test_report_serialises(grid_pulse):
    out = _delayed_copy(grid_pulse, 400, 0.6)
    rep = echo_report(grid_pulse, out, 0.0, 40 * NS, "gfc", T0=40 * NS, delta_t=7 * NS)
    d = json.loads(rep.to_json())
    assert set(d) == {"echoes", "efficiency", "fidelity", "t_ec_ns", "mode", "total_retrieved"}
    assert d["echoes"][0]["peak_time_ns"] == pytest.approx(40.0, abs=1e-6)
    assert d["efficiency"] == pytest.approx(0.36)
    assert d["total_retrieved"] == pytest.approx(
        post_leakage_fraction(grid_pulse, out, 0.0, 40 * NS))
    assert isinstance(rep, EchoReport)
