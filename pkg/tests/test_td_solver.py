import math
import time

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from gammacomb import (CombConfig, PulseSpec, SolverParams, Waveform, convergence_probe,
                       make_gfc, make_hold, make_sgem, make_sine, propagate_static,
                       pulse_on_grid, simulate)
from gammacomb.errors import DivergenceError, ResolutionError
from gammacomb.td_solver import default_sublayers, resolution_limits

from conftest import NS, rel_l2, small_comb


def test_zero_thickness_is_bit_exact(fe57, gauss7):
    cfg = CombConfig(fe57, 5, 0.0, 3e-3)
    out = simulate(cfg, make_sgem(20 * NS), gauss7).output
    assert np.array_equal(out.samples, gauss7.samples)
    assert out.same_grid(gauss7)


def test_fig2a_matches_frequency_domain(fig2a_config, gauss7):
    td = simulate(fig2a_config, make_gfc(), gauss7).output
    fd = propagate_static(fig2a_config, gauss7)
    assert rel_l2(td.samples, fd.samples) < 1e-3


@pytest.mark.parametrize("m,zeta0,t0_ns", [(1, 3.0, 40.0), (3, 20.0, 30.0), (9, 2.0, 60.0)])
def test_static_cross_solver(fe57, m, zeta0, t0_ns):
    cfg = small_comb(fe57, m, zeta0, t0_ns)
    lim = resolution_limits(cfg, make_gfc(), np.zeros(2), 7 * NS)
    w = pulse_on_grid(PulseSpec.gaussian(7 * NS), min(lim.values()), 200 * NS)
    td = simulate(cfg, make_gfc(), w).output
    fd = propagate_static(cfg, w)
    assert rel_l2(td.samples, fd.samples) < 1e-3


def test_second_order_convergence(fig2a_config):
    spec = PulseSpec.gaussian(7 * NS)
    e1 = convergence_probe(fig2a_config, make_gfc(), spec, dt=7 * NS / 50, t_end=80 * NS)
    e2 = convergence_probe(fig2a_config, make_gfc(), spec, dt=7 * NS / 100, t_end=80 * NS,
                           params=SolverParams(sublayers=2 * default_sublayers(41.3)))
    assert e1 < 1e-3
    assert 3.0 < e1 / e2 < 5.0


def test_probe_accepts_waveform(fig2a_config, gauss7):
    assert convergence_probe(fig2a_config, make_gfc(), gauss7) < 1e-3
    with pytest.raises(ValueError):
        convergence_probe(fig2a_config, make_gfc(), PulseSpec.gaussian(7 * NS))


def test_resolution_guards(fig2a_config):
    coarse = pulse_on_grid(PulseSpec.gaussian(7 * NS), 7 * NS / 30, 60 * NS)
    with pytest.raises(ResolutionError, match="pulse"):
        simulate(fig2a_config, make_gfc(), coarse)
    # fine enough for the pulse, too coarse for 41 comb teeth
    wide = CombConfig(fig2a_config.transition, 41, 2.0, 3.075e-3)
    w = pulse_on_grid(PulseSpec.gaussian(20 * NS), 20 * NS / 50, 60 * NS)
    with pytest.raises(ResolutionError, match="comb"):
        simulate(wide, make_gfc(), w)
    with pytest.raises(ResolutionError):
        simulate(fig2a_config, make_gfc(), coarse, SolverParams(dt=1e-12))
    out = simulate(fig2a_config, make_gfc(), coarse, SolverParams(check_resolution=False))
    assert len(out.output) == len(coarse)


def test_divergence_reports_step(fig2a_config, gauss7):
    bad = gauss7.samples.copy()
    bad[100] = np.nan
    with pytest.raises(DivergenceError) as exc:
        simulate(fig2a_config, make_gfc(), gauss7.with_samples(bad),
                 SolverParams(check_resolution=False))
    assert exc.value.step == 100


def test_thick_sublayer_warns(fig2a_config, gauss7):
    with pytest.warns(UserWarning, match="sublayer"):
        simulate(fig2a_config, make_gfc(), gauss7, SolverParams(sublayers=10))


def test_polarization_record(fig2a_config, gauss7):
    res = simulate(fig2a_config, make_gfc(), gauss7, SolverParams(record_polarization=True))
    assert res.polarization.shape == (5, len(gauss7))
    assert np.all(res.polarization[:, 0] == 0)
    assert res.diagnostics["layers"] == 5 * default_sublayers(41.3)
    assert res.diagnostics["output_energy"] <= res.diagnostics["input_energy"]


def test_default_sublayers():
    assert default_sublayers(1.0) == 8
    assert default_sublayers(41.3) == 166


def test_static_order_invariance(fig2a_config, gauss7):
    a = simulate(fig2a_config, make_gfc(), gauss7).output.samples
    b = simulate(fig2a_config, make_gfc(), gauss7, order=[2, -1, 0, -2, 1]).output.samples
    assert rel_l2(b, a) < 1e-6
    with pytest.raises(ValueError):
        simulate(fig2a_config, make_gfc(), gauss7, order=[0, 0, 1, 2, -2])


def _thin_targets_ivp(fe57, order, zeta0, sched, bw, w):
    """One sublayer per target, integrated with scipy's adaptive RK."""
    from gammacomb import scale_at
    g = fe57.gamma
    kappa = 0.5 * zeta0 * g
    times = w.times
    n = len(order)

    def rhs(t, y):
        q = y[:n] + 1j * y[n:]
        e = np.interp(t, times, w.samples.real) + 1j * np.interp(t, times, w.samples.imag)
        s = scale_at(sched, t)
        dq = np.empty(n, dtype=complex)
        for j, m in enumerate(order):
            # e_out = e + q, driven by the mean field (e + e_out)/2
            dq[j] = (-g - 1j * m * bw * s - kappa / 2) * q[j] - kappa * e
            e = e + q[j]
        return np.concatenate([dq.real, dq.imag])

    sol = solve_ivp(rhs, (times[0], times[-1]), np.zeros(2 * n), t_eval=times, rtol=1e-10,
                    atol=1e-13, max_step=w.dt)
    q = sol.y[:n] + 1j * sol.y[n:]
    return w.samples + q.sum(axis=0)


@pytest.mark.filterwarnings("ignore:sublayer thickness")
def test_time_dependent_order_effect_is_physical(fe57):
    # an independent integrator sees the same order dependence as the kernel
    bw = 2 * math.pi / (40 * NS)
    sched = make_sgem(15 * NS)
    w = pulse_on_grid(PulseSpec.gaussian(7 * NS), 0.07 * NS, 80 * NS)
    cfg = CombConfig(fe57, 3, 4.0, 1.0).with_tooth_spacing(bw)
    p = SolverParams(sublayers=1)
    outs = {}
    for order in ((-1, 0, 1), (1, -1, 0)):
        ref = _thin_targets_ivp(fe57, order, 4.0, sched, bw, w)
        got = simulate(cfg, sched, w, p, order=order).output.samples
        assert rel_l2(got, ref) < 1e-5
        outs[order] = ref
    assert rel_l2(outs[(-1, 0, 1)], outs[(1, -1, 0)]) > 1e-2


@pytest.mark.xfail(strict=True, reason="thin-layer filters under a time-varying phase do not "
                                       "commute; the permuted output differs by ~10%")
@pytest.mark.parametrize("sched", [make_sgem(15 * NS), make_hold(20 * NS, 30 * NS, -1.0),
                                   make_sine(10 * NS, 40 * NS, 2.0, 2 * math.pi / (20 * NS))])
def test_time_dependent_order_invariance(fe57, sched):
    cfg = small_comb(fe57, 5, 8.0, 40.0)
    w = pulse_on_grid(PulseSpec.gaussian(7 * NS), 0.07 * NS, 150 * NS)
    a = simulate(cfg, sched, w).output.samples
    b = simulate(cfg, sched, w, order=[1, -2, -1, 2, 0]).output.samples
    assert rel_l2(b, a) < 1e-6


def test_runtime_fig2a(fig2a_config, gauss7):
    simulate(fig2a_config, make_gfc(), gauss7)
    t0 = time.perf_counter()
    simulate(fig2a_config, make_gfc(), gauss7)
    assert time.perf_counter() - t0 < 10.0


def test_deterministic(fig2a_config, gauss7):
    a = simulate(fig2a_config, make_sgem(10 * NS), gauss7).output.samples
    b = simulate(fig2a_config, make_sgem(10 * NS), gauss7).output.samples
    assert np.array_equal(a, b)


def test_rejects_mismatched_grid(fig2a_config, gauss7):
    with pytest.raises(ResolutionError):
        simulate(fig2a_config, make_gfc(), gauss7, SolverParams(dt=2 * gauss7.dt))
    assert isinstance(gauss7, Waveform)
