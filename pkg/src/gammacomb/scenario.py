"""Scenario files: parsing, validation, defaults and execution.

Scenario files are TOML with unit-suffixed keys (``_ns``, ``_mm_s``,
``_mhz``).  Parsing first produces a *resolved* dictionary in which every
default has been filled in; the run itself is built only from that
dictionary, so a manifest holding it reproduces the run bit for bit.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import __version__
from .analytics import check_conditions, gfc_first_echo_efficiency, sgem_efficiency_bound
from .comb import C_LIGHT, CombConfig, DerivedComb, NuclearTransition, derive_comb, preset
from .errors import ValidationError
from .fd_solver import exact_transfer
from .metrics import EchoReport, echo_report
from .pulse import Peak, PulseSpec, Waveform, pulse_on_grid
from .schedule import (ConstantScale, Segment, Sinusoid, VelocitySchedule, make_boost, make_gfc,
                       make_hold, make_sgem, make_sine, predict_echo_times, sgem_window_ok)
from .td_solver import SolverParams, SimResult, convergence_probe, default_sublayers, simulate

NS = 1e-9
BUNDLED = Path(__file__).with_name("scenarios")
PROTOCOLS = ("gfc", "sgem", "hold", "boost", "sine", "custom")


@dataclass
class Scenario:
    comb: CombConfig
    pulse: PulseSpec
    schedule: VelocitySchedule
    solver: SolverParams
    t_end: float
    mode: str
    t_ec: float
    outputs: dict
    resolved: dict
    name: str = "scenario"

    @property
    def t_in(self) -> float:
        return self.pulse.t_in

    @property
    def derived(self) -> DerivedComb:
        return derive_comb(self.comb)

    def input_waveform(self) -> Waveform:
        start = self.resolved["solver"].get("t_start_ns")
        return pulse_on_grid(self.pulse, self.solver.dt, self.t_end,
                             t_start=None if start is None else start * NS)


# ------------------------------------------------------------------ helpers

def _get(d: dict, key: str, path: str, kind=float, default: Any = ..., positive=False,
         nonneg=False):
    if key not in d:
        if default is ...:
            raise ValidationError("missing required key", f"{path}.{key}")
        return default
    v = d[key]
    try:
        if kind is int:
            if isinstance(v, bool) or int(v) != v:
                raise TypeError
            v = int(v)
        elif kind is float:
            if isinstance(v, bool):
                raise TypeError
            v = float(v)
        elif kind is bool:
            if not isinstance(v, bool):
                raise TypeError
        elif kind is str:
            if not isinstance(v, str):
                raise TypeError
    except (TypeError, ValueError):
        raise ValidationError(f"expected {kind.__name__}, got {v!r}", f"{path}.{key}") from None
    if kind in (int, float):
        if not math.isfinite(v):
            raise ValidationError("must be finite", f"{path}.{key}")
        if positive and not v > 0:
            raise ValidationError(f"must be positive, got {v}", f"{path}.{key}")
        if nonneg and not v >= 0:
            raise ValidationError(f"must be >= 0, got {v}", f"{path}.{key}")
    return v


def _table(d: dict, key: str, path: str = "", required=True) -> dict:
    full = f"{path}.{key}" if path else key
    if key not in d:
        if required:
            raise ValidationError("missing required table", full)
        return {}
    if not isinstance(d[key], dict):
        raise ValidationError("expected a table", full)
    return d[key]


def _window(v, path: str) -> tuple[float, float]:
    if not (isinstance(v, (list, tuple)) and len(v) == 2):
        raise ValidationError("expected [start, end]", path)
    try:
        a, b = float(v[0]), float(v[1])
    except (TypeError, ValueError):
        raise ValidationError("expected two numbers", path) from None
    if not b > a:
        raise ValidationError("window end must follow its start", path)
    return a, b


# ---------------------------------------------------------------- resolving

def resolve(raw: dict) -> dict:
    """Fill in every default and validate; returns a new plain dictionary."""
    raw = copy.deepcopy(raw)
    out: dict[str, Any] = {"name": str(raw.get("name", "scenario"))}

    tr = _table(raw, "transition")
    if "preset" in tr:
        try:
            p = preset(_get(tr, "preset", "transition", str))
        except KeyError as exc:
            raise ValidationError(str(exc.args[0]), "transition.preset") from None
        base = {"name": p.name, "energy_kev": p.energy_kev,
                "gamma_over_2pi_mhz": p.gamma_over_2pi_mhz}
        if p.excited_lifetime is not None:
            base["excited_lifetime_ns"] = p.excited_lifetime / NS
        base.update({k: v for k, v in tr.items() if k != "preset"})
        tr = base
    out["transition"] = {
        "name": _get(tr, "name", "transition", str),
        "energy_kev": _get(tr, "energy_kev", "transition", positive=True),
        "gamma_over_2pi_mhz": _get(tr, "gamma_over_2pi_mhz", "transition", positive=True),
    }
    if "excited_lifetime_ns" in tr:
        out["transition"]["excited_lifetime_ns"] = _get(tr, "excited_lifetime_ns", "transition",
                                                        positive=True)

    pulse = _table(raw, "pulse")
    shape = _get(pulse, "shape", "pulse", str, "gaussian")
    if shape not in ("gaussian", "exponential"):
        raise ValidationError(f"unknown shape {shape!r}", "pulse.shape")
    peaks_raw = pulse.get("peaks")
    if not isinstance(peaks_raw, list) or not peaks_raw:
        raise ValidationError("need a non-empty list of peaks", "pulse.peaks")
    peaks = []
    for i, pk in enumerate(peaks_raw):
        path = f"pulse.peaks[{i}]"
        if not isinstance(pk, dict):
            raise ValidationError("expected a table", path)
        peaks.append({
            "amplitude_re": _get(pk, "amplitude_re", path, default=1.0),
            "amplitude_im": _get(pk, "amplitude_im", path, default=0.0),
            "center_ns": _get(pk, "center_ns", path, default=0.0),
            "fwhm_ns": _get(pk, "fwhm_ns", path, positive=True),
        })
    out["pulse"] = {"shape": shape, "peaks": peaks}
    if "decay_ns" in pulse:
        out["pulse"]["decay_ns"] = _get(pulse, "decay_ns", "pulse", positive=True)
    fwhm_min = min(p["fwhm_ns"] for p in peaks)
    fwhm_first = min(peaks, key=lambda p: p["center_ns"])["fwhm_ns"]
    t_in_ns = min(p["center_ns"] for p in peaks)
    t_first_ns = min(p["center_ns"] - 5 * p["fwhm_ns"] for p in peaks)

    comb = _table(raw, "comb")
    m = _get(comb, "m_targets", "comb", int, positive=True)
    if m % 2 == 0:
        raise ValidationError(f"must be odd, got {m}", "comb.m_targets")
    energy = out["transition"]["energy_kev"]
    given = [k for k in ("delta_v_mm_s", "t0_ns", "fixed_bandwidth") if k in comb]
    if len(given) != 1:
        raise ValidationError("give exactly one of delta_v_mm_s, t0_ns, fixed_bandwidth", "comb")
    if "delta_v_mm_s" in comb:
        dv = _get(comb, "delta_v_mm_s", "comb", nonneg=True)
    else:
        if "t0_ns" in comb:
            t0 = _get(comb, "t0_ns", "comb", positive=True)
        else:
            if _get(comb, "fixed_bandwidth", "comb", bool) is not True:
                raise ValidationError("only `true` is meaningful", "comb.fixed_bandwidth")
            t0 = m * fwhm_first  # M * beta_omega0 = 2 pi / dt
        dv = delta_v_for_t0(t0, energy)
    out["comb"] = {
        "m_targets": m,
        "zeta0": _get(comb, "zeta0", "comb", nonneg=True),
        "delta_v_mm_s": dv,
    }
    for key in ("target_thickness_nm",):
        if key in comb:
            out["comb"][key] = _get(comb, key, "comb", positive=True)

    out["schedule"] = _resolve_schedule(_table(raw, "schedule", required=False), t_in_ns)

    cfg, spec, sched = _build_physics(out)
    d = derive_comb(cfg)
    T0_ns = d.T0 / NS

    outputs = _table(raw, "outputs", required=False)
    proto = out["schedule"]["protocol"]
    mode = outputs.get("mode")
    if mode is None:
        reversed_hold = proto == "hold" and out["schedule"].get("resume_scale", 1.0) < 0
        mode = "sgem" if proto == "sgem" or reversed_hold else "gfc"
    if mode not in ("gfc", "sgem"):
        raise ValidationError(f"unknown mode {mode!r}", "outputs.mode")
    if "t_ec_ns" in outputs:
        t_ec_ns = _get(outputs, "t_ec_ns", "outputs", positive=True)
    elif proto == "sgem":
        t_ec_ns = 2 * out["schedule"]["t_sw_ns"]
    elif d.degenerate:
        raise ValidationError("static comb has no echo; set outputs.t_ec_ns", "outputs.t_ec_ns")
    else:
        horizon = max(10 * d.T0, 2e-6)
        times = predict_echo_times(sched, d.beta_omega0, t_in_ns * NS, horizon)
        if proto in ("hold", "boost", "sine"):
            end = _modulation_end_ns(out["schedule"]) * NS
            times = [t for t in times if t > end]
        if not times:
            raise ValidationError("no echo predicted; set outputs.t_ec_ns", "outputs.t_ec_ns")
        t_ec_ns = times[0] / NS - t_in_ns

    solver = _table(raw, "solver", required=False)
    smax = _max_scale(out["schedule"])
    if "dt_ns" in solver:
        dt_ns = _get(solver, "dt_ns", "solver", positive=True)
    else:
        per = _get(solver, "samples_per_fwhm", "solver", default=50.0, positive=True)
        dt_ns = fwhm_min / per
        if math.isfinite(T0_ns) and m > 1 and smax > 0:
            dt_ns = min(dt_ns, T0_ns / (10 * m * smax))
    t_end_default = t_in_ns + 1.6 * t_ec_ns
    if proto == "gfc" and math.isfinite(T0_ns):
        t_end_default = max(t_end_default, t_in_ns + min(4.5 * T0_ns, 1000.0))
    out["solver"] = {
        "dt_ns": dt_ns,
        "sublayers": _get(solver, "sublayers", "solver", int,
                          default=default_sublayers(out["comb"]["zeta0"]), positive=True),
        "t_start_ns": _get(solver, "t_start_ns", "solver", default=min(
            t_first_ns, t_in_ns - 0.5 * t_ec_ns)),
        "t_end_ns": _get(solver, "t_end_ns", "solver", default=t_end_default),
        "record_polarization": _get(solver, "record_polarization", "solver", bool, default=False),
    }
    if out["solver"]["t_start_ns"] > t_in_ns - 0.5 * t_ec_ns:
        raise ValidationError("grid starts after the input window opens", "solver.t_start_ns")
    if out["solver"]["t_end_ns"] < t_in_ns + 1.5 * t_ec_ns:
        raise ValidationError("grid ends before the retrieval window closes", "solver.t_end_ns")
    out["outputs"] = {
        "mode": mode,
        "t_ec_ns": t_ec_ns,
        "time_series": _get(outputs, "time_series", "outputs", bool, default=True),
        "report": _get(outputs, "report", "outputs", bool, default=True),
        "transfer_function": _get(outputs, "transfer_function", "outputs", bool, default=False),
        "certify": _get(outputs, "certify", "outputs", bool, default=True),
    }
    return out


def delta_v_for_t0(t0_ns: float, energy_kev: float) -> float:
    """Velocity spacing in mm/s that gives rephasing period ``t0_ns``."""
    probe = NuclearTransition("probe", energy_kev, 1.0)
    beta_omega0 = 2 * math.pi / (t0_ns * NS)
    return beta_omega0 * C_LIGHT / probe.omega0 * 1e3


def _modulation_end_ns(s: dict) -> float:
    p = s["protocol"]
    if p == "hold":
        return s["hold_start_ns"] + s["hold_ns"]
    if p == "boost":
        return s["boost_window_ns"][1]
    if p == "sine":
        return s["sine"]["window_ns"][1]
    return -math.inf


def _max_scale(s: dict) -> float:
    p = s["protocol"]
    if p == "sgem":
        return 1.0
    if p == "hold":
        return max(1.0, abs(s.get("resume_scale", 1.0)))
    if p == "boost":
        return max(1.0, abs(s["boost_scale"]))
    if p == "sine":
        return 1.0 + abs(s["sine"]["amplitude"])
    if p == "custom":
        vals = [1.0]
        for g in s["custom"]["segments"]:
            if g["law"] == "constant":
                vals.append(abs(g["scale"]))
            else:
                vals.append(abs(g["base"]) + abs(g["amplitude"]))
        return max(vals)
    return 1.0


def _resolve_schedule(s: dict, t_in_ns: float) -> dict:
    proto = _get(s, "protocol", "schedule", str, "gfc")
    if proto not in PROTOCOLS:
        raise ValidationError(f"unknown protocol {proto!r}; choose from {PROTOCOLS}",
                              "schedule.protocol")
    out: dict[str, Any] = {"protocol": proto}
    if proto == "sgem":
        out["t_sw_ns"] = _get(s, "t_sw_ns", "schedule", positive=True)
    elif proto == "hold":
        out["hold_start_ns"] = _get(s, "hold_start_ns", "schedule")
        out["hold_ns"] = _get(s, "hold_ns", "schedule", positive=True)
        out["resume_scale"] = _get(s, "resume_scale", "schedule", default=1.0)
    elif proto == "boost":
        a, b = _window(s.get("boost_window_ns"), "schedule.boost_window_ns")
        out["boost_window_ns"] = [a, b]
        if "boost_scale" not in s and "boost_dphi_over_2pi" not in s:
            raise ValidationError("give boost_scale or boost_dphi_over_2pi", "schedule")
        # a resolved file carries both; the scale then wins
        if "boost_dphi_over_2pi" in s:
            out["boost_dphi_over_2pi"] = _get(s, "boost_dphi_over_2pi", "schedule")
        if "boost_scale" in s:
            out["boost_scale"] = _get(s, "boost_scale", "schedule")
    elif proto == "sine":
        sn = _table(s, "sine", "schedule")
        a, b = _window(sn.get("window_ns"), "schedule.sine.window_ns")
        out["sine"] = {
            "window_ns": [a, b],
            "freq_mhz": _get(sn, "freq_mhz", "schedule.sine", positive=True),
            "phase_rad": _get(sn, "phase_rad", "schedule.sine", default=0.0),
        }
        if "amplitude" not in sn and "dphi_over_2pi" not in sn:
            raise ValidationError("give amplitude or dphi_over_2pi", "schedule.sine")
        if "dphi_over_2pi" in sn:
            out["sine"]["dphi_over_2pi"] = _get(sn, "dphi_over_2pi", "schedule.sine")
        if "amplitude" in sn:
            out["sine"]["amplitude"] = _get(sn, "amplitude", "schedule.sine")
    elif proto == "custom":
        cu = _table(s, "custom", "schedule")
        segs = cu.get("segments")
        if not isinstance(segs, list):
            raise ValidationError("expected a list of segments", "schedule.custom.segments")
        res = []
        for i, g in enumerate(segs):
            path = f"schedule.custom.segments[{i}]"
            law = _get(g, "law", path, str, "constant")
            seg: dict[str, Any] = {"t_begin_ns": _get(g, "t_begin_ns", path), "law": law}
            end = g.get("t_end_ns", "inf")
            seg["t_end_ns"] = "inf" if end in ("inf", math.inf) else _get(g, "t_end_ns", path)
            if law == "constant":
                seg["scale"] = _get(g, "scale", path)
            elif law == "sinusoid":
                seg["base"] = _get(g, "base", path, default=1.0)
                seg["amplitude"] = _get(g, "amplitude", path)
                seg["freq_mhz"] = _get(g, "freq_mhz", path, positive=True)
                seg["phase_rad"] = _get(g, "phase_rad", path, default=0.0)
            else:
                raise ValidationError(f"unknown law {law!r}", f"{path}.law")
            res.append(seg)
        out["custom"] = {"segments": res}
    return out


def _build_physics(r: dict) -> tuple[CombConfig, PulseSpec, VelocitySchedule]:
    t = r["transition"]
    life = t.get("excited_lifetime_ns")
    tr = NuclearTransition.from_mhz(t["name"], t["energy_kev"], t["gamma_over_2pi_mhz"],
                                    life * NS if life is not None else None)
    c = r["comb"]
    thick = c.get("target_thickness_nm")
    try:
        cfg = CombConfig(tr, c["m_targets"], c["zeta0"], c["delta_v_mm_s"] * 1e-3,
                         target_thickness=thick * 1e-9 if thick is not None else None)
    except ValueError as exc:
        raise ValidationError(str(exc), "comb") from None
    p = r["pulse"]
    peaks = tuple(Peak(complex(k["amplitude_re"], k["amplitude_im"]), k["center_ns"] * NS,
                       k["fwhm_ns"] * NS) for k in p["peaks"])
    decay = p.get("decay_ns")
    try:
        spec = PulseSpec(peaks, p["shape"], decay * NS if decay is not None else None)
    except ValueError as exc:
        raise ValidationError(str(exc), "pulse") from None
    return cfg, spec, _build_schedule(r["schedule"], spec.t_in, cfg.beta_omega0)


def _build_schedule(s: dict, t_in: float, beta_omega0: float) -> VelocitySchedule:
    proto = s["protocol"]
    try:
        if proto == "gfc":
            return make_gfc()
        if proto == "sgem":
            return make_sgem(s["t_sw_ns"] * NS, t_in)
        if proto == "hold":
            return make_hold(s["hold_start_ns"] * NS, s["hold_ns"] * NS, s["resume_scale"])
        if proto == "boost":
            a, b = (x * NS for x in s["boost_window_ns"])
            if "boost_scale" not in s:
                if beta_omega0 == 0:
                    raise ValidationError("needs a non-zero tooth spacing", "schedule")
                s["boost_scale"] = 1.0 + 2 * math.pi * s["boost_dphi_over_2pi"] / (beta_omega0 * (b - a))
            return make_boost(a, b, s["boost_scale"])
        if proto == "sine":
            sn = s["sine"]
            a, b = (x * NS for x in sn["window_ns"])
            w = 2 * math.pi * sn["freq_mhz"] * 1e6
            if "amplitude" not in sn:
                sn["amplitude"] = sine_amplitude_for_phase(
                    2 * math.pi * sn["dphi_over_2pi"], a, b, w, sn["phase_rad"], beta_omega0)
            return make_sine(a, b, sn["amplitude"], w, sn["phase_rad"])
        segs = []
        for g in s["custom"]["segments"]:
            end = math.inf if g["t_end_ns"] == "inf" else g["t_end_ns"] * NS
            if g["law"] == "constant":
                law = ConstantScale(g["scale"])
            else:
                law = Sinusoid(g["base"], g["amplitude"], 2 * math.pi * g["freq_mhz"] * 1e6,
                               g["phase_rad"])
            segs.append(Segment(g["t_begin_ns"] * NS, end, law))
        return VelocitySchedule(tuple(segs))
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(str(exc), "schedule") from None


def sine_amplitude_for_phase(dphi: float, t_i: float, t_f: float, angular_freq: float,
                             phase: float, beta_omega0: float) -> float:
    """Sinusoid amplitude whose window adds ``dphi`` between adjacent targets."""
    if beta_omega0 == 0:
        raise ValidationError("needs a non-zero tooth spacing", "schedule.sine")
    unit = Sinusoid(1.0, 1.0, angular_freq, phase).excess_integral(t_f - t_i)
    if abs(unit) < 1e-30:
        raise ValidationError("sinusoid window integrates to zero; cannot set dphi",
                              "schedule.sine")
    return float(dphi / (beta_omega0 * unit))


def from_resolved(r: dict) -> Scenario:
    r = copy.deepcopy(r)
    cfg, spec, sched = _build_physics(r)
    sv = r["solver"]
    params = SolverParams(dt=sv["dt_ns"] * NS, sublayers=sv["sublayers"],
                          record_polarization=sv["record_polarization"],
                          t_end=sv["t_end_ns"] * NS)
    return Scenario(cfg, spec, sched, params, sv["t_end_ns"] * NS, r["outputs"]["mode"],
                    r["outputs"]["t_ec_ns"] * NS, r["outputs"], r, r.get("name", "scenario"))


def bundled_or_path(name) -> Path:
    """``name`` as a path, falling back to the bundled scenario corpus."""
    path = Path(name)
    if path.exists():
        return path
    for cand in (BUNDLED / path.name, BUNDLED / f"{path.name}.toml"):
        if cand.exists():
            return cand
    raise FileNotFoundError(f"no scenario file {name!r} (bundled: {', '.join(bundled_names())})")


def bundled_names() -> list[str]:
    return sorted(p.stem for p in BUNDLED.glob("*.toml"))


def load_raw(path) -> dict:
    path = bundled_or_path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        data = json.loads(text)
        # a run manifest carries the resolved scenario
        return data.get("scenario", data)
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"not valid TOML: {exc}", str(path)) from None


def load_scenario(path) -> Scenario:
    return from_resolved(resolve(load_raw(path)))


# ---------------------------------------------------------------- execution

@dataclass
class RunOutcome:
    scenario: Scenario
    input: Waveform
    result: SimResult
    report: EchoReport


def run(scenario: Scenario) -> RunOutcome:
    wave = scenario.input_waveform()
    result = simulate(scenario.comb, scenario.schedule, wave, scenario.solver)
    d = scenario.derived
    rep = echo_report(wave, result.output, scenario.t_in, scenario.t_ec, scenario.mode,
                      T0=d.T0, delta_t=scenario.pulse.max_fwhm,
                      t_last=max(p.center for p in scenario.pulse.peaks))
    return RunOutcome(scenario, wave, result, rep)


def derived_dict(sc: Scenario) -> dict:
    d = sc.derived
    out = {
        "omega0_rad_s": sc.comb.transition.omega0,
        "gamma_rad_s": sc.comb.transition.gamma,
        "beta_omega0_rad_s": d.beta_omega0,
        "T0_ns": d.T0 / NS if math.isfinite(d.T0) else None,
        "finesse": d.finesse,
        "zeta_eff0": d.zeta_eff0,
        "total_zeta": d.total_zeta,
        "comb_bandwidth_rad_s": d.comb_bandwidth,
        "coupling_rad_s": d.coupling,
    }
    if not d.degenerate:
        out["conditions"] = check_conditions(sc.comb.m_targets, sc.pulse.max_fwhm,
                                             sc.comb.transition.gamma, d.finesse).as_dict()
        out["eta_gfc_two_term"] = gfc_first_echo_efficiency(d.zeta_eff0, d.finesse)
        if sc.resolved["schedule"]["protocol"] == "sgem":
            t_sw = sc.resolved["schedule"]["t_sw_ns"] * NS
            out["eta_sgem_bound"] = sgem_efficiency_bound(d.zeta_eff0, sc.comb.transition.gamma,
                                                          t_sw)
            out["sgem_window_ok"] = sgem_window_ok(t_sw, sc.pulse.max_fwhm, d.T0, warn=False)
        out["predicted_echo_ns"] = [
            t / NS for t in predict_echo_times(sc.schedule, d.beta_omega0, sc.t_in,
                                               sc.t_end - sc.t_in)]
    return out


def _fmt(x: float) -> str:
    return repr(float(x))


def write_time_series(path: Path, wave: Waveform, out: Waveform) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_ns", "in_re", "in_im", "in_intensity", "out_re", "out_im", "out_intensity"])
        for t, a, b in zip(wave.times, wave.samples, out.samples):
            w.writerow([_fmt(t / NS), _fmt(a.real), _fmt(a.imag), _fmt(abs(a) ** 2),
                        _fmt(b.real), _fmt(b.imag), _fmt(abs(b) ** 2)])


def write_polarization(path: Path, sc: Scenario, wave: Waveform, pol: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["t_ns"]
        for m in sc.comb.indices:
            header += [f"p{m}_re", f"p{m}_im"]
        w.writerow(header)
        for k, t in enumerate(wave.times):
            row = [_fmt(t / NS)]
            for p in pol[:, k]:
                row += [_fmt(p.real), _fmt(p.imag)]
            w.writerow(row)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_scenario(path, outdir, certify: Optional[bool] = None) -> dict:
    """Run a scenario file and write its artifacts; returns the manifest."""
    sc = load_scenario(path)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    outcome = run(sc)
    stem = sc.name
    artifacts = {}
    if sc.outputs["time_series"]:
        p = outdir / f"{stem}_timeseries.csv"
        write_time_series(p, outcome.input, outcome.result.output)
        artifacts["time_series"] = p
    if outcome.result.polarization is not None:
        p = outdir / f"{stem}_polarization.csv"
        write_polarization(p, sc, outcome.input, outcome.result.polarization)
        artifacts["polarization"] = p
    if sc.outputs["report"]:
        p = outdir / f"{stem}_report.json"
        p.write_text(outcome.report.to_json() + "\n", encoding="utf-8")
        artifacts["report"] = p
    if sc.outputs["transfer_function"]:
        d = sc.derived
        span = (sc.comb.m_targets / 2 + 2) * max(d.beta_omega0, 10 * sc.comb.transition.gamma)
        p = outdir / f"{stem}_transfer.csv"
        exact_transfer(sc.comb, np.linspace(-span, span, 4001)).to_csv(p)
        artifacts["transfer_function"] = p
    do_cert = sc.outputs["certify"] if certify is None else certify
    cert = None
    if do_cert:
        cert = convergence_probe(sc.comb, sc.schedule, sc.pulse, sc.solver,
                                 dt=sc.solver.dt, t_end=sc.t_end)
    manifest = {
        "package_version": __version__,
        "scenario": sc.resolved,
        "derived": derived_dict(sc),
        "certification": {"convergence_probe": cert, "threshold": 1e-3,
                          "certified": None if cert is None else cert < 1e-3},
        "diagnostics": outcome.result.diagnostics,
        "efficiency": outcome.report.efficiency,
        "fidelity": outcome.report.fidelity,
        "artifacts": {k: {"path": v.name, "sha256": _sha256(v)} for k, v in artifacts.items()},
    }
    (outdir / f"{stem}_manifest.json").write_text(json.dumps(manifest, indent=2) + "\n",
                                                  encoding="utf-8")
    return manifest
