"""Command-line entry point: simulate, sweep, predict, compare, presets."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .analytics import (check_conditions, equal_split_zeta, gfc_first_echo_efficiency,
                        optimal_zeta0, sgem_efficiency_bound)
from .comb import C_LIGHT, PRESETS, CombConfig, NuclearTransition, derive_comb, preset
from .errors import BudgetError, CombError, DivergenceError, UnsupportedComparisonError, ValidationError
from .fd_solver import propagate_static
from .schedule import make_gfc, make_sgem, predict_echo_times, sgem_window_ok
from .scenario import NS, load_scenario, run_scenario
from .sweep import load_sweep, run_sweep, write_rows
from .td_solver import simulate

EXIT_OK, EXIT_VALIDATION, EXIT_DIVERGENCE, EXIT_BUDGET = 0, 2, 3, 4


def compare_solvers(scenario) -> float:
    """Relative L2 difference between the time- and frequency-domain outputs."""
    if not scenario.schedule.is_constant:
        raise UnsupportedComparisonError("solver comparison needs a constant schedule")
    wave = scenario.input_waveform()
    td = simulate(scenario.comb, scenario.schedule, wave, scenario.solver).output
    fd = propagate_static(scenario.comb, wave)
    norm = np.linalg.norm(fd.samples)
    if norm == 0:
        return 0.0
    return float(np.linalg.norm(td.samples - fd.samples) / norm)


def _cmd_simulate(args) -> int:
    manifest = run_scenario(args.scenario, args.outdir,
                            certify=False if args.no_certify else None)
    summary = {
        "efficiency": manifest["efficiency"],
        "fidelity": manifest["fidelity"],
        "convergence_probe": manifest["certification"]["convergence_probe"],
        "outdir": str(args.outdir),
    }
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    spec = load_sweep(args.sweep)
    rows = run_sweep(spec, workers=args.workers, max_points=args.max_points)
    out = Path(args.output or f"{spec.name}.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_rows(rows, out)
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    sc = load_scenario(args.scenario)
    err = compare_solvers(sc)
    print(json.dumps({"scenario": sc.name, "relative_l2": err, "threshold": 1e-3,
                      "pass": err < 1e-3}, indent=2))
    return EXIT_OK


def _cmd_presets(args) -> int:
    rows = []
    for p in PRESETS.values():
        rows.append({
            "name": p.name,
            "energy_kev": p.energy_kev,
            "gamma_over_2pi_mhz": p.gamma_over_2pi_mhz,
            "coherence_time_s": 1 / p.gamma,
            "excited_lifetime_s": p.excited_lifetime,
        })
    print(json.dumps(rows, indent=2))
    return EXIT_OK


def predict(args) -> dict:
    """Analytic quantities from command-line parameters."""
    tr = preset(args.preset)
    if args.energy_kev is not None or args.gamma_mhz is not None:
        tr = NuclearTransition.from_mhz(
            tr.name, args.energy_kev or tr.energy_kev,
            args.gamma_mhz if args.gamma_mhz is not None else tr.gamma_over_2pi_mhz)
    out: dict = {"transition": tr.name, "energy_kev": tr.energy_kev,
                 "gamma_over_2pi_mhz": tr.gamma_over_2pi_mhz}
    finesse = args.finesse
    zeta_eff = args.zeta_eff
    T0 = None
    spacing = None
    if args.delta_v is not None:
        spacing = args.delta_v * 1e-3 / C_LIGHT * tr.omega0
    elif args.t0 is not None:
        spacing = 2 * math.pi / (args.t0 * NS)
    elif args.fixed_bandwidth:
        if args.m is None or args.delta_t is None:
            raise ValidationError("--fixed-bandwidth needs --m and --delta-t", "predict")
        spacing = 2 * math.pi / (args.m * args.delta_t * NS)
    if spacing is not None:
        m = args.m or 1
        cfg = CombConfig(tr, m if m % 2 else m + 1, args.zeta0 or 0.0, 1.0).with_tooth_spacing(spacing)
        d = derive_comb(cfg)
        finesse = d.finesse
        T0 = d.T0
        out.update({"beta_omega0_rad_s": d.beta_omega0, "T0_ns": d.T0 / NS, "finesse": d.finesse,
                    "delta_v_mm_s": cfg.delta_v * 1e3})
        if args.zeta0 is not None:
            zeta_eff = d.zeta_eff0
            out["zeta_eff0"] = zeta_eff
            if args.m:
                out["total_zeta"] = args.m * args.zeta0
    elif finesse is not None:
        T0 = math.pi / (tr.gamma * finesse)
        out["T0_ns"] = T0 / NS
        if args.zeta0 is not None and zeta_eff is None:
            zeta_eff = args.zeta0 / finesse
            out["zeta_eff0"] = zeta_eff
    if finesse is not None:
        out["optimal_zeta0"] = optimal_zeta0(finesse)
        if args.equal_split:
            out["equal_split_zeta_eff0"] = equal_split_zeta(finesse)
        if zeta_eff is not None:
            out["eta_gfc_first_echo"] = gfc_first_echo_efficiency(zeta_eff, finesse)
        if args.m is not None and args.delta_t is not None:
            out["conditions"] = check_conditions(args.m, args.delta_t * NS, tr.gamma,
                                                 finesse).as_dict()
    if args.sgem:
        if args.t_sw is None or zeta_eff is None:
            raise ValidationError("--sgem needs --t-sw and a way to get zeta_eff0", "predict")
        out["eta_sgem_bound"] = sgem_efficiency_bound(zeta_eff, tr.gamma, args.t_sw * NS)
        if T0 is not None and args.delta_t is not None:
            out["sgem_window_ok"] = sgem_window_ok(args.t_sw * NS, args.delta_t * NS, T0, warn=False)
    if T0 is not None and math.isfinite(T0):
        sched = make_sgem(args.t_sw * NS) if args.sgem else make_gfc()
        horizon = (args.horizon * NS) if args.horizon else 4 * T0
        out["echo_times_ns"] = [t / NS for t in predict_echo_times(sched, 2 * math.pi / T0, 0.0, horizon)]
    return out


def _cmd_predict(args) -> int:
    print(json.dumps(predict(args), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gammacomb", description=__doc__)
    ap.add_argument("--error-json", action="store_true",
                    help="report failures as a JSON object on stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario file")
    p.add_argument("scenario")
    p.add_argument("-o", "--outdir", default="out")
    p.add_argument("--no-certify", action="store_true", help="skip the convergence probe")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="run a parameter sweep file")
    p.add_argument("sweep")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("-j", "--workers", type=int, default=None,
                   help="worker processes (capped by $GAMMACOMB_MAX_WORKERS)")
    p.add_argument("--max-points", type=int, default=None)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("predict", help="analytic estimates")
    p.add_argument("--preset", default="Fe57")
    p.add_argument("--energy-kev", type=float)
    p.add_argument("--gamma-mhz", type=float, help="Gamma/2pi in MHz")
    p.add_argument("--delta-v", type=float, help="velocity spacing, mm/s")
    p.add_argument("--t0", type=float, help="rephasing period, ns")
    p.add_argument("--fixed-bandwidth", action="store_true", help="set T0 = M * delta_t")
    p.add_argument("--finesse", type=float)
    p.add_argument("--m", type=int, help="number of targets")
    p.add_argument("--zeta0", type=float, help="per-target optical thickness")
    p.add_argument("--zeta-eff", type=float, help="effective per-target thickness")
    p.add_argument("--delta-t", type=float, help="field FWHM, ns")
    p.add_argument("--equal-split", action="store_true")
    p.add_argument("--sgem", action="store_true")
    p.add_argument("--t-sw", type=float, help="switching time, ns")
    p.add_argument("--horizon", type=float, help="echo prediction horizon, ns")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("compare", help="time- vs frequency-domain solver error")
    p.add_argument("scenario")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("presets", help="list isotope presets")
    p.set_defaults(func=_cmd_presets)
    return ap


def _fail(args, code: int, exc: Exception) -> int:
    if getattr(args, "error_json", False):
        payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
        if isinstance(exc, ValidationError):
            payload["key"] = exc.key
        if isinstance(exc, DivergenceError):
            payload["step"] = exc.step
        print(json.dumps(payload))
    else:
        print(f"error: {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, UnsupportedComparisonError, KeyError, FileNotFoundError) as exc:
        return _fail(args, EXIT_VALIDATION, exc)
    except DivergenceError as exc:
        return _fail(args, EXIT_DIVERGENCE, exc)
    except BudgetError as exc:
        return _fail(args, EXIT_BUDGET, exc)
    except CombError as exc:
        return _fail(args, EXIT_VALIDATION, exc)


if __name__ == "__main__":
    raise SystemExit(main())
