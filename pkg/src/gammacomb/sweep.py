"""Gridded parameter sweeps over scenario families.

A sweep file names a base scenario and one or two axes.  Every grid point
is resolved into a complete scenario, simulated independently, and the
rows are returned in axis order whatever the worker count.
"""

from __future__ import annotations

import copy
import csv
import itertools
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .analytics import gfc_first_echo_efficiency, sgem_efficiency_bound
from .errors import BudgetError, ValidationError
from .scenario import NS, bundled_or_path, from_resolved, load_raw, resolve, run, tomllib

AXES = ("total_zeta", "tooth_spacing_rad_ns", "zeta_eff0", "m_targets", "t_sw_ns")
CONSTRAINTS = ("fixed_bandwidth",)
WORKER_ENV = "GAMMACOMB_MAX_WORKERS"
DEFAULT_MAX_POINTS = 2500


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple


@dataclass(frozen=True)
class SweepSpec:
    base: dict
    axes: tuple[Axis, ...]
    constraint: Optional[str] = None
    max_points: int = DEFAULT_MAX_POINTS
    name: str = "sweep"

    @property
    def n_points(self) -> int:
        return math.prod(len(a.values) for a in self.axes)

    def points(self) -> list[dict]:
        names = [a.name for a in self.axes]
        return [dict(zip(names, combo)) for combo in itertools.product(*(a.values for a in self.axes))]


def _axis(d: dict, i: int) -> Axis:
    path = f"sweep.axes[{i}]"
    name = d.get("name")
    if name not in AXES:
        raise ValidationError(f"unknown axis {name!r}; choose from {AXES}", f"{path}.name")
    if "values" in d:
        vals = d["values"]
        if not isinstance(vals, list) or not vals:
            raise ValidationError("expected a non-empty list", f"{path}.values")
    else:
        try:
            start, stop, num = float(d["start"]), float(d["stop"]), int(d["num"])
        except (KeyError, TypeError, ValueError):
            raise ValidationError("need values, or start/stop/num", path) from None
        if num < 1:
            raise ValidationError("num must be >= 1", f"{path}.num")
        spacing = d.get("spacing", "linear")
        if spacing == "log":
            vals = np.geomspace(start, stop, num).tolist()
        else:
            vals = np.linspace(start, stop, num).tolist()
    for v in vals:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
            raise ValidationError(f"axis values must be positive and finite, got {v!r}", path)
    if name == "m_targets":
        if any(int(v) != v or int(v) % 2 == 0 for v in vals):
            raise ValidationError("target counts must be odd integers", path)
        vals = [int(v) for v in vals]
    return Axis(name, tuple(vals))


def parse_sweep(raw: dict, base_dir: Path = Path(".")) -> SweepSpec:
    sw = raw.get("sweep")
    if not isinstance(sw, dict):
        raise ValidationError("missing required table", "sweep")
    base = raw.get("base")
    if isinstance(base, str):
        path = Path(base)
        if not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ValidationError(f"base scenario {path} not found", "base")
        base = load_raw(path)
    if not isinstance(base, dict):
        raise ValidationError("expected a scenario table or a path", "base")
    overrides = raw.get("overrides", {})
    if not isinstance(overrides, dict):
        raise ValidationError("expected a table", "overrides")
    base = _merge(base, overrides)
    axes_raw = sw.get("axes")
    if not isinstance(axes_raw, list) or not 1 <= len(axes_raw) <= 2:
        raise ValidationError("need one or two axes", "sweep.axes")
    axes = tuple(_axis(a, i) for i, a in enumerate(axes_raw))
    if len({a.name for a in axes}) != len(axes):
        raise ValidationError("axes must differ", "sweep.axes")
    constraint = sw.get("constraint")
    if constraint is not None and constraint not in CONSTRAINTS:
        raise ValidationError(f"unknown constraint {constraint!r}", "sweep.constraint")
    if constraint and "tooth_spacing_rad_ns" in {a.name for a in axes}:
        raise ValidationError("fixed bandwidth already sets the tooth spacing", "sweep.constraint")
    max_points = sw.get("max_points", DEFAULT_MAX_POINTS)
    if isinstance(max_points, bool) or not isinstance(max_points, int) or max_points < 1:
        raise ValidationError("must be a positive integer", "sweep.max_points")
    return SweepSpec(base, axes, constraint, max_points, str(sw.get("name", raw.get("name", "sweep"))))


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_sweep(path) -> SweepSpec:
    path = bundled_or_path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"not valid TOML: {exc}", str(path)) from None
    return parse_sweep(raw, path.parent)


def point_scenario(spec: SweepSpec, point: dict) -> dict:
    """Resolved scenario for one grid point."""
    raw = copy.deepcopy(spec.base)
    comb = raw.setdefault("comb", {})
    if "m_targets" in point:
        comb["m_targets"] = point["m_targets"]
    spacing = None
    if "tooth_spacing_rad_ns" in point:
        spacing = {"t0_ns": 2 * math.pi / point["tooth_spacing_rad_ns"]}
    elif spec.constraint == "fixed_bandwidth":
        spacing = {"fixed_bandwidth": True}
    if spacing is not None:
        for key in ("delta_v_mm_s", "t0_ns", "fixed_bandwidth"):
            comb.pop(key, None)
        comb.update(spacing)
    if "t_sw_ns" in point:
        raw.setdefault("schedule", {})["t_sw_ns"] = point["t_sw_ns"]
    m = comb["m_targets"]
    if "total_zeta" in point:
        comb["zeta0"] = point["total_zeta"] / m
    if "zeta_eff0" in point:
        comb.setdefault("zeta0", 1.0)
        probe = from_resolved(resolve(raw)).derived
        if probe.degenerate:
            raise ValidationError("zeta_eff0 axis needs a non-zero tooth spacing", "sweep.axes")
        comb["zeta0"] = point["zeta_eff0"] * probe.finesse
    # solver defaults must follow the point, not the base
    solver = raw.get("solver", {})
    solver.pop("sublayers", None)
    raw["name"] = f"{spec.name}"
    return resolve(raw)


def run_point(resolved: dict) -> dict:
    sc = from_resolved(resolved)
    out = run(sc)
    d = sc.derived
    row = {
        "m_targets": sc.comb.m_targets,
        "zeta0": sc.comb.zeta0,
        "total_zeta": d.total_zeta,
        "beta_omega0_rad_ns": d.beta_omega0 * NS,
        "T0_ns": d.T0 / NS,
        "finesse": d.finesse,
        "zeta_eff0": d.zeta_eff0,
        "mode": sc.mode,
        "t_ec_ns": sc.t_ec / NS,
        "eta_sim": out.report.efficiency,
        "eta_two_term": gfc_first_echo_efficiency(d.zeta_eff0, d.finesse),
        "fidelity": out.report.fidelity,
    }
    if resolved["schedule"]["protocol"] == "sgem":
        row["eta_sgem_bound"] = sgem_efficiency_bound(
            d.zeta_eff0, sc.comb.transition.gamma, resolved["schedule"]["t_sw_ns"] * NS)
    return row


def worker_count(requested: Optional[int]) -> int:
    n = requested or os.cpu_count() or 1
    cap = os.environ.get(WORKER_ENV)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def run_sweep(spec: SweepSpec, workers: Optional[int] = None,
              max_points: Optional[int] = None) -> list[dict]:
    """Simulate every grid point; rows come back in axis order."""
    budget = max_points or spec.max_points
    n = spec.n_points
    if n > budget:
        t0 = time.perf_counter()
        run_point(point_scenario(spec, spec.points()[0]))
        per = time.perf_counter() - t0
        raise BudgetError(f"{n} grid points exceed the budget of {budget} "
                          f"(estimated {n * per:.0f} s single-threaded)")
    points = spec.points()
    scenarios = [point_scenario(spec, p) for p in points]
    nw = worker_count(workers)
    if nw == 1:
        rows = [run_point(s) for s in scenarios]
    else:
        with ProcessPoolExecutor(max_workers=nw) as pool:
            rows = list(pool.map(run_point, scenarios, chunksize=max(1, len(scenarios) // (4 * nw))))
    return [{**p, **r} for p, r in zip(points, rows)]


def write_rows(rows: list[dict], path) -> None:
    keys: list[str] = []
    for r in rows:
        for k in r:
            if k not in keys:
                keys.append(k)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if r.get(k) is None else
                            repr(r[k]) if isinstance(r.get(k), float) else r.get(k))
                        for k in keys})
