"""Command-line front end.

Subcommands:
  plan      compute a plan from a TOML config and write its artifacts
  sweep     tabulate every candidate block span for the config
  simulate  verify previously written plan artifacts by simulation
  report    print a digest of the artifacts in an output directory

Exit codes: 0 success, 1 usage or config error, 2 infeasible plan,
3 safety fault detected in simulation.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .geometry import FleetParams, GridSpec, build_grid
from .plotsvg import render_plan_svg
from .schedule import (
    SupercyclePlan,
    SweepResult,
    build_plan,
    optimize_partition_size,
)
from .simulator import (
    SimConfig,
    default_dt,
    default_node_tolerance,
    export_events_csv,
    run_simulation,
    write_report,
)
from .tour import EXACT_LIMIT_DEFAULT
from .trajectory import (
    Deployment,
    deploy,
    export_profiles_csv,
    import_profiles_csv,
    validate_profile,
)

SUMMARY_FILE = "plan_summary.toml"
TRAJECTORIES_FILE = "trajectories.csv"
SWEEP_FILE = "sweep.csv"
SVG_FILE = "plan.svg"
EVENTS_FILE = "events.csv"
SIM_REPORT_FILE = "sim_report.txt"

SWEEP_HEADER = ("span_cols", "span_rows", "partitions", "cover_energy", "feasible", "period", "optimal")


class ConfigError(ValueError):
    """Bad config file or bad flag combination; maps to exit code 1."""


class UsageError(Exception):
    """Raised by the argument parser instead of exiting the process."""


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs, parsed from one TOML file."""

    grid: GridSpec
    fleet: FleetParams
    span: tuple[int, int] | None
    seed: int
    exact_limit: int
    divisors_only: bool
    dt: float | None
    horizon_cycles: float
    node_tolerance: float | None
    out_dir: str
    svg: bool


def _section(raw: dict, name: str, allowed: dict[str, type], required: Sequence[str]) -> dict:
    data = raw.get(name, {})
    if not isinstance(data, dict):
        raise ConfigError(f"[{name}] must be a table")
    for key in data:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in [{name}]")
    for key in required:
        if key not in data:
            raise ConfigError(f"missing key {key!r} in [{name}]")
    out = {}
    for key, value in data.items():
        want = allowed[key]
        if want is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if want is int and isinstance(value, bool):
            raise ConfigError(f"[{name}] {key} must be an integer")
        if not isinstance(value, want):
            raise ConfigError(f"[{name}] {key} must be {want.__name__}")
        out[key] = value
    return out


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate a run config; unknown keys are rejected."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid TOML: {exc}") from None

    known_sections = {"grid", "fleet", "solver", "sim", "output"}
    for section in raw:
        if section not in known_sections:
            raise ConfigError(f"unknown section [{section}]")

    g = _section(
        raw,
        "grid",
        {"width": float, "height": float, "cell_size": float, "altitude": float},
        ("width", "height", "cell_size", "altitude"),
    )
    f = _section(
        raw,
        "fleet",
        {
            "uav_count": int,
            "ugv_count": int,
            "energy_capacity": float,
            "drain_rate": float,
            "charge_rate": float,
            "uav_speed": float,
            "ugv_speed": float,
        },
        (
            "uav_count",
            "ugv_count",
            "energy_capacity",
            "drain_rate",
            "charge_rate",
            "uav_speed",
            "ugv_speed",
        ),
    )
    s = _section(
        raw,
        "solver",
        {
            "span_cols": int,
            "span_rows": int,
            "seed": int,
            "exact_limit": int,
            "divisors_only": bool,
        },
        (),
    )
    sim = _section(
        raw,
        "sim",
        {"dt": float, "horizon_cycles": float, "node_tolerance": float},
        (),
    )
    o = _section(raw, "output", {"directory": str, "svg": bool}, ())

    try:
        grid = build_grid(g["width"], g["height"], g["cell_size"], g["altitude"])
        fleet = FleetParams(**f)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    has_cols = "span_cols" in s
    has_rows = "span_rows" in s
    if has_cols != has_rows:
        raise ConfigError("[solver] span_cols and span_rows must be given together")
    span = (s["span_cols"], s["span_rows"]) if has_cols else None

    return RunConfig(
        grid=grid,
        fleet=fleet,
        span=span,
        seed=s.get("seed", 0),
        exact_limit=s.get("exact_limit", EXACT_LIMIT_DEFAULT),
        divisors_only=s.get("divisors_only", False),
        dt=sim.get("dt"),
        horizon_cycles=sim.get("horizon_cycles", 3.0),
        node_tolerance=sim.get("node_tolerance"),
        out_dir=o.get("directory", "out"),
        svg=o.get("svg", True),
    )


def _toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__} to TOML")


def _toml_table(name: str, entries: dict[str, Any]) -> str:
    lines = [f"[{name}]"]
    for key, value in entries.items():
        if value is None:
            continue
        lines.append(f"{key} = {_toml_value(value)}")
    return "\n".join(lines) + "\n"


def write_plan_summary(plan: SupercyclePlan, deployment: Deployment | None, path: Path) -> None:
    """Persist the plan's numbers; floats use repr so they parse back
    bit-exact."""
    release = plan.release_point
    plan_entries: dict[str, Any] = {
        "feasible": plan.feasible,
        "pinned": plan.pinned,
        "span_cols": plan.span_cols,
        "span_rows": plan.span_rows,
        "partition_count": plan.partitions.count,
        "cover_energy": plan.cover_energy,
        "measured_cover_energy": plan.measured_cover_energy,
        "period": plan.period,
        "steady_age_bound": plan.steady_age_bound,
        "dwell_time": plan.dwell_time if plan.feasible else None,
        "release_x": release[0] if release else None,
        "release_y": release[1] if release else None,
        "partition_order": list(plan.partition_order),
        "release_times": list(plan.release_times),
        "leg_times": list(plan.leg_times),
        "phase_offsets": list(deployment.phase_offsets) if deployment else None,
        "seed": plan.seed,
        "exact_limit": plan.exact_limit,
        "centroid_tour_exact": plan.centroid_tour_exact,
        "infeasible_reason": plan.infeasible_reason,
    }
    grid_entries = {
        "width": plan.grid.width,
        "height": plan.grid.height,
        "cell_size": plan.grid.cell_size,
        "altitude": plan.grid.altitude,
        "cols": plan.grid.cols,
        "rows": plan.grid.rows,
    }
    fleet_entries = {
        "uav_count": plan.fleet.uav_count,
        "ugv_count": plan.fleet.ugv_count,
        "energy_capacity": plan.fleet.energy_capacity,
        "drain_rate": plan.fleet.drain_rate,
        "charge_rate": plan.fleet.charge_rate,
        "uav_speed": plan.fleet.uav_speed,
        "ugv_speed": plan.fleet.ugv_speed,
    }
    text = (
        _toml_table("plan", plan_entries)
        + "\n"
        + _toml_table("grid", grid_entries)
        + "\n"
        + _toml_table("fleet", fleet_entries)
    )
    path.write_text(text)


def write_sweep_csv(result: SweepResult, path: Path) -> None:
    best = result.best
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        for row in result.rows:
            optimal = (
                best is not None
                and row.span_cols == best.span_cols
                and row.span_rows == best.span_rows
            )
            writer.writerow(
                [
                    row.span_cols,
                    row.span_rows,
                    row.partition_count,
                    repr(row.cover_energy),
                    str(row.feasible).lower(),
                    repr(row.period),
                    str(optimal).lower(),
                ]
            )


def _print_plan(plan: SupercyclePlan) -> None:
    print(
        f"plan: {plan.span_cols}x{plan.span_rows} cells per block, "
        f"{plan.partitions.count} blocks, {plan.fleet.ugv_count} team(s) of "
        f"{plan.fleet.team_size} UAV(s)"
    )
    print(
        f"  lap energy budget: {plan.cover_energy:.6g}"
        + (f" (pinned; measured {plan.measured_cover_energy:.6g})" if plan.pinned else "")
        + f" of capacity {plan.fleet.energy_capacity:.6g}"
    )
    print(f"  cycle period: {plan.period:.6g}")
    print(f"  steady-state revisit age bound: {plan.steady_age_bound:.6g}")


def cmd_plan(cfg: RunConfig, pin: float | None) -> int:
    """Build the plan (sweeping spans unless fixed) and write artifacts."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    sweep_result: SweepResult | None = None
    if cfg.span is not None:
        try:
            plan = build_plan(
                cfg.grid,
                cfg.fleet,
                cfg.span[0],
                cfg.span[1],
                seed=cfg.seed,
                exact_limit=cfg.exact_limit,
                pin_cover_energy=pin,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    else:
        if pin is not None:
            raise ConfigError(
                "pinning the lap energy budget requires fixed span_cols/span_rows "
                "in [solver]; a sweep with a pinned budget would always shrink to "
                "one block"
            )
        sweep_result = optimize_partition_size(
            cfg.grid,
            cfg.fleet,
            seed=cfg.seed,
            exact_limit=cfg.exact_limit,
            divisors_only=cfg.divisors_only,
        )
        write_sweep_csv(sweep_result, out / SWEEP_FILE)
        if sweep_result.best is None:
            print("no feasible block span: every candidate exceeds the battery capacity")
            print(f"wrote {out / SWEEP_FILE}")
            return 2
        plan = sweep_result.best

    if not plan.feasible:
        write_plan_summary(plan, None, out / SUMMARY_FILE)
        print(f"plan infeasible: {plan.infeasible_reason}")
        print(f"wrote {out / SUMMARY_FILE}")
        return 2

    try:
        deployment = deploy(plan)
    except ValueError as exc:
        write_plan_summary(plan, None, out / SUMMARY_FILE)
        print(f"plan cannot be executed: {exc}")
        return 2

    write_plan_summary(plan, deployment, out / SUMMARY_FILE)
    with open(out / TRAJECTORIES_FILE, "w", newline="") as fh:
        export_profiles_csv(deployment, fh)
    if cfg.svg:
        (out / SVG_FILE).write_text(render_plan_svg(plan))

    _print_plan(plan)
    wrote = [SUMMARY_FILE, TRAJECTORIES_FILE]
    if sweep_result is not None:
        wrote.append(SWEEP_FILE)
    if cfg.svg:
        wrote.append(SVG_FILE)
    print(f"wrote {', '.join(str(out / name) for name in wrote)}")
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    """Evaluate all candidate spans and write the table."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = optimize_partition_size(
        cfg.grid,
        cfg.fleet,
        seed=cfg.seed,
        exact_limit=cfg.exact_limit,
        divisors_only=cfg.divisors_only,
    )
    write_sweep_csv(result, out / SWEEP_FILE)
    print(f"evaluated {len(result.rows)} span candidates")
    print(f"wrote {out / SWEEP_FILE}")
    if result.best is None:
        print("no feasible block span: every candidate exceeds the battery capacity")
        return 2
    _print_plan(result.best)
    return 0


def _load_summary(out: Path) -> dict:
    path = out / SUMMARY_FILE
    if not path.exists():
        raise ConfigError(f"{path} not found; run the plan command first")
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _check_artifacts_match(cfg: RunConfig, summary: dict) -> None:
    g = summary.get("grid", {})
    f = summary.get("fleet", {})
    grid_ok = (
        g.get("width") == cfg.grid.width
        and g.get("height") == cfg.grid.height
        and g.get("cell_size") == cfg.grid.cell_size
        and g.get("altitude") == cfg.grid.altitude
    )
    fleet_ok = (
        f.get("uav_count") == cfg.fleet.uav_count
        and f.get("ugv_count") == cfg.fleet.ugv_count
        and f.get("energy_capacity") == cfg.fleet.energy_capacity
        and f.get("drain_rate") == cfg.fleet.drain_rate
        and f.get("charge_rate") == cfg.fleet.charge_rate
        and f.get("uav_speed") == cfg.fleet.uav_speed
        and f.get("ugv_speed") == cfg.fleet.ugv_speed
    )
    if not (grid_ok and fleet_ok):
        raise ConfigError(
            "plan artifacts in the output directory were built from a different "
            "grid or fleet than this config"
        )


def cmd_simulate(cfg: RunConfig, dt_flag: float | None, horizon_flag: float | None) -> int:
    """Verify the artifacts written by the plan command."""
    out = Path(cfg.out_dir)
    summary = _load_summary(out)
    _check_artifacts_match(cfg, summary)
    plan_info = summary.get("plan", {})
    if not plan_info.get("feasible", False):
        print(f"plan is infeasible: {plan_info.get('infeasible_reason', 'unknown reason')}")
        return 2

    period = plan_info["period"]
    offsets = plan_info["phase_offsets"]
    park = (plan_info["release_x"], plan_info["release_y"], 0.0)
    traj_path = out / TRAJECTORIES_FILE
    if not traj_path.exists():
        raise ConfigError(f"{traj_path} not found; run the plan command first")
    with open(traj_path, newline="") as fh:
        try:
            profiles = import_profiles_csv(
                fh, period, offsets, park, cfg.grid.altitude, cfg.fleet.team_size
            )
        except ValueError as exc:
            raise ConfigError(f"{traj_path}: {exc}") from None
    scale = max(cfg.grid.width, cfg.grid.height)
    try:
        for prof in profiles:
            validate_profile(prof, scale, cfg.fleet)
    except ValueError as exc:
        raise ConfigError(f"{traj_path}: {exc}") from None
    deployment = Deployment(profiles=profiles, period=period, phase_offsets=tuple(offsets))

    dt = dt_flag if dt_flag is not None else cfg.dt
    if dt is None:
        dt = default_dt(deployment)
    cycles = horizon_flag if horizon_flag is not None else cfg.horizon_cycles
    tol = cfg.node_tolerance if cfg.node_tolerance is not None else default_node_tolerance(cfg.grid)
    sim_cfg = SimConfig(
        dt=dt,
        horizon=cycles * period,
        node_tolerance=tol,
        window_start=period,
    )
    try:
        result = run_simulation(deployment, cfg.grid, cfg.fleet, sim_cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    with open(out / EVENTS_FILE, "w", newline="") as fh:
        export_events_csv(result.events, fh)
    report = write_report(result)
    (out / SIM_REPORT_FILE).write_text(report)
    print(report, end="")
    print(f"wrote {out / EVENTS_FILE}, {out / SIM_REPORT_FILE}")
    return 0 if result.ok else 3


def cmd_report(out_dir: str) -> int:
    """Print a digest of the artifacts in an output directory."""
    out = Path(out_dir)
    summary = _load_summary(out)
    plan_info = summary.get("plan", {})
    print(f"plan summary from {out / SUMMARY_FILE}")
    for key in (
        "feasible",
        "pinned",
        "span_cols",
        "span_rows",
        "partition_count",
        "cover_energy",
        "period",
        "steady_age_bound",
        "infeasible_reason",
    ):
        if key in plan_info:
            print(f"  {key}: {plan_info[key]}")
    sim_path = out / SIM_REPORT_FILE
    if sim_path.exists():
        print(sim_path.read_text(), end="")
    else:
        print("no simulation report; run the simulate command for verification")
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="skysweep", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_plan = sub.add_parser("plan", help="compute a plan and write artifacts")
    p_plan.add_argument("--config", required=True, help="run config (TOML)")
    p_plan.add_argument("--out", help="output directory (overrides [output] directory)")
    p_plan.add_argument("--seed", type=int, help="heuristic seed (overrides [solver] seed)")
    p_plan.add_argument(
        "--pin-delta-e",
        type=float,
        default=None,
        help="pin the per-lap energy budget instead of the measured value "
        "(requires fixed span_cols/span_rows)",
    )

    p_sweep = sub.add_parser("sweep", help="tabulate all candidate block spans")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out")
    p_sweep.add_argument("--seed", type=int)

    p_sim = sub.add_parser("simulate", help="verify plan artifacts by simulation")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out")
    p_sim.add_argument("--dt", type=float, help="sample spacing (default: from segments)")
    p_sim.add_argument(
        "--horizon-cycles", type=float, help="simulated duration in cycle periods"
    )

    p_rep = sub.add_parser("report", help="print a digest of written artifacts")
    p_rep.add_argument("--out", default="out", help="output directory to read")

    return parser


def _config_with_overrides(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config)
    updates: dict[str, Any] = {}
    if getattr(args, "out", None):
        updates["out_dir"] = args.out
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if updates:
        cfg = replace(cfg, **updates)
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "report":
            return cmd_report(args.out)
        cfg = _config_with_overrides(args)
        if args.command == "plan":
            return cmd_plan(cfg, args.pin_delta_e)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.dt, args.horizon_cycles)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
