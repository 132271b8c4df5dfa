"""Plan verification by forward simulation.

Vehicles follow their velocity profiles with explicit Euler integration.
The step grid is the union of a uniform dt grid and every segment boundary
of every vehicle, so no step ever straddles a velocity change and the
integration is exact for piecewise-constant profiles; position anchors are
re-applied when a vehicle enters a new segment, so drift cannot accumulate.

The simulator knows nothing about the planner's reasoning: battery levels
evolve purely from vehicle positions (drain while airborne, charge while
co-located with a ground vehicle), waypoint visits are detected purely from
proximity, and the safety monitors re-check the physical rules the plan is
supposed to respect. Verification therefore does not share code paths with
planning.

A waypoint's age is the time since it was last occupied. An arrival is
logged at the first sample a UAV is inside the detection radius; a
departure is logged at the last sample it still was. With sample spacing
dt, a measured age differs from the true gap by less than 2 * dt.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .geometry import FleetParams, GridSpec, enumerate_nodes
from .trajectory import Deployment, VelocityProfile, closure_error

EVENT_CSV_HEADER = ("node_id", "event", "t", "uav_id")

ARRIVAL = "arrival"
DEPARTURE = "departure"

# Fraction of the shortest segment used for the default sample spacing.
_DT_SEGMENT_FRACTION = 10.0
_DT_CAP = 0.1

# Segments shorter than this fraction of the period are float noise from
# boundary arithmetic, not motion phases; the default dt ignores them.
_DT_NOISE_FLOOR = 1e-9


@dataclass(frozen=True)
class SimConfig:
    """Sampling and detection parameters for one run.

    window_start: measured ages only use departures at or after this time,
    so the start-up transient (first cycle) can be excluded.
    """

    dt: float
    horizon: float
    node_tolerance: float
    window_start: float = 0.0


@dataclass(frozen=True)
class SimEvent:
    node_id: int
    event: str  # ARRIVAL | DEPARTURE
    t: float
    uav_id: str


@dataclass(frozen=True)
class Violation:
    t: float
    vehicle: str
    kind: str
    value: float
    limit: float


@dataclass(frozen=True)
class Fault:
    t: float
    vehicle: str
    kind: str
    detail: str


@dataclass(frozen=True)
class AgeReport:
    """Steady-state revisit ages measured from the event log."""

    max_age: float | None
    worst_node: int | None
    samples: int
    pending: int


@dataclass
class SimState:
    """Mutable integration state; one row per vehicle, deployment order."""

    t: float
    positions: np.ndarray  # (V, 3)
    velocities: np.ndarray  # (V, 3)
    modes: list[str]
    seg_keys: list[tuple[int, int]]
    energies: np.ndarray  # (n_uav,)
    uav_rows: np.ndarray
    ugv_rows: np.ndarray
    prev_occupied: np.ndarray  # (N,) bool
    prev_nearest: np.ndarray  # (N,) int, row into uav_rows
    prev_sample_t: float
    min_energy: float
    faults: list[Fault] = field(default_factory=list)


@dataclass(frozen=True)
class SimResult:
    events: tuple[SimEvent, ...]
    age: AgeReport
    unvisited_nodes: int
    min_energy: float
    violations: tuple[Violation, ...]
    faults: tuple[Fault, ...]
    closure_errors: dict[str, float]
    steps: int
    dt: float
    horizon: float
    window_start: float
    node_tolerance: float
    period: float
    age_bound: float

    @property
    def ok(self) -> bool:
        """True when no safety fault and no constraint violation occurred."""
        return not self.violations and not self.faults


def init_state(deployment: Deployment, grid: GridSpec, fleet: FleetParams) -> SimState:
    profiles = deployment.profiles
    count = len(profiles)
    positions = np.zeros((count, 3))
    velocities = np.zeros((count, 3))
    modes = []
    seg_keys = []
    for row, prof in enumerate(profiles):
        pos, vel, mode = prof.state_at(0.0)
        positions[row] = pos
        velocities[row] = vel
        modes.append(mode)
        seg_keys.append(prof.segment_key(0.0))
    uav_rows = np.array([i for i, p in enumerate(profiles) if p.kind == "uav"], dtype=np.int64)
    ugv_rows = np.array([i for i, p in enumerate(profiles) if p.kind == "ugv"], dtype=np.int64)
    node_count = grid.node_count
    return SimState(
        t=0.0,
        positions=positions,
        velocities=velocities,
        modes=modes,
        seg_keys=seg_keys,
        energies=np.full(len(uav_rows), fleet.energy_capacity),
        uav_rows=uav_rows,
        ugv_rows=ugv_rows,
        prev_occupied=np.zeros(node_count, dtype=bool),
        prev_nearest=np.zeros(node_count, dtype=np.int64),
        prev_sample_t=0.0,
        min_energy=fleet.energy_capacity,
    )


def _colocated_ugv(state: SimState, uav_row: int, tol: float) -> int | None:
    """Row of a ground vehicle at the UAV's position, or None."""
    pos = state.positions[uav_row]
    for row in state.ugv_rows:
        d = pos - state.positions[row]
        if float(d @ d) <= tol * tol:
            return int(row)
    return None


def step(
    state: SimState,
    profiles: Sequence[VelocityProfile],
    fleet: FleetParams,
    t_next: float,
    coloc_tol: float,
) -> SimState:
    """Advance the state to t_next (one Euler step).

    Battery rates are held at their value at the step start: charge while
    co-located with a ground vehicle and below capacity, drain while
    airborne, idle otherwise. Falling below zero is a hard fault: it is
    recorded and the battery clamps to zero so the run can continue.
    """
    dt = t_next - state.t
    cap = fleet.energy_capacity
    for k, row in enumerate(state.uav_rows):
        e = state.energies[k]
        z = state.positions[row][2]
        if _colocated_ugv(state, int(row), coloc_tol) is not None and e < cap:
            e = min(cap, e + fleet.charge_rate * dt)
        elif z > 0.0:
            e = e - fleet.drain_rate * dt
            if e < 0.0:
                if state.energies[k] > 0.0:
                    state.faults.append(
                        Fault(
                            t=t_next,
                            vehicle=profiles[row].vehicle_id,
                            kind="battery-depleted",
                            detail=f"battery hit zero airborne at t={t_next!r}",
                        )
                    )
                e = 0.0
        state.energies[k] = e
    state.min_energy = min(state.min_energy, float(state.energies.min()))

    for row, prof in enumerate(profiles):
        key = prof.segment_key(t_next)
        if key == state.seg_keys[row]:
            state.positions[row] += state.velocities[row] * dt
        else:
            pos, vel, mode = prof.state_at(t_next)
            state.positions[row] = pos
            state.velocities[row] = vel
            state.modes[row] = mode
            state.seg_keys[row] = key
    state.t = t_next
    return state


def monitor_constraints(
    state: SimState,
    profiles: Sequence[VelocityProfile],
    fleet: FleetParams,
    altitude: float,
    coloc_tol: float,
) -> list[Violation]:
    """Physical-rule checks at the current sample time.

    Speed caps, altitude discreteness (ground or patrol altitude only),
    the critical-energy envelope (an airborne UAV must always hold enough
    charge to reach the ground before its battery empties), grounded
    motion only while attached to a ground vehicle, and no motion on an
    empty battery.
    """
    out: list[Violation] = []
    t = state.t
    speed_tol = 1e-9
    alt_tol = 1e-9 * max(altitude, 1.0)

    for row in state.ugv_rows:
        vid = profiles[row].vehicle_id
        speed = float(np.linalg.norm(state.velocities[row]))
        if speed > fleet.ugv_speed * (1 + speed_tol) + 1e-12:
            out.append(Violation(t, vid, "speed", speed, fleet.ugv_speed))
        z = float(state.positions[row][2])
        if abs(z) > alt_tol:
            out.append(Violation(t, vid, "altitude", z, 0.0))

    for k, row in enumerate(state.uav_rows):
        vid = profiles[row].vehicle_id
        z = float(state.positions[row][2])
        speed = float(np.linalg.norm(state.velocities[row]))
        e = float(state.energies[k])
        if abs(z) > alt_tol and abs(z - altitude) > alt_tol:
            out.append(Violation(t, vid, "altitude", z, altitude))
        if z > 0.0:
            if speed > fleet.uav_speed * (1 + speed_tol) + 1e-12:
                out.append(Violation(t, vid, "speed", speed, fleet.uav_speed))
            # enough charge to reach the ground at full descent speed
            reachable = fleet.uav_speed * e / fleet.drain_rate
            if z - reachable > alt_tol:
                out.append(Violation(t, vid, "critical-energy", z, reachable))
        elif speed > 1e-12:
            carrier = _colocated_ugv(state, int(row), coloc_tol)
            co_moving = False
            if carrier is not None:
                dv = state.velocities[row] - state.velocities[carrier]
                co_moving = float(np.linalg.norm(dv)) <= 1e-9 * max(fleet.ugv_speed, 1.0)
            if not co_moving:
                out.append(Violation(t, vid, "ground-motion", speed, 0.0))
        if e <= 1e-12 and z > 0.0 and speed > 1e-12:
            out.append(Violation(t, vid, "depleted-motion", speed, 0.0))
    return out


def track_age(
    state: SimState,
    profiles: Sequence[VelocityProfile],
    node_positions: np.ndarray,
    tolerance: float,
) -> list[SimEvent]:
    """Detect waypoint occupancy transitions at the current sample time.

    Arrival: first sample with a UAV inside the detection radius.
    Departure: logged at the previous sample time (the last one inside).
    """
    uav_pos = state.positions[state.uav_rows]
    diff = uav_pos[:, None, :] - node_positions[None, :, :]
    d2 = (diff * diff).sum(axis=2)
    occupied = (d2 <= tolerance * tolerance).any(axis=0)
    nearest = d2.argmin(axis=0)

    events: list[SimEvent] = []
    changed = np.nonzero(occupied != state.prev_occupied)[0]
    for nid in changed:
        if occupied[nid]:
            uav_row = state.uav_rows[nearest[nid]]
            events.append(
                SimEvent(int(nid), ARRIVAL, state.t, profiles[uav_row].vehicle_id)
            )
        else:
            uav_row = state.uav_rows[state.prev_nearest[nid]]
            events.append(
                SimEvent(int(nid), DEPARTURE, state.prev_sample_t, profiles[uav_row].vehicle_id)
            )
    state.prev_occupied = occupied
    state.prev_nearest = nearest
    state.prev_sample_t = state.t
    return events


def max_age(events: Iterable[SimEvent], window_start: float) -> AgeReport:
    """Worst revisit age over departures at or after window_start.

    A departure not yet followed by an arrival counts as pending, not as a
    sample; reported ages are exact gaps between logged times.
    """
    arrivals: dict[int, list[float]] = {}
    departures: dict[int, list[float]] = {}
    for ev in events:
        target = arrivals if ev.event == ARRIVAL else departures
        target.setdefault(ev.node_id, []).append(ev.t)

    worst = None
    worst_node = None
    samples = 0
    pending = 0
    for nid, deps in sorted(departures.items()):
        arrs = sorted(arrivals.get(nid, []))
        for dep in deps:
            if dep < window_start:
                continue
            idx = bisect_right(arrs, dep)
            if idx >= len(arrs):
                pending += 1
                continue
            age = arrs[idx] - dep
            samples += 1
            if worst is None or age > worst:
                worst = age
                worst_node = nid
    return AgeReport(max_age=worst, worst_node=worst_node, samples=samples, pending=pending)


def build_time_grid(deployment: Deployment, dt: float, horizon: float) -> list[float]:
    """Uniform dt samples merged with every segment boundary of every
    vehicle (per cycle), so steps never straddle a velocity change."""
    points = {0.0, horizon}
    n_uniform = math.ceil(horizon / dt)
    for k in range(1, n_uniform):
        t = k * dt
        if t < horizon:
            points.add(t)
    for prof in deployment.profiles:
        bounds = prof.boundaries()
        if not bounds:
            continue
        if 0.0 < prof.offset < horizon:
            points.add(prof.offset)
        cycle_start = prof.offset
        while cycle_start < horizon:
            for b in bounds:
                t = cycle_start + b
                if t <= horizon:
                    points.add(t)
            cycle_start += prof.period
    return sorted(points)


def default_dt(deployment: Deployment) -> float:
    """A tenth of the shortest motion phase, capped for slow-segment plans."""
    floor = _DT_NOISE_FLOOR * max(deployment.period, 1.0)
    shortest = math.inf
    for prof in deployment.profiles:
        for seg in prof.segments:
            if seg.duration > floor:
                shortest = min(shortest, seg.duration)
    if not math.isfinite(shortest):
        raise ValueError("deployment has no positive-duration segments")
    return min(_DT_CAP, shortest / _DT_SEGMENT_FRACTION)


def default_node_tolerance(grid: GridSpec) -> float:
    return grid.cell_size / 100.0


def run_simulation(
    deployment: Deployment,
    grid: GridSpec,
    fleet: FleetParams,
    config: SimConfig,
) -> SimResult:
    """Simulate the deployment over [0, horizon] and verify it."""
    if deployment.period <= 0:
        raise ValueError("plan has zero period; nothing to simulate")
    if config.dt <= 0:
        raise ValueError("dt must be positive")
    if config.horizon <= 0:
        raise ValueError("horizon must be positive")
    if config.node_tolerance <= 0:
        raise ValueError("node_tolerance must be positive")
    if grid.altitude <= config.node_tolerance:
        raise ValueError(
            "patrol altitude must exceed node_tolerance or grounded vehicles "
            "would register waypoint visits"
        )

    profiles = deployment.profiles
    nodes = enumerate_nodes(grid)
    node_positions = np.array([n.position for n in nodes])
    scale = max(grid.width, grid.height, 1.0)
    coloc_tol = 1e-9 * scale

    state = init_state(deployment, grid, fleet)
    grid_times = build_time_grid(deployment, config.dt, config.horizon)

    events: list[SimEvent] = []
    violations: list[Violation] = []

    violations.extend(monitor_constraints(state, profiles, fleet, grid.altitude, coloc_tol))
    events.extend(track_age(state, profiles, node_positions, config.node_tolerance))
    for t_next in grid_times[1:]:
        step(state, profiles, fleet, t_next, coloc_tol)
        violations.extend(monitor_constraints(state, profiles, fleet, grid.altitude, coloc_tol))
        events.extend(track_age(state, profiles, node_positions, config.node_tolerance))

    age = max_age(events, config.window_start)
    visited = {ev.node_id for ev in events if ev.event == ARRIVAL}
    closure = {prof.vehicle_id: closure_error(prof) for prof in profiles}
    teams = max(1, len(deployment.phase_offsets))
    return SimResult(
        events=tuple(events),
        age=age,
        unvisited_nodes=len(nodes) - len(visited),
        min_energy=state.min_energy,
        violations=tuple(violations),
        faults=tuple(state.faults),
        closure_errors=closure,
        steps=len(grid_times) - 1,
        dt=config.dt,
        horizon=config.horizon,
        window_start=config.window_start,
        node_tolerance=config.node_tolerance,
        period=deployment.period,
        age_bound=deployment.period / teams,
    )


def export_events_csv(events: Iterable[SimEvent], fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(EVENT_CSV_HEADER)
    for ev in events:
        writer.writerow([ev.node_id, ev.event, repr(ev.t), ev.uav_id])


def write_report(result: SimResult) -> str:
    """Human-readable verification summary."""
    lines = [
        "simulation report",
        f"  horizon: {result.horizon!r} (period {result.period!r}, {result.steps} steps)",
        f"  sample spacing dt: {result.dt!r}",
        f"  detection radius: {result.node_tolerance!r}",
        f"  age window start: {result.window_start!r}",
    ]
    if result.age.max_age is None:
        lines.append("  max revisit age: no complete samples")
    else:
        lines.append(
            f"  max revisit age: {result.age.max_age!r} at node {result.age.worst_node}"
            f" ({result.age.samples} samples, bound {result.age_bound!r})"
        )
    lines.append(f"  pending departures: {result.age.pending}")
    lines.append(f"  unvisited nodes: {result.unvisited_nodes}")
    lines.append(f"  min UAV energy: {result.min_energy!r}")
    worst_closure = max(result.closure_errors.values()) if result.closure_errors else 0.0
    lines.append(f"  worst cycle closure error: {worst_closure!r}")
    lines.append(f"  violations: {len(result.violations)}")
    for v in result.violations[:20]:
        lines.append(f"    t={v.t!r} {v.vehicle} {v.kind} value={v.value!r} limit={v.limit!r}")
    if len(result.violations) > 20:
        lines.append(f"    ... {len(result.violations) - 20} more")
    lines.append(f"  faults: {len(result.faults)}")
    for f_ in result.faults[:20]:
        lines.append(f"    t={f_.t!r} {f_.vehicle} {f_.kind}: {f_.detail}")
    if len(result.faults) > 20:
        lines.append(f"    ... {len(result.faults) - 20} more")
    lines.append(f"  status: {'ok' if result.ok else 'FAULT'}")
    return "\n".join(lines) + "\n"
