"""Team timetable over the block cover: who patrols what, and when.

One team (a ground charging vehicle plus its UAVs) serves every block in a
closed route over the block release points. At each release point the UAVs
fly their patrol laps while the ground vehicle waits, then everyone rides to
the next block, recharging on the way and topping up after arrival if the
drive was shorter than the charge. The cycle time of that route divided by
the number of teams bounds the steady-state revisit age of every waypoint.

All laps are budgeted for the worst lap in the whole cover, so the timetable
is uniform: every block visit drains at most `cover_energy` and every
inter-block leg restores exactly that much.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .geometry import FleetParams, GridSpec
from .partitioning import PartitionSet, partition
from .subpartition import SubpartitionAssignment, allocate
from .tour import EXACT_LIMIT_DEFAULT, Tour, solve


@dataclass(frozen=True)
class SupercyclePlan:
    """A complete surveillance plan for one grid and fleet.

    partition_order: block visiting order (indices into partitions).
    assignments: routed patrol laps, one per (block, UAV slot).
    cover_energy: per-lap energy budget actually used by the timetable
    (equals measured_cover_energy unless pinned).
    release_times: cycle-local time at which each ordered block's patrol
    starts; release_times[0] == 0.
    leg_times: duration from one ordered release to the next (dwell plus
    the larger of drive time and recharge time); sums to period.
    """

    grid: GridSpec
    fleet: FleetParams
    span_cols: int
    span_rows: int
    partitions: PartitionSet
    partition_order: tuple[int, ...]
    assignments: tuple[SubpartitionAssignment, ...]
    measured_cover_energy: float
    cover_energy: float
    pinned: bool
    release_times: tuple[float, ...]
    leg_times: tuple[float, ...]
    period: float
    feasible: bool
    infeasible_reason: str | None = None
    seed: int = 0
    exact_limit: int = EXACT_LIMIT_DEFAULT
    centroid_tour_exact: bool = False

    @property
    def team_count(self) -> int:
        return self.fleet.ugv_count

    @property
    def steady_age_bound(self) -> float:
        """Steady-state bound on the revisit age of any waypoint."""
        if not self.feasible:
            return math.inf
        return self.period / self.team_count

    @property
    def dwell_time(self) -> float:
        """Time the team holds at each release point while UAVs patrol."""
        return self.cover_energy / self.fleet.drain_rate

    @property
    def release_point(self) -> tuple[float, float, float] | None:
        """Ground position where every team's cycle starts."""
        if not self.partition_order:
            return None
        return self.partitions.partitions[self.partition_order[0]].centroid

    def assignment(self, partition_id: int, slot: int) -> SubpartitionAssignment:
        for asg in self.assignments:
            if asg.partition_id == partition_id and asg.slot == slot:
                return asg
        raise KeyError(f"no assignment for block {partition_id} slot {slot}")


@dataclass(frozen=True)
class SweepRow:
    """Diagnostics for one candidate block span in a sweep."""

    span_cols: int
    span_rows: int
    partition_count: int
    cover_energy: float
    period: float
    feasible: bool


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    best: SupercyclePlan | None


def cover_energy(assignments: Iterable[SubpartitionAssignment]) -> float:
    """Worst per-lap energy over all routed assignments."""
    worst = 0.0
    for asg in assignments:
        if asg.energy_cost > worst:
            worst = asg.energy_cost
    return worst


def check_feasible(cover: float, capacity: float) -> bool:
    """A lap budget is flyable iff it fits the battery (boundary included)."""
    return cover <= capacity


def leg_time(
    c_from: Sequence[float],
    c_to: Sequence[float],
    cover: float,
    fleet: FleetParams,
) -> float:
    """Release-to-release duration between two consecutive blocks.

    Patrol dwell, then the slower of driving to the next release point and
    restoring the lap budget (charging continues while driving).
    """
    dist = math.hypot(c_to[0] - c_from[0], c_to[1] - c_from[1])
    dwell = cover / fleet.drain_rate
    return dwell + max(dist / fleet.ugv_speed, cover / fleet.charge_rate)


def supercycle_period(
    centroids: Sequence[Sequence[float]],
    order: Sequence[int],
    cover: float,
    fleet: FleetParams,
) -> float:
    """Cycle time of the closed block route; inf when the lap budget does
    not fit the battery."""
    if not check_feasible(cover, fleet.energy_capacity):
        return math.inf
    total = 0.0
    for idx, cur in enumerate(order):
        nxt = order[(idx + 1) % len(order)]
        total += leg_time(centroids[cur], centroids[nxt], cover, fleet)
    return total


def _route_laps(
    pset: PartitionSet, fleet: FleetParams, seed: int, exact_limit: int
) -> list[SubpartitionAssignment]:
    """Route one closed patrol lap per (block, slot).

    Blocks are congruent translates of each other, so laps are solved on
    centroid-relative coordinates and cached by that relative geometry;
    translated copies reuse the solution.
    """
    altitude = pset.grid.altitude
    cache: dict[tuple[tuple[float, float], ...], Tour] = {}
    routed = []
    for part in pset.partitions:
        cx, cy, _ = part.centroid
        for asg in allocate(part, fleet.team_size):
            rel = tuple((n.position[0] - cx, n.position[1] - cy) for n in asg.nodes)
            lap = cache.get(rel)
            if lap is None:
                lap = solve([(0.0, 0.0), *rel], seed=seed, exact_limit=exact_limit)
                cache[rel] = lap
            points = [(cx, cy, altitude)] + [n.position for n in asg.nodes]
            waypoints = tuple(points[i] for i in lap.order) + (points[0],)
            routed.append(
                replace(
                    asg,
                    tour=lap,
                    tour_length=lap.length,
                    energy_cost=lap.length * fleet.drain_rate / fleet.uav_speed,
                    waypoints=waypoints,
                )
            )
    return routed


def _infeasible_plan(
    grid: GridSpec,
    fleet: FleetParams,
    pset: PartitionSet,
    assignments: Sequence[SubpartitionAssignment],
    measured: float,
    effective: float,
    pinned: bool,
    reason: str,
    seed: int,
    exact_limit: int,
) -> SupercyclePlan:
    return SupercyclePlan(
        grid=grid,
        fleet=fleet,
        span_cols=pset.span_cols,
        span_rows=pset.span_rows,
        partitions=pset,
        partition_order=(),
        assignments=tuple(assignments),
        measured_cover_energy=measured,
        cover_energy=effective,
        pinned=pinned,
        release_times=(),
        leg_times=(),
        period=math.inf,
        feasible=False,
        infeasible_reason=reason,
        seed=seed,
        exact_limit=exact_limit,
    )


def build_plan(
    grid: GridSpec,
    fleet: FleetParams,
    span_cols: int,
    span_rows: int,
    seed: int = 0,
    exact_limit: int = EXACT_LIMIT_DEFAULT,
    pin_cover_energy: float | None = None,
) -> SupercyclePlan:
    """Plan the whole mission for a fixed block span.

    pin_cover_energy, when given, replaces the measured per-lap budget in
    every timetable formula (dwell, recharge, feasibility). Useful to
    reproduce timetables whose lap geometry is not fully specified.
    """
    if pin_cover_energy is not None and pin_cover_energy <= 0:
        raise ValueError("pinned cover energy must be positive")
    pset = partition(grid, span_cols, span_rows)
    pinned = pin_cover_energy is not None

    try:
        assignments = _route_laps(pset, fleet, seed, exact_limit)
    except ValueError as exc:
        return _infeasible_plan(
            grid, fleet, pset, (), math.inf, math.inf, pinned, str(exc), seed, exact_limit
        )

    measured = cover_energy(assignments)
    effective = float(pin_cover_energy) if pinned else measured
    if not check_feasible(effective, fleet.energy_capacity):
        reason = (
            f"lap energy budget {effective:.6g} exceeds battery capacity "
            f"{fleet.energy_capacity:.6g}"
        )
        return _infeasible_plan(
            grid, fleet, pset, assignments, measured, effective, pinned, reason, seed, exact_limit
        )

    centroids = [p.centroid for p in pset.partitions]
    route = solve(centroids, seed=seed, exact_limit=exact_limit)
    order = route.order

    legs = []
    for idx, cur in enumerate(order):
        nxt = order[(idx + 1) % len(order)]
        legs.append(leg_time(centroids[cur], centroids[nxt], effective, fleet))
    releases = [0.0]
    for dur in legs[:-1]:
        releases.append(releases[-1] + dur)
    period = releases[-1] + legs[-1]

    return SupercyclePlan(
        grid=grid,
        fleet=fleet,
        span_cols=span_cols,
        span_rows=span_rows,
        partitions=pset,
        partition_order=order,
        assignments=tuple(assignments),
        measured_cover_energy=measured,
        cover_energy=effective,
        pinned=pinned,
        release_times=tuple(releases),
        leg_times=tuple(legs),
        period=period,
        feasible=True,
        infeasible_reason=None,
        seed=seed,
        exact_limit=exact_limit,
        centroid_tour_exact=route.exact,
    )


def _sweep_key(row: SweepRow) -> tuple[float, int, int, int]:
    """Sweep ranking: shortest period first; ties prefer larger blocks,
    then the smaller column span."""
    return (row.period, -(row.span_cols * row.span_rows), row.span_cols, row.span_rows)


def optimize_partition_size(
    grid: GridSpec,
    fleet: FleetParams,
    seed: int = 0,
    exact_limit: int = EXACT_LIMIT_DEFAULT,
    divisors_only: bool = False,
    pairs: Sequence[tuple[int, int]] | None = None,
) -> SweepResult:
    """Evaluate candidate block spans and pick the best feasible one.

    By default every span pair (1..cols, 1..rows) is tried; divisors_only
    restricts to spans dividing the grid dimensions exactly.
    """
    if pairs is None:
        pairs = [
            (a, b)
            for a in range(1, grid.cols + 1)
            for b in range(1, grid.rows + 1)
            if not divisors_only or (grid.cols % a == 0 and grid.rows % b == 0)
        ]

    rows = []
    best_row: SweepRow | None = None
    for span_cols, span_rows in pairs:
        plan = build_plan(grid, fleet, span_cols, span_rows, seed=seed, exact_limit=exact_limit)
        row = SweepRow(
            span_cols=span_cols,
            span_rows=span_rows,
            partition_count=plan.partitions.count,
            cover_energy=plan.measured_cover_energy,
            period=plan.period,
            feasible=plan.feasible,
        )
        rows.append(row)
        if plan.feasible and (best_row is None or _sweep_key(row) < _sweep_key(best_row)):
            best_row = row

    best = None
    if best_row is not None:
        best = build_plan(
            grid,
            fleet,
            best_row.span_cols,
            best_row.span_rows,
            seed=seed,
            exact_limit=exact_limit,
        )
    return SweepResult(rows=tuple(rows), best=best)
