"""Executable vehicle trajectories for a plan.

Each vehicle gets a cyclic velocity profile: contiguous constant-velocity
segments covering one full cycle, each carrying its own start position
anchor so numerical drift never accumulates across segments. UAV takeoff and
landing are instantaneous: the altitude jumps at a patrol segment boundary
(the x,y track stays continuous, z switches between 0 and patrol altitude
via the anchor).

Mode meanings: "patrol" is a UAV flying its lap; "carried" is the transport
phase between blocks (used by the ground vehicle and by the UAVs riding on
it, which recharge while attached); "charging-idle" is holding position
while batteries top up; "parked" is the pre-start hold and the ground
vehicle's dwell during patrols.

Teams beyond the first fly the identical cycle shifted in time by one m-th
of the period each; before its shift elapses a team sits parked at the
common cycle start point.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Sequence, TextIO

from .geometry import FleetParams
from .schedule import SupercyclePlan

MODE_PATROL = "patrol"
MODE_CARRIED = "carried"
MODE_CHARGING = "charging-idle"
MODE_PARKED = "parked"
MODES = (MODE_PATROL, MODE_CARRIED, MODE_CHARGING, MODE_PARKED)

CSV_HEADER = ("vehicle_id", "kind", "t_start", "t_end", "vx", "vy", "vz", "mode")

# Positional mismatch beyond this (times the grid size) is a construction
# bug, not float noise.
_CONTINUITY_TOL = 1e-7
# Absolute bound on the start-to-end gap of one full cycle.
_CLOSURE_TOL = 1e-6
# Gaps below this (times the period) are accumulated rounding, not real
# waits; builders absorb them so no segment is ever ulp-thin. Such slivers
# would not survive the local-to-global time shift in the CSV round trip.
_NOISE_TOL = 1e-12


@dataclass(frozen=True)
class Segment:
    """Constant-velocity piece of a cyclic trajectory, in cycle-local time."""

    t_start: float
    t_end: float
    velocity: tuple[float, float, float]
    mode: str
    start_pos: tuple[float, float, float]

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def position_at(self, t: float) -> tuple[float, float, float]:
        dt = t - self.t_start
        return (
            self.start_pos[0] + self.velocity[0] * dt,
            self.start_pos[1] + self.velocity[1] * dt,
            self.start_pos[2] + self.velocity[2] * dt,
        )

    @property
    def end_pos(self) -> tuple[float, float, float]:
        return self.position_at(self.t_end)


@dataclass(frozen=True)
class VelocityProfile:
    """One vehicle's cyclic trajectory.

    segments live in cycle-local time [0, period]; offset shifts the cycle
    into global time. Before its offset the vehicle is parked at park_pos.
    """

    vehicle_id: str
    kind: str  # "uav" | "ugv"
    segments: tuple[Segment, ...]
    period: float
    offset: float
    park_pos: tuple[float, float, float]

    @cached_property
    def _starts(self) -> tuple[float, ...]:
        return tuple(seg.t_start for seg in self.segments)

    def state_at(
        self, t: float
    ) -> tuple[tuple[float, float, float], tuple[float, float, float], str]:
        """(position, velocity, mode) at global time t."""
        if not self.segments or t < self.offset:
            return (self.park_pos, (0.0, 0.0, 0.0), MODE_PARKED)
        local = (t - self.offset) % self.period
        idx = bisect_right(self._starts, local) - 1
        if idx < 0:
            idx = 0
        seg = self.segments[idx]
        return (seg.position_at(local), seg.velocity, seg.mode)

    def segment_key(self, t: float) -> tuple[int, int]:
        """(cycle number, segment index) active at global time t; (-1, -1)
        before the vehicle's start offset."""
        if not self.segments or t < self.offset:
            return (-1, -1)
        rel = t - self.offset
        cycle = int(rel // self.period)
        local = rel % self.period
        idx = bisect_right(self._starts, local) - 1
        return (cycle, max(idx, 0))

    def boundaries(self) -> list[float]:
        """Cycle-local segment boundary times, including 0 and the period."""
        if not self.segments:
            return []
        out = [seg.t_start for seg in self.segments]
        out.append(self.segments[-1].t_end)
        return out


@dataclass(frozen=True)
class Deployment:
    """All vehicle profiles for a plan: ground vehicles first, then UAVs,
    each group ordered by vehicle number."""

    profiles: tuple[VelocityProfile, ...]
    period: float
    phase_offsets: tuple[float, ...]

    @property
    def uav_profiles(self) -> tuple[VelocityProfile, ...]:
        return tuple(p for p in self.profiles if p.kind == "uav")

    @property
    def ugv_profiles(self) -> tuple[VelocityProfile, ...]:
        return tuple(p for p in self.profiles if p.kind == "ugv")


def _require_feasible(plan: SupercyclePlan) -> None:
    if not plan.feasible:
        raise ValueError(f"plan is infeasible: {plan.infeasible_reason}")


def _ground(point: Sequence[float]) -> tuple[float, float, float]:
    return (point[0], point[1], 0.0)


def _transit_tail(
    segments: list[Segment],
    here: Sequence[float],
    there: Sequence[float],
    t_depart: float,
    t_next: float,
    ugv_speed: float,
    noise: float,
) -> None:
    """Append the drive to the next release point plus any charge wait.

    Shared shape of every leg's tail: ride at ugv_speed, then hold at the
    destination until the timetable releases the next patrol. Waits shorter
    than the noise floor fold into the neighbouring segment.
    """
    dx = there[0] - here[0]
    dy = there[1] - here[1]
    dist = math.hypot(dx, dy)
    if dist > 0.0:
        drive = dist / ugv_speed
        t_arrive = t_depart + drive
        vel = (dx / drive, dy / drive, 0.0)
        if t_arrive >= t_next - noise:  # drive fills the leg; no real wait
            segments.append(Segment(t_depart, t_next, vel, MODE_CARRIED, _ground(here)))
        else:
            segments.append(Segment(t_depart, t_arrive, vel, MODE_CARRIED, _ground(here)))
            segments.append(
                Segment(t_arrive, t_next, (0.0, 0.0, 0.0), MODE_CHARGING, _ground(there))
            )
    elif t_next - t_depart > noise:
        segments.append(Segment(t_depart, t_next, (0.0, 0.0, 0.0), MODE_CHARGING, _ground(there)))
    elif t_next > t_depart and segments:
        segments[-1] = replace(segments[-1], t_end=t_next)


def ugv_profile(plan: SupercyclePlan) -> list[Segment]:
    """Team-local trajectory of the ground vehicle: park at each release
    point through the patrol dwell, drive to the next block, wait out any
    remaining charge time there."""
    _require_feasible(plan)
    parts = plan.partitions.partitions
    order = plan.partition_order
    dwell = plan.dwell_time
    noise = _NOISE_TOL * max(plan.period, 1.0)
    segments: list[Segment] = []

    for idx, cur in enumerate(order):
        nxt = order[(idx + 1) % len(order)]
        here = parts[cur].centroid
        there = parts[nxt].centroid
        t_release = plan.release_times[idx]
        t_next = plan.release_times[idx + 1] if idx + 1 < len(order) else plan.period
        t_depart = t_release + dwell
        if dwell > 0:
            segments.append(
                Segment(t_release, t_depart, (0.0, 0.0, 0.0), MODE_PARKED, _ground(here))
            )
        _transit_tail(segments, here, there, t_depart, t_next, plan.fleet.ugv_speed, noise)
    return segments


def uav_profile(plan: SupercyclePlan, slot: int) -> list[Segment]:
    """Team-local trajectory of the UAV holding one slot: fly the slice lap
    at each release, then dock until departure, ride to the next block, and
    keep charging until its release."""
    _require_feasible(plan)
    fleet = plan.fleet
    parts = plan.partitions.partitions
    order = plan.partition_order
    dwell = plan.dwell_time
    t_tol = _CONTINUITY_TOL * max(plan.period, 1.0)
    noise = _NOISE_TOL * max(plan.period, 1.0)
    segments: list[Segment] = []

    for idx, cur in enumerate(order):
        nxt = order[(idx + 1) % len(order)]
        here = parts[cur].centroid
        there = parts[nxt].centroid
        t_release = plan.release_times[idx]
        t_next = plan.release_times[idx + 1] if idx + 1 < len(order) else plan.period
        t_depart = t_release + dwell

        lap: list[Segment] = []
        clock = t_release
        asg = plan.assignment(cur, slot)
        for w_from, w_to in zip(asg.waypoints, asg.waypoints[1:]):
            leg = math.dist(w_from, w_to)
            if leg == 0.0:
                continue
            hop = leg / fleet.uav_speed
            vel = (
                (w_to[0] - w_from[0]) / hop,
                (w_to[1] - w_from[1]) / hop,
                (w_to[2] - w_from[2]) / hop,
            )
            lap.append(Segment(clock, clock + hop, vel, MODE_PATROL, w_from))
            clock += hop

        overrun = clock - t_depart
        if overrun > t_tol:
            detail = (
                "the pinned lap energy budget is below the measured requirement"
                if plan.pinned
                else "lap routing is inconsistent with the dwell"
            )
            raise ValueError(
                f"lap for block {cur} slot {slot} takes {clock - t_release:.6g}, "
                f"longer than the dwell {dwell:.6g}: {detail}"
            )
        if lap and (abs(overrun) <= noise or overrun > 0.0):
            # rounding drift either side of the departure: land the last
            # hop exactly on it instead of leaving an ulp-thin wait
            lap[-1] = replace(lap[-1], t_end=t_depart)
            clock = t_depart
        segments.extend(lap)
        if t_depart > clock:
            segments.append(Segment(clock, t_depart, (0.0, 0.0, 0.0), MODE_CHARGING, _ground(here)))
        _transit_tail(segments, here, there, t_depart, t_next, fleet.ugv_speed, noise)
    return segments


def _mode_speed_cap(mode: str, fleet: FleetParams) -> float:
    if mode == MODE_PATROL:
        return fleet.uav_speed
    if mode == MODE_CARRIED:
        return fleet.ugv_speed
    return 0.0


def validate_profile(profile: VelocityProfile, scale: float, fleet: FleetParams) -> None:
    """Check structural invariants; raises ValueError on the first failure.

    Segments must tile [0, period] with no gaps, keep x,y continuous
    (altitude may jump only at patrol boundaries), respect the speed cap of
    their mode, and close the loop back to the cycle start.
    """
    segs = profile.segments
    if not segs:
        if profile.period > 0:
            raise ValueError(f"{profile.vehicle_id}: no segments for a positive period")
        return
    pos_tol = _CONTINUITY_TOL * max(scale, 1.0)
    t_tol = _CONTINUITY_TOL * max(profile.period, 1.0)
    if abs(segs[0].t_start) > t_tol or abs(segs[-1].t_end - profile.period) > t_tol:
        raise ValueError(f"{profile.vehicle_id}: segments do not span [0, period]")
    prev_end_time = None
    for seg in segs:
        if prev_end_time is not None and seg.t_start != prev_end_time:
            raise ValueError(
                f"{profile.vehicle_id}: segment gap at t={seg.t_start!r} (prev end {prev_end_time!r})"
            )
        prev_end_time = seg.t_end
        if seg.mode not in MODES:
            raise ValueError(f"{profile.vehicle_id}: unknown mode {seg.mode!r}")
        if seg.duration <= 0:
            raise ValueError(
                f"{profile.vehicle_id}: non-positive segment duration at t={seg.t_start!r}"
            )
        if seg.mode == MODE_PATROL and profile.kind != "uav":
            raise ValueError(f"{profile.vehicle_id}: ground vehicle cannot patrol")
        cap = _mode_speed_cap(seg.mode, fleet)
        speed = math.hypot(*seg.velocity)
        if speed > cap * (1.0 + 1e-9) + 1e-12:
            raise ValueError(
                f"{profile.vehicle_id}: speed {speed:.6g} exceeds {seg.mode} cap {cap:.6g}"
            )
    for a, b in zip(segs, segs[1:]):
        end = a.end_pos
        if math.hypot(end[0] - b.start_pos[0], end[1] - b.start_pos[1]) > pos_tol:
            raise ValueError(f"{profile.vehicle_id}: x,y discontinuity at t={b.t_start!r}")
        if abs(end[2] - b.start_pos[2]) > pos_tol and MODE_PATROL not in (a.mode, b.mode):
            raise ValueError(
                f"{profile.vehicle_id}: altitude jump outside patrol boundary at t={b.t_start!r}"
            )
    end = segs[-1].end_pos
    start = segs[0].start_pos
    closure = math.hypot(end[0] - start[0], end[1] - start[1])
    if closure > _CLOSURE_TOL:
        raise ValueError(f"{profile.vehicle_id}: cycle does not close (error {closure:.3g})")


def closure_error(profile: VelocityProfile) -> float:
    """Ground-plane distance between the cycle's start and end positions."""
    if not profile.segments:
        return 0.0
    end = profile.segments[-1].end_pos
    start = profile.segments[0].start_pos
    return math.hypot(end[0] - start[0], end[1] - start[1])


def deploy(plan: SupercyclePlan) -> Deployment:
    """Build phase-shifted profiles for every vehicle in the fleet.

    Team j (0-based) flies the team-0 cycle delayed by j * period / m.
    UAV ids are team-major: team j, slot k maps to uav-(j*team_size+k-1).
    """
    _require_feasible(plan)
    fleet = plan.fleet
    release = plan.release_point
    assert release is not None
    park = _ground(release)
    scale = max(plan.grid.width, plan.grid.height)
    period = plan.period

    ugv_segs = tuple(ugv_profile(plan))
    uav_segs = {slot: tuple(uav_profile(plan, slot)) for slot in range(1, fleet.team_size + 1)}

    offsets = tuple(team * period / fleet.ugv_count for team in range(fleet.ugv_count))
    profiles: list[VelocityProfile] = []
    for team, offset in enumerate(offsets):
        profiles.append(
            VelocityProfile(
                vehicle_id=f"ugv-{team}",
                kind="ugv",
                segments=ugv_segs,
                period=period,
                offset=offset,
                park_pos=park,
            )
        )
    for team, offset in enumerate(offsets):
        for slot in range(1, fleet.team_size + 1):
            profiles.append(
                VelocityProfile(
                    vehicle_id=f"uav-{team * fleet.team_size + slot - 1}",
                    kind="uav",
                    segments=uav_segs[slot],
                    period=period,
                    offset=offset,
                    park_pos=park,
                )
            )
    profiles.sort(key=lambda p: (p.kind != "ugv", _vehicle_number(p.vehicle_id)))
    for prof in profiles:
        validate_profile(prof, scale, fleet)
    return Deployment(profiles=tuple(profiles), period=period, phase_offsets=offsets)


def export_profiles_csv(deployment: Deployment, fh: TextIO) -> None:
    """One row per segment in global time, grouped by vehicle.

    Floats are written with repr so a parse-back reproduces them exactly.
    """
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for prof in deployment.profiles:
        for seg in prof.segments:
            writer.writerow(
                [
                    prof.vehicle_id,
                    prof.kind,
                    repr(seg.t_start + prof.offset),
                    repr(seg.t_end + prof.offset),
                    repr(seg.velocity[0]),
                    repr(seg.velocity[1]),
                    repr(seg.velocity[2]),
                    seg.mode,
                ]
            )


def import_profiles_csv(
    fh: Iterable[str],
    period: float,
    phase_offsets: Sequence[float],
    park_pos: tuple[float, float, float],
    altitude: float,
    team_size: int,
) -> tuple[VelocityProfile, ...]:
    """Rebuild profiles from an exported CSV.

    Position anchors are not stored in the file; they are reconstructed by
    walking each vehicle's segments from the cycle start point, with
    altitude set by mode (patrol flies at `altitude`, everything else is
    grounded). Times are shifted back to cycle-local by the vehicle's
    team phase offset.
    """
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None or tuple(header) != CSV_HEADER:
        raise ValueError(f"unexpected trajectory CSV header: {header}")

    rows_by_vehicle: dict[str, list[tuple]] = {}
    kinds: dict[str, str] = {}
    for row in reader:
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise ValueError(f"malformed trajectory row: {row}")
        vid, kind, t0, t1, vx, vy, vz, mode = row
        if kind not in ("uav", "ugv"):
            raise ValueError(f"unknown vehicle kind {kind!r}")
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        kinds[vid] = kind
        rows_by_vehicle.setdefault(vid, []).append(
            (float(t0), float(t1), float(vx), float(vy), float(vz), mode)
        )

    profiles = []
    for vid in sorted(rows_by_vehicle, key=lambda v: (kinds[v] != "ugv", _vehicle_number(v))):
        rows = sorted(rows_by_vehicle[vid], key=lambda r: r[0])
        team = _team_index(vid, kinds[vid], team_size)
        if team >= len(phase_offsets):
            raise ValueError(f"vehicle {vid} implies team {team}, beyond the deployment")
        offset = phase_offsets[team]
        x, y = park_pos[0], park_pos[1]
        segments = []
        for t0, t1, vx, vy, vz, mode in rows:
            if vz != 0.0:
                raise ValueError(f"vehicle {vid}: vertical velocity is not representable")
            z = altitude if mode == MODE_PATROL else 0.0
            seg = Segment(t0 - offset, t1 - offset, (vx, vy, vz), mode, (x, y, z))
            segments.append(seg)
            x += vx * seg.duration
            y += vy * seg.duration
        profiles.append(
            VelocityProfile(
                vehicle_id=vid,
                kind=kinds[vid],
                segments=tuple(segments),
                period=period,
                offset=offset,
                park_pos=park_pos,
            )
        )
    return tuple(profiles)


def _vehicle_number(vid: str) -> int:
    try:
        return int(vid.rsplit("-", 1)[1])
    except (IndexError, ValueError):
        raise ValueError(f"vehicle id {vid!r} is not of the form kind-N") from None


def _team_index(vid: str, kind: str, team_size: int) -> int:
    num = _vehicle_number(vid)
    return num if kind == "ugv" else num // team_size
