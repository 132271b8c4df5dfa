import io
import math
import random

import pytest

from skysweep.geometry import FleetParams, build_grid
from skysweep.schedule import build_plan
from skysweep.trajectory import (
    MODE_CARRIED,
    MODE_CHARGING,
    MODE_PARKED,
    MODE_PATROL,
    Deployment,
    closure_error,
    deploy,
    export_profiles_csv,
    import_profiles_csv,
    uav_profile,
    ugv_profile,
    validate_profile,
)


def _desk_plan(ugv_count=1):
    grid = build_grid(8.0, 8.0, 1.0, 1.0)
    fleet = FleetParams(
        uav_count=2 * ugv_count,
        ugv_count=ugv_count,
        energy_capacity=12.0,
        drain_rate=0.5,
        charge_rate=0.5,
        uav_speed=1.0,
        ugv_speed=2.0,
    )
    return build_plan(grid, fleet, 4, 4)


def test_ugv_segments_tile_period():
    plan = _desk_plan()
    segs = ugv_profile(plan)
    assert segs[0].t_start == 0.0
    assert segs[-1].t_end == pytest.approx(plan.period)
    for a, b in zip(segs, segs[1:]):
        assert a.t_end == b.t_start
    assert {s.mode for s in segs} <= {MODE_PARKED, MODE_CARRIED, MODE_CHARGING}
    assert all(s.velocity[2] == 0.0 for s in segs)
    assert all(s.start_pos[2] == 0.0 for s in segs)


def test_ugv_dwell_at_each_release():
    plan = _desk_plan()
    segs = ugv_profile(plan)
    parked = [s for s in segs if s.mode == MODE_PARKED]
    assert len(parked) == plan.partitions.count
    for visit, seg in enumerate(parked):
        block = plan.partitions.partitions[plan.partition_order[visit]]
        assert seg.t_start == pytest.approx(plan.release_times[visit])
        assert seg.duration == pytest.approx(plan.dwell_time)
        assert seg.start_pos == block.centroid


def test_uav_patrols_each_release_then_docks():
    plan = _desk_plan()
    segs = uav_profile(plan, slot=1)
    patrol = [s for s in segs if s.mode == MODE_PATROL]
    assert patrol, "no patrol segments"
    assert all(s.start_pos[2] == plan.grid.altitude for s in patrol)
    # patrol bursts begin exactly at the release times
    burst_starts = [
        s.t_start for prev, s in zip([None] + patrol[:-1], patrol)
        if prev is None or s.t_start != prev.t_end
    ]
    assert burst_starts == pytest.approx(list(plan.release_times))
    # between releases, the UAV is grounded
    grounded = [s for s in segs if s.mode != MODE_PATROL]
    assert all(s.start_pos[2] == 0.0 for s in grounded)


def test_patrol_speed_at_cap():
    plan = _desk_plan()
    for slot in (1, 2):
        for seg in uav_profile(plan, slot):
            speed = math.hypot(*seg.velocity)
            if seg.mode == MODE_PATROL:
                assert speed == pytest.approx(plan.fleet.uav_speed)
            elif seg.mode == MODE_CARRIED:
                assert speed == pytest.approx(plan.fleet.ugv_speed)
            else:
                assert speed == 0.0


def test_carried_matches_carrier():
    plan = _desk_plan()
    dep = deploy(plan)
    ugv = dep.ugv_profiles[0]
    rng = random.Random(4)
    for prof in dep.uav_profiles:
        for _ in range(40):
            t = rng.uniform(0.0, plan.period)
            pos, vel, mode = prof.state_at(t)
            if mode == MODE_CARRIED:
                gpos, gvel, _ = ugv.state_at(t)
                assert pos == gpos
                assert vel == gvel


def test_deploy_phase_offsets_and_prestart():
    plan = _desk_plan(ugv_count=2)
    dep = deploy(plan)
    assert dep.phase_offsets == (0.0, plan.period / 2)
    assert [p.vehicle_id for p in dep.profiles] == [
        "ugv-0", "ugv-1", "uav-0", "uav-1", "uav-2", "uav-3",
    ]
    late = [p for p in dep.profiles if p.offset > 0]
    assert late
    release = plan.release_point
    for prof in late:
        pos, vel, mode = prof.state_at(prof.offset / 2)
        assert mode == MODE_PARKED
        assert pos == (release[0], release[1], 0.0)
        assert vel == (0.0, 0.0, 0.0)


def test_profiles_validate_and_close():
    plan = _desk_plan(ugv_count=2)
    dep = deploy(plan)
    scale = max(plan.grid.width, plan.grid.height)
    for prof in dep.profiles:
        validate_profile(prof, scale, plan.fleet)  # raises on any defect
        assert closure_error(prof) < 1e-6


def test_no_float_noise_segments():
    # ulp-thin waits would collapse to zero width in the CSV round trip
    plan = _desk_plan(ugv_count=2)
    dep = deploy(plan)
    floor = 1e-12 * plan.period
    for prof in dep.profiles:
        assert min(s.duration for s in prof.segments) > floor


def test_cycle_wraps_around():
    plan = _desk_plan()
    dep = deploy(plan)
    for prof in dep.profiles:
        p0, v0, m0 = prof.state_at(0.0)
        p1, v1, m1 = prof.state_at(plan.period)
        assert math.dist(p0, p1) < 1e-6
        assert (v0, m0) == (v1, m1)


def test_csv_round_trip_positions():
    plan = _desk_plan(ugv_count=2)
    dep = deploy(plan)
    buf = io.StringIO()
    export_profiles_csv(dep, buf)
    buf.seek(0)
    release = plan.release_point
    profiles = import_profiles_csv(
        buf,
        period=plan.period,
        phase_offsets=dep.phase_offsets,
        park_pos=(release[0], release[1], 0.0),
        altitude=plan.grid.altitude,
        team_size=plan.fleet.team_size,
    )
    assert [p.vehicle_id for p in profiles] == [p.vehicle_id for p in dep.profiles]
    scale = max(plan.grid.width, plan.grid.height)
    for prof in profiles:
        validate_profile(prof, scale, plan.fleet)
    rng = random.Random(8)
    by_id = {p.vehicle_id: p for p in profiles}
    for orig in dep.profiles:
        redone = by_id[orig.vehicle_id]
        assert len(redone.segments) == len(orig.segments)
        for _ in range(60):
            t = rng.uniform(0.0, 3 * plan.period)
            pos_a, vel_a, mode_a = orig.state_at(t)
            pos_b, vel_b, mode_b = redone.state_at(t)
            assert math.dist(pos_a, pos_b) < 1e-9 * 8.0 + 1e-12
            assert vel_a == vel_b
            assert mode_a == mode_b


def test_csv_round_trip_is_exact_on_times():
    plan = _desk_plan()
    dep = deploy(plan)
    buf = io.StringIO()
    export_profiles_csv(dep, buf)
    buf.seek(0)
    release = plan.release_point
    profiles = import_profiles_csv(
        buf, plan.period, dep.phase_offsets, (release[0], release[1], 0.0),
        plan.grid.altitude, plan.fleet.team_size,
    )
    for orig, redone in zip(dep.profiles, profiles):
        for sa, sb in zip(orig.segments, redone.segments):
            assert sa.t_start == sb.t_start
            assert sa.t_end == sb.t_end
            assert sa.velocity == sb.velocity
            assert sa.mode == sb.mode


def test_import_rejects_bad_header():
    with pytest.raises(ValueError):
        import_profiles_csv(
            io.StringIO("foo,bar\n"), 10.0, (0.0,), (0.0, 0.0, 0.0), 1.0, 1
        )


def test_pin_below_requirement_rejected():
    grid = build_grid(8.0, 8.0, 1.0, 1.0)
    fleet = FleetParams(2, 1, 12.0, 0.5, 0.5, 1.0, 2.0)
    plan = build_plan(grid, fleet, 4, 4, pin_cover_energy=3.0)
    assert plan.feasible  # the timetable itself is consistent
    with pytest.raises(ValueError, match="pinned"):
        deploy(plan)


def test_infeasible_plan_rejected():
    grid = build_grid(8.0, 8.0, 1.0, 1.0)
    fleet = FleetParams(2, 1, 0.5, 0.5, 0.5, 1.0, 2.0)
    plan = build_plan(grid, fleet, 4, 4)
    with pytest.raises(ValueError, match="infeasible"):
        deploy(plan)
    with pytest.raises(ValueError, match="infeasible"):
        ugv_profile(plan)
