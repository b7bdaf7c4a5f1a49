"""World model tests: ego kinematics, NPC motion, collision, events."""

import math

import numpy as np
import pytest

from overtake_rl.world import (
    EventKind,
    KinematicLimits,
    Lane,
    NpcState,
    RoadModel,
    VehicleState,
    check_collision,
    make_world,
    step_ego,
    step_npc,
    step_world,
)
from overtake_rl.geometry import signed_clearance, rect_corners

from _oracles import sampling_overlap

LIMITS = KinematicLimits()


def drive(state, steering, accel, dt, n, limits=LIMITS):
    for _ in range(n):
        state = step_ego(state, steering, accel, dt, limits)
    return state


class TestStepEgo:
    def test_straight_line(self):
        state = VehicleState(s=1.0, d=0.5, speed=2.0)
        out = step_ego(state, steering=0.0, accel=0.0, dt=0.1, limits=LIMITS)
        assert out.s == pytest.approx(1.2, abs=1e-12)
        assert out.d == 0.5
        assert out.heading == 0.0
        assert out.speed == 2.0

    def test_constant_steering_matches_fine_integration(self):
        # Oracle: the same scheme run with 10x finer substeps over the same
        # horizon; the coarse trajectory must land within 1e-3 m.
        steering, speed, dt, n = 0.2, 2.0, 0.005, 100
        start = VehicleState(s=0.0, d=0.0, speed=speed)
        coarse = drive(start, steering, 0.0, dt, n)
        fine = drive(start, steering, 0.0, dt / 10.0, n * 10)
        err = math.hypot(coarse.s - fine.s, coarse.d - fine.d)
        assert err < 1e-3
        # Effective turn radius ~ wheelbase / tan(steering).
        arc = speed * dt * n
        radius = arc / abs(coarse.heading)
        assert radius == pytest.approx(LIMITS.wheelbase / math.tan(steering), rel=1e-9)

    def test_speed_clamps_at_zero(self):
        state = VehicleState(s=0.0, d=0.0, speed=2.0)
        for _ in range(20):
            state = step_ego(state, 0.0, -10.0, 0.05, LIMITS)
            assert state.speed >= 0.0
        assert state.speed == 0.0

    def test_speed_clamps_at_vmax(self):
        state = VehicleState(s=0.0, d=0.0, speed=4.0)
        state = drive(state, 0.0, 5.0, 0.05, 50)
        assert state.speed == LIMITS.v_max

    def test_convergence_order(self):
        # Halving the step tenfold shrinks the error by roughly tenfold.
        steering, speed = 0.3, 3.0
        start = VehicleState(s=0.0, d=0.0, speed=speed)
        ref = drive(start, steering, 0.0, 0.0005, 10_000)
        coarse = drive(start, steering, 0.0, 0.05, 100)
        finer = drive(start, steering, 0.0, 0.005, 1000)
        err_coarse = math.hypot(coarse.s - ref.s, coarse.d - ref.d)
        err_finer = math.hypot(finer.s - ref.s, finer.d - ref.d)
        assert err_finer < err_coarse / 5.0

    def test_rejects_non_finite(self):
        state = VehicleState(s=0.0, d=0.0, speed=1.0)
        with pytest.raises(ValueError):
            step_ego(state, math.nan, 0.0, 0.05, LIMITS)
        with pytest.raises(ValueError):
            step_ego(state, 0.0, math.inf, 0.05, LIMITS)
        with pytest.raises(ValueError):
            step_ego(state, 0.0, 0.0, -0.05, LIMITS)

    def test_yaw_rate_consistent(self):
        state = VehicleState(s=0.0, d=0.0, speed=2.0)
        out = step_ego(state, 0.25, 0.0, 0.05, LIMITS)
        assert out.yaw_rate == pytest.approx((out.heading - state.heading) / 0.05)


class TestStepNpc:
    def test_ego_lane_advances(self):
        npc = VehicleState(s=10.0, d=0.0)
        out = step_npc(npc, Lane.EGO, 2.0, 0.5)
        assert out.s == pytest.approx(11.0)
        assert out.d == 0.0

    def test_opposite_lane_sign(self):
        npc = VehicleState(s=50.0, d=3.0, heading=math.pi)
        out = step_npc(npc, Lane.OPPOSITE, 3.0, 0.5)
        assert out.s == pytest.approx(48.5)
        assert out.d == 3.0

    def test_zero_speed_is_stationary(self):
        npc = VehicleState(s=30.0, d=0.0)
        out = step_npc(npc, Lane.EGO, 0.0, 0.5)
        assert out.s == 30.0

    def test_lateral_offset_constant_over_many_steps(self):
        npc = VehicleState(s=0.0, d=3.0, heading=math.pi)
        for _ in range(500):
            npc = step_npc(npc, Lane.OPPOSITE, 1.7, 0.05)
        assert npc.d == 3.0


class TestCheckCollision:
    def test_identical_poses(self):
        a = VehicleState(s=5.0, d=0.0)
        assert check_collision(a, a) is True

    def test_disjoint_lanes(self):
        lane_width = 3.0
        a = VehicleState(s=5.0, d=0.0, footprint_width=1.8)
        b = VehicleState(s=5.0, d=lane_width, footprint_width=1.8)
        assert check_collision(a, b) is False

    def test_symmetry(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            a = VehicleState(
                s=rng.uniform(0, 10), d=rng.uniform(-4, 8),
                heading=rng.uniform(-1.2, 1.2),
                footprint_length=rng.uniform(2, 5), footprint_width=rng.uniform(1, 2.5),
            )
            b = VehicleState(
                s=rng.uniform(0, 10), d=rng.uniform(-4, 8),
                heading=rng.uniform(-1.2, 1.2),
                footprint_length=rng.uniform(2, 5), footprint_width=rng.uniform(1, 2.5),
            )
            assert check_collision(a, b) == check_collision(b, a)

    def test_agrees_with_sampling_oracle(self):
        # Smaller sweep here; the full 10k-pair run lives in the acceptance suite.
        rng = np.random.default_rng(5)
        checked = 0
        for _ in range(1500):
            pa = (rng.uniform(0, 10), rng.uniform(-4, 8), rng.uniform(-math.pi, math.pi),
                  rng.uniform(2, 5), rng.uniform(1, 2.5))
            pb = (rng.uniform(0, 10), rng.uniform(-4, 8), rng.uniform(-math.pi, math.pi),
                  rng.uniform(2, 5), rng.uniform(1, 2.5))
            ca = rect_corners(*pa)
            cb = rect_corners(*pb)
            if abs(signed_clearance(ca, cb)) <= 1e-3:
                continue
            a = VehicleState(s=pa[0], d=pa[1], heading=pa[2],
                             footprint_length=pa[3], footprint_width=pa[4])
            b = VehicleState(s=pb[0], d=pb[1], heading=pb[2],
                             footprint_length=pb[3], footprint_width=pb[4])
            assert check_collision(a, b) == sampling_overlap(pa, pb, boundary_pitch=0.02)
            checked += 1
        assert checked > 1200


def small_world(ego, npcs=(), goal_s=120.0, t_max=60.0):
    road = RoadModel(length=200.0, lane_width=3.0, goal_s=goal_s, t_max=t_max)
    return make_world(road, LIMITS, ego, npcs)


class TestStepWorld:
    def test_drive_into_stationary_npc(self):
        # Closing-distance oracle: bumpers meet when the gap of 20 m between
        # centers shrinks to 4 m (two half-lengths), i.e. after 16 m of travel
        # at 2 m/s -> t = 8.0 s.
        ego = VehicleState(s=0.0, d=0.0, speed=2.0)
        npc = NpcState(npc_id=1, vehicle=VehicleState(s=20.0, d=0.0), lane=Lane.EGO, target_speed=0.0)
        world = small_world(ego, [npc])
        while not world.done:
            world = step_world(world, 0.0, 0.0, 0.05)
        event = world.terminal_event
        assert event.kind == EventKind.COLLISION
        assert event.npc_id == 1
        assert event.time == pytest.approx(8.0, abs=0.05 + 1e-9)

    def test_goal_reached_in_correct_lane(self):
        ego = VehicleState(s=119.95, d=0.0, speed=2.0)
        world = small_world(ego)
        world = step_world(world, 0.0, 0.0, 0.05)
        assert world.terminal_event.kind == EventKind.GOAL_REACHED

    def test_no_goal_in_wrong_lane(self):
        ego = VehicleState(s=119.95, d=3.0, speed=2.0)
        world = small_world(ego)
        world = step_world(world, 0.0, 0.0, 0.05)
        assert world.terminal_event is None

    def test_timeout_on_empty_road(self):
        ego = VehicleState(s=0.0, d=0.0, speed=0.0)
        world = small_world(ego, t_max=1.0)
        steps = 0
        while not world.done:
            world = step_world(world, 0.0, 0.0, 0.05)
            steps += 1
        assert world.terminal_event.kind == EventKind.TIMEOUT
        assert steps == 20

    def test_off_road(self):
        ego = VehicleState(s=0.0, d=5.9, heading=0.4, speed=3.0)
        world = small_world(ego)
        while not world.done:
            world = step_world(world, 0.5, 0.0, 0.05)
        assert world.terminal_event.kind == EventKind.OFF_ROAD

    def test_terminated_world_rejects_stepping(self):
        ego = VehicleState(s=119.95, d=0.0, speed=2.0)
        world = small_world(ego)
        world = step_world(world, 0.0, 0.0, 0.05)
        assert world.done
        with pytest.raises(RuntimeError):
            step_world(world, 0.0, 0.0, 0.05)

    def test_single_terminal_event(self):
        ego = VehicleState(s=0.0, d=0.0, speed=3.0)
        npc = NpcState(npc_id=1, vehicle=VehicleState(s=15.0, d=0.0), lane=Lane.EGO, target_speed=0.0)
        world = small_world(ego, [npc], t_max=3.0)
        while not world.done:
            world = step_world(world, 0.0, 0.0, 0.05)
        assert len(world.events) == 1

    def test_time_strictly_increases(self):
        ego = VehicleState(s=0.0, d=0.0, speed=1.0)
        world = small_world(ego)
        for k in range(10):
            world = step_world(world, 0.0, 0.0, 0.05)
            assert world.time == pytest.approx(0.05 * (k + 1))


class TestValidation:
    def test_negative_speed_rejected(self):
        with pytest.raises(ValueError):
            VehicleState(s=0.0, d=0.0, speed=-1.0)

    def test_bad_road(self):
        with pytest.raises(ValueError):
            RoadModel(length=100.0, goal_s=150.0)
        with pytest.raises(ValueError):
            RoadModel(lane_width=0.0)

    def test_duplicate_npc_ids_rejected(self):
        ego = VehicleState(s=0.0, d=0.0)
        npc = NpcState(npc_id=1, vehicle=VehicleState(s=10.0, d=0.0), lane=Lane.EGO, target_speed=1.0)
        with pytest.raises(ValueError):
            make_world(RoadModel(), LIMITS, ego, [npc, npc])
