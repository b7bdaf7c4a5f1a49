"""Decision-cadence environment: one step = one high-level decision.

Each step maps the action to planner parameters, generates and scores
roll-outs, then runs the physics for one decision period while tracking
the selected roll-out with pure pursuit and the longitudinal controller.
The same environment drives both training and benchmark episodes.
"""

from __future__ import annotations

import numpy as np

from .config import RunConfig
from .dqn import encode_observation, reward
from .planner import (
    apply_action,
    evaluate_rollouts,
    find_front_vehicle,
    generate_rollouts,
    longitudinal_control,
    pure_pursuit,
)
from .scenarios import ScenarioSpec
from .world import (
    EventKind,
    Lane,
    NpcState,
    VehicleState,
    WorldState,
    check_collision,
    make_world,
    step_world,
)

__all__ = ["OvertakeEnv", "world_from_spec", "outcome_of"]


def world_from_spec(
    spec: ScenarioSpec, cfg: RunConfig, exploring_start: bool = False
) -> WorldState:
    """Initial world: ego at s=0 in its lane; NPC1 leads in the same lane at
    d1; NPC2 (and NPC3) oncoming at cumulative gaps along the road.

    With ``exploring_start`` (training only) half the scenarios instead open
    mid-episode: the world clock is advanced by a random offset (NPCs moved
    along their lanes accordingly, so oncoming traffic may already be past)
    and the ego is placed near the leader at a random lateral offset, all
    drawn from the scenario's own seed stream. Greedy exploration almost
    never reaches pass-phase or after-the-oncoming-car states on its own,
    so their values would otherwise never be learned; evaluation episodes
    never use this.
    """
    vehicle = cfg.vehicle
    ego = VehicleState(
        s=0.0,
        d=0.0,
        speed=min(vehicle.start_speed, cfg.limits.v_max),
        footprint_length=vehicle.length,
        footprint_width=vehicle.width,
    )
    time_skip = 0.0
    if exploring_start:
        rng = np.random.default_rng(np.random.SeedSequence((spec.seed, 1)))
        if rng.random() < 0.5:
            # Pass-corridor start: ego near the leader at a random lateral
            # offset, as if a maneuver were underway.
            ego = VehicleState(
                s=max(0.0, spec.d1 + rng.uniform(-18.0, 2.0)),
                d=rng.uniform(0.0, cfg.road.lane_width),
                speed=rng.uniform(2.0, cfg.limits.v_max),
                footprint_length=vehicle.length,
                footprint_width=vehicle.width,
            )
    npcs = []
    if spec.npc_count >= 1:
        npcs.append(
            NpcState(
                npc_id=1,
                vehicle=VehicleState(
                    s=spec.d1 + spec.v1 * time_skip,
                    d=cfg.road.ego_lane_center_d,
                    speed=spec.v1,
                    footprint_length=vehicle.length,
                    footprint_width=vehicle.width,
                ),
                lane=Lane.EGO,
                target_speed=spec.v1,
            )
        )
    if spec.npc_count >= 2:
        npcs.append(
            NpcState(
                npc_id=2,
                vehicle=VehicleState(
                    s=spec.d1 + spec.d2 - spec.v2 * time_skip,
                    d=cfg.road.opposite_lane_center_d,
                    heading=np.pi,
                    speed=spec.v2,
                    footprint_length=vehicle.length,
                    footprint_width=vehicle.width,
                ),
                lane=Lane.OPPOSITE,
                target_speed=spec.v2,
            )
        )
    if spec.npc_count >= 3:
        npcs.append(
            NpcState(
                npc_id=3,
                vehicle=VehicleState(
                    s=spec.d1 + spec.d2 + (spec.d3 or 0.0) - (spec.v3 or 0.0) * time_skip,
                    d=cfg.road.opposite_lane_center_d,
                    heading=np.pi,
                    speed=spec.v3 or 0.0,
                    footprint_length=vehicle.length,
                    footprint_width=vehicle.width,
                ),
                lane=Lane.OPPOSITE,
                target_speed=spec.v3 or 0.0,
            )
        )
    if time_skip and any(check_collision(ego, n.vehicle) for n in npcs):
        return world_from_spec(spec, cfg, exploring_start=False)
    return make_world(cfg.road, cfg.limits, ego, npcs)


def outcome_of(world: WorldState) -> str:
    event = world.terminal_event
    if event is None:
        return "running"
    if event.kind == EventKind.GOAL_REACHED:
        return "success"
    if event.kind == EventKind.COLLISION:
        return "crash"
    if event.kind == EventKind.OFF_ROAD:
        return "off_road"
    return "timeout"


class OvertakeEnv:
    """Gym-style wrapper over the world at the decision cadence."""

    def __init__(self, spec: ScenarioSpec, cfg: RunConfig, exploring_start: bool = False):
        self.spec = spec
        self.cfg = cfg
        self.exploring_start = exploring_start
        self.world: WorldState | None = None
        self._prev_target_lane: Lane | None = None

    def reset(self) -> np.ndarray:
        self.world = world_from_spec(self.spec, self.cfg, self.exploring_start)
        self._prev_target_lane = self.cfg.road.lane_of(self.world.ego.d)
        return encode_observation(self.world, self.cfg.obs)

    def step(self, action: int):
        """Apply one decision; returns (obs, reward, done, info)."""
        if self.world is None:
            raise RuntimeError("call reset() before step()")
        if self.world.done:
            raise RuntimeError("episode already terminated")
        cfg = self.cfg
        prev_world = self.world

        params = apply_action(action, cfg.planner)
        rollouts = generate_rollouts(prev_world.ego, cfg.planner, params)
        costs, selected = evaluate_rollouts(rollouts, prev_world, params, cfg.planner)
        rollout = rollouts[selected]
        target_lane = cfg.road.lane_of(rollout.target_d)

        world = prev_world
        first_steering = 0.0
        for i in range(cfg.sim.decision_period_steps):
            steering = pure_pursuit(
                world.ego,
                rollout,
                cfg.planner.lookahead_m,
                cfg.limits.wheelbase,
                cfg.limits.steering_max,
            )
            front = find_front_vehicle(world) if params.gap_regulation else None
            gap, lead_speed = front if front is not None else (None, None)
            accel = longitudinal_control(world.ego, gap, lead_speed, params, cfg.planner)
            world = step_world(world, steering, accel, cfg.sim.dt)
            if i == 0:
                first_steering = steering
            if world.done:
                break
        self.world = world

        r = reward(
            prev_world,
            action,
            world,
            cfg.reward,
            prev_target_lane=self._prev_target_lane,
            target_lane=target_lane,
        )
        self._prev_target_lane = target_lane
        obs = encode_observation(world, cfg.obs)
        info = {
            "outcome": outcome_of(world),
            "event": world.terminal_event,
            "selected_rollout": selected,
            "costs": costs,
            # State after the decision interval, with the steering command
            # issued at the decision itself.
            "trace_row": (
                world.time,
                world.ego.s,
                world.ego.d,
                first_steering,
                world.ego.speed,
                action,
                selected,
            ),
        }
        return obs, r, world.done, info
