"""Local planning: lateral roll-out candidates, cost-based selection, and
the low-level tracking controllers.

Each high-level action maps to a parameter set (speed target, allowed
lateral range, gap regulation) that reshapes what the planner is permitted
to do; the planner then samples laterally offset roll-outs, scores them on
predicted collisions, transition effort and distance from the lane center,
and the selected roll-out is tracked with pure pursuit plus a proportional
speed/gap controller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import distance_batch, overlap_batch, rect_corners_batch
from .world import Lane, VehicleState, WorldState

__all__ = [
    "PlannerConfig",
    "BehaviorParams",
    "Rollout",
    "RolloutCost",
    "Action",
    "apply_action",
    "generate_rollouts",
    "evaluate_rollouts",
    "pure_pursuit",
    "longitudinal_control",
    "find_front_vehicle",
]


class Action:
    """High-level decision codes; fixed for serialization."""

    FOLLOWING = 0
    OVERTAKING = 1
    ABORTING = 2

    ALL = (FOLLOWING, OVERTAKING, ABORTING)
    NAMES = {FOLLOWING: "following", OVERTAKING: "overtaking", ABORTING: "aborting"}


@dataclass(frozen=True)
class PlannerConfig:
    lane_width: float = 3.0
    horizon_m: float = 50.0
    transition_length_m: float = 15.0
    waypoint_spacing_m: float = 0.5
    rollout_number: int = 9

    # Cost model. The center weight must exceed the transition weight or a
    # vehicle that has left its lane settles on the boundary instead of
    # merging back (transition cost then favors staying put).
    weight_collision: float = 10.0
    weight_transition: float = 0.5
    weight_center: float = 1.0
    clearance_scale_m: float = 1.0
    overlap_penalty: float = 1.0e6
    prediction_stride: int = 4
    # Constant-velocity prediction is only trusted this far ahead; the window
    # also sets how early a lane change starts, and must stay short enough
    # that a committed overtaker cannot dodge late oncoming traffic.
    prediction_horizon_s: float = 6.0
    min_plan_speed: float = 0.5

    # Tracking controllers.
    lookahead_m: float = 4.0
    gain_speed: float = 0.8
    gain_gap: float = 0.3

    # Per-action parameter sets.
    follow_speed: float = 3.0
    overtake_speed: float = 4.0
    abort_speed: float = 2.5
    max_accel: float = 1.5
    following_distance_m: float = 10.0
    avoiding_distance_m: float = 8.0

    def __post_init__(self):
        if self.rollout_number < 1 or self.rollout_number % 2 == 0:
            raise ValueError("rollout_number must be odd and >= 1")
        if self.overtake_speed < self.follow_speed or self.abort_speed > self.follow_speed:
            raise ValueError("action speeds must satisfy abort <= follow <= overtake")


@dataclass(frozen=True)
class BehaviorParams:
    velocity: float
    acceleration: float
    following_distance: float
    avoiding_distance: float
    rollout_number: int
    rollout_id: int
    allowed_lateral_range: tuple[float, float]
    transition_weight_scale: float = 1.0
    gap_regulation: bool = True

    def __post_init__(self):
        if self.rollout_number < 1 or self.rollout_number % 2 == 0:
            raise ValueError("rollout_number must be odd and >= 1")
        if not (0 <= self.rollout_id < self.rollout_number):
            raise ValueError("rollout_id out of range")
        if min(self.following_distance, self.avoiding_distance) <= 0:
            raise ValueError("distances must be positive")
        if self.allowed_lateral_range[0] > self.allowed_lateral_range[1]:
            raise ValueError("allowed_lateral_range must be ordered")


@dataclass(frozen=True)
class Rollout:
    rollout_id: int
    target_d: float
    waypoints: np.ndarray  # (N, 2) columns (s, d), spacing = waypoint_spacing_m


@dataclass(frozen=True)
class RolloutCost:
    rollout_id: int
    collision_cost: float
    transition_cost: float
    center_cost: float
    total: float


def apply_action(action: int, base: PlannerConfig) -> BehaviorParams:
    """Map a high-level action to the planner parameter set it enables.

    Following confines roll-outs to the ego lane and regulates the gap to a
    leader. Overtaking opens the lateral range across the opposite lane and
    raises the speed target. Aborting confines the range back to the ego
    lane, halves the transition weight so the return is prompt, and slows
    down with gap regulation back on.
    """
    half = base.lane_width / 2.0
    mid = (base.rollout_number - 1) // 2
    common = dict(
        following_distance=base.following_distance_m,
        avoiding_distance=base.avoiding_distance_m,
        rollout_number=base.rollout_number,
        rollout_id=mid,
    )
    if action == Action.FOLLOWING:
        return BehaviorParams(
            velocity=base.follow_speed,
            acceleration=base.max_accel,
            allowed_lateral_range=(-half, half),
            **common,
        )
    if action == Action.OVERTAKING:
        return BehaviorParams(
            velocity=base.overtake_speed,
            acceleration=base.max_accel,
            allowed_lateral_range=(-half, base.lane_width + half),
            gap_regulation=False,
            **common,
        )
    if action == Action.ABORTING:
        return BehaviorParams(
            velocity=base.abort_speed,
            acceleration=base.max_accel,
            allowed_lateral_range=(-half, half),
            transition_weight_scale=0.5,
            **common,
        )
    raise ValueError(f"unknown action code {action!r}")


def _smoothstep(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3.0 - 2.0 * x)


def generate_rollouts(
    ego: VehicleState, cfg: PlannerConfig, params: BehaviorParams
) -> list[Rollout]:
    """Sample ``rollout_number`` lateral roll-outs over the allowed range.

    Target offsets are evenly spaced over the range (ids ascending by
    target_d); every roll-out starts at the ego's current (s, d), blends to
    its target with a smoothstep profile over the transition length, then
    holds the target.
    """
    lo, hi = params.allowed_lateral_range
    n = params.rollout_number
    if n == 1:
        targets = np.array([(lo + hi) / 2.0])
    else:
        targets = np.linspace(lo, hi, n)

    n_wp = int(round(cfg.horizon_m / cfg.waypoint_spacing_m)) + 1
    u = np.arange(n_wp) * cfg.waypoint_spacing_m
    profile = _smoothstep(u / cfg.transition_length_m)  # 0 -> 1 over L_t
    s_col = ego.s + u

    rollouts = []
    for i, target in enumerate(targets):
        d_col = ego.d + (target - ego.d) * profile
        wp = np.column_stack([s_col, d_col])
        rollouts.append(Rollout(rollout_id=i, target_d=float(target), waypoints=wp))
    return rollouts


def _prediction_samples(rollout: Rollout, cfg: PlannerConfig, v_plan: float):
    """Sampled waypoint poses and their traversal times for NPC prediction."""
    wp = rollout.waypoints
    n = wp.shape[0]
    idx = np.arange(0, n, cfg.prediction_stride)
    t = (wp[idx, 0] - wp[0, 0]) / v_plan
    keep = t <= cfg.prediction_horizon_s
    idx, t = idx[keep], t[keep]
    # Heading from the forward waypoint difference (last sample reuses previous).
    nxt = np.minimum(idx + 1, n - 1)
    prv = np.where(idx + 1 > n - 1, idx - 1, idx)
    heading = np.arctan2(wp[nxt, 1] - wp[prv, 1], wp[nxt, 0] - wp[prv, 0])
    return wp[idx], heading, t


def evaluate_rollouts(
    rollouts: list[Rollout],
    world: WorldState,
    params: BehaviorParams,
    cfg: PlannerConfig,
) -> tuple[list[RolloutCost], int]:
    """Score every roll-out and return the costs plus the selected id.

    Collision cost sums a clearance penalty against constant-velocity NPC
    predictions at sampled poses along each roll-out: a large constant for
    predicted footprint overlap, exp(-clearance/sigma) inside the avoiding
    distance, zero beyond. Transition cost is the lateral move away from
    the current offset, center cost the offset from the ego lane center.
    Ties select the lowest id.
    """
    if not rollouts:
        raise ValueError("rollouts must be non-empty")
    ego = world.ego
    v_plan = max(params.velocity, cfg.min_plan_speed)

    centers, headings, times = zip(
        *(_prediction_samples(r, cfg, v_plan) for r in rollouts)
    )
    centers = np.stack(centers)  # (R, P, 2)
    headings = np.stack(headings)
    t = times[0]  # identical spacing across roll-outs
    ego_boxes = rect_corners_batch(
        centers, headings, ego.footprint_length, ego.footprint_width
    )

    ego_reach = 0.5 * math.hypot(ego.footprint_length, ego.footprint_width)
    collision = np.zeros(len(rollouts))
    for npc in world.npcs:
        v = npc.vehicle
        direction = 1.0 if npc.lane == Lane.EGO else -1.0
        pred_s = v.s + direction * npc.target_speed * t
        pred = np.stack([pred_s, np.full_like(pred_s, v.d)], axis=-1)  # (P, 2)
        # Prescreen on center distance: beyond the avoiding distance plus
        # both half-diagonals neither overlap nor a penalty is possible.
        npc_reach = 0.5 * math.hypot(v.footprint_length, v.footprint_width)
        cdist = np.hypot(centers[..., 0] - pred_s, centers[..., 1] - v.d)  # (R, P)
        near = cdist <= params.avoiding_distance + ego_reach + npc_reach
        if not near.any():
            continue
        npc_boxes = rect_corners_batch(
            pred, np.full(pred_s.shape, v.heading), v.footprint_length, v.footprint_width
        )
        npc_near = np.broadcast_to(npc_boxes, ego_boxes.shape)[near]
        ego_near = ego_boxes[near]
        overlap = overlap_batch(ego_near, npc_near)
        clear = distance_batch(ego_near, npc_near)
        penalty = np.zeros_like(cdist)
        penalty[near] = np.where(
            overlap,
            cfg.overlap_penalty,
            np.where(
                clear < params.avoiding_distance,
                np.exp(-clear / cfg.clearance_scale_m),
                0.0,
            ),
        )
        collision += penalty.sum(axis=1)

    w_t = cfg.weight_transition * params.transition_weight_scale
    costs = []
    totals = np.empty(len(rollouts))
    for i, r in enumerate(rollouts):
        transition = abs(r.target_d - ego.d)
        center = abs(r.target_d - 0.0)
        total = cfg.weight_collision * collision[i] + w_t * transition + cfg.weight_center * center
        costs.append(
            RolloutCost(
                rollout_id=r.rollout_id,
                collision_cost=float(collision[i]),
                transition_cost=float(transition),
                center_cost=float(center),
                total=float(total),
            )
        )
        totals[i] = total
    selected = int(np.argmin(totals))  # argmin takes the first (lowest id) on ties
    return costs, selected


def pure_pursuit(
    ego: VehicleState,
    rollout: Rollout,
    lookahead: float,
    wheelbase: float,
    steering_max: float,
) -> float:
    """Geometric path tracking: steer toward the waypoint nearest to one
    lookahead ahead of the ego; returns 0 past the end of the roll-out."""
    if lookahead <= 0:
        raise ValueError("lookahead must be positive")
    wp = rollout.waypoints
    ahead = wp[wp[:, 0] > ego.s]
    if ahead.shape[0] == 0:
        return 0.0
    dist = np.hypot(ahead[:, 0] - ego.s, ahead[:, 1] - ego.d)
    target = ahead[int(np.argmin(np.abs(dist - lookahead)))]
    alpha = math.atan2(target[1] - ego.d, target[0] - ego.s) - ego.heading
    alpha = (alpha + math.pi) % (2.0 * math.pi) - math.pi
    steering = math.atan(2.0 * wheelbase * math.sin(alpha) / lookahead)
    return min(max(steering, -steering_max), steering_max)


def longitudinal_control(
    ego: VehicleState,
    front_gap: float | None,
    front_speed: float | None,
    params: BehaviorParams,
    cfg: PlannerConfig,
) -> float:
    """Acceleration command: cruise toward the target speed, or regulate the
    gap to a leader toward the following distance; slams the brakes on a
    negative gap."""
    if front_gap is None:
        accel = cfg.gain_speed * (params.velocity - ego.speed)
    elif front_gap < 0:
        return -params.acceleration
    else:
        accel = cfg.gain_speed * (front_speed - ego.speed) + cfg.gain_gap * (
            front_gap - params.following_distance
        )
    return min(max(accel, -params.acceleration), params.acceleration)


def find_front_vehicle(world: WorldState) -> tuple[float, float] | None:
    """Nearest same-direction NPC ahead in the ego's current lane corridor.

    Returns (bumper gap, leader speed) or None. Oncoming vehicles are the
    planner's collision problem, not the gap regulator's.
    """
    ego = world.ego
    corridor = world.road.lane_of(ego.d)
    best = None
    for npc in world.npcs:
        if npc.lane != Lane.EGO:
            continue
        if world.road.lane_of(npc.vehicle.d) != corridor:
            continue
        if npc.vehicle.s <= ego.s:
            continue
        gap = npc.vehicle.s - ego.s - (ego.footprint_length + npc.vehicle.footprint_length) / 2.0
        if best is None or gap < best[0]:
            best = (gap, npc.target_speed)
    return best
