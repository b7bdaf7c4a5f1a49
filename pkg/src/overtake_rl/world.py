"""Two-lane road world: geometry, vehicle kinematics, NPC motion, events.

Coordinates are Frenet-like on a straight road: ``s`` is arc length along
the ego lane, ``d`` is the signed lateral offset with the ego lane center
at 0 and the opposite lane center at +lane_width. The ego follows a
kinematic bicycle model; NPCs are constant-speed lane followers. Stepping
the world checks ego-vs-NPC collisions and emits at most one terminal
event per episode, after which the world is frozen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import IntEnum

from .geometry import overlap_poses, rect_corners

__all__ = [
    "Lane",
    "EventKind",
    "WorldEvent",
    "RoadModel",
    "KinematicLimits",
    "VehicleState",
    "NpcState",
    "WorldState",
    "step_ego",
    "step_npc",
    "check_collision",
    "step_world",
    "make_world",
]


class Lane(IntEnum):
    EGO = 0
    OPPOSITE = 1


class EventKind(IntEnum):
    COLLISION = 0
    GOAL_REACHED = 1
    OFF_ROAD = 2
    TIMEOUT = 3


@dataclass(frozen=True)
class WorldEvent:
    kind: EventKind
    time: float
    npc_id: int | None = None  # struck NPC, collisions only


@dataclass(frozen=True)
class RoadModel:
    length: float = 200.0
    lane_width: float = 3.0
    goal_s: float = 120.0
    t_max: float = 60.0

    def __post_init__(self):
        if self.lane_width <= 0:
            raise ValueError("lane_width must be positive")
        if not (0 < self.goal_s <= self.length):
            raise ValueError("goal_s must lie in (0, length]")

    @property
    def ego_lane_center_d(self) -> float:
        return 0.0

    @property
    def opposite_lane_center_d(self) -> float:
        return self.lane_width

    def lane_of(self, d: float) -> Lane:
        """Lane band containing lateral offset d (boundary at lane_width/2)."""
        return Lane.EGO if d < self.lane_width / 2.0 else Lane.OPPOSITE

    def lane_center(self, lane: Lane) -> float:
        return 0.0 if lane == Lane.EGO else self.lane_width


@dataclass(frozen=True)
class KinematicLimits:
    wheelbase: float = 2.8
    steering_max: float = 0.5
    v_max: float = 4.2

    def __post_init__(self):
        vals = (self.wheelbase, self.steering_max, self.v_max)
        if not all(math.isfinite(v) and v > 0 for v in vals):
            raise ValueError("kinematic limits must be finite and positive")


@dataclass(frozen=True)
class VehicleState:
    s: float
    d: float
    heading: float = 0.0
    speed: float = 0.0
    yaw_rate: float = 0.0
    footprint_length: float = 4.0
    footprint_width: float = 1.8

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError("speed must be non-negative")
        if self.footprint_length <= 0 or self.footprint_width <= 0:
            raise ValueError("footprint dimensions must be positive")

    def corners(self):
        return rect_corners(
            self.s, self.d, self.heading, self.footprint_length, self.footprint_width
        )


@dataclass(frozen=True)
class NpcState:
    npc_id: int
    vehicle: VehicleState
    lane: Lane
    target_speed: float

    def __post_init__(self):
        if self.target_speed < 0:
            raise ValueError("target_speed must be non-negative")


@dataclass(frozen=True)
class WorldState:
    road: RoadModel
    limits: KinematicLimits
    ego: VehicleState
    npcs: tuple[NpcState, ...] = ()
    time: float = 0.0
    events: tuple[WorldEvent, ...] = ()

    @property
    def terminal_event(self) -> WorldEvent | None:
        return self.events[-1] if self.events else None

    @property
    def done(self) -> bool:
        return bool(self.events)


def make_world(
    road: RoadModel,
    limits: KinematicLimits,
    ego: VehicleState,
    npcs=(),
) -> WorldState:
    ids = [n.npc_id for n in npcs]
    if len(ids) != len(set(ids)):
        raise ValueError("npc ids must be unique")
    return WorldState(road=road, limits=limits, ego=ego, npcs=tuple(npcs))


def _check_finite(**kwargs) -> None:
    for name, value in kwargs.items():
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value!r}")


def step_ego(
    state: VehicleState,
    steering: float,
    accel: float,
    dt: float,
    limits: KinematicLimits,
) -> VehicleState:
    """Advance the ego one step with the kinematic bicycle model.

    Heading turns first (rate speed/wheelbase * tan(steering)), then the
    position advances by speed*dt along the new heading; speed is updated
    and clamped to [0, v_max] afterwards. Steering is clamped to the
    steering limit.
    """
    _check_finite(steering=steering, accel=accel, dt=dt)
    if dt <= 0:
        raise ValueError("dt must be positive")
    steering = min(max(steering, -limits.steering_max), limits.steering_max)

    new_speed = min(max(state.speed + accel * dt, 0.0), limits.v_max)
    new_heading = state.heading + (state.speed / limits.wheelbase) * math.tan(steering) * dt
    # Vehicles never reverse along the road axis; pin heading inside (-pi/2, pi/2).
    heading_cap = math.pi / 2 - 1e-6
    new_heading = min(max(new_heading, -heading_cap), heading_cap)
    return replace(
        state,
        s=state.s + state.speed * dt * math.cos(new_heading),
        d=state.d + state.speed * dt * math.sin(new_heading),
        heading=new_heading,
        speed=new_speed,
        yaw_rate=(new_heading - state.heading) / dt,
    )


def step_npc(npc: VehicleState, lane: Lane, target_speed: float, dt: float) -> VehicleState:
    """Advance a constant-speed lane follower; opposite-lane NPCs move in -s."""
    if target_speed < 0:
        raise ValueError("target_speed must be non-negative")
    direction = 1.0 if lane == Lane.EGO else -1.0
    return replace(
        npc,
        s=npc.s + direction * target_speed * dt,
        heading=0.0 if lane == Lane.EGO else math.pi,
        speed=target_speed,
        yaw_rate=0.0,
    )


def check_collision(a: VehicleState, b: VehicleState) -> bool:
    """Exact separating-axis overlap test of the two oriented footprints."""
    return overlap_poses(
        a.s, a.d, a.heading, a.footprint_length, a.footprint_width,
        b.s, b.d, b.heading, b.footprint_length, b.footprint_width,
    )


def step_world(world: WorldState, steering: float, accel: float, dt: float) -> WorldState:
    """Advance ego and NPCs by dt and emit the first applicable terminal event.

    Event priority when several conditions hold on the same step:
    collision, then off_road, then goal_reached, then timeout.
    """
    if world.done:
        raise RuntimeError("cannot step a terminated world")

    ego = step_ego(world.ego, steering, accel, dt, world.limits)
    npcs = tuple(
        replace(n, vehicle=step_npc(n.vehicle, n.lane, n.target_speed, dt))
        for n in world.npcs
    )
    time = world.time + dt
    road = world.road

    event: WorldEvent | None = None
    for npc in npcs:
        if check_collision(ego, npc.vehicle):
            event = WorldEvent(EventKind.COLLISION, time, npc.npc_id)
            break
    if event is None and not (-road.lane_width <= ego.d <= 2.0 * road.lane_width):
        event = WorldEvent(EventKind.OFF_ROAD, time)
    if event is None and ego.s >= road.goal_s and abs(ego.d) <= road.lane_width / 4.0:
        event = WorldEvent(EventKind.GOAL_REACHED, time)
    if event is None and time >= road.t_max:
        event = WorldEvent(EventKind.TIMEOUT, time)

    return replace(
        world,
        ego=ego,
        npcs=npcs,
        time=time,
        events=world.events + ((event,) if event else ()),
    )
