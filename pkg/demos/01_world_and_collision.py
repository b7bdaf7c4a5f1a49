"""World model walkthrough: road frame, vehicle stepping, events, collision.

Run:  python demos/01_world_and_collision.py
"""

import math

from overtake_rl import (
    KinematicLimits,
    Lane,
    NpcState,
    RoadModel,
    VehicleState,
    check_collision,
    make_world,
    step_world,
)

road = RoadModel()
limits = KinematicLimits()
print(f"road: length {road.length} m, lanes at d=0 and d={road.opposite_lane_center_d},"
      f" goal at s={road.goal_s} m, time limit {road.t_max} s")

# The ego drives straight toward a stopped vehicle in its lane.
ego = VehicleState(s=0.0, d=0.0, speed=3.0)
blocker = NpcState(npc_id=1, vehicle=VehicleState(s=40.0, d=0.0), lane=Lane.EGO, target_speed=0.0)
world = make_world(road, limits, ego, [blocker])

while not world.done:
    world = step_world(world, steering=0.0, accel=0.0, dt=0.05)
event = world.terminal_event
print(f"driving blind into the blocker -> {event.kind.name} with npc {event.npc_id}"
      f" at t={event.time:.2f} s (ego reached s={world.ego.s:.1f} m)")

# Collision tests are exact on oriented rectangles.
a = VehicleState(s=10.0, d=0.0, heading=0.0)
b_far = VehicleState(s=10.0, d=3.0)
b_tilted = VehicleState(s=13.5, d=1.2, heading=math.radians(25))
print(f"side by side in separate lanes: collision = {check_collision(a, b_far)}")
print(f"tilted into the ego's corner:   collision = {check_collision(a, b_tilted)}")

# Oncoming vehicles run in decreasing s on the opposite lane center.
oncoming = NpcState(
    npc_id=2,
    vehicle=VehicleState(s=150.0, d=road.opposite_lane_center_d, heading=math.pi, speed=2.0),
    lane=Lane.OPPOSITE,
    target_speed=2.0,
)
world = make_world(road, limits, VehicleState(s=0.0, d=0.0, speed=0.0), [oncoming])
for _ in range(100):
    world = step_world(world, 0.0, 0.0, 0.05)
npc = world.npcs[0].vehicle
print(f"after 5 s the oncoming car moved {150.0 - npc.s:.1f} m toward the ego"
      f" (lateral offset still exactly {npc.d} m)")
