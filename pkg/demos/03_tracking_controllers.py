"""Tracking control walkthrough: pure pursuit and gap regulation.

Run:  python demos/03_tracking_controllers.py
"""

import numpy as np

from overtake_rl import (
    Action,
    KinematicLimits,
    PlannerConfig,
    Rollout,
    VehicleState,
    apply_action,
    longitudinal_control,
    pure_pursuit,
    step_ego,
)

cfg = PlannerConfig()
limits = KinematicLimits()
dt = 0.05

# Pure pursuit: recover from a 1 m lateral offset on a straight path.
path = Rollout(0, 0.0, np.column_stack([np.arange(0.0, 160.0, 0.5), np.zeros(320)]))
state = VehicleState(s=0.0, d=1.0, speed=3.0)
t = 0.0
print("pure pursuit from 1 m offset at 3 m/s:")
marks = {2.0, 5.0, 10.0, 20.0, 30.0}
while t < 30.0:
    steering = pure_pursuit(state, path, cfg.lookahead_m, limits.wheelbase, limits.steering_max)
    state = step_ego(state, steering, 0.0, dt, limits)
    t += dt
    if round(t, 2) in marks:
        print(f"  t={t:5.1f} s   d={state.d:+.4f} m   steering={steering:+.4f} rad")

# Gap regulation: settle at the following distance behind a slower leader.
params = apply_action(Action.FOLLOWING, cfg)
ego = VehicleState(s=0.0, d=0.0, speed=3.0)
leader_s, leader_v = 34.0, 2.0
print(f"\ngap regulation toward following_distance={params.following_distance} m"
      f" behind a {leader_v} m/s leader:")
t = 0.0
while t < 40.0:
    gap = leader_s - ego.s - 4.0  # bumper to bumper with two 4 m cars
    accel = longitudinal_control(ego, gap, leader_v, params, cfg)
    ego = step_ego(ego, 0.0, accel, dt, limits)
    leader_s += leader_v * dt
    t += dt
    if round(t, 2) in {5.0, 10.0, 20.0, 30.0, 40.0}:
        print(f"  t={t:5.1f} s   gap={gap:6.2f} m   speed={ego.speed:.2f} m/s")
