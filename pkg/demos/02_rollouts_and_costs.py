"""Local planner walkthrough: action parameter sets, roll-outs, cost table.

Run:  python demos/02_rollouts_and_costs.py
"""

from overtake_rl import (
    Action,
    KinematicLimits,
    Lane,
    NpcState,
    PlannerConfig,
    RoadModel,
    VehicleState,
    apply_action,
    evaluate_rollouts,
    generate_rollouts,
    make_world,
)

cfg = PlannerConfig()
ego = VehicleState(s=0.0, d=0.0, speed=3.0)

for action in Action.ALL:
    params = apply_action(action, cfg)
    lo, hi = params.allowed_lateral_range
    print(f"{Action.NAMES[action]:10s} -> v={params.velocity} m/s, lateral range [{lo}, {hi}],"
          f" gap regulation {'on' if params.gap_regulation else 'off'}")

# A slow leader 18 m ahead: compare the cost table with and without it.
leader = NpcState(npc_id=1, vehicle=VehicleState(s=18.0, d=0.0, speed=1.0), lane=Lane.EGO, target_speed=1.0)
road = RoadModel()
limits = KinematicLimits()

params = apply_action(Action.OVERTAKING, cfg)
rollouts = generate_rollouts(ego, cfg, params)

for label, npcs in [("empty road", []), ("slow leader 18 m ahead", [leader])]:
    world = make_world(road, limits, ego, npcs)
    costs, selected = evaluate_rollouts(rollouts, world, params, cfg)
    print(f"\n{label}: selected roll-out {selected} (target_d={rollouts[selected].target_d:+.2f})")
    print("  id  target_d  collision   transition  center   total")
    for c, r in zip(costs, rollouts):
        mark = " <--" if c.rollout_id == selected else ""
        print(f"  {c.rollout_id}   {r.target_d:+6.2f}   {c.collision_cost:9.3f}"
              f"  {c.transition_cost:9.2f}  {c.center_cost:6.2f}  {c.total:8.3f}{mark}")
