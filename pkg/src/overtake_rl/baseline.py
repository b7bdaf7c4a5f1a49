"""Rule-based high-level decision maker used as the comparison baseline.

It keeps the lane until a slower vehicle ahead closes inside the trigger
gap, then commits to the overtake and holds it until the ego has cleared
the passed vehicle by the merge margin. There is no abort transition:
traffic appearing on the opposite lane mid-maneuver does not change the
decision, which is exactly the failure mode the learned agent removes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

from .planner import Action
from .world import Lane, WorldState

__all__ = ["BaselinePhase", "BaselineConfig", "BaselineState", "rule_based_decide"]


class BaselinePhase(IntEnum):
    LANE_KEEP = 0
    COMMITTED_OVERTAKE = 1


@dataclass(frozen=True)
class BaselineConfig:
    trigger_gap: float = 25.0
    clear_margin: float = 8.0
    target_speed: float = 3.0  # cruise target; slower leaders trigger the pass


@dataclass(frozen=True)
class BaselineState:
    phase: BaselinePhase = BaselinePhase.LANE_KEEP
    target_npc_id: int | None = None
    overtake_start_s: float = 0.0


def _front_same_lane(world: WorldState):
    ego = world.ego
    best = None
    for npc in world.npcs:
        if npc.lane != Lane.EGO or npc.vehicle.s <= ego.s:
            continue
        if best is None or npc.vehicle.s < best.vehicle.s:
            best = npc
    return best


def rule_based_decide(
    world: WorldState, state: BaselineState, cfg: BaselineConfig
) -> tuple[int, BaselineState]:
    """Pure decision function; never emits the abort action."""
    ego = world.ego
    if state.phase == BaselinePhase.LANE_KEEP:
        front = _front_same_lane(world)
        if front is not None:
            gap = (
                front.vehicle.s
                - ego.s
                - (ego.footprint_length + front.vehicle.footprint_length) / 2.0
            )
            if gap < cfg.trigger_gap and front.target_speed < cfg.target_speed:
                return Action.OVERTAKING, BaselineState(
                    phase=BaselinePhase.COMMITTED_OVERTAKE,
                    target_npc_id=front.npc_id,
                    overtake_start_s=ego.s,
                )
        return Action.FOLLOWING, state

    target = next((n for n in world.npcs if n.npc_id == state.target_npc_id), None)
    if target is None or ego.s >= target.vehicle.s + cfg.clear_margin:
        return Action.FOLLOWING, BaselineState()
    return Action.OVERTAKING, state
