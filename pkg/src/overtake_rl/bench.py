"""Benchmark harness: closed-loop episodes, paired metrics, decision maps,
and trace export.

Policies share one interface (``reset`` + ``decide``) so the learned
agent, the rule-based baseline, and scripted reference policies all run
through the identical planner and controller stack. Episodes are
independent, so a batch may run across processes; results merge in
scenario-id order and are byte-identical to a sequential run.
"""

from __future__ import annotations

import multiprocessing
from dataclasses import dataclass, field

import numpy as np

from .baseline import BaselineConfig, BaselineState, rule_based_decide
from .config import RunConfig
from .dqn import ObsConfig, encode_observation
from .env import OvertakeEnv, outcome_of, world_from_spec
from .planner import Action
from .qnet import QNetwork
from .scenarios import ScenarioSpec
from .world import Lane, NpcState, VehicleState, WorldState, make_world

__all__ = [
    "GreedyPolicy",
    "BaselinePolicy",
    "AbortRulePolicy",
    "EpisodeResult",
    "MetricsTable",
    "run_episode",
    "run_batch",
    "aggregate_metrics",
    "decision_map",
    "export_trace",
    "load_trace",
    "lane_excursions",
    "abort_demo_spec",
]


class GreedyPolicy:
    """Greedy DQN policy (epsilon = 0); ties take the lowest action code."""

    def __init__(self, net: QNetwork, obs_cfg: ObsConfig):
        if net.input_dim != obs_cfg.dim:
            raise ValueError(
                f"model input dimension {net.input_dim} does not match "
                f"observation dimension {obs_cfg.dim}"
            )
        self.net = net
        self.obs_cfg = obs_cfg

    def reset(self) -> None:
        pass

    def decide(self, world: WorldState, obs: np.ndarray) -> int:
        return int(np.argmax(self.net.forward(obs)))


class BaselinePolicy:
    """Commit-to-overtake rule-based policy; never aborts."""

    def __init__(self, cfg: BaselineConfig):
        self.cfg = cfg
        self.state = BaselineState()

    def reset(self) -> None:
        self.state = BaselineState()

    def decide(self, world: WorldState, obs: np.ndarray) -> int:
        action, self.state = rule_based_decide(world, self.state, self.cfg)
        return action


class AbortRulePolicy:
    """Hand-specified abortable-overtake rule, used to demonstrate the abort
    mechanics through the planner stack without any learning.

    Overtakes like the baseline, but aborts whenever an oncoming vehicle is
    still approaching inside the abort horizon while the pass is incomplete,
    and resumes once the opposite lane is clear again.
    """

    def __init__(
        self,
        baseline_cfg: BaselineConfig,
        lane_width: float,
        abort_horizon: float = 55.0,
        resume_horizon: float = 60.0,
    ):
        self.cfg = baseline_cfg
        self.lane_width = lane_width
        self.abort_horizon = abort_horizon
        self.resume_horizon = resume_horizon
        self.passing = False

    def reset(self) -> None:
        self.passing = False

    def _front_same_lane(self, world: WorldState):
        cands = [
            n for n in world.npcs if n.lane == Lane.EGO and n.vehicle.s > world.ego.s
        ]
        return min(cands, key=lambda n: n.vehicle.s, default=None)

    def _oncoming_threat_range(self, world: WorldState) -> float | None:
        """Distance to the nearest oncoming vehicle still ahead of the ego."""
        dists = [
            n.vehicle.s - world.ego.s
            for n in world.npcs
            if n.lane == Lane.OPPOSITE and n.vehicle.s > world.ego.s
        ]
        return min(dists, default=None)

    def decide(self, world: WorldState, obs: np.ndarray) -> int:
        ego = world.ego
        front = self._front_same_lane(world)
        threat = self._oncoming_threat_range(world)
        blocked = (
            front is not None
            and front.vehicle.s - ego.s
            - (ego.footprint_length + front.vehicle.footprint_length) / 2.0
            < self.cfg.trigger_gap
            and front.target_speed < self.cfg.target_speed
        )
        if self.passing:
            if front is None or ego.s >= front.vehicle.s + self.cfg.clear_margin:
                self.passing = False
                return Action.FOLLOWING
            if threat is not None and threat < self.abort_horizon:
                self.passing = False
                return Action.ABORTING
            return Action.OVERTAKING
        if blocked and (threat is None or threat > self.resume_horizon):
            self.passing = True
            return Action.OVERTAKING
        return Action.FOLLOWING


@dataclass(frozen=True)
class EpisodeResult:
    scenario_id: int
    outcome: str  # success | crash | off_road | timeout
    crash_npc_id: int | None
    completion_time: float | None
    discounted_return: float
    trace: tuple  # rows (t, s, d, steering, speed, action, rollout_id)
    rewards: tuple
    spec: ScenarioSpec
    final_world: WorldState


def run_episode(
    spec: ScenarioSpec, policy, cfg: RunConfig, gamma: float | None = None
) -> EpisodeResult:
    """Run one closed-loop episode to its terminal event."""
    if gamma is None:
        gamma = cfg.train.gamma
    env = OvertakeEnv(spec, cfg)
    obs = env.reset()
    policy.reset()
    trace, rewards = [], []
    ret = 0.0
    k = 0
    done = False
    info = {}
    while not done:
        action = policy.decide(env.world, obs)
        obs, r, done, info = env.step(action)
        trace.append(info["trace_row"])
        rewards.append(r)
        ret += (gamma**k) * r
        k += 1
    world = env.world
    event = world.terminal_event
    outcome = outcome_of(world)
    return EpisodeResult(
        scenario_id=spec.scenario_id,
        outcome=outcome,
        crash_npc_id=event.npc_id if outcome == "crash" else None,
        completion_time=event.time if outcome == "success" else None,
        discounted_return=ret,
        trace=tuple(trace),
        rewards=tuple(rewards),
        spec=spec,
        final_world=world,
    )


def _batch_worker(args):
    spec, policy, cfg, gamma = args
    return run_episode(spec, policy, cfg, gamma)


def run_batch(
    specs: list[ScenarioSpec], policy, cfg: RunConfig, jobs: int = 1, gamma=None
) -> list[EpisodeResult]:
    """Run a scenario batch; parallel execution merges in scenario order."""
    tasks = [(s, policy, cfg, gamma) for s in specs]
    if jobs <= 1:
        return [_batch_worker(t) for t in tasks]
    with multiprocessing.Pool(processes=jobs) as pool:
        return pool.map(_batch_worker, tasks, chunksize=max(1, len(tasks) // (jobs * 4) or 1))


@dataclass(frozen=True)
class MetricsTable:
    n_episodes: int
    success_rate: float  # percent over all episodes
    mean_completion_time: float  # seconds over successes; 0 when none
    n_crashes: int
    n_off_road: int
    n_timeout: int
    crash_shares_defined: bool
    crash_share_npc1: float  # percent of crashes striking NPC1
    crash_share_npc2: float  # percent of crashes striking NPC2
    crash_share_oncoming: float  # percent striking any opposite-lane NPC
    crash_overlap_pct: float  # percent of scenarios failed by both policies
    mean_v1_in_failures: float
    mean_v2_in_failures: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _one_table(results: list[EpisodeResult], overlap_pct: float) -> MetricsTable:
    n = len(results)
    successes = [r for r in results if r.outcome == "success"]
    crashes = [r for r in results if r.outcome == "crash"]
    failures = [r for r in results if r.outcome != "success"]
    n_crash = len(crashes)
    share = lambda pred: 100.0 * sum(pred(r) for r in crashes) / n_crash if n_crash else 0.0
    return MetricsTable(
        n_episodes=n,
        success_rate=100.0 * len(successes) / n if n else 0.0,
        mean_completion_time=(
            float(np.mean([r.completion_time for r in successes])) if successes else 0.0
        ),
        n_crashes=n_crash,
        n_off_road=sum(r.outcome == "off_road" for r in results),
        n_timeout=sum(r.outcome == "timeout" for r in results),
        crash_shares_defined=n_crash > 0,
        crash_share_npc1=share(lambda r: r.crash_npc_id == 1),
        crash_share_npc2=share(lambda r: r.crash_npc_id == 2),
        crash_share_oncoming=share(lambda r: r.crash_npc_id in (2, 3)),
        crash_overlap_pct=overlap_pct,
        mean_v1_in_failures=float(np.mean([r.spec.v1 for r in failures])) if failures else 0.0,
        mean_v2_in_failures=float(np.mean([r.spec.v2 for r in failures])) if failures else 0.0,
    )


def aggregate_metrics(
    results_a: list[EpisodeResult], results_b: list[EpisodeResult]
) -> tuple[MetricsTable, MetricsTable]:
    """Paired tables for two policies over the same scenario set."""
    ids_a = sorted(r.scenario_id for r in results_a)
    ids_b = sorted(r.scenario_id for r in results_b)
    if ids_a != ids_b:
        raise ValueError("result lists cover different scenario id sets")
    failed_a = {r.scenario_id for r in results_a if r.outcome != "success"}
    failed_b = {r.scenario_id for r in results_b if r.outcome != "success"}
    overlap = 100.0 * len(failed_a & failed_b) / len(ids_a) if ids_a else 0.0
    return _one_table(results_a, overlap), _one_table(results_b, overlap)


def decision_map(
    net: QNetwork,
    cfg: RunConfig,
    npc1_s: tuple[float, float],
    npc2_s: tuple[float, float],
    resolution: tuple[int, int],
    v1: float = 2.0,
    v2: float = 2.0,
    ego_speed: float | None = None,
):
    """Greedy action over a grid of NPC positions at fixed velocities.

    Returns (grid, axis1, axis2) where grid[i, j] is the action code for
    NPC1 at axis1[i] (same lane) and NPC2 at axis2[j] (oncoming).
    """
    if resolution[0] < 2 or resolution[1] < 2:
        raise ValueError("resolution must be >= 2 per axis")
    if ego_speed is None:
        ego_speed = cfg.planner.follow_speed
    axis1 = np.linspace(npc1_s[0], npc1_s[1], resolution[0])
    axis2 = np.linspace(npc2_s[0], npc2_s[1], resolution[1])
    vehicle = cfg.vehicle
    grid = np.empty(resolution, dtype=int)
    for i, s1 in enumerate(axis1):
        for j, s2 in enumerate(axis2):
            ego = VehicleState(
                s=0.0,
                d=0.0,
                speed=ego_speed,
                footprint_length=vehicle.length,
                footprint_width=vehicle.width,
            )
            npcs = [
                NpcState(
                    npc_id=1,
                    vehicle=VehicleState(
                        s=float(s1),
                        d=cfg.road.ego_lane_center_d,
                        speed=v1,
                        footprint_length=vehicle.length,
                        footprint_width=vehicle.width,
                    ),
                    lane=Lane.EGO,
                    target_speed=v1,
                ),
                NpcState(
                    npc_id=2,
                    vehicle=VehicleState(
                        s=float(s2),
                        d=cfg.road.opposite_lane_center_d,
                        heading=np.pi,
                        speed=v2,
                        footprint_length=vehicle.length,
                        footprint_width=vehicle.width,
                    ),
                    lane=Lane.OPPOSITE,
                    target_speed=v2,
                ),
            ]
            world = make_world(cfg.road, cfg.limits, ego, npcs)
            obs = encode_observation(world, cfg.obs)
            grid[i, j] = int(np.argmax(net.forward(obs)))
    return grid, axis1, axis2


TRACE_HEADER = "t_s,s_m,d_m,steering_rad,speed_mps,action,rollout_id"


def export_trace(result: EpisodeResult, path) -> None:
    """Write the per-decision trace as CSV with 6 fractional digits."""
    lines = [TRACE_HEADER]
    for t, s, d, steering, speed, action, rollout_id in result.trace:
        lines.append(
            f"{t:.6f},{s:.6f},{d:.6f},{steering:.6f},{speed:.6f},{int(action)},{int(rollout_id)}"
        )
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_trace(path) -> list[tuple]:
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != TRACE_HEADER:
            raise ValueError(f"unexpected trace header {header!r}")
        for line in fh:
            parts = line.strip().split(",")
            if len(parts) != 7:
                continue
            rows.append(
                (
                    float(parts[0]),
                    float(parts[1]),
                    float(parts[2]),
                    float(parts[3]),
                    float(parts[4]),
                    int(parts[5]),
                    int(parts[6]),
                )
            )
    return rows


def lane_excursions(d_values, lane_width: float) -> list[tuple[int, int]]:
    """Maximal index intervals where the lateral offset leaves the ego lane
    (d above lane_width / 2); used to detect abort-and-retry patterns."""
    half = lane_width / 2.0
    intervals = []
    start = None
    for i, d in enumerate(d_values):
        if d > half and start is None:
            start = i
        elif d <= half and start is not None:
            intervals.append((start, i - 1))
            start = None
    if start is not None:
        intervals.append((start, len(list(d_values)) - 1))
    return intervals


def abort_demo_spec() -> ScenarioSpec:
    """Scripted scenario: slow leader ahead, oncoming vehicle timed to force
    one abort mid-pass, opposite lane clear afterwards.

    With the default planner and the scripted abort rule this produces the
    canonical pattern: leave the lane, abort back fully, pass on the second
    try, finish at the goal in the original lane.
    """
    return ScenarioSpec(
        scenario_id=0,
        d1=32.0,
        d2=60.0,
        v1=1.2,
        v2=1.5,
        npc_count=2,
        seed=0,
    )
