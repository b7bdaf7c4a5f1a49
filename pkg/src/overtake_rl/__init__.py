"""Two-lane overtaking simulator with a DQN high-level decision maker,
a rule-based baseline, and a batch benchmark harness."""

from .baseline import BaselineConfig, BaselineState, rule_based_decide
from .bench import (
    AbortRulePolicy,
    BaselinePolicy,
    EpisodeResult,
    GreedyPolicy,
    MetricsTable,
    aggregate_metrics,
    decision_map,
    export_trace,
    lane_excursions,
    run_batch,
    run_episode,
)
from .config import RunConfig, load_config, parse_config, render_config
from .dqn import (
    ObsConfig,
    ReplayBuffer,
    RewardConfig,
    TrainConfig,
    Transition,
    encode_observation,
    reward,
    select_action,
    td_targets,
    train,
    train_step,
)
from .env import OvertakeEnv, world_from_spec
from .planner import (
    Action,
    BehaviorParams,
    PlannerConfig,
    Rollout,
    RolloutCost,
    apply_action,
    evaluate_rollouts,
    generate_rollouts,
    longitudinal_control,
    pure_pursuit,
)
from .qnet import QNetwork
from .scenarios import (
    ParameterRanges,
    ScenarioSpec,
    generate_scenarios,
    load_scenarios,
    save_scenarios,
)
from .world import (
    EventKind,
    KinematicLimits,
    Lane,
    NpcState,
    RoadModel,
    VehicleState,
    WorldEvent,
    WorldState,
    check_collision,
    make_world,
    step_ego,
    step_npc,
    step_world,
)

__version__ = "0.1.0"
