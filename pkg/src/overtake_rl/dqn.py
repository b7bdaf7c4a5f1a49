"""DQN decision core: observation encoding, reward, replay, and training.

The agent picks one of three high-level actions at a fixed decision
cadence. Q-values come from the in-repo MLP; training minimizes the
squared error against targets built from a frozen copy of the network
that re-syncs every ``target_sync_period`` gradient steps. Everything is
deterministic given the config seed: one generator drives initialization,
exploration, scenario order and batch sampling in strict sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .planner import Action
from .qnet import QNetwork
from .world import EventKind, Lane, WorldState

__all__ = [
    "ObsConfig",
    "RewardConfig",
    "TrainConfig",
    "Transition",
    "ReplayBuffer",
    "EpisodeStats",
    "encode_observation",
    "reward",
    "select_action",
    "td_targets",
    "train_step",
    "epsilon_at",
    "train",
]


@dataclass(frozen=True)
class ObsConfig:
    """Feature layout: 3 ego features then 5 per NPC slot."""

    slots: int = 3
    sentinel_s: float = 200.0
    speed_scale: float = 5.0
    dist_scale: float = 100.0
    lateral_scale: float = 5.0
    yaw_scale: float = 1.0

    @property
    def dim(self) -> int:
        return 3 + 5 * self.slots


@dataclass(frozen=True)
class RewardConfig:
    progress_weight: float = 0.1
    goal_bonus: float = 10.0
    crash_penalty: float = 100.0
    switch_penalty: float = 0.5


@dataclass(frozen=True)
class TrainConfig:
    gamma: float = 0.95
    learning_rate: float = 1e-3
    learning_rate_end: float = 0.0  # 0 means constant learning_rate
    batch_size: int = 64
    target_sync_period: int = 200
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_frac: float = 0.6
    iterations: int = 8000
    buffer_capacity: int = 50_000
    hidden: tuple[int, ...] = (64, 64)
    optimistic_init: float = 0.0  # added to the output bias at initialization
    grad_clip: float = 10.0  # global gradient-norm cap; 0 disables
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.gamma < 1.0):
            raise ValueError("gamma must lie in [0, 1)")
        if self.target_sync_period < 1:
            raise ValueError("target_sync_period must be >= 1")
        for eps in (self.epsilon_start, self.epsilon_end):
            if not (0.0 <= eps <= 1.0):
                raise ValueError("epsilon must lie in [0, 1]")

    def learning_rate_at(self, step: int) -> float:
        """Linear decay to learning_rate_end over the run (constant if unset)."""
        if self.learning_rate_end <= 0.0 or self.iterations <= 0:
            return self.learning_rate
        frac = min(1.0, step / self.iterations)
        return self.learning_rate + (self.learning_rate_end - self.learning_rate) * frac


@dataclass(frozen=True)
class Transition:
    obs: np.ndarray
    action: int
    reward: float
    next_obs: np.ndarray
    done: bool


class ReplayBuffer:
    """Bounded experience store; overwrites the oldest entry when full and
    samples uniformly with replacement."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._items: list[Transition] = []
        self._next = 0

    def __len__(self) -> int:
        return len(self._items)

    def push(self, transition: Transition) -> None:
        if len(self._items) < self.capacity:
            self._items.append(transition)
        else:
            self._items[self._next] = transition
        self._next = (self._next + 1) % self.capacity

    def items_in_order(self) -> list[Transition]:
        """Stored transitions from oldest to newest."""
        if len(self._items) < self.capacity:
            return list(self._items)
        return self._items[self._next :] + self._items[: self._next]

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Transition]:
        if not self._items:
            raise ValueError("cannot sample from an empty buffer")
        idx = rng.integers(0, len(self._items), size=batch_size)
        return [self._items[i] for i in idx]


def _npc_kinematics(npc, ego) -> tuple[float, float, float, float]:
    """Relative (s, d, v_long, v_lat) of one NPC in the ego frame."""
    direction = 1.0 if npc.lane == Lane.EGO else -1.0
    dvec = np.array([npc.vehicle.s - ego.s, npc.vehicle.d - ego.d])
    vvec = np.array(
        [
            direction * npc.vehicle.speed - ego.speed * math.cos(ego.heading),
            -ego.speed * math.sin(ego.heading),
        ]
    )
    c, s = math.cos(-ego.heading), math.sin(-ego.heading)
    rot = np.array([[c, -s], [s, c]])
    rel_p = rot @ dvec
    rel_v = rot @ vvec
    return float(rel_p[0]), float(rel_p[1]), float(rel_v[0]), float(rel_v[1])


def encode_observation(world: WorldState, cfg: ObsConfig) -> np.ndarray:
    """Fixed-slot relative-feature vector, normalized by the config scales.

    Slot 1 holds the nearest same-lane vehicle ahead, slot 2 the nearest
    oncoming vehicle, further slots the remaining NPCs by distance. Absent
    slots carry the far sentinel with presence 0.
    """
    ego = world.ego
    features = [
        ego.speed / cfg.speed_scale,
        ego.yaw_rate / cfg.yaw_scale,
        ego.d / cfg.lateral_scale,
    ]

    same_ahead = sorted(
        (n for n in world.npcs if n.lane == Lane.EGO and n.vehicle.s > ego.s),
        key=lambda n: (n.vehicle.s - ego.s, n.npc_id),
    )
    oncoming = sorted(
        (n for n in world.npcs if n.lane == Lane.OPPOSITE),
        key=lambda n: (abs(n.vehicle.s - ego.s), n.npc_id),
    )
    slots: list = [
        same_ahead[0] if same_ahead else None,
        oncoming[0] if oncoming else None,
    ]
    taken = {id(n) for n in slots if n is not None}
    rest = sorted(
        (n for n in world.npcs if id(n) not in taken),
        key=lambda n: (abs(n.vehicle.s - ego.s), n.npc_id),
    )
    slots.extend(rest)
    slots = slots[: cfg.slots]
    while len(slots) < cfg.slots:
        slots.append(None)

    for npc in slots:
        if npc is None:
            features.extend([cfg.sentinel_s / cfg.dist_scale, 0.0, 0.0, 0.0, 0.0])
        else:
            rel_s, rel_d, rel_vl, rel_vt = _npc_kinematics(npc, ego)
            features.extend(
                [
                    rel_s / cfg.dist_scale,
                    rel_d / cfg.lateral_scale,
                    rel_vl / cfg.speed_scale,
                    rel_vt / cfg.speed_scale,
                    1.0,
                ]
            )
    return np.array(features, dtype=float)


def reward(
    prev: WorldState,
    action: int,
    nxt: WorldState,
    cfg: RewardConfig,
    prev_target_lane: Lane | None = None,
    target_lane: Lane | None = None,
) -> float:
    """Per-decision reward: progress shaping, terminal bonus or crash
    penalty, and a small charge for switching target lanes."""
    del prev, action  # reward depends on the resulting state and lane choice
    dist = max(0.0, nxt.road.goal_s - nxt.ego.s)
    r = cfg.progress_weight / (1.0 + dist)
    event = nxt.terminal_event
    if event is not None:
        if event.kind == EventKind.GOAL_REACHED:
            r += cfg.goal_bonus
        elif event.kind in (EventKind.COLLISION, EventKind.OFF_ROAD):
            r -= cfg.crash_penalty
    if (
        prev_target_lane is not None
        and target_lane is not None
        and prev_target_lane != target_lane
    ):
        r -= cfg.switch_penalty
    return r


def select_action(net: QNetwork, obs: np.ndarray, epsilon: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy over the three actions; greedy ties take the lowest code."""
    if not (0.0 <= epsilon <= 1.0):
        raise ValueError("epsilon must lie in [0, 1]")
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(0, len(Action.ALL)))
    q = net.forward(obs)
    return int(np.argmax(q))  # first maximum = lowest action code


def _clip_gradients(grads, max_norm: float):
    """Scale all gradients down when their global L2 norm exceeds the cap."""
    grads_w, grads_b = grads
    total = math.sqrt(sum(float(np.sum(g * g)) for g in grads_w + grads_b))
    if total <= max_norm:
        return grads
    scale = max_norm / total
    return [g * scale for g in grads_w], [g * scale for g in grads_b]


def td_targets(batch: list[Transition], target_net: QNetwork, gamma: float) -> np.ndarray:
    """One-step targets r + gamma * max_a' Q(s', a') from the frozen copy."""
    if not batch:
        raise ValueError("batch must be non-empty")
    rewards = np.array([t.reward for t in batch])
    dones = np.array([t.done for t in batch])
    next_obs = np.stack([t.next_obs for t in batch])
    next_best = target_net.forward_batch(next_obs).max(axis=1)
    return rewards + gamma * next_best * (~dones)


def train_step(
    net: QNetwork,
    target_net: QNetwork,
    buffer: ReplayBuffer,
    cfg: TrainConfig,
    step_index: int,
    rng: np.random.Generator,
) -> float | None:
    """One gradient step on a uniform batch; returns the pre-update loss,
    or None when the buffer cannot fill a batch yet. The target copy is
    overwritten with the updated parameters exactly when ``step_index`` is
    a multiple of the sync period."""
    if len(buffer) < cfg.batch_size:
        return None
    batch = buffer.sample(cfg.batch_size, rng)
    targets = td_targets(batch, target_net, cfg.gamma)
    obs = np.stack([t.obs for t in batch])
    actions = np.array([t.action for t in batch])
    loss, grads = net.loss_and_grads(obs, actions, targets)
    if cfg.grad_clip > 0.0:
        grads = _clip_gradients(grads, cfg.grad_clip)
    net.sgd_step(grads, cfg.learning_rate_at(step_index))
    if step_index % cfg.target_sync_period == 0:
        target_net.load_from(net)
    return loss


def epsilon_at(step: int, cfg: TrainConfig) -> float:
    """Linear decay from epsilon_start to epsilon_end over the decay span."""
    decay_steps = max(1, int(cfg.epsilon_decay_frac * cfg.iterations))
    if step >= decay_steps:
        return cfg.epsilon_end
    frac = step / decay_steps
    return cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac


@dataclass(frozen=True)
class EpisodeStats:
    episode: int
    discounted_return: float
    outcome: str
    decisions: int
    epsilon: float


def train(env_factory, scenarios, cfg: TrainConfig):
    """Run the episodic training loop for ``cfg.iterations`` decision steps.

    Scenarios are drawn uniformly from the pool; each decision step pushes
    one transition and performs one gradient step. Returns the trained
    network and the per-episode learning curve.
    """
    if not scenarios:
        raise ValueError("scenario pool must be non-empty")
    rng = np.random.default_rng(cfg.seed)
    probe = env_factory(scenarios[0])
    obs_dim = probe.reset().shape[0]
    dims = [obs_dim, *cfg.hidden, len(Action.ALL)]
    net = QNetwork.initialized(dims, rng)
    if cfg.optimistic_init:
        # Start all action values high so untried maneuvers stay attractive
        # until the data pulls them down to their real worth.
        net.biases[-1] += cfg.optimistic_init
    target_net = net.copy()
    buffer = ReplayBuffer(cfg.buffer_capacity)

    curve: list[EpisodeStats] = []
    step = 0
    episode = 0
    while step < cfg.iterations:
        spec = scenarios[int(rng.integers(0, len(scenarios)))]
        env = env_factory(spec)
        obs = env.reset()
        ep_return = 0.0
        k = 0
        done = False
        eps = epsilon_at(step, cfg)
        while not done and step < cfg.iterations:
            step += 1
            eps = epsilon_at(step, cfg)
            action = select_action(net, obs, eps, rng)
            next_obs, r, done, info = env.step(action)
            buffer.push(Transition(obs, action, r, next_obs, done))
            loss = train_step(net, target_net, buffer, cfg, step, rng)
            if loss is not None and not math.isfinite(loss):
                raise FloatingPointError(f"non-finite training loss at step {step}")
            ep_return += (cfg.gamma**k) * r
            k += 1
            obs = next_obs
        if done:
            curve.append(
                EpisodeStats(
                    episode=episode,
                    discounted_return=ep_return,
                    outcome=info["outcome"],
                    decisions=k,
                    epsilon=eps,
                )
            )
            episode += 1
    return net, curve
