"""Q-learning training loop: exploration, replay memory, target network.

Transitions collected while playing examinations are stored in a bounded
FIFO memory; after every environment step a minibatch is sampled uniformly
and the network is regressed toward one-step lookahead targets computed with
a periodically synchronized frozen copy of the parameters.
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .env import AuscultationEnv, EnvConfig, StaticSweepEnv
from .qnet import (
    AdamState,
    Batch,
    DEFAULT_LAYER_SIZES,
    QNetworkParams,
    adam_step,
    clone_params,
    forward,
    forward_batch,
    gradients,
    init_params,
    q_loss,
)


@dataclass(frozen=True)
class Transition:
    """One step of experience. next_legal marks the actions available in
    next_state (None means all); terminal transitions ignore both."""

    state_vec: np.ndarray
    action_index: int
    reward: float
    next_state_vec: np.ndarray
    done: bool
    next_legal: np.ndarray | None = None


class ReplayBuffer:
    """Bounded ring of transitions; oldest entries are overwritten first."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._items: list[Transition] = []
        self._cursor = 0

    def push(self, transition: Transition) -> None:
        if len(self._items) < self.capacity:
            self._items.append(transition)
        else:
            self._items[self._cursor] = transition
        self._cursor = (self._cursor + 1) % self.capacity

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Transition]:
        indices = rng.integers(0, len(self._items), size=batch_size)
        return [self._items[i] for i in indices]

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self) -> Iterator[Transition]:
        return iter(self._items)


@dataclass
class TrainConfig:
    episodes: int = 200
    gamma: float = 0.93
    lr: float = 0.0001
    replay_capacity: int = 10_000
    batch_size: int = 32
    target_sync_interval: int = 100
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_fraction: float = 0.7
    updates_per_step: int = 1
    seed: int = 0
    layer_sizes: tuple[int, ...] = DEFAULT_LAYER_SIZES
    selection_interval: int = 50

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        for name in ("epsilon_start", "epsilon_end"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not 0.0 < self.epsilon_decay_fraction <= 1.0:
            raise ValueError("epsilon_decay_fraction must lie in (0, 1]")
        for name in ("replay_capacity", "batch_size", "target_sync_interval",
                     "updates_per_step", "selection_interval"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.episodes < 0:
            raise ValueError("episodes must be >= 0")


def epsilon_for_episode(episode: int, config: TrainConfig) -> float:
    """Linear anneal from start to end over the first decay fraction of
    training, constant afterwards."""
    span = max(1, int(config.episodes * config.epsilon_decay_fraction))
    frac = min(1.0, episode / span)
    return config.epsilon_start + frac * (config.epsilon_end - config.epsilon_start)


def select_action(q_values, epsilon: float, rng: np.random.Generator | None,
                  legal: np.ndarray | None = None) -> int:
    """Epsilon-greedy over the legal actions, lowest index winning ties.

    With epsilon 0 no randomness is consumed, so greedy rollouts are a pure
    function of parameters and state.
    """
    q = np.asarray(q_values, dtype=float)
    if legal is None:
        legal = np.ones(q.shape[0], dtype=bool)
    if epsilon > 0.0:
        if rng is None:
            raise ValueError("exploration requires an rng")
        if rng.random() < epsilon:
            return int(rng.choice(np.flatnonzero(legal)))
    masked = np.where(legal, q, -np.inf)
    return int(np.argmax(masked))


def bellman_target(reward: float, done: bool, max_next_q: float, gamma: float) -> float:
    """One-step lookahead target; terminal transitions keep the bare reward."""
    if done:
        return float(reward)
    return float(reward + gamma * max_next_q)


def train_step(params: QNetworkParams, target_params: QNetworkParams,
               adam_state: AdamState, buffer: ReplayBuffer,
               config: TrainConfig, rng: np.random.Generator) -> float | None:
    """One minibatch update. Returns the pre-update batch loss, or None if
    the buffer cannot fill a batch yet."""
    if len(buffer) < config.batch_size:
        return None
    transitions = buffer.sample(config.batch_size, rng)

    states = np.stack([t.state_vec for t in transitions])
    actions = np.array([t.action_index for t in transitions])
    rewards = np.array([t.reward for t in transitions])
    dones = np.array([t.done for t in transitions])
    next_states = np.stack([t.next_state_vec for t in transitions])

    next_q = forward_batch(target_params, next_states)
    legal = np.ones_like(next_q, dtype=bool)
    for i, t in enumerate(transitions):
        if t.next_legal is not None:
            legal[i] = t.next_legal
    max_next = np.where(legal, next_q, -np.inf).max(axis=1)
    targets = np.where(dones, rewards, rewards + config.gamma * max_next)

    batch = Batch(states, actions, targets)
    loss = q_loss(params, batch)
    adam_step(params, adam_state, gradients(params, batch))
    return loss


@dataclass
class EpisodeResult:
    total_reward: float
    auscultations: int
    declared_label: int | None
    correct: bool
    limit_hit: bool
    actions: list[int] = field(default_factory=list)


def run_episode(params: QNetworkParams, env, scenario, epsilon: float,
                rng: np.random.Generator | None,
                buffer: ReplayBuffer | None = None) -> EpisodeResult:
    """Play one episode with an epsilon-greedy policy, optionally recording
    every transition into a replay buffer."""
    env.reset(scenario)
    total = 0.0
    actions: list[int] = []
    while not env.done:
        state_vec = env.state_vector()
        legal = env.legal_actions()
        action = select_action(forward(params, state_vec), epsilon, rng, legal)
        reward, done = env.step_index(action)
        if buffer is not None:
            buffer.push(Transition(
                state_vec=state_vec,
                action_index=action,
                reward=reward,
                next_state_vec=env.state_vector(),
                done=done,
                next_legal=None if done else env.legal_actions(),
            ))
        total += reward
        actions.append(action)
    declared = env.declared_label
    return EpisodeResult(
        total_reward=total,
        auscultations=env.auscultation_count,
        declared_label=declared,
        correct=declared is not None and declared == scenario.label,
        limit_hit=env.limit_hit,
        actions=actions,
    )


@dataclass
class TrainResult:
    params: QNetworkParams
    best_params: QNetworkParams | None
    best_score: float | None
    reward_curve: list[float]
    aps_curve: list[int]
    updates: int


def train_env(env, scenarios, config: TrainConfig, *, selector=None) -> TrainResult:
    """Train on episodes drawn from `scenarios` (a sequence sampled uniformly
    with replacement, or a callable rng -> scenario).

    `selector`, when given, scores the current parameters every
    selection_interval episodes; the best-scoring snapshot is returned
    alongside the final parameters.
    """
    init_ss, loop_ss, env_ss = np.random.SeedSequence(config.seed).spawn(3)
    rng = np.random.default_rng(loop_ss)
    env.rng = np.random.default_rng(env_ss)

    if callable(scenarios):
        draw = scenarios
    else:
        pool = list(scenarios)
        if not pool:
            raise ValueError("cannot train on an empty cohort")
        draw = lambda r: pool[int(r.integers(0, len(pool)))]

    params = init_params(init_ss, config.layer_sizes)
    target = clone_params(params)
    adam = AdamState.for_params(params, lr=config.lr)
    buffer = ReplayBuffer(config.replay_capacity)

    reward_curve: list[float] = []
    aps_curve: list[int] = []
    updates = 0
    best_params = None
    best_score = None

    for episode in range(config.episodes):
        scenario = draw(rng)
        epsilon = epsilon_for_episode(episode, config)
        env.reset(scenario)
        total = 0.0
        while not env.done:
            state_vec = env.state_vector()
            legal = env.legal_actions()
            action = select_action(forward(params, state_vec), epsilon, rng, legal)
            reward, done = env.step_index(action)
            buffer.push(Transition(
                state_vec=state_vec,
                action_index=action,
                reward=reward,
                next_state_vec=env.state_vector(),
                done=done,
                next_legal=None if done else env.legal_actions(),
            ))
            total += reward
            for _ in range(config.updates_per_step):
                loss = train_step(params, target, adam, buffer, config, rng)
                if loss is not None:
                    updates += 1
                    if updates % config.target_sync_interval == 0:
                        target = clone_params(params)
        reward_curve.append(total)
        aps_curve.append(env.auscultation_count)

        if selector is not None and (episode + 1) % config.selection_interval == 0:
            score = float(selector(params))
            # ties go to the most recent checkpoint: with equal validation
            # scores the longer-trained policy tends to use fewer points
            if best_score is None or score >= best_score:
                best_score = score
                best_params = clone_params(params)

    return TrainResult(
        params=params,
        best_params=best_params,
        best_score=best_score,
        reward_curve=reward_curve,
        aps_curve=aps_curve,
        updates=updates,
    )


def train(cohort, config: TrainConfig, env_config: EnvConfig | None = None, *,
          static: bool = False, selector=None) -> TrainResult:
    """Train an agent on a cohort of examinations.

    `static` trains the exhaustive-sweep baseline variant instead of the
    free point-selection agent.
    """
    env_cls = StaticSweepEnv if static else AuscultationEnv
    env = env_cls(env_config or EnvConfig())
    return train_env(env, cohort, config, selector=selector)


def write_curves(result: TrainResult, rewards_path, aps_path) -> None:
    """Two-column tables (episode, value) for external plotting."""
    rewards = "".join(f"{i + 1}\t{r!r}\n" for i, r in enumerate(result.reward_curve))
    aps = "".join(f"{i + 1}\t{a}\n" for i, a in enumerate(result.aps_curve))
    Path(rewards_path).write_text(rewards)
    Path(aps_path).write_text(aps)
