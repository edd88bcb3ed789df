"""The examination decision process.

The agent's state is a 12x9 matrix: one row per auscultation point, holding
the 8 most recently observed phenomena features plus a visit counter. At
each turn the agent either requests another point (small step penalty) or
declares the patient's status (reward from the decision matrix). Performing
a 12th auscultation without declaring ends the episode with a large penalty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cohort import N_POINTS, Examination, observe_point
from .errors import EpisodeFinishedError, IllegalActionError
from .raster import N_FEATURES, PhenomenaFeatures

STATE_COLS = N_FEATURES + 1
STATE_SIZE = N_POINTS * STATE_COLS  # 108
N_LABELS = 3
N_ACTIONS = N_POINTS + N_LABELS     # 15: auscultate 1..12, declare 0..2

STEP_PENALTY = -0.01
LIMIT_PENALTY = -10.0
AUSCULTATION_LIMIT = 12

# decision_reward[actual, predicted]
REWARD_MATRIX = np.array([
    [2.0, 0.0, -1.0],
    [0.0, 2.0, -0.5],
    [-1.0, -0.5, 2.0],
])


def decision_reward(actual: int, predicted: int) -> float:
    """Reward for declaring `predicted` when the true label is `actual`."""
    if actual not in (0, 1, 2) or predicted not in (0, 1, 2):
        raise ValueError(f"labels must be 0, 1 or 2, got ({actual}, {predicted})")
    return float(REWARD_MATRIX[actual, predicted])


@dataclass(frozen=True)
class Action:
    """One of the 15 actions: auscultate a point or declare a label."""

    index: int  # 0..11 auscultate point index+1, 12..14 declare label index-12

    def __post_init__(self):
        if not 0 <= self.index < N_ACTIONS:
            raise ValueError(f"action index must be 0..{N_ACTIONS - 1}, got {self.index}")

    @classmethod
    def auscultate(cls, point: int) -> "Action":
        if not 1 <= point <= N_POINTS:
            raise ValueError(f"point must be 1..{N_POINTS}, got {point}")
        return cls(point - 1)

    @classmethod
    def declare(cls, label: int) -> "Action":
        if label not in (0, 1, 2):
            raise ValueError(f"label must be 0, 1 or 2, got {label}")
        return cls(N_POINTS + label)

    @property
    def is_declare(self) -> bool:
        return self.index >= N_POINTS

    @property
    def point(self) -> int:
        if self.is_declare:
            raise ValueError("declare action has no point")
        return self.index + 1

    @property
    def label(self) -> int:
        if not self.is_declare:
            raise ValueError("auscultate action has no label")
        return self.index - N_POINTS


@dataclass(frozen=True)
class StepOutcome:
    next_state: np.ndarray
    reward: float
    done: bool
    declared_label: int | None
    auscultation_count: int


def new_state() -> np.ndarray:
    return np.zeros((N_POINTS, STATE_COLS))


def apply_observation(state: np.ndarray, point: int, features) -> None:
    """Record one auscultation in place: overwrite the row, bump its counter."""
    if not 1 <= point <= N_POINTS:
        raise ValueError(f"point must be 1..{N_POINTS}, got {point}")
    vec = features.as_vector() if isinstance(features, PhenomenaFeatures) \
        else np.asarray(features, dtype=float)
    if vec.shape != (N_FEATURES,):
        raise ValueError(f"expected {N_FEATURES} features, got shape {vec.shape}")
    state[point - 1, :N_FEATURES] = vec
    state[point - 1, N_FEATURES] += 1.0


def flatten_state(state: np.ndarray) -> np.ndarray:
    """Row-major 108-vector; visit counters scaled by the limit into [0, 1]."""
    scaled = np.array(state, dtype=float)
    scaled[:, N_FEATURES] /= AUSCULTATION_LIMIT
    return scaled.reshape(-1)


def unflatten_state(vec: np.ndarray) -> np.ndarray:
    state = np.array(vec, dtype=float).reshape(N_POINTS, STATE_COLS)
    state[:, N_FEATURES] *= AUSCULTATION_LIMIT
    return state


@dataclass
class EnvConfig:
    step_penalty: float = STEP_PENALTY
    limit_penalty: float = LIMIT_PENALTY
    auscultation_limit: int = AUSCULTATION_LIMIT


class AuscultationEnv:
    """One examination episode at a time; a fresh `reset` starts the next.

    The visit counters inside the state are the episode's full bookkeeping:
    their sum is the number of auscultations performed so far.
    """

    n_actions = N_ACTIONS
    state_dim = STATE_SIZE

    def __init__(self, config: EnvConfig | None = None,
                 rng: np.random.Generator | None = None):
        self.config = config or EnvConfig()
        self.rng = rng or np.random.default_rng()
        self._exam: Examination | None = None
        self._state = new_state()
        self._done = True
        self._declared: int | None = None

    def reset(self, exam: Examination) -> np.ndarray:
        self._exam = exam
        self._state = new_state()
        self._done = False
        self._declared = None
        return self._state.copy()

    @property
    def state(self) -> np.ndarray:
        return self._state.copy()

    @property
    def done(self) -> bool:
        return self._done

    @property
    def declared_label(self) -> int | None:
        return self._declared

    @property
    def auscultation_count(self) -> int:
        return int(round(self._state[:, N_FEATURES].sum()))

    @property
    def exam_label(self) -> int:
        assert self._exam is not None
        return self._exam.label

    def legal_actions(self) -> np.ndarray:
        return np.ones(N_ACTIONS, dtype=bool)

    def step(self, action: Action) -> StepOutcome:
        if self._done or self._exam is None:
            raise EpisodeFinishedError("episode already finished; call reset")
        if not self.legal_actions()[action.index]:
            raise IllegalActionError(f"action {action.index} is not legal here")

        if action.is_declare:
            reward = decision_reward(self._exam.label, action.label)
            self._done = True
            self._declared = action.label
        else:
            observed = observe_point(self._exam, action.point, self.rng)
            apply_observation(self._state, action.point, observed)
            reward = self.config.step_penalty
            if self.auscultation_count >= self.config.auscultation_limit:
                reward += self.config.limit_penalty
                self._done = True

        return StepOutcome(
            next_state=self._state.copy(),
            reward=reward,
            done=self._done,
            declared_label=self._declared,
            auscultation_count=self.auscultation_count,
        )

    # vector-level interface shared with the trainer
    def state_vector(self) -> np.ndarray:
        return flatten_state(self._state)

    def step_index(self, action_index: int) -> tuple[float, bool]:
        outcome = self.step(Action(int(action_index)))
        return outcome.reward, outcome.done

    @property
    def limit_hit(self) -> bool:
        return self._done and self._declared is None


class StaticSweepEnv(AuscultationEnv):
    """Exhaustive-examination variant used by the static baseline.

    The sweep over points 1..12 is mandated: while it is in progress the only
    legal action is the next point in order, and no limit penalty applies.
    Once every point has been auscultated only declarations remain.
    """

    def legal_actions(self) -> np.ndarray:
        legal = np.zeros(N_ACTIONS, dtype=bool)
        count = self.auscultation_count
        if count < self.config.auscultation_limit:
            legal[count] = True  # auscultate point count+1
        else:
            legal[N_POINTS:] = True
        return legal

    def step(self, action: Action) -> StepOutcome:
        if self._done or self._exam is None:
            raise EpisodeFinishedError("episode already finished; call reset")
        if not self.legal_actions()[action.index]:
            raise IllegalActionError(
                f"action {action.index} violates the fixed sweep order"
            )
        if action.is_declare:
            reward = decision_reward(self._exam.label, action.label)
            self._done = True
            self._declared = action.label
        else:
            observed = observe_point(self._exam, action.point, self.rng)
            apply_observation(self._state, action.point, observed)
            reward = self.config.step_penalty
        return StepOutcome(
            next_state=self._state.copy(),
            reward=reward,
            done=self._done,
            declared_label=self._declared,
            auscultation_count=self.auscultation_count,
        )
