"""Two-point miniature examination MDP with an exact solver.

Small enough to enumerate: two auscultation points with binary noiseless
findings, two labels, the same reward shape as the full task (correct
declaration rewarded, confusion penalized, per-step cost, hard limit).
Because observations are noiseless, the information state (which points
were seen, their values, and the auscultation count) is an enumerable
belief MDP that value iteration solves exactly. A Q-network trained on the
plain environment can then be checked action-by-action against the optimal
policy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MINI_POINTS = 2
MINI_LABELS = 2
MINI_ACTIONS = 4  # auscultate 1, auscultate 2, declare 0, declare 1
UNSEEN = -1


@dataclass(frozen=True)
class MiniCase:
    """One joint outcome: finding values per point and the implied label."""

    probability: float
    values: tuple[int, int]
    label: int


DEFAULT_CASES = (
    MiniCase(0.35, (0, 0), 0),
    MiniCase(0.20, (0, 1), 1),
    MiniCase(0.15, (1, 0), 1),
    MiniCase(0.30, (1, 1), 1),
)


@dataclass(frozen=True)
class MiniEnvConfig:
    cases: tuple[MiniCase, ...] = DEFAULT_CASES
    limit: int = 4
    correct_reward: float = 2.0
    wrong_reward: float = -1.0
    step_penalty: float = -0.01
    limit_penalty: float = -10.0

    def __post_init__(self):
        if not self.cases:
            raise ValueError("need at least one case")
        total = sum(c.probability for c in self.cases)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"case probabilities sum to {total}, expected 1")
        for case in self.cases:
            if case.probability < 0:
                raise ValueError("case probabilities must be nonnegative")
            if len(case.values) != MINI_POINTS or any(v not in (0, 1) for v in case.values):
                raise ValueError("case values must be two binary findings")
            if case.label not in range(MINI_LABELS):
                raise ValueError("case label out of range")
        if self.limit < 1:
            raise ValueError("limit must be positive")


@dataclass(frozen=True)
class MiniExam:
    values: tuple[int, int]
    label: int


def sample_mini_exam(rng: np.random.Generator, config: MiniEnvConfig | None = None) -> MiniExam:
    config = config or MiniEnvConfig()
    probs = np.array([c.probability for c in config.cases])
    case = config.cases[int(rng.choice(len(config.cases), p=probs))]
    return MiniExam(values=case.values, label=case.label)


def belief_state_vector(observed: tuple[int, int], count: int, limit: int) -> np.ndarray:
    """Network input: (seen flag, value) per point plus normalized count."""
    vec = np.zeros(2 * MINI_POINTS + 1)
    for i, o in enumerate(observed):
        if o != UNSEEN:
            vec[2 * i] = 1.0
            vec[2 * i + 1] = float(o)
    vec[-1] = count / limit
    return vec


class MiniEnv:
    """Same stepping interface as the full examination environment."""

    n_actions = MINI_ACTIONS
    state_dim = 2 * MINI_POINTS + 1

    def __init__(self, config: MiniEnvConfig | None = None):
        self.config = config or MiniEnvConfig()
        self.rng = np.random.default_rng(0)
        self.done = True
        self.declared_label: int | None = None
        self.limit_hit = False
        self._exam: MiniExam | None = None
        self._observed = [UNSEEN, UNSEEN]
        self._count = 0

    def reset(self, exam: MiniExam) -> None:
        self._exam = exam
        self._observed = [UNSEEN, UNSEEN]
        self._count = 0
        self.done = False
        self.declared_label = None
        self.limit_hit = False

    @property
    def auscultation_count(self) -> int:
        return self._count

    def state_vector(self) -> np.ndarray:
        return belief_state_vector(tuple(self._observed), self._count, self.config.limit)

    def legal_actions(self) -> np.ndarray:
        return np.ones(MINI_ACTIONS, dtype=bool)

    def step_index(self, action: int) -> tuple[float, bool]:
        if self.done:
            raise RuntimeError("episode already finished")
        if action not in range(MINI_ACTIONS):
            raise ValueError(f"action index out of range: {action}")
        cfg = self.config
        if action < MINI_POINTS:
            self._observed[action] = self._exam.values[action]
            self._count += 1
            reward = cfg.step_penalty
            if self._count >= cfg.limit:
                reward += cfg.limit_penalty
                self.done = True
                self.limit_hit = True
            return reward, self.done
        label = action - MINI_POINTS
        self.declared_label = label
        self.done = True
        reward = cfg.correct_reward if label == self._exam.label else cfg.wrong_reward
        return reward, True


# --- exact solution of the belief MDP -------------------------------------

Belief = tuple[int, int, int]  # (finding at point 1, finding at point 2, count)


def enumerate_beliefs(config: MiniEnvConfig | None = None) -> list[Belief]:
    """All nonterminal information states, reachable or not."""
    config = config or MiniEnvConfig()
    return [(o1, o2, c)
            for c in range(config.limit)
            for o1 in (UNSEEN, 0, 1)
            for o2 in (UNSEEN, 0, 1)]


def reachable_beliefs(config: MiniEnvConfig | None = None) -> list[Belief]:
    """Information states some action sequence can actually produce: the
    number of seen points is at least 1 once any auscultation happened and
    can never exceed the count, and seen values must have positive
    probability under the case table."""
    config = config or MiniEnvConfig()
    out = []
    for o1, o2, c in enumerate_beliefs(config):
        n_seen = (o1 != UNSEEN) + (o2 != UNSEEN)
        if c == 0:
            if n_seen != 0:
                continue
        elif not 1 <= n_seen <= min(MINI_POINTS, c):
            continue
        if n_seen and not _consistent_cases(config, (o1, o2)):
            continue
        out.append((o1, o2, c))
    return out


def _consistent_cases(config: MiniEnvConfig, observed: tuple[int, int]) -> list[MiniCase]:
    return [case for case in config.cases
            if all(o == UNSEEN or case.values[i] == o
                   for i, o in enumerate(observed))]


def _posterior(config: MiniEnvConfig, observed: tuple[int, int]) -> list[tuple[float, MiniCase]]:
    cases = _consistent_cases(config, observed)
    total = sum(c.probability for c in cases)
    return [(c.probability / total, c) for c in cases]


def belief_transitions(config: MiniEnvConfig | None = None):
    """Transition function for the generic solver: (belief, action) ->
    list of (probability, next belief or None when terminal, reward)."""
    config = config or MiniEnvConfig()

    def transitions(belief: Belief, action: int):
        o1, o2, count = belief
        observed = (o1, o2)
        if action < MINI_POINTS:
            new_count = count + 1
            hits_limit = new_count >= config.limit
            reward = config.step_penalty + (config.limit_penalty if hits_limit else 0.0)
            if observed[action] != UNSEEN:
                nxt = None if hits_limit else _with(observed, action, observed[action], new_count)
                return [(1.0, nxt, reward)]
            out = []
            for value in (0, 1):
                prob = sum(p for p, case in _posterior(config, observed)
                           if case.values[action] == value)
                if prob == 0.0:
                    continue
                nxt = None if hits_limit else _with(observed, action, value, new_count)
                out.append((prob, nxt, reward))
            return out
        label = action - MINI_POINTS
        expected = sum(p * (config.correct_reward if case.label == label
                            else config.wrong_reward)
                       for p, case in _posterior(config, observed))
        return [(1.0, None, expected)]

    return transitions


def _with(observed: tuple[int, int], point: int, value: int, count: int) -> Belief:
    out = list(observed)
    out[point] = value
    return (out[0], out[1], count)


@dataclass
class MdpSolution:
    values: dict
    q_values: dict
    policy: dict
    iterations: int


def value_iteration(states, n_actions: int, transitions, gamma: float,
                    tolerance: float = 1e-10, max_iterations: int = 100_000) -> MdpSolution:
    """Bellman optimality backups to fixed point on an enumerable MDP.

    `transitions(state, action)` yields (probability, next state or None,
    reward) triples; None marks termination. Stops when the largest value
    change falls below `tolerance`; greedy policy breaks ties toward the
    lowest action index.
    """
    values = {s: 0.0 for s in states}
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        delta = 0.0
        for s in states:
            best = -np.inf
            for a in range(n_actions):
                q = sum(p * (r + (gamma * values[nxt] if nxt is not None else 0.0))
                        for p, nxt, r in transitions(s, a))
                best = max(best, q)
            delta = max(delta, abs(best - values[s]))
            values[s] = best
        if delta < tolerance:
            break
    q_values = {}
    policy = {}
    for s in states:
        q = np.array([sum(p * (r + (gamma * values[nxt] if nxt is not None else 0.0))
                          for p, nxt, r in transitions(s, a))
                      for a in range(n_actions)])
        q_values[s] = q
        policy[s] = int(np.argmax(q))
    return MdpSolution(values=values, q_values=q_values, policy=policy,
                       iterations=iterations)


def solve_mini(config: MiniEnvConfig | None = None, gamma: float = 0.93,
               tolerance: float = 1e-10) -> MdpSolution:
    """Exact optimal values and policy over all nonterminal information
    states of the miniature environment."""
    config = config or MiniEnvConfig()
    return value_iteration(enumerate_beliefs(config), MINI_ACTIONS,
                           belief_transitions(config), gamma, tolerance)
