import numpy as np
import pytest

from auscult.minienv import (
    DEFAULT_CASES,
    MINI_ACTIONS,
    MiniCase,
    MiniEnv,
    MiniEnvConfig,
    MiniExam,
    UNSEEN,
    belief_state_vector,
    belief_transitions,
    enumerate_beliefs,
    reachable_beliefs,
    sample_mini_exam,
    solve_mini,
    value_iteration,
)

from oracles import mini_expectimax

ROOT = (UNSEEN, UNSEEN, 0)


def oracle_cases(config=None):
    config = config or MiniEnvConfig()
    return [(c.probability, c.values, c.label) for c in config.cases]


def oracle_belief(belief):
    o1, o2, count = belief
    observed = (None if o1 == UNSEEN else o1, None if o2 == UNSEEN else o2)
    return observed, count


class TestMiniEnvStepping:
    def test_reset_state_is_blank(self):
        env = MiniEnv()
        env.reset(MiniExam(values=(1, 0), label=1))
        assert np.array_equal(env.state_vector(), np.zeros(5))
        assert not env.done

    def test_auscultation_reveals_value(self):
        env = MiniEnv()
        env.reset(MiniExam(values=(1, 0), label=1))
        reward, done = env.step_index(0)
        assert reward == pytest.approx(-0.01)
        assert not done
        assert np.array_equal(env.state_vector(), [1.0, 1.0, 0.0, 0.0, 0.25])
        reward, _ = env.step_index(1)
        assert reward == pytest.approx(-0.01)
        assert np.array_equal(env.state_vector(), [1.0, 1.0, 1.0, 0.0, 0.5])

    def test_correct_declaration(self):
        env = MiniEnv()
        env.reset(MiniExam(values=(0, 0), label=0))
        reward, done = env.step_index(2)
        assert (reward, done) == (2.0, True)
        assert env.declared_label == 0
        assert not env.limit_hit

    def test_wrong_declaration(self):
        env = MiniEnv()
        env.reset(MiniExam(values=(1, 1), label=1))
        reward, done = env.step_index(2)
        assert (reward, done) == (-1.0, True)

    def test_limit_ends_episode_with_penalty(self):
        env = MiniEnv()
        env.reset(MiniExam(values=(0, 1), label=1))
        rewards = [env.step_index(0)[0] for _ in range(3)]
        assert rewards == pytest.approx([-0.01, -0.01, -0.01])
        reward, done = env.step_index(1)
        assert reward == pytest.approx(-10.01)
        assert done
        assert env.limit_hit
        assert env.declared_label is None

    def test_finished_episode_rejects_steps(self):
        env = MiniEnv()
        env.reset(MiniExam(values=(0, 0), label=0))
        env.step_index(2)
        with pytest.raises(RuntimeError):
            env.step_index(0)

    def test_bad_action_rejected(self):
        env = MiniEnv()
        env.reset(MiniExam(values=(0, 0), label=0))
        with pytest.raises(ValueError):
            env.step_index(4)

    def test_exam_sampling_matches_case_table(self):
        rng = np.random.default_rng(0)
        by_values = {c.values: c for c in DEFAULT_CASES}
        counts = {v: 0 for v in by_values}
        n = 10_000
        for _ in range(n):
            exam = sample_mini_exam(rng)
            assert exam.label == by_values[exam.values].label
            counts[exam.values] += 1
        for values, case in by_values.items():
            assert abs(counts[values] / n - case.probability) < 0.02


class TestConfigValidation:
    def test_probabilities_must_sum_to_one(self):
        with pytest.raises(ValueError):
            MiniEnvConfig(cases=(MiniCase(0.5, (0, 0), 0),))

    def test_values_must_be_binary(self):
        with pytest.raises(ValueError):
            MiniEnvConfig(cases=(MiniCase(1.0, (0, 2), 0),))


class TestBeliefEnumeration:
    def test_all_beliefs_counted(self):
        beliefs = enumerate_beliefs()
        assert len(beliefs) == 36  # 3 x 3 observations x 4 counts
        assert len(set(beliefs)) == 36

    def test_reachable_subset(self):
        reachable = reachable_beliefs()
        assert len(reachable) == 21
        assert ROOT in reachable
        assert set(reachable) <= set(enumerate_beliefs())
        for o1, o2, count in reachable:
            n_seen = (o1 != UNSEEN) + (o2 != UNSEEN)
            assert n_seen <= count

    def test_reachable_matches_forward_search(self):
        # independent derivation: breadth-first walk of the transition graph
        transitions = belief_transitions()
        seen = {ROOT}
        frontier = [ROOT]
        while frontier:
            belief = frontier.pop()
            for action in range(MINI_ACTIONS):
                for _, nxt, _ in transitions(belief, action):
                    if nxt is not None and nxt not in seen:
                        seen.add(nxt)
                        frontier.append(nxt)
        assert seen == set(reachable_beliefs())


class TestValueIteration:
    def test_single_state_single_action(self):
        def transitions(state, action):
            return [(1.0, None, 1.0)]

        solution = value_iteration(["s"], 1, transitions, gamma=0.5)
        assert solution.values["s"] == pytest.approx(1.0)
        assert solution.policy["s"] == 0

    def test_gamma_zero_is_shortsighted(self):
        transitions = belief_transitions()
        solution = value_iteration(reachable_beliefs(), MINI_ACTIONS,
                                   transitions, gamma=0.0)
        for belief in reachable_beliefs():
            immediate = max(
                sum(p * r for p, _, r in transitions(belief, a))
                for a in range(MINI_ACTIONS))
            assert solution.values[belief] == pytest.approx(immediate)

    def test_matches_expectimax_on_every_reachable_belief(self):
        solution = solve_mini(gamma=0.93)
        cases = oracle_cases()
        for belief in reachable_beliefs():
            observed, count = oracle_belief(belief)
            want = mini_expectimax(cases, 4, observed, count, 0.93)
            got = solution.q_values[belief]
            assert np.allclose(got, want, atol=1e-9), belief
            assert solution.values[belief] == pytest.approx(max(want))
            assert solution.policy[belief] == int(np.argmax(want))

    def test_root_value_pinned(self):
        # regression pin; the value agrees with the recursive oracle above
        solution = solve_mini(gamma=0.93)
        assert solution.values[ROOT] == pytest.approx(1.78025, abs=1e-5)
        assert solution.policy[ROOT] == 1

    def test_policy_is_fixed_point_of_one_more_backup(self):
        solution = solve_mini(gamma=0.93)
        transitions = belief_transitions()
        for belief in enumerate_beliefs():
            q = [sum(p * (r + (0.93 * solution.values[nxt]
                              if nxt is not None else 0.0))
                     for p, nxt, r in transitions(belief, a))
                 for a in range(MINI_ACTIONS)]
            assert int(np.argmax(q)) == solution.policy[belief]

    def test_gamma_zero_custom_reward_example(self):
        # hand-checkable: declaring is the only positive immediate return
        config = MiniEnvConfig()
        solution = value_iteration(reachable_beliefs(config), MINI_ACTIONS,
                                   belief_transitions(config), gamma=0.0)
        # root posterior: label 0 with 0.35, label 1 with 0.65
        want = max(0.35 * 2.0 + 0.65 * -1.0, 0.65 * 2.0 + 0.35 * -1.0)
        assert solution.values[ROOT] == pytest.approx(want)


class TestBeliefVector:
    def test_layout(self):
        vec = belief_state_vector((1, UNSEEN), 2, 4)
        assert np.array_equal(vec, [1.0, 1.0, 0.0, 0.0, 0.5])

    def test_zero_value_still_marks_seen(self):
        vec = belief_state_vector((0, UNSEEN), 1, 4)
        assert np.array_equal(vec, [1.0, 0.0, 0.0, 0.0, 0.25])
