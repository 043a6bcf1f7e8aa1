"""Budget-agnostic per-arm Q-learning and the random policy.

The plain learner trains one |S| x M table per arm with no cost penalty;
budget awareness enters only at selection time, through the same exact
knapsack the grid learner uses.
"""

from __future__ import annotations

import numpy as np

from .core import RmabInstance
from .knapsack import KnapsackProblem, solve
from .schedules import ScheduleParams, VisitCounter, alpha, epsilon, random_action
from .simulate import Experience


class Ql0Learner:
    """Per-arm tabular Q-learning; knapsack over raw Q-values at selection."""

    def __init__(self, instance: RmabInstance, params: ScheduleParams):
        self.instance = instance
        self.params = params
        self.discount = instance.discount
        self.q = [np.zeros((arm.n_states, arm.n_actions)) for arm in instance.arms]
        self.counts = VisitCounter(instance)
        self._costs = tuple(arm.costs for arm in instance.arms)

    def update(self, batch: list[Experience], env_t: int | None = None) -> None:
        for e in batch:
            nu = self.counts.bump(e.arm, e.s, e.a)
            q = self.q[e.arm]
            target = e.r + self.discount * q[e.s_next].max()
            q[e.s, e.a] += alpha(self.params, nu) * (target - q[e.s, e.a])

    def select(
        self, states: np.ndarray, t: int, rng: np.random.Generator
    ) -> np.ndarray:
        if rng.random() < epsilon(self.params, t):
            return random_action(self.instance, rng)
        return self.select_greedy(states)

    def select_greedy(self, states: np.ndarray) -> np.ndarray:
        problem = KnapsackProblem(
            values=tuple(
                self.q[i][int(states[i])] for i in range(self.instance.n_arms)
            ),
            costs=self._costs,
            budget=self.instance.budget,
        )
        return solve(problem)

    def epsilon_at(self, t: int) -> float:
        return epsilon(self.params, t)


class RandomPolicy:
    """Budget-respecting random actions every round; learns nothing."""

    def __init__(self, instance: RmabInstance):
        self.instance = instance

    def update(self, batch: list[Experience], env_t: int | None = None) -> None:
        pass

    def select(
        self, states: np.ndarray, t: int, rng: np.random.Generator
    ) -> np.ndarray:
        return random_action(self.instance, rng)

    def epsilon_at(self, t: int) -> float:
        return 1.0
