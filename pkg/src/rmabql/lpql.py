"""Q-learning over a grid of cost-penalty multipliers.

Each arm keeps a Q(s, a, lambda_p) tensor over an evenly spaced multiplier
grid. A single, index-free update rule trains every grid slice from the
same experience. Selection finds the grid point where the penalized value
bound stops improving (its slope in lambda crosses -B/(1-beta)) and then
solves an exact knapsack over the Q-values at that point. A second policy
head derives per-action indexes from the same tensor (the grid point where
adjacent actions' Q-values come closest) and allocates greedily.
"""

from __future__ import annotations

import numpy as np

from .core import RmabInstance
from .knapsack import KnapsackProblem, solve
from .maiql import greedy_index_allocation
from .schedules import ScheduleParams, VisitCounter, alpha, epsilon, random_action
from .simulate import Experience


def lambda_max_bound(instance: RmabInstance) -> float:
    """Upper end of the useful multiplier range.

    For each arm with a strictly positive cost: max(rewards) divided by
    (min positive cost * (1 - discount)); the instance bound is the max
    across such arms. Beyond it every nonzero action is penalized more
    than any reward it can recoup. Arms with only zero costs are skipped;
    if no arm has a positive cost the budget constraint is vacuous and the
    bound is undefined.
    """
    best = None
    for arm in instance.arms:
        positive = arm.costs[arm.costs > 0]
        if positive.size == 0:
            continue
        bound = float(arm.rewards.max()) / (
            float(positive.min()) * (1.0 - instance.discount)
        )
        best = bound if best is None else max(best, bound)
    if best is None:
        raise ValueError(
            "no arm has a strictly positive cost; multiplier bound undefined"
        )
    return best


class LambdaGrid:
    """Evenly spaced multipliers 0 = lambda_0 < ... < lambda_{n_lam}.

    n_lam is the number of intervals; n_lam + 1 points are stored so the
    slope at the last interior point still has a right neighbor.
    """

    def __init__(self, lambda_max: float, n_lam: int):
        if lambda_max <= 0:
            raise ValueError(f"lambda_max must be positive, got {lambda_max}")
        if n_lam < 1:
            raise ValueError(f"n_lam must be >= 1, got {n_lam}")
        self.lambda_max = float(lambda_max)
        self.n_lam = int(n_lam)
        self.values = np.arange(self.n_lam + 1) * self.lambda_max / self.n_lam
        self.values.setflags(write=False)

    @property
    def n_points(self) -> int:
        return self.n_lam + 1

    def __repr__(self) -> str:
        return f"LambdaGrid(lambda_max={self.lambda_max}, n_lam={self.n_lam})"


def find_lambda_min(
    tables: list[np.ndarray],
    grid: LambdaGrid,
    states: np.ndarray,
    budget: float,
    discount: float,
) -> int:
    """First grid index where the summed value slope reaches -B/(1-beta).

    tables[i] has shape (S_i, M_i, n_points). Scans p = 0..n_lam-1 and
    returns the first p whose forward slope of sum_i max_a Q_i(s_i, a, .)
    is >= -budget/(1-discount); falls back to n_lam-1.
    """
    stacked = np.zeros(grid.n_points)
    scratch = np.empty(grid.n_points)
    for i, q in enumerate(tables):
        np.max(q[int(states[i])], axis=0, out=scratch)
        stacked += scratch
    lam_step = grid.lambda_max / grid.n_lam
    slopes = np.diff(stacked) / lam_step
    threshold = -budget / (1.0 - discount)
    hits = np.flatnonzero(slopes >= threshold)
    return int(hits[0]) if hits.size else grid.n_lam - 1


def approx_index(
    tables: list[np.ndarray], grid: LambdaGrid, arm: int, s: int, a_j: int
) -> float:
    """Grid point where Q(s, a_j, .) and Q(s, a_{j-1}, .) are closest.

    Ties go to the smallest grid index. This is the indifference point the
    tensor can express without a second timescale.
    """
    if a_j < 1:
        raise ValueError("approx_index needs a nonzero action")
    gap = np.abs(tables[arm][s, a_j] - tables[arm][s, a_j - 1])
    return float(grid.values[int(gap.argmin())])


def approx_index_rows(
    tables: list[np.ndarray], grid: LambdaGrid, states: np.ndarray
) -> list[np.ndarray]:
    """Per-arm vectors of approximate indexes for actions 1..M-1 at the current states."""
    rows = []
    for i, q in enumerate(tables):
        at_state = q[int(states[i])]  # (M, n_points)
        gaps = np.abs(at_state[1:] - at_state[:-1])
        rows.append(grid.values[gaps.argmin(axis=1)])
    return rows


class LpqlLearner:
    """Grid Q-learner with slope-scan + knapsack selection."""

    def __init__(
        self,
        instance: RmabInstance,
        grid: LambdaGrid,
        params: ScheduleParams,
    ):
        self.instance = instance
        self.grid = grid
        self.params = params
        self.discount = instance.discount
        self.q = [
            np.zeros((arm.n_states, arm.n_actions, grid.n_points))
            for arm in instance.arms
        ]
        self.counts = VisitCounter(instance)
        # cost * lambda_p, precomputed per arm as an (M, n_points) block
        self._penalty = [
            arm.costs[:, None] * grid.values[None, :] for arm in instance.arms
        ]
        self._costs = tuple(arm.costs for arm in instance.arms)
        self._scratch = np.empty(grid.n_points)
        self.last_lambda_index = -1

    def update(self, batch: list[Experience], env_t: int | None = None) -> None:
        tmp = self._scratch
        for e in batch:
            nu = self.counts.bump(e.arm, e.s, e.a)
            step = alpha(self.params, nu)
            q = self.q[e.arm]
            # tmp ends up as target - row, where
            # target = r - penalty + discount * max_a Q(s', a, .)
            np.max(q[e.s_next], axis=0, out=tmp)
            tmp *= self.discount
            tmp += e.r
            tmp -= self._penalty[e.arm][e.a]
            row = q[e.s, e.a]
            tmp -= row
            tmp *= step
            row += tmp

    def select(
        self, states: np.ndarray, t: int, rng: np.random.Generator
    ) -> np.ndarray:
        if rng.random() < epsilon(self.params, t):
            self.last_lambda_index = -1
            return random_action(self.instance, rng)
        return self.select_greedy(states)

    def select_greedy(self, states: np.ndarray) -> np.ndarray:
        p = find_lambda_min(
            self.q, self.grid, states, self.instance.budget, self.discount
        )
        self.last_lambda_index = p
        problem = KnapsackProblem(
            values=tuple(self.q[i][int(states[i]), :, p] for i in range(len(self.q))),
            costs=self._costs,
            budget=self.instance.budget,
        )
        return solve(problem)

    def epsilon_at(self, t: int) -> float:
        return epsilon(self.params, t)


class MaiqlAprxLearner(LpqlLearner):
    """Same tensor and update as LpqlLearner; selection goes through
    approximate indexes and greedy budget allocation instead."""

    def select(
        self, states: np.ndarray, t: int, rng: np.random.Generator
    ) -> np.ndarray:
        self.last_lambda_index = -1
        if rng.random() < epsilon(self.params, t):
            return random_action(self.instance, rng)
        return self.select_greedy(states)

    def select_greedy(self, states: np.ndarray) -> np.ndarray:
        rows = approx_index_rows(self.q, self.grid, states)
        return greedy_index_allocation(rows, self._costs, self.instance.budget)
