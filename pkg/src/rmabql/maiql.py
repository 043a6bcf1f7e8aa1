"""Two-timescale index learning and greedy index-based allocation.

For every (state i, nonzero action j) pair of every arm, a full Q-table is
trained under that pair's current multiplier estimate; on a slower
schedule the multiplier itself moves toward the value that makes the pair
indifferent between actions j and j-1 (the defining property of the
index). Action selection allocates the budget one cost increment at a
time to the arm whose next action upgrade has the highest index. A
2-action wrapper restricts the same machinery to {passive, one designated
action} and plays that action on the top-scoring arms.
"""

from __future__ import annotations

import numpy as np

from .core import FEASIBILITY_ATOL, ArmModel, RmabInstance
from .schedules import ScheduleParams, VisitCounter, alpha, epsilon, gamma, random_action
from .simulate import Experience

MODES = ("discounted", "average")


def greedy_index_allocation(
    index_rows: list[np.ndarray],
    costs: list[np.ndarray],
    budget: float,
) -> np.ndarray:
    """Assign actions by descending index, charging incremental cost.

    index_rows[i] holds arm i's indexes for actions 1..M_i-1 at its current
    state. Entries are visited best index first (ties to the lowest arm,
    then the cheapest action); an entry upgrades its arm from the current
    action to the entry's action when the cost difference still fits the
    remaining budget. Backward and unaffordable entries are skipped, so the
    result is always feasible even for unevenly spaced costs.
    """
    n = len(index_rows)
    entries = []
    for i, row in enumerate(index_rows):
        for j, value in enumerate(np.asarray(row, dtype=float), start=1):
            entries.append((-value, i, j))
    entries.sort()
    actions = np.zeros(n, dtype=np.int64)
    remaining = float(budget)
    for _, i, j in entries:
        if j <= actions[i]:
            continue
        inc_cost = float(costs[i][j] - costs[i][actions[i]])
        if inc_cost > remaining + FEASIBILITY_ATOL:
            continue
        actions[i] = j
        remaining -= inc_cost
    return actions


class MaiqlLearner:
    """Per-(state, action) Q-tables plus multiplier estimates, trained on
    two timescales."""

    def __init__(
        self,
        instance: RmabInstance,
        params: ScheduleParams,
        lambda_bound: float,
        mode: str = "discounted",
    ):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        if lambda_bound <= 0:
            raise ValueError("lambda_bound must be positive")
        if params.C_prime is None:
            raise ValueError("index learning needs C_prime in the schedule")
        self.instance = instance
        self.params = params
        self.lambda_bound = float(lambda_bound)
        self.mode = mode
        self.discount = instance.discount
        # q[n] has shape (S, M-1, S, M): one full Q-table per target pair
        # (state i, action j >= 1); lam[n] is the matching (S, M-1) matrix.
        self.q = [
            np.zeros((arm.n_states, arm.n_actions - 1, arm.n_states, arm.n_actions))
            for arm in instance.arms
        ]
        self.lam = [
            np.zeros((arm.n_states, arm.n_actions - 1)) for arm in instance.arms
        ]
        self.counts = VisitCounter(instance)
        self._costs = tuple(arm.costs for arm in instance.arms)

    def update(self, batch: list[Experience], env_t: int) -> None:
        """Q step on every target pair; gated index step for the visited pair.

        The index step runs when the experienced action is nonzero and the
        environment clock is a multiple of the number of arms, and moves
        lam[s, a] along the cost-normalized gap between the pair's own
        Q-values at (s, a) and (s, a-1).
        """
        n_arms = self.instance.n_arms
        for e in batch:
            nu = self.counts.bump(e.arm, e.s, e.a)
            q = self.q[e.arm]
            if q.shape[1] == 0:  # single-action arm: nothing to learn
                continue
            arm = self.instance.arms[e.arm]
            lam = self.lam[e.arm]
            step = alpha(self.params, nu)
            if self.mode == "discounted":
                cont = self.discount * q[:, :, e.s_next, :].max(axis=-1)
            else:
                # average-reward form: subtract each table's running value proxy
                cont = q[:, :, e.s_next, :].max(axis=-1) - q.mean(axis=(2, 3))
            target = e.r - float(arm.costs[e.a]) * lam + cont
            q[:, :, e.s, e.a] += step * (target - q[:, :, e.s, e.a])
            if e.a != 0 and env_t % n_arms == 0:
                dc = float(arm.costs[e.a] - arm.costs[e.a - 1])
                if dc == 0:
                    raise ValueError(
                        f"arm {e.arm}: actions {e.a - 1} and {e.a} share a cost; "
                        "the index step is undefined for this pair"
                    )
                own = q[e.s, e.a - 1]  # the (i=s, j=a) pair's Q-table
                delta = gamma(self.params, nu) * (
                    float(own[e.s, e.a]) - float(own[e.s, e.a - 1])
                ) / dc
                lam[e.s, e.a - 1] = float(
                    np.clip(
                        lam[e.s, e.a - 1] + delta,
                        -self.lambda_bound,
                        self.lambda_bound,
                    )
                )

    def index_rows(self, states: np.ndarray) -> list[np.ndarray]:
        return [
            self.lam[i][int(states[i])] for i in range(self.instance.n_arms)
        ]

    def select(
        self, states: np.ndarray, t: int, rng: np.random.Generator
    ) -> np.ndarray:
        if rng.random() < epsilon(self.params, t):
            return random_action(self.instance, rng)
        return self.select_greedy(states)

    def select_greedy(self, states: np.ndarray) -> np.ndarray:
        return greedy_index_allocation(
            self.index_rows(states), self._costs, self.instance.budget
        )

    def epsilon_at(self, t: int) -> float:
        return epsilon(self.params, t)


def _restrict_arm(arm: ArmModel, action: int) -> ArmModel:
    return ArmModel(
        costs=[0.0, float(arm.costs[action])],
        rewards=arm.rewards.copy(),
        transitions=arm.transitions[:, [0, action], :].copy(),
    )


class WibqlLearner:
    """Index learning restricted to {passive, one designated action}.

    Selection plays the designated action on the floor(B / c_j) arms with
    the highest current index and the passive action elsewhere.
    """

    def __init__(
        self,
        instance: RmabInstance,
        params: ScheduleParams,
        lambda_bound: float,
        action: int = 1,
        mode: str = "discounted",
    ):
        if action < 1:
            raise ValueError("designated action must be nonzero")
        costs = []
        for i, arm in enumerate(instance.arms):
            if action >= arm.n_actions:
                raise ValueError(f"arm {i} has no action {action}")
            costs.append(float(arm.costs[action]))
        if len(set(costs)) != 1:
            raise ValueError(
                "designated action must cost the same on every arm, "
                f"got {sorted(set(costs))}"
            )
        self.action_cost = costs[0]
        if self.action_cost <= 0:
            raise ValueError("designated action must have a positive cost")
        self.instance = instance
        self.action = int(action)
        self.sub_instance = RmabInstance(
            arms=tuple(_restrict_arm(arm, action) for arm in instance.arms),
            budget=instance.budget,
            discount=instance.discount,
        )
        self.inner = MaiqlLearner(self.sub_instance, params, lambda_bound, mode)
        self.params = params

    def update(self, batch: list[Experience], env_t: int) -> None:
        mapped = [
            Experience(
                arm=e.arm,
                s=e.s,
                a=0 if e.a == 0 else 1,
                r=e.r,
                s_next=e.s_next,
            )
            for e in batch
            if e.a in (0, self.action)
        ]
        self.inner.update(mapped, env_t)

    def select(
        self, states: np.ndarray, t: int, rng: np.random.Generator
    ) -> np.ndarray:
        if rng.random() < epsilon(self.params, t):
            sub = random_action(self.sub_instance, rng)
            return np.where(sub == 1, self.action, 0)
        return self.select_greedy(states)

    def select_greedy(self, states: np.ndarray) -> np.ndarray:
        n = self.instance.n_arms
        k = int(self.instance.budget // self.action_cost)
        actions = np.zeros(n, dtype=np.int64)
        if k < 1:
            return actions
        scores = np.array(
            [self.inner.lam[i][int(s), 0] for i, s in enumerate(states)]
        )
        top = np.argsort(-scores, kind="stable")[: min(k, n)]
        actions[top] = self.action
        return actions

    def epsilon_at(self, t: int) -> float:
        return epsilon(self.params, t)
