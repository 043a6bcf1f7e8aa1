"""Exact offline policies computed from the known transition model.

Value iteration solves each arm's cost-penalized problem to tolerance,
either at a single multiplier or vectorized across a whole grid. On top of
that sit three reference policies: the grid-scan + knapsack policy, the
no-penalty knapsack policy, and a per-pair index policy whose indexes come
from bisecting the penalized Q-gap to its indifference point.
"""

from __future__ import annotations

import numpy as np

from .core import ArmModel, RmabInstance
from .knapsack import KnapsackProblem, solve
from .lpql import LambdaGrid, find_lambda_min
from .maiql import greedy_index_allocation

VI_TOL = 1e-9
VI_MAX_ITER = 100_000


class ValueIterationError(RuntimeError):
    """Fixed point not reached within the iteration cap."""

    def __init__(self, residual: float, max_iter: int):
        super().__init__(
            f"value iteration did not converge: residual {residual:.3e} "
            f"after {max_iter} iterations"
        )
        self.residual = residual
        self.max_iter = max_iter


class NotIndexableError(RuntimeError):
    """The penalized Q-gap never changes sign on the probed multiplier range."""

    def __init__(self, s: int, a_j: int, lam_max: float, gap_at_max: float):
        super().__init__(
            f"no indifference point for (state={s}, action={a_j}) on "
            f"[0, {lam_max}]: gap still {gap_at_max:.3e} at the upper end"
        )
        self.s = s
        self.a_j = a_j
        self.lam_max = lam_max
        self.gap_at_max = gap_at_max


def value_iteration(
    arm: ArmModel,
    lam: float,
    discount: float,
    tol: float = VI_TOL,
    max_iter: int = VI_MAX_ITER,
    q_init: np.ndarray | None = None,
) -> np.ndarray:
    """Optimal Q (S, M) for reward r(s) - lam * c_a, to sup-norm residual tol."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    base = arm.rewards[:, None] - lam * arm.costs[None, :]
    q = np.zeros_like(base) if q_init is None else np.array(q_init, dtype=float)
    residual = np.inf
    for _ in range(max_iter):
        nxt = base + discount * arm.transitions.dot(q.max(axis=1))
        residual = float(np.abs(nxt - q).max())
        q = nxt
        if residual <= tol:
            return q
    raise ValueIterationError(residual, max_iter)


def value_iteration_grid(
    arm: ArmModel,
    lams: np.ndarray,
    discount: float,
    tol: float = VI_TOL,
    max_iter: int = VI_MAX_ITER,
) -> np.ndarray:
    """Optimal Q for every multiplier at once; returns (S, M, P).

    All grid points iterate together until the worst residual across the
    grid is within tol.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    lams = np.asarray(lams, dtype=float)
    base = arm.rewards[None, :, None] - lams[:, None, None] * arm.costs[None, None, :]
    q = np.zeros_like(base)  # (P, S, M)
    residual = np.inf
    for _ in range(max_iter):
        v = q.max(axis=2)  # (P, S)
        nxt = base + discount * np.einsum("smt,pt->psm", arm.transitions, v)
        residual = float(np.abs(nxt - q).max())
        q = nxt
        if residual <= tol:
            return np.ascontiguousarray(np.moveaxis(q, 0, -1))
    raise ValueIterationError(residual, max_iter)


def oracle_grid_tables(
    instance: RmabInstance,
    grid: LambdaGrid,
    tol: float = VI_TOL,
    max_iter: int = VI_MAX_ITER,
) -> list[np.ndarray]:
    """Per-arm (S, M, n_points) optimal Q-tables over the multiplier grid."""
    return [
        value_iteration_grid(arm, grid.values, instance.discount, tol, max_iter)
        for arm in instance.arms
    ]


def arm_lambda_max(arm: ArmModel, discount: float) -> float:
    """Single-arm version of the multiplier range bound."""
    positive = arm.costs[arm.costs > 0]
    if positive.size == 0:
        raise ValueError("arm has no strictly positive cost; bound undefined")
    return float(arm.rewards.max()) / (float(positive.min()) * (1.0 - discount))


def oracle_index(
    arm: ArmModel,
    s: int,
    a_j: int,
    discount: float,
    tol: float = 1e-7,
    lam_max: float | None = None,
    vi_tol: float = VI_TOL,
    max_iter: int = VI_MAX_ITER,
    clamp: bool = False,
) -> float:
    """Multiplier making the arm indifferent between actions a_j and a_j - 1 at s.

    Bisects the gap Q(s, a_j, lam) - Q(s, a_j - 1, lam) on [0, lam_max],
    solving each probe by value iteration. A gap that is already <= 0 at 0
    gives 0. If the gap never changes sign the pair has no indifference
    point on the range: raises NotIndexableError, or returns lam_max when
    clamp is set (callers that only rank indexes can live with the cap).
    """
    if a_j < 1:
        raise ValueError("index is defined for nonzero actions only")
    if lam_max is None:
        lam_max = arm_lambda_max(arm, discount)
    q0 = value_iteration(arm, 0.0, discount, vi_tol, max_iter)
    gap0 = float(q0[s, a_j] - q0[s, a_j - 1])
    if gap0 <= 0:
        return 0.0
    if lam_max <= 0:
        raise NotIndexableError(s, a_j, lam_max, gap0)
    q = value_iteration(arm, lam_max, discount, vi_tol, max_iter, q_init=q0)
    gap_hi = float(q[s, a_j] - q[s, a_j - 1])
    if gap_hi > 0:
        if clamp:
            return float(lam_max)
        raise NotIndexableError(s, a_j, lam_max, gap_hi)
    lo, hi = 0.0, float(lam_max)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        q = value_iteration(arm, mid, discount, vi_tol, max_iter, q_init=q)
        if float(q[s, a_j] - q[s, a_j - 1]) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def oracle_index_table(
    arm: ArmModel,
    discount: float,
    tol: float = 1e-7,
    lam_max: float | None = None,
    clamp: bool = False,
) -> np.ndarray:
    """All (state, action >= 1) indexes for one arm, shape (S, M-1)."""
    table = np.zeros((arm.n_states, arm.n_actions - 1))
    for s in range(arm.n_states):
        for j in range(1, arm.n_actions):
            table[s, j - 1] = oracle_index(
                arm, s, j, discount, tol=tol, lam_max=lam_max, clamp=clamp
            )
    return table


class OracleLpPolicy:
    """Grid scan + knapsack on exact Q-tables, re-solved every round."""

    def __init__(
        self,
        instance: RmabInstance,
        grid: LambdaGrid,
        tol: float = VI_TOL,
        max_iter: int = VI_MAX_ITER,
    ):
        self.instance = instance
        self.grid = grid
        self.tables = oracle_grid_tables(instance, grid, tol, max_iter)
        self._costs = tuple(arm.costs for arm in instance.arms)
        self.last_lambda_index = -1

    def update(self, batch, env_t: int | None = None) -> None:
        pass

    def select(
        self, states: np.ndarray, t: int | None = None, rng=None
    ) -> np.ndarray:
        p = find_lambda_min(
            self.tables, self.grid, states, self.instance.budget, self.instance.discount
        )
        self.last_lambda_index = p
        problem = KnapsackProblem(
            values=tuple(
                self.tables[i][int(states[i]), :, p]
                for i in range(self.instance.n_arms)
            ),
            costs=self._costs,
            budget=self.instance.budget,
        )
        return solve(problem)

    def epsilon_at(self, t: int) -> float:
        return 0.0


class OracleLambda0Policy:
    """Knapsack on exact unpenalized Q-tables."""

    def __init__(
        self,
        instance: RmabInstance,
        tol: float = VI_TOL,
        max_iter: int = VI_MAX_ITER,
    ):
        self.instance = instance
        self.tables = [
            value_iteration(arm, 0.0, instance.discount, tol, max_iter)
            for arm in instance.arms
        ]
        self._costs = tuple(arm.costs for arm in instance.arms)

    def update(self, batch, env_t: int | None = None) -> None:
        pass

    def select(
        self, states: np.ndarray, t: int | None = None, rng=None
    ) -> np.ndarray:
        problem = KnapsackProblem(
            values=tuple(
                self.tables[i][int(states[i])] for i in range(self.instance.n_arms)
            ),
            costs=self._costs,
            budget=self.instance.budget,
        )
        return solve(problem)

    def epsilon_at(self, t: int) -> float:
        return 0.0


class OracleLpIndexPolicy:
    """Greedy allocation over exact per-pair indexes."""

    def __init__(
        self,
        instance: RmabInstance,
        tol: float = 1e-7,
        lam_max: float | None = None,
        clamp: bool = False,
    ):
        self.instance = instance
        self.tables = [
            oracle_index_table(
                arm, instance.discount, tol=tol, lam_max=lam_max, clamp=clamp
            )
            for arm in instance.arms
        ]
        self._costs = tuple(arm.costs for arm in instance.arms)

    def update(self, batch, env_t: int | None = None) -> None:
        pass

    def select(
        self, states: np.ndarray, t: int | None = None, rng=None
    ) -> np.ndarray:
        rows = [
            self.tables[i][int(states[i])] for i in range(self.instance.n_arms)
        ]
        return greedy_index_allocation(rows, self._costs, self.instance.budget)

    def epsilon_at(self, t: int) -> float:
        return 0.0
