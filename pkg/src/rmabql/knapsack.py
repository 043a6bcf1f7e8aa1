"""Exact multiple-choice knapsack: one action per arm, summed cost <= budget.

Two exact paths share the entry point `solve`: a dynamic program over
integer budget levels when costs and budget are integral at the declared
resolution, and depth-first branch and bound with a fractional-relaxation
bound for real costs. Ties are broken toward the lexicographically
smallest action vector (lowest arm index, then lowest action index), so
repeated runs are reproducible. Values may be negative; the zero-cost
option on every arm keeps the problem always feasible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FEASIBILITY_ATOL as _FEAS_ATOL

# Tolerance for deciding whether a cost is integral at a given resolution.
_INT_ATOL = 1e-9

DP_MAX_CELLS = 1_000_000

# Below this table size the vectorized DP loses to plain lists: each numpy
# call costs more than the handful of float ops it would batch.
_SMALL_DP_CELLS = 4096


@dataclass(frozen=True)
class KnapsackProblem:
    """Per-arm value rows, per-arm cost rows, and the shared budget."""

    values: tuple[np.ndarray, ...]
    costs: tuple[np.ndarray, ...]
    budget: float

    def __post_init__(self):
        values = tuple(np.asarray(v, dtype=float) for v in self.values)
        costs = tuple(np.asarray(c, dtype=float) for c in self.costs)
        if len(values) != len(costs) or not values:
            raise ValueError("values and costs must list the same arms")
        for i, (v, c) in enumerate(zip(values, costs)):
            if v.shape != c.shape or v.ndim != 1 or v.size < 1:
                raise ValueError(f"arm {i}: values/costs shape mismatch")
            if c[0] != 0 and not np.any(c == 0):
                raise ValueError(f"arm {i}: needs a zero-cost option")
        if self.budget < 0:
            raise ValueError("budget must be >= 0")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "budget", float(self.budget))

    @property
    def n_arms(self) -> int:
        return len(self.values)


def _is_integral(x, resolution: float) -> bool:
    scaled = np.asarray(x) / resolution
    return bool(np.all(np.abs(scaled - np.rint(scaled)) <= _INT_ATOL))


def _all_costs_integral(problem: KnapsackProblem, resolution: float) -> bool:
    rows = problem.costs
    if all(len(row) == len(rows[0]) for row in rows):
        return _is_integral(np.asarray(rows), resolution)
    return all(_is_integral(row, resolution) for row in rows)


def solve(problem: KnapsackProblem) -> np.ndarray:
    """Exactly optimal assignment; DP fast path when everything is integral."""
    if _is_integral(problem.budget, 1.0) and _all_costs_integral(problem, 1.0):
        levels = int(round(problem.budget)) + 1
        if (problem.n_arms + 1) * levels <= DP_MAX_CELLS:
            return solve_dp_integer(problem)
    return solve_branch_and_bound(problem)


def solve_dp_integer(problem: KnapsackProblem, resolution: float = 1.0) -> np.ndarray:
    """DP over integer budget levels at the declared cost resolution."""
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if not _is_integral(problem.budget, resolution):
        raise ValueError(
            f"budget {problem.budget} is not integral at resolution {resolution}"
        )
    if not _all_costs_integral(problem, resolution):
        for i, row in enumerate(problem.costs):
            if not _is_integral(row, resolution):
                raise ValueError(
                    f"arm {i} costs not integral at resolution {resolution}"
                )
    budget = int(round(problem.budget / resolution))
    n = problem.n_arms
    cells = (n + 1) * (budget + 1)
    if cells > DP_MAX_CELLS:
        raise ValueError(
            f"DP table would need {cells} cells (> {DP_MAX_CELLS}); "
            "use the branch-and-bound path"
        )
    if cells <= _SMALL_DP_CELLS:
        int_costs = [
            [int(round(float(x) / resolution)) for x in row] for row in problem.costs
        ]
        return _solve_dp_small(problem.values, int_costs, budget)
    costs = [np.rint(row / resolution).astype(np.int64) for row in problem.costs]
    # best[i][b] = max value from arms i.. with budget b; best[n] = 0.
    best = np.full((n + 1, budget + 1), -np.inf)
    best[n] = 0.0
    scratch = np.empty(budget + 1)
    for i in range(n - 1, -1, -1):
        acc = best[i]
        prev = best[i + 1]
        vrow = problem.values[i]
        crow = costs[i]
        for a in range(len(crow)):
            c = crow[a]
            if c > budget:
                continue
            np.add(prev[: budget + 1 - c], vrow[a], out=scratch[c:])
            np.maximum(acc[c:], scratch[c:], out=acc[c:])
    # Walk forward picking the smallest action that achieves the table value;
    # equality is exact because the walk recomputes the same float sums.
    actions = np.zeros(n, dtype=np.int64)
    b = budget
    for i in range(n):
        for a in range(len(costs[i])):
            c = costs[i][a]
            if c > b:
                continue
            if problem.values[i][a] + best[i + 1][b - c] == best[i][b]:
                actions[i] = a
                b -= c
                break
    return actions


def _solve_dp_small(values, costs, budget: int) -> np.ndarray:
    """List-based twin of the vectorized DP (same sums, same walk)."""
    n = len(values)
    ninf = -np.inf
    rows: list[list[float]] = [[]] * (n + 1)
    rows[n] = [0.0] * (budget + 1)
    for i in range(n - 1, -1, -1):
        prev = rows[i + 1]
        acc = [ninf] * (budget + 1)
        vrow = values[i]
        for a, c in enumerate(costs[i]):
            if c > budget:
                continue
            v = float(vrow[a])
            for b in range(c, budget + 1):
                cand = prev[b - c] + v
                if cand > acc[b]:
                    acc[b] = cand
        rows[i] = acc
    actions = np.zeros(n, dtype=np.int64)
    b = budget
    for i in range(n):
        for a, c in enumerate(costs[i]):
            if c > b:
                continue
            if float(values[i][a]) + rows[i + 1][b - c] == rows[i][b]:
                actions[i] = a
                b -= int(c)
                break
    return actions


def _hull_points(values: np.ndarray, costs: np.ndarray, budget: float):
    """Upper concave envelope of an arm's affordable (cost, value) options."""
    order = np.lexsort((values * -1, costs))  # by cost, then value desc
    pts: list[tuple[float, float]] = []
    for idx in order:
        c, v = float(costs[idx]), float(values[idx])
        if c > budget + _FEAS_ATOL:
            continue
        if pts and v <= pts[-1][1]:
            continue  # dominated: costs more (or same), worth no more
        if pts and c == pts[-1][0]:
            pts[-1] = (c, v)
            continue
        pts.append((c, v))
    # Keep only points on the concave hull (decreasing marginal value/cost).
    hull: list[tuple[float, float]] = []
    for p in pts:
        while len(hull) >= 2:
            (c1, v1), (c2, v2) = hull[-2], hull[-1]
            if (v2 - v1) * (p[0] - c2) <= (p[1] - v2) * (c2 - c1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def solve_branch_and_bound(problem: KnapsackProblem) -> np.ndarray:
    """Lexicographic depth-first search with a fractional MCKP bound.

    Children are visited in action order and an incumbent is only replaced
    on strict improvement, so the first optimum reached is the
    lexicographically smallest one.
    """
    n = problem.n_arms
    budget = problem.budget
    values, costs = problem.values, problem.costs

    hulls = [_hull_points(values[i], costs[i], budget) for i in range(n)]
    base = np.zeros(n + 1)  # suffix sum of each arm's cheapest-point value
    for i in range(n - 1, -1, -1):
        base[i] = base[i + 1] + hulls[i][0][1]
    # Flatten every hull increment, sorted by efficiency (value per cost);
    # hull values increase strictly, so every increment has dv > 0.
    increments = []  # (efficiency, arm, d_cost, d_value)
    for i, hull in enumerate(hulls):
        for (c1, v1), (c2, v2) in zip(hull, hull[1:]):
            increments.append(((v2 - v1) / (c2 - c1), i, c2 - c1, v2 - v1))
    increments.sort(key=lambda e: -e[0])

    def relax_bound(arm: int, left: float) -> float:
        """LP upper bound on the best completion over arms arm.. with budget left."""
        acc = base[arm]
        for eff, i, dc, dv in increments:
            if left <= 0:
                break
            if i < arm:
                continue
            if dc <= left:
                acc += dv
                left -= dc
            else:
                acc += eff * left
                left = 0.0
        return acc

    best_value = -np.inf
    best_actions: np.ndarray | None = None
    current = np.zeros(n, dtype=np.int64)

    def dfs(arm: int, left: float, value: float) -> None:
        nonlocal best_value, best_actions
        if arm == n:
            if value > best_value:
                best_value = value
                best_actions = current.copy()
            return
        for a in range(len(costs[arm])):
            c = float(costs[arm][a])
            if c > left + _FEAS_ATOL:
                continue
            child = value + float(values[arm][a])
            if (
                best_actions is not None
                and child + relax_bound(arm + 1, left - c) <= best_value
            ):
                continue
            current[arm] = a
            dfs(arm + 1, left - c, child)
        current[arm] = 0

    dfs(0, budget, 0.0)
    assert best_actions is not None  # all-passive is always feasible
    return best_actions
