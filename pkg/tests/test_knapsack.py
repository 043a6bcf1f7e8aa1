import numpy as np
import pytest

from rmabql.knapsack import (
    KnapsackProblem,
    solve,
    solve_branch_and_bound,
    solve_dp_integer,
)

from .support import enumerate_knapsack


def _random_problem(rng, n_arms=None, integral=True, n_actions=None):
    n_arms = n_arms or int(rng.integers(2, 7))
    n_actions = n_actions or int(rng.integers(2, 5))
    values = tuple(rng.normal(size=n_actions) * 5 for _ in range(n_arms))
    if integral:
        costs = tuple(
            np.concatenate(([0.0], np.sort(rng.integers(1, 4, size=n_actions - 1)).astype(float)))
            for _ in range(n_arms)
        )
    else:
        costs = tuple(
            np.concatenate(([0.0], np.sort(rng.random(n_actions - 1) * 3)))
            for _ in range(n_arms)
        )
    budget = float(rng.integers(1, 2 * n_arms)) if integral else float(rng.random() * n_arms)
    return KnapsackProblem(values=values, costs=costs, budget=budget)


def _total(problem, actions):
    value = sum(problem.values[i][a] for i, a in enumerate(actions))
    cost = sum(problem.costs[i][a] for i, a in enumerate(actions))
    return value, cost


def test_validation_rejects_malformed_problems():
    ok_v = (np.array([1.0, 2.0]),)
    ok_c = (np.array([0.0, 1.0]),)
    with pytest.raises(ValueError, match="same arms"):
        KnapsackProblem(values=(), costs=(), budget=1.0)
    with pytest.raises(ValueError, match="shape mismatch"):
        KnapsackProblem(values=(np.array([1.0]),), costs=ok_c, budget=1.0)
    with pytest.raises(ValueError, match="zero-cost"):
        KnapsackProblem(values=ok_v, costs=(np.array([1.0, 2.0]),), budget=1.0)
    with pytest.raises(ValueError, match="budget"):
        KnapsackProblem(values=ok_v, costs=ok_c, budget=-1.0)


def test_two_arm_example_prefers_dear_action_within_budget():
    # Arm 0's dear action earns 5 for cost 2; the cheap pair earns 1 + 3.
    # Budget 2 takes the dear action alone; budget 3 fits it plus arm 1.
    problem = KnapsackProblem(
        values=(np.array([0.0, 1.0, 5.0]), np.array([0.0, 3.0])),
        costs=(np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0])),
        budget=2.0,
    )
    assert solve(problem).tolist() == [2, 0]
    richer = KnapsackProblem(problem.values, problem.costs, budget=3.0)
    assert solve(richer).tolist() == [2, 1]


def test_zero_budget_forces_all_passive():
    problem = KnapsackProblem(
        values=(np.array([0.0, 9.0]), np.array([0.0, 9.0])),
        costs=(np.array([0.0, 1.0]), np.array([0.0, 1.0])),
        budget=0.0,
    )
    assert solve(problem).tolist() == [0, 0]


def test_negative_values_still_pick_the_best_feasible_vector():
    # Acting is penalized everywhere; the optimum is to spend nothing.
    problem = KnapsackProblem(
        values=(np.array([-1.0, -5.0]), np.array([-2.0, -0.5])),
        costs=(np.array([0.0, 1.0]), np.array([0.0, 1.0])),
        budget=2.0,
    )
    # Arm 1's dear action beats its zero-cost one even though both are losses.
    assert solve(problem).tolist() == [0, 1]


def test_ties_break_to_lexicographically_smallest_vector():
    # Both arms offer the identical trade; only one fits. The lex-smallest
    # optimum leaves arm 0 passive and acts on arm 1.
    problem = KnapsackProblem(
        values=(np.array([0.0, 1.0]), np.array([0.0, 1.0])),
        costs=(np.array([0.0, 1.0]), np.array([0.0, 1.0])),
        budget=1.0,
    )
    assert solve_dp_integer(problem).tolist() == [0, 1]
    assert solve_branch_and_bound(problem).tolist() == [0, 1]
    # A duplicated action (same cost, same value) resolves to the lower index.
    dup = KnapsackProblem(
        values=(np.array([0.0, 1.0, 1.0]),),
        costs=(np.array([0.0, 1.0, 1.0]),),
        budget=1.0,
    )
    assert solve_dp_integer(dup).tolist() == [1]
    assert solve_branch_and_bound(dup).tolist() == [1]


def test_dp_matches_enumeration_on_random_integral_problems():
    rng = np.random.default_rng(4)
    for _ in range(200):
        problem = _random_problem(rng, integral=True)
        best_value, best_vector = enumerate_knapsack(
            problem.values, problem.costs, problem.budget
        )
        actions = solve_dp_integer(problem)
        value, cost = _total(problem, actions)
        assert cost <= problem.budget + 1e-12
        assert value == pytest.approx(best_value, abs=1e-9)
        assert actions.tolist() == best_vector.tolist()


def test_branch_and_bound_matches_enumeration_on_fractional_costs():
    rng = np.random.default_rng(5)
    for _ in range(200):
        problem = _random_problem(rng, integral=False)
        best_value, best_vector = enumerate_knapsack(
            problem.values, problem.costs, problem.budget
        )
        actions = solve_branch_and_bound(problem)
        value, cost = _total(problem, actions)
        assert cost <= problem.budget + 1e-12
        assert value == pytest.approx(best_value, abs=1e-9)
        assert actions.tolist() == best_vector.tolist()


def test_both_exact_routes_agree_on_integral_problems():
    rng = np.random.default_rng(6)
    for _ in range(100):
        problem = _random_problem(rng, integral=True)
        assert solve_dp_integer(problem).tolist() == solve_branch_and_bound(problem).tolist()


def test_small_and_vectorized_dp_tables_agree():
    # Shapes straddling the small-table cutoff must give identical vectors.
    rng = np.random.default_rng(7)
    for n_arms, budget in ((10, 8), (40, 150), (90, 60)):
        for _ in range(20):
            values = tuple(rng.normal(size=3) * 5 for _ in range(n_arms))
            costs = tuple(np.array([0.0, 1.0, 2.0]) for _ in range(n_arms))
            problem = KnapsackProblem(values=values, costs=costs, budget=float(budget))
            small = solve_dp_integer(problem)
            forced_big = KnapsackProblem(values=values, costs=costs, budget=float(budget))
            assert solve_dp_integer(forced_big, resolution=1.0).tolist() == small.tolist()
            assert solve_branch_and_bound(problem).tolist() == small.tolist()


def test_dp_honors_declared_resolution():
    problem = KnapsackProblem(
        values=(np.array([0.0, 1.0]), np.array([0.0, 0.9])),
        costs=(np.array([0.0, 0.5]), np.array([0.0, 0.5])),
        budget=1.0,
    )
    assert solve_dp_integer(problem, resolution=0.5).tolist() == [1, 1]
    with pytest.raises(ValueError, match="not integral"):
        solve_dp_integer(problem, resolution=1.0)
    with pytest.raises(ValueError, match="resolution"):
        solve_dp_integer(problem, resolution=0.0)
    coarse_budget = KnapsackProblem(problem.values, problem.costs, budget=0.75)
    with pytest.raises(ValueError, match="budget"):
        solve_dp_integer(coarse_budget, resolution=0.5)


def test_dp_refuses_oversized_tables():
    values = tuple(np.zeros(2) for _ in range(60))
    costs = tuple(np.array([0.0, 1.0]) for _ in range(60))
    problem = KnapsackProblem(values=values, costs=costs, budget=1e6)
    with pytest.raises(ValueError, match="cells"):
        solve_dp_integer(problem)


def test_entry_point_solves_fractional_budgets():
    # A fractional budget must route around the integer DP and still be exact.
    problem = KnapsackProblem(
        values=(np.array([0.0, 1.0]), np.array([0.0, 0.9])),
        costs=(np.array([0.0, 1.0]), np.array([0.0, 1.0])),
        budget=1.5,
    )
    assert solve(problem).tolist() == [1, 0]


def test_optimal_value_is_monotone_in_budget():
    rng = np.random.default_rng(8)
    for _ in range(40):
        problem = _random_problem(rng, integral=True)
        last = -np.inf
        for budget in range(0, 9):
            sized = KnapsackProblem(problem.values, problem.costs, float(budget))
            value, _ = _total(sized, solve(sized))
            assert value >= last - 1e-12
            last = value
