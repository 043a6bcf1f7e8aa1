"""Data model for budget-coupled collections of restless arms.

An arm is a finite MDP with per-action costs, state rewards, and a
transition tensor. An instance bundles N arms with a shared per-round
budget and a discount factor. Joint actions and states are plain integer
arrays (one entry per arm); this module provides the cost/feasibility
arithmetic and the validation used by every generator and learner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Transition rows must sum to 1 within this absolute tolerance. Rows are
# never silently renormalized: validation fails instead.
ROW_SUM_ATOL = 1e-9

# Budget feasibility tolerance. Costs can be arbitrary reals, so a strict
# <= would spuriously reject sums that are off by float noise.
FEASIBILITY_ATOL = 1e-12


class InfeasibleActionError(ValueError):
    """A joint action whose summed cost exceeds the budget."""

    def __init__(self, cost: float, budget: float):
        super().__init__(
            f"joint action costs {cost!r} which exceeds budget {budget!r}"
        )
        self.cost = cost
        self.budget = budget


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ArmModel:
    """One arm: costs (M,), rewards (S,), transitions (S, M, S)."""

    costs: np.ndarray
    rewards: np.ndarray
    transitions: np.ndarray

    def __post_init__(self):
        costs = _frozen_array(self.costs)
        rewards = _frozen_array(self.rewards)
        transitions = _frozen_array(self.transitions)
        if costs.ndim != 1 or costs.size < 1:
            raise ValueError("costs must be a non-empty 1-d array")
        if rewards.ndim != 1 or rewards.size < 1:
            raise ValueError("rewards must be a non-empty 1-d array")
        if transitions.shape != (rewards.size, costs.size, rewards.size):
            raise ValueError(
                "transitions must have shape (n_states, n_actions, n_states)"
                f" = {(rewards.size, costs.size, rewards.size)},"
                f" got {transitions.shape}"
            )
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "rewards", rewards)
        object.__setattr__(self, "transitions", transitions)

    @property
    def n_states(self) -> int:
        return self.rewards.size

    @property
    def n_actions(self) -> int:
        return self.costs.size


@dataclass(frozen=True, eq=False)
class RmabInstance:
    """N arms coupled only by a per-round budget on summed action costs."""

    arms: tuple[ArmModel, ...]
    budget: float
    discount: float

    def __post_init__(self):
        object.__setattr__(self, "arms", tuple(self.arms))
        object.__setattr__(self, "budget", float(self.budget))
        object.__setattr__(self, "discount", float(self.discount))
        if len(self.arms) < 1:
            raise ValueError("instance needs at least one arm")
        if not np.isfinite(self.budget) or self.budget < 0:
            raise ValueError(f"budget must be finite and >= 0, got {self.budget}")
        if not 0.0 <= self.discount < 1.0:
            raise ValueError(f"discount must lie in [0, 1), got {self.discount}")

    @property
    def n_arms(self) -> int:
        return len(self.arms)


def validate_arm(arm: ArmModel) -> list[str]:
    """Check arm invariants; returns a list of violations (empty if clean)."""
    problems = []
    if not np.all(np.isfinite(arm.costs)):
        problems.append("costs contain non-finite entries")
    if arm.costs[0] != 0.0:
        problems.append(f"costs[0] must be 0, got {arm.costs[0]}")
    if np.any(np.diff(arm.costs) < 0):
        problems.append(f"costs must be non-decreasing, got {arm.costs.tolist()}")
    if np.any(arm.costs < 0):
        problems.append("costs must be non-negative")
    if not np.all(np.isfinite(arm.rewards)):
        problems.append("rewards contain non-finite entries")
    T = arm.transitions
    if np.any(~np.isfinite(T)) or np.any(T < 0) or np.any(T > 1):
        problems.append("transition entries must be probabilities in [0, 1]")
    else:
        row_sums = T.sum(axis=-1)
        bad = np.argwhere(np.abs(row_sums - 1.0) > ROW_SUM_ATOL)
        for s, a in bad:
            problems.append(
                f"transition row (s={s}, a={a}) sums to {row_sums[s, a]!r}, not 1"
            )
    return problems


def validate_instance(instance: RmabInstance) -> list[str]:
    """Validate every arm; violations are prefixed with the arm index."""
    problems = []
    for i, arm in enumerate(instance.arms):
        problems.extend(f"arm {i}: {p}" for p in validate_arm(arm))
    return problems


def require_valid(instance: RmabInstance) -> None:
    problems = validate_instance(instance)
    if problems:
        raise ValueError("invalid instance:\n" + "\n".join(problems))


def check_states(instance: RmabInstance, states: np.ndarray) -> np.ndarray:
    states = np.asarray(states, dtype=np.int64)
    if states.shape != (instance.n_arms,):
        raise ValueError(
            f"state vector must have shape ({instance.n_arms},), got {states.shape}"
        )
    for i, s in enumerate(states):
        if not 0 <= s < instance.arms[i].n_states:
            raise ValueError(f"state {s} out of range for arm {i}")
    return states


def check_actions(instance: RmabInstance, actions: np.ndarray) -> np.ndarray:
    actions = np.asarray(actions, dtype=np.int64)
    if actions.shape != (instance.n_arms,):
        raise ValueError(
            f"action vector must have shape ({instance.n_arms},), got {actions.shape}"
        )
    for i, a in enumerate(actions):
        if not 0 <= a < instance.arms[i].n_actions:
            raise ValueError(f"action {a} out of range for arm {i}")
    return actions


def action_cost(instance: RmabInstance, actions: np.ndarray) -> float:
    """Summed per-arm cost of a joint action."""
    actions = check_actions(instance, actions)
    return float(sum(arm.costs[a] for arm, a in zip(instance.arms, actions)))


def is_feasible(instance: RmabInstance, actions: np.ndarray) -> bool:
    """True iff the joint action's cost fits the budget (within tolerance)."""
    return action_cost(instance, actions) <= instance.budget + FEASIBILITY_ATOL


def require_feasible(instance: RmabInstance, actions: np.ndarray) -> None:
    cost = action_cost(instance, actions)
    if cost > instance.budget + FEASIBILITY_ATOL:
        raise InfeasibleActionError(cost, instance.budget)


