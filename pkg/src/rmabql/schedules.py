"""Step-size schedules, epsilon decay, and the budgeted random-action sampler.

The Q step uses alpha(nu) = C / ceil(nu / D) on a per-(arm, state, action)
visit clock nu. The index step runs on the slower schedule
gamma(nu) = C' / (1 + ceil(nu * ln(nu) / D)), so gamma/alpha -> 0 as nu
grows. Exploration decays as epsilon(t) = epsilon0 / ceil(t / D) on the
environment clock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import RmabInstance


@dataclass(frozen=True)
class ScheduleParams:
    """Learning-rate constants: C (Q step), C_prime (index step), shared divisor D."""

    C: float
    D: int
    epsilon0: float
    C_prime: float | None = None

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError(f"C must be positive, got {self.C}")
        if self.C_prime is not None and self.C_prime <= 0:
            raise ValueError(f"C_prime must be positive, got {self.C_prime}")
        if int(self.D) != self.D or self.D < 1:
            raise ValueError(f"D must be a positive integer, got {self.D}")
        if not 0 < self.epsilon0 <= 1:
            raise ValueError(f"epsilon0 must lie in (0, 1], got {self.epsilon0}")


def _require_positive_clock(nu: int, name: str) -> None:
    if nu < 1:
        raise ValueError(f"{name} must be >= 1 (first update uses 1), got {nu}")


def alpha(params: ScheduleParams, nu: int) -> float:
    """Q-value step size at visit count nu."""
    _require_positive_clock(nu, "nu")
    return params.C / math.ceil(nu / params.D)


def gamma(params: ScheduleParams, nu: int) -> float:
    """Index step size at visit count nu; gamma(1) = C_prime since 1*ln(1) = 0."""
    _require_positive_clock(nu, "nu")
    if params.C_prime is None:
        raise ValueError("schedule has no C_prime; index steps unavailable")
    return params.C_prime / (1 + math.ceil(nu * math.log(nu) / params.D))


def epsilon(params: ScheduleParams, t: int) -> float:
    """Exploration probability at environment step t (capped at 1)."""
    _require_positive_clock(t, "t")
    return min(1.0, params.epsilon0 / math.ceil(t / params.D))


class VisitCounter:
    """Per-(arm, state, action) counts of training uses, including replays."""

    def __init__(self, instance: RmabInstance):
        self._counts = [
            np.zeros((arm.n_states, arm.n_actions), dtype=np.int64)
            for arm in instance.arms
        ]

    def bump(self, arm: int, s: int, a: int) -> int:
        """Increment and return the new count (the nu for this update)."""
        self._counts[arm][s, a] += 1
        return int(self._counts[arm][s, a])

    def get(self, arm: int, s: int, a: int) -> int:
        return int(self._counts[arm][s, a])


def random_action(instance: RmabInstance, rng: np.random.Generator) -> np.ndarray:
    """Sample a feasible joint action, exploring cheap actions more often.

    Repeatedly picks an arm uniformly among arms not yet assigned, then
    draws one of its actions affordable within the remaining budget with
    probability proportional to 1 / (1 + cost); the drawn action (possibly
    the passive one) is final for that arm. Stops when every arm is
    assigned or no unassigned arm can afford a nonzero action.
    """
    n = instance.n_arms
    actions = np.zeros(n, dtype=np.int64)
    unassigned = list(range(n))
    remaining = float(instance.budget)
    while unassigned:
        affordable = [
            i
            for i in unassigned
            if np.any(instance.arms[i].costs[1:] <= remaining + 1e-12)
        ]
        if not affordable:
            break
        pick = unassigned[rng.integers(len(unassigned))]
        costs = instance.arms[pick].costs
        options = np.flatnonzero(costs <= remaining + 1e-12)
        weights = 1.0 / (1.0 + costs[options])
        choice = options[rng.choice(len(options), p=weights / weights.sum())]
        actions[pick] = choice
        remaining -= float(costs[choice])
        unassigned.remove(pick)
    return actions
