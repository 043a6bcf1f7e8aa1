"""Seeded environment: applies joint actions, samples per-arm transitions.

Each arm owns a dedicated counter-based RNG stream derived from the run
seed, so draws for one arm never perturb another's (adding or removing an
arm leaves the remaining streams untouched). Exploration gets its own
stream. The reward collected at step t is r(s_t), the reward of the state
occupied when acting, before the transition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import RmabInstance, check_actions, check_states, require_feasible

# Sub-stream tags: (seed, tag, index) feeds a counter-based bit generator.
_STREAM_ARM = 0
_STREAM_EXPLORE = 1
_STREAM_INSTANCE = 2


def _generator(seed: int, tag: int, index: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=(seed, tag, index)))
    )


def arm_stream(seed: int, arm: int) -> np.random.Generator:
    """Transition-sampling stream for one arm."""
    return _generator(seed, _STREAM_ARM, arm)


def exploration_stream(seed: int) -> np.random.Generator:
    """Stream for epsilon draws and random-action sampling."""
    return _generator(seed, _STREAM_EXPLORE, 0)


def instance_stream(seed: int) -> np.random.Generator:
    """Stream for sampling the instance itself (domain generators)."""
    return _generator(seed, _STREAM_INSTANCE, 0)


@dataclass
class Experience:
    """One arm's transition: (s, a, r, s_next) plus its replay use count."""

    arm: int
    s: int
    a: int
    r: float
    s_next: int
    use_count: int = 0


@dataclass
class Trajectory:
    """Per-step joint states, joint actions, and per-arm rewards."""

    states: np.ndarray  # (T, N) state occupied at each step
    actions: np.ndarray  # (T, N)
    rewards: np.ndarray  # (T, N) r(s_t) per arm

    def __len__(self) -> int:
        return self.states.shape[0]


class Simulator:
    """Owns one run's RNG streams and caches cumulative transition rows."""

    def __init__(self, instance: RmabInstance, seed: int):
        self.instance = instance
        self.seed = seed
        self._rngs = [arm_stream(seed, i) for i in range(instance.n_arms)]
        # Normalizing by the final cumulative value turns the validated
        # row-sum tolerance into an exact 1.0 endpoint for the draw.
        self._cum = []
        for arm in instance.arms:
            cum = np.cumsum(arm.transitions, axis=-1)
            cum = cum / cum[..., -1:]
            self._cum.append(cum)

    def step(
        self, states: np.ndarray, actions: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, list[Experience]]:
        """Advance every arm one transition; refuses infeasible actions."""
        instance = self.instance
        states = check_states(instance, states)
        actions = check_actions(instance, actions)
        require_feasible(instance, actions)
        n = instance.n_arms
        next_states = np.empty(n, dtype=np.int64)
        rewards = np.empty(n, dtype=float)
        experiences = []
        for i in range(n):
            arm = instance.arms[i]
            s, a = int(states[i]), int(actions[i])
            row = self._cum[i][s, a]
            u = self._rngs[i].random()
            s_next = int(np.searchsorted(row, u, side="right"))
            if s_next >= arm.n_states:  # u landed on the 1.0 endpoint
                s_next = arm.n_states - 1
            r = float(arm.rewards[s])
            next_states[i] = s_next
            rewards[i] = r
            experiences.append(Experience(arm=i, s=s, a=a, r=r, s_next=s_next))
        return next_states, rewards, experiences


def step(
    instance: RmabInstance,
    states: np.ndarray,
    actions: np.ndarray,
    rngs: list[np.random.Generator],
) -> tuple[np.ndarray, np.ndarray, list[Experience]]:
    """One transition with caller-supplied per-arm streams (no caching)."""
    states = check_states(instance, states)
    actions = check_actions(instance, actions)
    require_feasible(instance, actions)
    n = instance.n_arms
    next_states = np.empty(n, dtype=np.int64)
    rewards = np.empty(n, dtype=float)
    experiences = []
    for i in range(n):
        arm = instance.arms[i]
        s, a = int(states[i]), int(actions[i])
        row = np.cumsum(arm.transitions[s, a])
        row = row / row[-1]
        s_next = int(np.searchsorted(row, rngs[i].random(), side="right"))
        if s_next >= arm.n_states:
            s_next = arm.n_states - 1
        r = float(arm.rewards[s])
        next_states[i] = s_next
        rewards[i] = r
        experiences.append(Experience(arm=i, s=s, a=a, r=r, s_next=s_next))
    return next_states, rewards, experiences


def run_episode(
    instance: RmabInstance,
    policy,
    horizon: int,
    seed: int,
    init_states: np.ndarray | None = None,
) -> Trajectory:
    """Roll the policy forward; policy(states, t) must return a joint action.

    The same (instance, seed, policy) always produces the same trajectory.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    sim = Simulator(instance, seed)
    if init_states is None:
        states = np.zeros(instance.n_arms, dtype=np.int64)
    else:
        states = check_states(instance, init_states).copy()
    all_states = np.empty((horizon, instance.n_arms), dtype=np.int64)
    all_actions = np.empty((horizon, instance.n_arms), dtype=np.int64)
    all_rewards = np.empty((horizon, instance.n_arms), dtype=float)
    for t in range(1, horizon + 1):
        actions = policy(states, t)
        next_states, rewards, _ = sim.step(states, actions)
        all_states[t - 1] = states
        all_actions[t - 1] = actions
        all_rewards[t - 1] = rewards
        states = next_states
    return Trajectory(states=all_states, actions=all_actions, rewards=all_rewards)
