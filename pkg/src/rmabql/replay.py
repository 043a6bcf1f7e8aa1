"""Experience replay with inverse-usage weighting and periodic dreams.

Entries are drawn with probability proportional to 1 / (1 + use_count), so
fresh transitions are replayed more often; each emission increments the
entry's use_count. A dream emits `replays_per_dream` single-experience
batches and is scheduled by the caller every `replay_period` environment
steps. Draw weights change between batches, so sampling uses a Fenwick
tree over the slot weights (O(log n) per draw) rather than a linear scan.
"""

from __future__ import annotations

import numpy as np

from .simulate import Experience


class _FenwickTree:
    """Prefix sums over mutable non-negative weights."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._tree = np.zeros(capacity + 1, dtype=float)

    def add(self, index: int, delta: float) -> None:
        i = index + 1
        while i <= self.capacity:
            self._tree[i] += delta
            i += i & (-i)

    def total(self, n: int) -> float:
        """Sum of weights[0:n]."""
        acc = 0.0
        i = n
        while i > 0:
            acc += self._tree[i]
            i -= i & (-i)
        return acc

    def find(self, target: float, n: int) -> int:
        """Smallest index with cumulative weight >= target (over slots [0, n))."""
        idx = 0
        step = 1 << (n.bit_length())
        while step:
            nxt = idx + step
            if nxt <= n and self._tree[nxt] < target:
                idx = nxt
                target -= self._tree[nxt]
            step >>= 1
        return idx


class ReplayBuffer:
    """FIFO-bounded experience store with inverse-use-count sampling."""

    def __init__(
        self,
        replay_period: int,
        replays_per_dream: int,
        capacity: int | None = None,
    ):
        if replay_period < 1:
            raise ValueError("replay_period must be >= 1")
        if replays_per_dream < 0:
            raise ValueError("replays_per_dream must be >= 0")
        if capacity is not None and capacity < 1:
            raise ValueError("capacity must be >= 1 when set")
        self.replay_period = int(replay_period)
        self.replays_per_dream = int(replays_per_dream)
        self.capacity = capacity
        self._entries: list[Experience | None] = []
        self._weights: list[float] = []
        self._tree = _FenwickTree(16)
        self._oldest = 0  # first live slot (earlier slots were evicted)

    def __len__(self) -> int:
        return len(self._entries) - self._oldest

    def _grow(self) -> None:
        tree = _FenwickTree(max(16, 2 * self._tree.capacity))
        for i, w in enumerate(self._weights):
            if w > 0:
                tree.add(i, w)
        self._tree = tree

    def _set_weight(self, slot: int, weight: float) -> None:
        self._tree.add(slot, weight - self._weights[slot])
        self._weights[slot] = weight

    def push(self, experience: Experience) -> None:
        slot = len(self._entries)
        if slot >= self._tree.capacity:
            self._grow()
        self._entries.append(experience)
        self._weights.append(0.0)
        self._set_weight(slot, 1.0 / (1.0 + experience.use_count))
        if self.capacity is not None and len(self) > self.capacity:
            self._set_weight(self._oldest, 0.0)
            self._entries[self._oldest] = None
            self._oldest += 1

    def sample(self, k: int, rng: np.random.Generator) -> list[Experience]:
        """Draw min(k, len) distinct entries, then bump their use counts.

        Draws within one call are without replacement; weights are
        proportional to 1 / (1 + use_count) as of the start of the call.
        """
        if len(self) == 0:
            raise ValueError("cannot sample from an empty replay buffer")
        if k < 1:
            raise ValueError("sample size must be >= 1")
        k = min(k, len(self))
        n = len(self._entries)
        drawn: list[int] = []
        for _ in range(k):
            total = self._tree.total(n)
            slot = self._tree.find(rng.random() * total, n)
            while self._entries[slot] is None or self._weights[slot] == 0.0:
                slot += 1  # float-boundary guard: skip dead slots
            drawn.append(slot)
            self._set_weight(slot, 0.0)  # exclude within this call
        batch = []
        for slot in drawn:
            entry = self._entries[slot]
            entry.use_count += 1
            self._set_weight(slot, 1.0 / (1.0 + entry.use_count))
            batch.append(entry)
        return batch

    def dream(self, rng: np.random.Generator) -> list[Experience]:
        """Emit replays_per_dream single-experience batches (reweighting between draws)."""
        out = []
        for _ in range(self.replays_per_dream):
            if len(self) == 0:
                break
            out.extend(self.sample(1, rng))
        return out
