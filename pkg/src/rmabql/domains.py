"""Instance generators for the three experiment families.

Two-process: two-state arms in two behavioral types. "Fragile" arms need the
full-effort action nearly every round to hold the good state and are slow to
recover once down; "stable" arms hold the good state on their own and any
action recovers them. Per-arm probabilities are drawn from narrow ranges so arms
of a type are similar but not identical.

Random: everything sampled — uniform rewards, cumulative-sum costs, and
normalized-uniform (or Dirichlet) transition rows.

Adherence: daily 0/1 traces are windowed into 2^L history states, per-person
transition counts are clustered, and arms are drawn by sampling each row's
adhere-next probability from a Beta posterior whose pseudo-counts are scaled
up with the action level. A configured fraction of fragile arms (lifted to
the history encoding) is mixed in.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import ArmModel, RmabInstance

TWO_PROCESS_COSTS = (0.0, 1.0, 2.0)


def _check_range(name: str, rng_pair, lo_ok: float = 0.0, hi_ok: float = 1.0):
    lo, hi = rng_pair
    if not (lo_ok <= lo <= hi <= hi_ok):
        raise ValueError(f"{name} range ({lo}, {hi}) must sit inside [{lo_ok}, {hi_ok}]")


@dataclass(frozen=True)
class TwoProcessParams:
    """Per-type probability ranges; each arm draws uniformly inside them.

    Fragile arms: only the full-effort action holds the good state (a
    near-lock); half effort barely beats passivity, the passive good state
    collapses, and recovery from the bad state is slow and effort-independent.
    Stable arms hold the good state passively, drift back up on their own at
    a modest rate, and recover almost surely under any nonzero action.
    """

    fraction_fragile: float = 0.25
    fragile_good_stay: tuple = ((0.02, 0.08), (0.10, 0.20), (0.995, 1.0))
    fragile_bad_recover: tuple = (0.07, 0.09)
    stable_good_stay: tuple = ((0.95, 0.955), (0.96, 0.97), (0.975, 0.985))
    stable_bad_recover: tuple = ((0.10, 0.15), (0.90, 0.92), (0.93, 0.95))

    def __post_init__(self):
        if not 0.0 <= self.fraction_fragile <= 1.0:
            raise ValueError("fraction_fragile must be in [0, 1]")
        if len(self.fragile_good_stay) != 3 or len(self.stable_good_stay) != 3:
            raise ValueError("good-stay ranges must cover all 3 actions")
        if len(self.stable_bad_recover) != 3:
            raise ValueError("stable recover ranges must cover all 3 actions")
        for a in range(3):
            _check_range(f"fragile_good_stay[{a}]", self.fragile_good_stay[a])
            _check_range(f"stable_good_stay[{a}]", self.stable_good_stay[a])
            _check_range(f"stable_bad_recover[{a}]", self.stable_bad_recover[a])
        _check_range("fragile_bad_recover", self.fragile_bad_recover, hi_ok=0.15)
        # Behavioral contracts: only full effort holds a fragile good state
        # (half effort must not be a cheap substitute, or the dear action is
        # never worth buying), leaving it passive loses it, and its bad state
        # is hard to escape.
        if self.fragile_good_stay[2][0] < 0.9:
            raise ValueError("fragile arms must hold the good state under full effort")
        if self.fragile_good_stay[1][1] > 0.5:
            raise ValueError("half effort must not hold a fragile good state")
        if self.fragile_good_stay[0][1] > 0.1:
            raise ValueError("fragile arms must tend to lose the good state passively")
        # Stable arms hold the good state passively and recover with any action.
        if self.stable_good_stay[0][0] < 0.9:
            raise ValueError("stable arms must tend to hold the good state passively")
        if self.stable_bad_recover[1][0] < 0.9 or self.stable_bad_recover[2][0] < 0.9:
            raise ValueError("stable arms must recover under any nonzero action")
        # The dearer action is at least as helpful as the cheaper one.
        for name, ranges in (
            ("fragile_good_stay", self.fragile_good_stay),
            ("stable_good_stay", self.stable_good_stay),
            ("stable_bad_recover", self.stable_bad_recover),
        ):
            if ranges[2][0] < ranges[1][1] or ranges[1][0] < ranges[0][1]:
                raise ValueError(f"{name} ranges must be ordered so that a higher "
                                 "action is never worse")


def _draw(rng, rng_pair) -> float:
    lo, hi = rng_pair
    return float(lo + (hi - lo) * rng.random())


def _two_state_arm(good_stay, bad_recover) -> ArmModel:
    """State 0 is bad (reward 0), state 1 good (reward 1)."""
    n_actions = len(good_stay)
    transitions = np.empty((2, n_actions, 2))
    for a in range(n_actions):
        transitions[1, a] = (1.0 - good_stay[a], good_stay[a])
        transitions[0, a] = (1.0 - bad_recover[a], bad_recover[a])
    return ArmModel(
        costs=np.asarray(TWO_PROCESS_COSTS[:n_actions]),
        rewards=np.array([0.0, 1.0]),
        transitions=transitions,
    )


def _draw_fragile(params: TwoProcessParams, rng) -> ArmModel:
    stay = [_draw(rng, r) for r in params.fragile_good_stay]
    recover = _draw(rng, params.fragile_bad_recover)  # effort-independent
    return _two_state_arm(stay, [recover] * 3)


def _draw_stable(params: TwoProcessParams, rng) -> ArmModel:
    stay = [_draw(rng, r) for r in params.stable_good_stay]
    recover = [_draw(rng, r) for r in params.stable_bad_recover]
    return _two_state_arm(stay, recover)


def gen_two_process(
    n_arms: int,
    budget: float,
    discount: float,
    rng: np.random.Generator,
    params: TwoProcessParams | None = None,
) -> RmabInstance:
    """Fragile arms first (ceil of the configured fraction), then stable."""
    if n_arms < 1:
        raise ValueError("n_arms must be >= 1")
    if params is None:
        params = TwoProcessParams()
    n_fragile = math.ceil(params.fraction_fragile * n_arms)
    arms = [
        _draw_fragile(params, rng) if i < n_fragile else _draw_stable(params, rng)
        for i in range(n_arms)
    ]
    return RmabInstance(arms=tuple(arms), budget=budget, discount=discount)


def gen_random(
    n_arms: int,
    n_states: int,
    n_actions: int,
    discount: float,
    rng: np.random.Generator,
    budget: float | None = None,
    row_sampling: str = "uniform",
) -> RmabInstance:
    """Fully random instance; budget defaults to n_arms * n_actions / 2.

    Costs are a cumulative sum of uniforms with the first entry reset to 0,
    so they are strictly increasing. Transition rows are normalized
    independent uniforms, or Dirichlet(1,...,1) draws when selected.
    """
    if n_states < 1 or n_actions < 1:
        raise ValueError("n_states and n_actions must be >= 1")
    if row_sampling not in ("uniform", "dirichlet"):
        raise ValueError(f"unknown row_sampling {row_sampling!r}")
    if budget is None:
        budget = n_arms * n_actions / 2
    arms = []
    for _ in range(n_arms):
        rewards = rng.random(n_states)
        costs = np.cumsum(rng.random(n_actions))
        costs[0] = 0.0
        if row_sampling == "uniform":
            raw = rng.random((n_states, n_actions, n_states))
            transitions = raw / raw.sum(axis=-1, keepdims=True)
        else:
            transitions = rng.dirichlet(
                np.ones(n_states), size=(n_states, n_actions)
            )
        arms.append(ArmModel(costs=costs, rewards=rewards, transitions=transitions))
    return RmabInstance(arms=tuple(arms), budget=budget, discount=discount)


# --- adherence pipeline ---------------------------------------------------


@dataclass(frozen=True)
class AdherenceConfig:
    history_length: int = 2
    k_clusters: int = 10
    action_scales: tuple = (1.0, 1.5, 2.0)
    smoothing: float = 1.0
    fraction_fragile: float = 0.25
    kmeans_restarts: int = 10
    kmeans_max_iter: int = 100

    def __post_init__(self):
        if not 1 <= self.history_length <= 6:
            raise ValueError("history_length must be in 1..6")
        if self.k_clusters < 1:
            raise ValueError("k_clusters must be >= 1")
        scales = self.action_scales
        if len(scales) < 1 or scales[0] < 1.0:
            raise ValueError("action_scales must start at >= 1")
        if any(b < a for a, b in zip(scales, scales[1:])):
            raise ValueError("action_scales must be non-decreasing")
        if self.smoothing <= 0:
            raise ValueError("smoothing must be positive")
        if not 0.0 <= self.fraction_fragile <= 1.0:
            raise ValueError("fraction_fragile must be in [0, 1]")
        if self.fraction_fragile > 0 and len(self.action_scales) != 3:
            raise ValueError("fragile-arm mixing requires exactly 3 actions")


def read_traces(path) -> list[list[int]]:
    """Parse one comma-separated 0/1 trace per line; blank lines skipped."""
    traces = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            row = []
            for part in parts:
                part = part.strip()
                if part not in ("0", "1"):
                    raise ValueError(f"row {lineno}: non-binary entry {part!r}")
                row.append(int(part))
            if traces and len(row) != len(traces[0]):
                raise ValueError(
                    f"row {lineno}: length {len(row)} != {len(traces[0])}"
                )
            traces.append(row)
    if not traces:
        raise ValueError(f"no traces found in {path}")
    return traces


def write_traces(path, traces) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for trace in traces:
            fh.write(",".join(str(int(d)) for d in trace) + "\n")


def _trace_counts(trace, history_length: int) -> np.ndarray:
    n_states = 1 << history_length
    mask = n_states - 1
    counts = np.zeros((n_states, n_states), dtype=np.int64)
    if len(trace) < history_length + 1:
        return counts
    s = 0
    for d in trace[:history_length]:
        s = ((s << 1) | d) & mask
    for d in trace[history_length:]:
        nxt = ((s << 1) | d) & mask
        counts[s, nxt] += 1
        s = nxt
    return counts


def traces_to_counts(traces, history_length: int) -> np.ndarray:
    """Per-person transition counts over windowed history states.

    The state is the last `history_length` days as bits, most recent day in
    the lowest bit; each day shifts the window. Returns an int64 array of
    shape (n_people, 2^L, 2^L).
    """
    if not traces:
        raise ValueError("no traces to count")
    if len(traces[0]) < history_length + 1:
        warnings.warn(
            f"traces have {len(traces[0])} days, shorter than one full "
            f"window plus a step ({history_length + 1}); all counts are zero"
        )
    return np.stack([_trace_counts(t, history_length) for t in traces])


def ingest_adherence_traces(path, history_length: int) -> np.ndarray:
    """Counts from a trace file; see traces_to_counts for the encoding."""
    return traces_to_counts(read_traces(path), history_length)


def kmeans(points, k: int, rng, restarts: int = 10, max_iter: int = 100):
    """Lloyd iterations with restarts; returns (labels, centers, inertia).

    Centers are initialized from distinct data points. A cluster that loses
    all members keeps its previous center. Best restart by inertia wins.
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    if n == 0:
        raise ValueError("no points to cluster")
    k_eff = min(k, n)
    best = None
    for _ in range(restarts):
        centers = points[rng.choice(n, size=k_eff, replace=False)].copy()
        labels = None
        for _ in range(max_iter):
            d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)
            new_labels = d2.argmin(axis=1)
            if labels is not None and np.array_equal(new_labels, labels):
                break
            labels = new_labels
            for c in range(k_eff):
                members = points[labels == c]
                if len(members):
                    centers[c] = members.mean(axis=0)
        inertia = float(((points - centers[labels]) ** 2).sum())
        if best is None or inertia < best[2]:
            best = (labels, centers, inertia)
    return best


@dataclass(frozen=True)
class ClusteredCounts:
    """Per-cluster Beta pseudo-counts for the adhere-next outcome of each state."""

    alpha: np.ndarray  # (n_clusters, n_states) counts toward adhering next
    beta: np.ndarray  # (n_clusters, n_states) counts toward lapsing next
    sizes: np.ndarray  # (n_clusters,) member counts

    @property
    def n_states(self) -> int:
        return self.alpha.shape[1]


def cluster_adherence_counts(
    counts: np.ndarray,
    config: AdherenceConfig,
    rng: np.random.Generator | None = None,
) -> ClusteredCounts:
    """Cluster people by their count tensors and pool counts per cluster.

    Empty clusters are merged away with a warning. The default generator is
    fixed so the clustering does not change across experiment seeds.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    counts = np.asarray(counts)
    n_people, n_states, _ = counts.shape
    labels, _, _ = kmeans(
        counts.reshape(n_people, -1),
        config.k_clusters,
        rng,
        restarts=config.kmeans_restarts,
        max_iter=config.kmeans_max_iter,
    )
    used = np.unique(labels)
    if len(used) < min(config.k_clusters, n_people):
        warnings.warn(
            f"{min(config.k_clusters, n_people) - len(used)} empty cluster(s) "
            "merged into nearest"
        )
    mask = n_states - 1
    succ_adhere = ((np.arange(n_states) << 1) | 1) & mask
    succ_lapse = (np.arange(n_states) << 1) & mask
    alpha = np.empty((len(used), n_states))
    beta = np.empty((len(used), n_states))
    sizes = np.empty(len(used))
    rows = np.arange(n_states)
    for out, c in enumerate(used):
        pooled = counts[labels == c].sum(axis=0)
        alpha[out] = pooled[rows, succ_adhere]
        beta[out] = pooled[rows, succ_lapse]
        sizes[out] = int((labels == c).sum())
    return ClusteredCounts(alpha=alpha, beta=beta, sizes=sizes)


def _history_arm(adhere_next: np.ndarray) -> ArmModel:
    """Build the history-shift arm from P(adhere next | state, action).

    adhere_next has shape (n_states, n_actions); every (state, action) can
    only reach the two windows obtained by shifting in a 0 or a 1.
    """
    n_states, n_actions = adhere_next.shape
    mask = n_states - 1
    transitions = np.zeros((n_states, n_actions, n_states))
    for s in range(n_states):
        s1 = ((s << 1) | 1) & mask
        s0 = (s << 1) & mask
        transitions[s, :, s1] = adhere_next[s]
        transitions[s, :, s0] = 1.0 - adhere_next[s]
    rewards = (np.arange(n_states) & 1).astype(float)
    return ArmModel(
        costs=np.arange(n_actions, dtype=float),
        rewards=rewards,
        transitions=transitions,
    )


def _sample_cluster_arm(
    clusters: ClusteredCounts, config: AdherenceConfig, rng
) -> ArmModel:
    p_cluster = clusters.sizes / clusters.sizes.sum()
    c = int(rng.choice(len(p_cluster), p=p_cluster))
    n_states = clusters.n_states
    eps = config.smoothing
    adhere_next = np.empty((n_states, len(config.action_scales)))
    for s in range(n_states):
        for a, scale in enumerate(config.action_scales):
            adhere_next[s, a] = rng.beta(
                clusters.alpha[c, s] * scale + eps, clusters.beta[c, s] + eps
            )
    return _history_arm(adhere_next)


def _lift_fragile_arm(
    params: TwoProcessParams, n_states: int, n_actions: int, rng
) -> ArmModel:
    """Fragile dynamics on the history encoding: only the latest day matters."""
    stay = [_draw(rng, r) for r in params.fragile_good_stay]
    recover = _draw(rng, params.fragile_bad_recover)
    adhere_next = np.empty((n_states, n_actions))
    for s in range(n_states):
        adhere_next[s] = stay if (s & 1) else [recover] * n_actions
    return _history_arm(adhere_next)


def gen_adherence_instance(
    config: AdherenceConfig,
    clusters: ClusteredCounts,
    n_arms: int,
    budget: float,
    discount: float,
    rng: np.random.Generator,
    fragile_params: TwoProcessParams | None = None,
) -> RmabInstance:
    """Mix lifted fragile arms (first) with cluster-sampled adherence arms."""
    if clusters.n_states != 1 << config.history_length:
        raise ValueError("clusters were built for a different history length")
    n_fragile = math.ceil(config.fraction_fragile * n_arms)
    if n_fragile > 0 and fragile_params is None:
        fragile_params = TwoProcessParams()
    n_actions = len(config.action_scales)
    arms = []
    for i in range(n_arms):
        if i < n_fragile:
            arms.append(
                _lift_fragile_arm(fragile_params, clusters.n_states, n_actions, rng)
            )
        else:
            arms.append(_sample_cluster_arm(clusters, config, rng))
    return RmabInstance(arms=tuple(arms), budget=budget, discount=discount)


@dataclass(frozen=True)
class TraceMode:
    """One 2-state Markov chain in the synthetic trace mixture."""

    weight: float
    stay_adherent: float  # P(adhere tomorrow | adhered today)
    become_adherent: float  # P(adhere tomorrow | lapsed today)
    initial_adherent: float = 0.5

    def __post_init__(self):
        if self.weight <= 0:
            raise ValueError("weight must be positive")
        for name in ("stay_adherent", "become_adherent", "initial_adherent"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")


DEFAULT_TRACE_MODES = (
    TraceMode(weight=0.5, stay_adherent=0.95, become_adherent=0.50),
    TraceMode(weight=0.3, stay_adherent=0.60, become_adherent=0.30),
    TraceMode(weight=0.2, stay_adherent=0.10, become_adherent=0.05),
)


def gen_synthetic_traces(
    n_patients: int,
    rng: np.random.Generator,
    modes=DEFAULT_TRACE_MODES,
    n_days: int = 168,
) -> list[list[int]]:
    weights = np.array([m.weight for m in modes], dtype=float)
    p_mode = weights / weights.sum()
    traces = []
    for _ in range(n_patients):
        mode = modes[int(rng.choice(len(modes), p=p_mode))]
        day = int(rng.random() < mode.initial_adherent)
        trace = [day]
        for _ in range(n_days - 1):
            p = mode.stay_adherent if day else mode.become_adherent
            day = int(rng.random() < p)
            trace.append(day)
        traces.append(trace)
    return traces
