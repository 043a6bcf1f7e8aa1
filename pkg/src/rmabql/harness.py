"""Experiment orchestration: config -> seeded runs -> per-seed and aggregate CSV.

A run config picks a domain, an algorithm, seeds, and hyperparameters. Each
seed samples its own instance (domains are stochastic generators), trains or
evaluates the policy for the horizon, and logs one row per step. The
aggregate file carries the per-timestep mean and interquartile range of
mean cumulative reward across seeds. Every CSV opens with a comment line
embedding the hash of the fully resolved config, so outputs are traceable
to their exact settings. Floats are written with repr so re-running a
config reproduces files byte for byte.
"""

from __future__ import annotations

import traceback
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fileio
from .baselines import Ql0Learner, RandomPolicy
from .core import RmabInstance, require_feasible
from .domains import (
    AdherenceConfig,
    ClusteredCounts,
    TraceMode,
    TwoProcessParams,
    cluster_adherence_counts,
    gen_adherence_instance,
    gen_random,
    gen_synthetic_traces,
    gen_two_process,
    ingest_adherence_traces,
    traces_to_counts,
)
from .lpql import LambdaGrid, LpqlLearner, MaiqlAprxLearner, lambda_max_bound
from .maiql import MaiqlLearner, WibqlLearner
from .oracles import OracleLambda0Policy, OracleLpIndexPolicy, OracleLpPolicy
from .replay import ReplayBuffer
from .schedules import ScheduleParams
from .simulate import Simulator, exploration_stream, instance_stream

ALGORITHMS = (
    "maiql",
    "maiql_aprx",
    "lpql",
    "wibql",
    "ql0",
    "oracle_lp",
    "oracle_lambda0",
    "oracle_lp_index",
    "random",
)
LEARNING_ALGORITHMS = frozenset({"maiql", "maiql_aprx", "lpql", "wibql", "ql0"})
ORACLE_ALGORITHMS = frozenset({"oracle_lp", "oracle_lambda0", "oracle_lp_index"})

SEED_CSV_HEADER = (
    "seed,t,instant_reward,cumulative_reward,mean_cumulative_reward,epsilon,lambda_index"
)
AGGREGATE_CSV_HEADER = "t,mean,p25,p75,n_seeds"
PARTIAL_MARKER = "PARTIAL_RESULTS.txt"


def _reject_unknown(d: dict, allowed, context: str) -> None:
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise ValueError(f"unknown {context} keys: {unknown}")


def _as_int(value, name: str) -> int:
    out = int(float(value))
    if float(out) != float(value):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    return out


def _range_pair(value, name: str) -> tuple:
    pair = tuple(float(v) for v in value)
    if len(pair) != 2:
        raise ValueError(f"{name} must be a (low, high) pair")
    return pair


def _range_triple(value, name: str) -> tuple:
    out = tuple(_range_pair(v, name) for v in value)
    if len(out) != 3:
        raise ValueError(f"{name} must list one (low, high) pair per action")
    return out


def _two_process_params(domain: dict) -> TwoProcessParams:
    return TwoProcessParams(
        fraction_fragile=float(domain["fraction_fragile"]),
        fragile_good_stay=_range_triple(domain["fragile_good_stay"], "fragile_good_stay"),
        fragile_bad_recover=_range_pair(domain["fragile_bad_recover"], "fragile_bad_recover"),
        stable_good_stay=_range_triple(domain["stable_good_stay"], "stable_good_stay"),
        stable_bad_recover=_range_triple(domain["stable_bad_recover"], "stable_bad_recover"),
    )


def _adherence_config(domain: dict) -> AdherenceConfig:
    return AdherenceConfig(
        history_length=domain["history_length"],
        k_clusters=domain["k_clusters"],
        action_scales=tuple(domain["action_scales"]),
        smoothing=domain["smoothing"],
        fraction_fragile=domain["fraction_fragile"],
        kmeans_restarts=domain["kmeans_restarts"],
        kmeans_max_iter=domain["kmeans_max_iter"],
    )


def _normalize_domain(domain) -> dict:
    if not isinstance(domain, dict):
        raise ValueError("domain must be a mapping")
    name = domain.get("name")
    if name == "two_process":
        _reject_unknown(
            domain,
            {
                "name",
                "fraction_fragile",
                "fragile_good_stay",
                "fragile_bad_recover",
                "stable_good_stay",
                "stable_bad_recover",
            },
            "two_process domain",
        )
        defaults = TwoProcessParams()
        normalized = {
            "name": name,
            "fraction_fragile": float(
                domain.get("fraction_fragile", defaults.fraction_fragile)
            ),
            "fragile_good_stay": [
                list(r)
                for r in domain.get("fragile_good_stay", defaults.fragile_good_stay)
            ],
            "fragile_bad_recover": list(
                domain.get("fragile_bad_recover", defaults.fragile_bad_recover)
            ),
            "stable_good_stay": [
                list(r) for r in domain.get("stable_good_stay", defaults.stable_good_stay)
            ],
            "stable_bad_recover": [
                list(r)
                for r in domain.get("stable_bad_recover", defaults.stable_bad_recover)
            ],
        }
        _two_process_params(normalized)  # validate
        return normalized
    if name == "random":
        _reject_unknown(
            domain, {"name", "n_states", "n_actions", "row_sampling"}, "random domain"
        )
        normalized = {
            "name": name,
            "n_states": _as_int(domain["n_states"], "n_states"),
            "n_actions": _as_int(domain["n_actions"], "n_actions"),
            "row_sampling": domain.get("row_sampling", "uniform"),
        }
        if normalized["n_states"] < 1 or normalized["n_actions"] < 1:
            raise ValueError("n_states and n_actions must be >= 1")
        if normalized["row_sampling"] not in ("uniform", "dirichlet"):
            raise ValueError(f"unknown row_sampling {normalized['row_sampling']!r}")
        return normalized
    if name == "adherence":
        _reject_unknown(
            domain,
            {
                "name",
                "history_length",
                "k_clusters",
                "action_scales",
                "smoothing",
                "fraction_fragile",
                "kmeans_restarts",
                "kmeans_max_iter",
                "traces",
                "synthetic",
            },
            "adherence domain",
        )
        normalized = {
            "name": name,
            "history_length": _as_int(domain.get("history_length", 2), "history_length"),
            "k_clusters": _as_int(domain.get("k_clusters", 10), "k_clusters"),
            "action_scales": [float(s) for s in domain.get("action_scales", (1.0, 1.5, 2.0))],
            "smoothing": float(domain.get("smoothing", 1.0)),
            "fraction_fragile": float(domain.get("fraction_fragile", 0.25)),
            "kmeans_restarts": _as_int(domain.get("kmeans_restarts", 10), "kmeans_restarts"),
            "kmeans_max_iter": _as_int(domain.get("kmeans_max_iter", 100), "kmeans_max_iter"),
            "traces": domain.get("traces"),
            "synthetic": None,
        }
        synthetic = domain.get("synthetic")
        if (normalized["traces"] is None) == (synthetic is None):
            raise ValueError("adherence domain needs exactly one of traces / synthetic")
        if synthetic is not None:
            _reject_unknown(
                synthetic, {"n_patients", "n_days", "modes", "seed"}, "synthetic traces"
            )
            modes = synthetic.get("modes")
            if modes is None:
                norm_modes = None
            else:
                norm_modes = []
                for m in modes:
                    _reject_unknown(
                        m,
                        {"weight", "stay_adherent", "become_adherent", "initial_adherent"},
                        "trace mode",
                    )
                    mode = TraceMode(
                        weight=float(m["weight"]),
                        stay_adherent=float(m["stay_adherent"]),
                        become_adherent=float(m["become_adherent"]),
                        initial_adherent=float(m.get("initial_adherent", 0.5)),
                    )
                    norm_modes.append(
                        {
                            "weight": mode.weight,
                            "stay_adherent": mode.stay_adherent,
                            "become_adherent": mode.become_adherent,
                            "initial_adherent": mode.initial_adherent,
                        }
                    )
            normalized["synthetic"] = {
                "n_patients": _as_int(synthetic["n_patients"], "n_patients"),
                "n_days": _as_int(synthetic.get("n_days", 168), "n_days"),
                "seed": _as_int(synthetic.get("seed", 0), "synthetic seed"),
                "modes": norm_modes,
            }
        _adherence_config(normalized)  # validate
        return normalized
    if name == "file":
        _reject_unknown(domain, {"name", "path"}, "file domain")
        if not domain.get("path"):
            raise ValueError("file domain requires a path")
        return {"name": name, "path": str(domain["path"])}
    raise ValueError(
        f"unknown domain {name!r}; expected two_process, random, adherence, or file"
    )


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved experiment settings; hashable via to_dict for provenance."""

    algorithm: str
    domain: dict
    horizon: int
    seeds: tuple
    output_dir: str
    n_arms: int | None
    budget: float | None
    discount: float
    schedule: ScheduleParams | None
    replay_period: int
    replays_per_dream: int
    replay_capacity: int | None
    n_lam: int
    lambda_max: float | None
    lambda_bound: float | None
    wibql_action: int
    maiql_mode: str
    on_non_indexable: str
    oracle_horizon: int
    oracle_settle_window: int
    init_state: int

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        _reject_unknown(
            d,
            {
                "algorithm",
                "domain",
                "n_arms",
                "budget",
                "discount",
                "horizon",
                "seeds",
                "schedule",
                "replay",
                "lambda_grid",
                "lambda_bound",
                "wibql_action",
                "maiql_mode",
                "on_non_indexable",
                "oracle",
                "init_state",
                "output_dir",
            },
            "config",
        )
        for key in ("algorithm", "domain", "horizon", "seeds", "output_dir"):
            if key not in d:
                raise ValueError(f"config is missing required key {key!r}")
        algorithm = d["algorithm"]
        if algorithm not in ALGORITHMS:
            raise ValueError(
                f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}"
            )
        domain = _normalize_domain(d["domain"])
        horizon = _as_int(d["horizon"], "horizon")
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        seeds = tuple(_as_int(s, "seed") for s in d["seeds"])
        if not seeds:
            raise ValueError("seeds must be non-empty")
        n_arms = d.get("n_arms")
        if n_arms is not None:
            n_arms = _as_int(n_arms, "n_arms")
        elif domain["name"] != "file":
            raise ValueError("n_arms is required for generated domains")
        budget = d.get("budget")
        if budget is not None:
            budget = float(budget)
        elif domain["name"] in ("two_process", "adherence"):
            raise ValueError(f"budget is required for the {domain['name']} domain")
        schedule = None
        if d.get("schedule") is not None:
            sched = d["schedule"]
            _reject_unknown(sched, {"C", "C_prime", "D", "epsilon0"}, "schedule")
            schedule = ScheduleParams(
                C=float(sched["C"]),
                D=_as_int(sched["D"], "D"),
                epsilon0=float(sched["epsilon0"]),
                C_prime=(
                    float(sched["C_prime"]) if sched.get("C_prime") is not None else None
                ),
            )
        replay = d.get("replay") or {}
        _reject_unknown(replay, {"period", "per_dream", "capacity"}, "replay")
        replay_period = _as_int(replay.get("period", 1_000_000), "replay period")
        replays_per_dream = _as_int(replay.get("per_dream", 1000), "replays per dream")
        replay_capacity = replay.get("capacity")
        if replay_capacity is not None:
            replay_capacity = _as_int(replay_capacity, "replay capacity")
        grid = d.get("lambda_grid") or {}
        _reject_unknown(grid, {"n_lam", "lambda_max"}, "lambda_grid")
        default_n_lam = 3000 if domain["name"] == "two_process" else 2000
        n_lam = _as_int(grid.get("n_lam", default_n_lam), "n_lam")
        lambda_max = grid.get("lambda_max")
        if lambda_max is not None:
            lambda_max = float(lambda_max)
        lambda_bound = d.get("lambda_bound")
        if lambda_bound is not None:
            lambda_bound = float(lambda_bound)
        oracle = d.get("oracle") or {}
        _reject_unknown(oracle, {"horizon", "settle_window"}, "oracle")
        oracle_horizon = _as_int(oracle.get("horizon", 1000), "oracle horizon")
        oracle_settle_window = _as_int(
            oracle.get("settle_window", 500), "oracle settle_window"
        )
        if not 1 <= oracle_settle_window <= oracle_horizon:
            raise ValueError("oracle settle_window must be in 1..oracle horizon")
        maiql_mode = d.get("maiql_mode", "discounted")
        if maiql_mode not in ("discounted", "average"):
            raise ValueError(f"unknown maiql_mode {maiql_mode!r}")
        on_non_indexable = d.get("on_non_indexable", "raise")
        if on_non_indexable not in ("raise", "clamp"):
            raise ValueError(f"unknown on_non_indexable {on_non_indexable!r}")
        return cls(
            algorithm=algorithm,
            domain=domain,
            horizon=horizon,
            seeds=seeds,
            output_dir=str(d["output_dir"]),
            n_arms=n_arms,
            budget=budget,
            discount=float(d.get("discount", 0.9)),
            schedule=schedule,
            replay_period=replay_period,
            replays_per_dream=replays_per_dream,
            replay_capacity=replay_capacity,
            n_lam=n_lam,
            lambda_max=lambda_max,
            lambda_bound=lambda_bound,
            wibql_action=_as_int(d.get("wibql_action", 1), "wibql_action"),
            maiql_mode=maiql_mode,
            on_non_indexable=on_non_indexable,
            oracle_horizon=oracle_horizon,
            oracle_settle_window=oracle_settle_window,
            init_state=_as_int(d.get("init_state", 0), "init_state"),
        )

    def to_dict(self) -> dict:
        schedule = None
        if self.schedule is not None:
            schedule = {
                "C": self.schedule.C,
                "C_prime": self.schedule.C_prime,
                "D": self.schedule.D,
                "epsilon0": self.schedule.epsilon0,
            }
        return {
            "algorithm": self.algorithm,
            "domain": self.domain,
            "n_arms": self.n_arms,
            "budget": self.budget,
            "discount": self.discount,
            "horizon": self.horizon,
            "seeds": list(self.seeds),
            "schedule": schedule,
            "replay": {
                "period": self.replay_period,
                "per_dream": self.replays_per_dream,
                "capacity": self.replay_capacity,
            },
            "lambda_grid": {"n_lam": self.n_lam, "lambda_max": self.lambda_max},
            "lambda_bound": self.lambda_bound,
            "wibql_action": self.wibql_action,
            "maiql_mode": self.maiql_mode,
            "on_non_indexable": self.on_non_indexable,
            "oracle": {
                "horizon": self.oracle_horizon,
                "settle_window": self.oracle_settle_window,
            },
            "init_state": self.init_state,
            "output_dir": self.output_dir,
        }


def run_config_hash(config: RunConfig) -> str:
    """Digest of the experiment itself; where the output lands is excluded."""
    resolved = config.to_dict()
    del resolved["output_dir"]
    return fileio.config_hash(resolved)


def load_run_config(path) -> RunConfig:
    return RunConfig.from_dict(fileio.load_config(path))


@dataclass
class DomainContext:
    """Work shared across seeds: a loaded instance or clustered counts."""

    instance: RmabInstance | None = None
    clusters: ClusteredCounts | None = None


def prepare_domain(config: RunConfig) -> DomainContext:
    domain = config.domain
    if domain["name"] == "file":
        return DomainContext(instance=fileio.load_instance(domain["path"]))
    if domain["name"] == "adherence":
        cfg = _adherence_config(domain)
        if domain["traces"] is not None:
            counts = ingest_adherence_traces(domain["traces"], cfg.history_length)
        else:
            syn = domain["synthetic"]
            if syn["modes"] is None:
                modes = None
            else:
                modes = [TraceMode(**m) for m in syn["modes"]]
            rng = np.random.default_rng(syn["seed"])
            traces = (
                gen_synthetic_traces(syn["n_patients"], rng, n_days=syn["n_days"])
                if modes is None
                else gen_synthetic_traces(
                    syn["n_patients"], rng, modes=modes, n_days=syn["n_days"]
                )
            )
            counts = traces_to_counts(traces, cfg.history_length)
        return DomainContext(clusters=cluster_adherence_counts(counts, cfg))
    return DomainContext()


def sample_instance(
    config: RunConfig, seed: int, context: DomainContext
) -> RmabInstance:
    domain = config.domain
    name = domain["name"]
    if name == "file":
        return context.instance
    rng = instance_stream(seed)
    if name == "two_process":
        return gen_two_process(
            config.n_arms,
            config.budget,
            config.discount,
            rng,
            params=_two_process_params(domain),
        )
    if name == "random":
        return gen_random(
            config.n_arms,
            domain["n_states"],
            domain["n_actions"],
            config.discount,
            rng,
            budget=config.budget,
            row_sampling=domain["row_sampling"],
        )
    return gen_adherence_instance(
        _adherence_config(domain),
        context.clusters,
        config.n_arms,
        config.budget,
        config.discount,
        rng,
    )


def make_policy(config: RunConfig, instance: RmabInstance):
    algo = config.algorithm
    if algo in LEARNING_ALGORITHMS and config.schedule is None:
        raise ValueError(f"algorithm {algo!r} requires schedule parameters")

    def resolved_grid() -> LambdaGrid:
        top = config.lambda_max
        if top is None:
            top = lambda_max_bound(instance)
        return LambdaGrid(top, config.n_lam)

    def resolved_bound() -> float:
        if config.lambda_bound is not None:
            return config.lambda_bound
        return lambda_max_bound(instance)

    if algo == "lpql":
        return LpqlLearner(instance, resolved_grid(), config.schedule)
    if algo == "maiql_aprx":
        return MaiqlAprxLearner(instance, resolved_grid(), config.schedule)
    if algo == "maiql":
        return MaiqlLearner(
            instance, config.schedule, resolved_bound(), mode=config.maiql_mode
        )
    if algo == "wibql":
        return WibqlLearner(
            instance,
            config.schedule,
            resolved_bound(),
            action=config.wibql_action,
            mode=config.maiql_mode,
        )
    if algo == "ql0":
        return Ql0Learner(instance, config.schedule)
    if algo == "oracle_lp":
        return OracleLpPolicy(instance, resolved_grid())
    if algo == "oracle_lambda0":
        return OracleLambda0Policy(instance)
    if algo == "oracle_lp_index":
        return OracleLpIndexPolicy(
            instance, clamp=(config.on_non_indexable == "clamp")
        )
    return RandomPolicy(instance)


@dataclass
class SeedRun:
    """One seed's per-step log, column-per-array."""

    seed: int
    t: np.ndarray
    instant_reward: np.ndarray
    cumulative_reward: np.ndarray
    mean_cumulative_reward: np.ndarray
    epsilon: np.ndarray
    lambda_index: np.ndarray


def run_seed(config: RunConfig, seed: int, context: DomainContext) -> SeedRun:
    instance = sample_instance(config, seed, context)
    for i, arm in enumerate(instance.arms):
        if not 0 <= config.init_state < arm.n_states:
            raise ValueError(
                f"init_state {config.init_state} out of range for arm {i}"
            )
    policy = make_policy(config, instance)
    learns = config.algorithm in LEARNING_ALGORITHMS
    horizon = (
        config.oracle_horizon
        if config.algorithm in ORACLE_ALGORITHMS
        else config.horizon
    )
    sim = Simulator(instance, seed)
    explore = exploration_stream(seed)
    # A period beyond the horizon can never trigger a dream, so the buffer
    # (and its bookkeeping on every push) is skipped outright.
    buffer = (
        ReplayBuffer(config.replay_period, config.replays_per_dream, config.replay_capacity)
        if learns and config.replay_period <= horizon
        else None
    )
    track_lambda = config.algorithm == "lpql"
    states = np.full(instance.n_arms, config.init_state, dtype=np.int64)
    instant = np.empty(horizon)
    cumulative = np.empty(horizon)
    mean_cumulative = np.empty(horizon)
    epsilon = np.empty(horizon)
    lambda_index = np.full(horizon, -1, dtype=np.int64)
    running = 0.0
    for t in range(1, horizon + 1):
        actions = policy.select(states, t, explore)
        require_feasible(instance, actions)
        next_states, rewards, experiences = sim.step(states, actions)
        if learns:
            if buffer is not None:
                for e in experiences:
                    buffer.push(e)
            policy.update(experiences, env_t=t)
            if buffer is not None and t % config.replay_period == 0:
                for replayed in buffer.dream(explore):
                    policy.update([replayed], env_t=t)
        step_reward = float(rewards.sum())
        running += step_reward
        i = t - 1
        instant[i] = step_reward
        cumulative[i] = running
        mean_cumulative[i] = running / t
        epsilon[i] = policy.epsilon_at(t)
        if track_lambda:
            lambda_index[i] = policy.last_lambda_index
        states = next_states
    return SeedRun(
        seed=seed,
        t=np.arange(1, horizon + 1),
        instant_reward=instant,
        cumulative_reward=cumulative,
        mean_cumulative_reward=mean_cumulative,
        epsilon=epsilon,
        lambda_index=lambda_index,
    )


def moving_average(series, window: int) -> np.ndarray:
    """Trailing mean over min(window, t) points; the warm-up uses the prefix."""
    if window < 1:
        raise ValueError("window must be >= 1")
    series = np.asarray(series, dtype=float)
    csum = np.cumsum(series)
    out = np.empty_like(csum)
    head = min(window, len(series))
    out[:head] = csum[:head] / np.arange(1, head + 1)
    if len(series) > window:
        out[window:] = (csum[window:] - csum[:-window]) / window
    return out


def extrapolate_oracle(instant_rewards, settle_window: int, horizon: int) -> np.ndarray:
    """Flat reference at the mean instantaneous reward of the settle window."""
    instant_rewards = np.asarray(instant_rewards, dtype=float)
    if settle_window < 1:
        raise ValueError("settle_window must be >= 1")
    if len(instant_rewards) < settle_window:
        raise ValueError(
            f"need at least settle_window={settle_window} records, "
            f"got {len(instant_rewards)}"
        )
    level = float(instant_rewards[-settle_window:].mean())
    return np.full(horizon, level)


def aggregate_series(stacked: np.ndarray):
    """Per-timestep mean / p25 / p75 across seeds, with sanity checks."""
    if stacked.ndim != 2 or stacked.shape[0] < 1:
        raise ValueError("need a (n_seeds, horizon) array")
    mean = stacked.mean(axis=0)
    p25 = np.percentile(stacked, 25, axis=0)
    p75 = np.percentile(stacked, 75, axis=0)
    tol = 1e-9 * (1.0 + np.abs(stacked).max())
    if np.any(p25 > p75 + tol):
        raise RuntimeError("aggregate invariant violated: p25 > p75")
    lo, hi = stacked.min(axis=0), stacked.max(axis=0)
    if np.any(mean < lo - tol) or np.any(mean > hi + tol):
        raise RuntimeError("aggregate invariant violated: mean outside min..max")
    return mean, p25, p75


def _fmt(x: float) -> str:
    return repr(float(x))


def write_seed_csv(path, config_hash: str, run: SeedRun) -> None:
    lines = [f"# config_hash={config_hash}", SEED_CSV_HEADER]
    for i in range(len(run.t)):
        lines.append(
            f"{run.seed},{run.t[i]},{_fmt(run.instant_reward[i])},"
            f"{_fmt(run.cumulative_reward[i])},{_fmt(run.mean_cumulative_reward[i])},"
            f"{_fmt(run.epsilon[i])},{run.lambda_index[i]}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_aggregate_csv(path, config_hash: str, t, mean, p25, p75, n_seeds: int) -> None:
    lines = [f"# config_hash={config_hash}", AGGREGATE_CSV_HEADER]
    for i in range(len(t)):
        lines.append(
            f"{int(t[i])},{_fmt(mean[i])},{_fmt(p25[i])},{_fmt(p75[i])},{n_seeds}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path):
    """Read a harness CSV; returns (config_hash or None, dict of columns)."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
        config_hash = None
        if first.startswith("# config_hash="):
            config_hash = first.split("=", 1)[1]
            header = fh.readline().strip()
        else:
            header = first
        names = header.split(",")
        columns = {name: [] for name in names}
        for line in fh:
            line = line.strip()
            if not line:
                continue
            for name, value in zip(names, line.split(",")):
                columns[name].append(float(value))
    return config_hash, {k: np.asarray(v) for k, v in columns.items()}


@dataclass
class RunResult:
    config_hash: str
    seed_paths: list
    aggregate_path: str


def run(config: RunConfig) -> RunResult:
    """Execute all seeds, then write the aggregate; crash leaves a marker."""
    config_hash = run_config_hash(config)
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    context = prepare_domain(config)
    seed_runs = []
    seed_paths = []
    for seed in config.seeds:
        try:
            seed_run = run_seed(config, seed, context)
        except Exception as exc:
            marker = outdir / PARTIAL_MARKER
            done = [r.seed for r in seed_runs]
            marker.write_text(
                f"seed {seed} crashed; aggregate not written\n"
                f"completed seeds: {done}\n\n{traceback.format_exc()}",
                encoding="utf-8",
            )
            raise RuntimeError(
                f"seed {seed} crashed ({exc}); partial-results marker at {marker}"
            ) from exc
        path = outdir / f"{config.algorithm}_seed{seed}.csv"
        write_seed_csv(path, config_hash, seed_run)
        seed_runs.append(seed_run)
        seed_paths.append(str(path))
    if config.algorithm in ORACLE_ALGORITHMS:
        series = np.vstack(
            [
                extrapolate_oracle(
                    r.instant_reward, config.oracle_settle_window, config.horizon
                )
                for r in seed_runs
            ]
        )
        t_grid = np.arange(1, config.horizon + 1)
    else:
        series = np.vstack([r.mean_cumulative_reward for r in seed_runs])
        t_grid = seed_runs[0].t
    mean, p25, p75 = aggregate_series(series)
    aggregate_path = outdir / f"{config.algorithm}_aggregate.csv"
    write_aggregate_csv(
        aggregate_path, config_hash, t_grid, mean, p25, p75, len(seed_runs)
    )
    return RunResult(
        config_hash=config_hash,
        seed_paths=seed_paths,
        aggregate_path=str(aggregate_path),
    )
