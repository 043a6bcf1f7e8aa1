"""Q-learning and exact policies for budget-coupled multi-action bandits.

The package covers four layers:

* models and simulation (`core`, `simulate`): arm MDPs, budget feasibility,
  seeded trajectory rollout;
* learners (`lpql`, `maiql`, `baselines`): online Q-learning over penalty
  grids, per-action index learning, and penalty-free baselines, with shared
  step-size/exploration schedules (`schedules`) and experience replay
  (`replay`);
* exact references (`oracles`, `knapsack`, `lpql.find_lambda_min`): value
  iteration, bisected occupancy indexes, and budget allocation solvers;
* experiments (`domains`, `harness`, `cli`): instance generators, the seeded
  runner, and CSV emission.
"""

from .baselines import Ql0Learner, RandomPolicy
from .core import (
    ArmModel,
    InfeasibleActionError,
    RmabInstance,
    action_cost,
    is_feasible,
    require_feasible,
    require_valid,
    validate_arm,
    validate_instance,
)
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
)
from .fileio import config_hash, load_config, load_instance, save_instance
from .harness import RunConfig, load_run_config, moving_average, run
from .knapsack import KnapsackProblem
from .lpql import (
    LambdaGrid,
    LpqlLearner,
    MaiqlAprxLearner,
    approx_index,
    find_lambda_min,
    lambda_max_bound,
)
from .maiql import MaiqlLearner, WibqlLearner, greedy_index_allocation
from .oracles import (
    NotIndexableError,
    OracleLambda0Policy,
    OracleLpIndexPolicy,
    OracleLpPolicy,
    ValueIterationError,
    oracle_index,
    oracle_index_table,
    value_iteration,
)
from .replay import ReplayBuffer
from .schedules import ScheduleParams, VisitCounter, random_action
from .simulate import Experience, Simulator, run_episode

__version__ = "0.1.0"

__all__ = [
    "AdherenceConfig",
    "ArmModel",
    "ClusteredCounts",
    "Experience",
    "InfeasibleActionError",
    "KnapsackProblem",
    "LambdaGrid",
    "LpqlLearner",
    "MaiqlAprxLearner",
    "MaiqlLearner",
    "NotIndexableError",
    "OracleLambda0Policy",
    "OracleLpIndexPolicy",
    "OracleLpPolicy",
    "Ql0Learner",
    "RandomPolicy",
    "ReplayBuffer",
    "RmabInstance",
    "RunConfig",
    "ScheduleParams",
    "Simulator",
    "TraceMode",
    "TwoProcessParams",
    "ValueIterationError",
    "VisitCounter",
    "WibqlLearner",
    "action_cost",
    "approx_index",
    "cluster_adherence_counts",
    "config_hash",
    "find_lambda_min",
    "gen_adherence_instance",
    "gen_random",
    "gen_synthetic_traces",
    "gen_two_process",
    "greedy_index_allocation",
    "ingest_adherence_traces",
    "is_feasible",
    "lambda_max_bound",
    "load_config",
    "load_instance",
    "load_run_config",
    "moving_average",
    "oracle_index",
    "oracle_index_table",
    "random_action",
    "require_feasible",
    "require_valid",
    "run",
    "run_episode",
    "save_instance",
    "validate_arm",
    "validate_instance",
    "value_iteration",
]
