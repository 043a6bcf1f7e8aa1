"""Command-line entry point.

Subcommands:
  gen        sample one instance from a config and save it as YAML
  run        execute a config: per-seed CSVs plus the cross-seed aggregate
  oracle     export exact Q tables and occupancy-measure indexes for an instance
  aggregate  recompute an aggregate CSV from per-seed CSVs
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import fileio, harness
from .oracles import oracle_index_table, value_iteration


def _resolve_seed(config: harness.RunConfig, seed) -> int:
    return config.seeds[0] if seed is None else seed


def _cmd_gen(args) -> int:
    config = harness.load_run_config(args.config)
    seed = _resolve_seed(config, args.seed)
    context = harness.prepare_domain(config)
    instance = harness.sample_instance(config, seed, context)
    fileio.save_instance(instance, args.out)
    print(f"wrote instance for seed {seed} to {args.out}")
    return 0


def _cmd_run(args) -> int:
    config = harness.load_run_config(args.config)
    if args.output_dir is not None:
        config = dataclasses.replace(config, output_dir=args.output_dir)
    result = harness.run(config)
    for path in result.seed_paths:
        print(f"wrote {path}")
    print(f"wrote {result.aggregate_path}")
    print(f"config_hash={result.config_hash}")
    return 0


def _cmd_oracle(args) -> int:
    config = harness.load_run_config(args.config)
    seed = _resolve_seed(config, args.seed)
    context = harness.prepare_domain(config)
    instance = harness.sample_instance(config, seed, context)
    config_hash = harness.run_config_hash(config)
    lambdas = [float(v) for v in args.lambdas.split(",") if v.strip()]
    if not lambdas:
        raise ValueError("--lambdas must list at least one value")
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    table_lines = [f"# config_hash={config_hash}", "arm,state,action,lambda,q"]
    for lam in lambdas:
        for i, arm in enumerate(instance.arms):
            q = value_iteration(arm, lam, config.discount)
            for s in range(arm.n_states):
                for a in range(arm.n_actions):
                    table_lines.append(
                        f"{i},{s},{a},{repr(float(lam))},{repr(float(q[s, a]))}"
                    )
    tables_path = outdir / "oracle_tables.csv"
    tables_path.write_text("\n".join(table_lines) + "\n", encoding="utf-8")

    index_lines = [f"# config_hash={config_hash}", "arm,state,action,index"]
    clamp = config.on_non_indexable == "clamp"
    for i, arm in enumerate(instance.arms):
        table = oracle_index_table(arm, config.discount, clamp=clamp)
        for s in range(arm.n_states):
            for j in range(1, arm.n_actions):
                index_lines.append(f"{i},{s},{j},{repr(float(table[s, j - 1]))}")
    indexes_path = outdir / "oracle_indexes.csv"
    indexes_path.write_text("\n".join(index_lines) + "\n", encoding="utf-8")

    print(f"wrote {tables_path}")
    print(f"wrote {indexes_path}")
    return 0


def _cmd_aggregate(args) -> int:
    if args.extrapolate_to is not None and args.extrapolate_to < 1:
        raise ValueError("--extrapolate-to must be >= 1")
    reference_hash = None
    t_grid = None
    series = []
    for path in args.inputs:
        config_hash, cols = harness.read_csv(path)
        if config_hash is None:
            raise ValueError(f"{path} has no config_hash line")
        if reference_hash is None:
            reference_hash = config_hash
        elif config_hash != reference_hash:
            raise ValueError(
                f"{path} was produced by a different config "
                f"({config_hash} != {reference_hash})"
            )
        if "t" not in cols:
            raise ValueError(f"{path} has no t column")
        if args.extrapolate_to is not None:
            series.append(
                harness.extrapolate_oracle(
                    cols["instant_reward"], args.settle_window, args.extrapolate_to
                )
            )
        else:
            if t_grid is None:
                t_grid = cols["t"]
            elif not np.array_equal(cols["t"], t_grid):
                raise ValueError(f"{path} has a mismatched t grid")
            series.append(cols["mean_cumulative_reward"])
    if args.extrapolate_to is not None:
        t_grid = np.arange(1, args.extrapolate_to + 1)
    else:
        lengths = {len(s) for s in series}
        if len(lengths) != 1:
            raise ValueError("input files have different lengths")
    mean, p25, p75 = harness.aggregate_series(np.vstack(series))
    harness.write_aggregate_csv(
        args.out, reference_hash, t_grid, mean, p25, p75, len(series)
    )
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rmabql",
        description="Q-learning and oracle policies for budgeted multi-action bandits",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen_p = sub.add_parser("gen", help="sample an instance and save it as YAML")
    gen_p.add_argument("--config", required=True, help="run config file")
    gen_p.add_argument(
        "--seed", type=int, default=None, help="instance seed (default: first in config)"
    )
    gen_p.add_argument("--out", required=True, help="output instance file")
    gen_p.set_defaults(func=_cmd_gen)

    run_p = sub.add_parser("run", help="execute a run config end to end")
    run_p.add_argument("--config", required=True, help="run config file")
    run_p.add_argument(
        "--output-dir", default=None, help="override the config's output_dir"
    )
    run_p.set_defaults(func=_cmd_run)

    oracle_p = sub.add_parser(
        "oracle", help="export exact Q tables and index tables for a config's instance"
    )
    oracle_p.add_argument("--config", required=True, help="run config file")
    oracle_p.add_argument(
        "--seed", type=int, default=None, help="instance seed (default: first in config)"
    )
    oracle_p.add_argument("--out", required=True, help="output directory")
    oracle_p.add_argument(
        "--lambdas",
        default="0.0",
        help="comma-separated penalty values for the Q-table export",
    )
    oracle_p.set_defaults(func=_cmd_oracle)

    agg_p = sub.add_parser(
        "aggregate", help="recompute an aggregate CSV from per-seed CSVs"
    )
    agg_p.add_argument("--inputs", nargs="+", required=True, help="per-seed CSV files")
    agg_p.add_argument("--out", required=True, help="output aggregate CSV")
    agg_p.add_argument(
        "--extrapolate-to",
        type=int,
        default=None,
        help="extend settled reference runs flat to this horizon",
    )
    agg_p.add_argument(
        "--settle-window",
        type=int,
        default=500,
        help="trailing steps averaged when extrapolating",
    )
    agg_p.set_defaults(func=_cmd_aggregate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
