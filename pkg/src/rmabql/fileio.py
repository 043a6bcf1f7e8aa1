"""Instance and config file IO.

Instances are stored as YAML: top-level ``discount`` and ``budget`` plus a
list of per-arm blocks ``{costs, rewards, transitions}`` where
``transitions`` is the row-major flattening of the (S, M, S) tensor.
Round-tripping preserves every 64-bit float bit-for-bit (values are dumped
via their shortest repr, which parses back exactly).
"""

from __future__ import annotations

import hashlib
import json

import numpy as np
import yaml

from .core import ArmModel, RmabInstance, require_valid


def arm_to_dict(arm: ArmModel) -> dict:
    return {
        "costs": arm.costs.tolist(),
        "rewards": arm.rewards.tolist(),
        "transitions": arm.transitions.reshape(-1).tolist(),
    }


def arm_from_dict(d: dict) -> ArmModel:
    costs = list(d["costs"])
    rewards = list(d["rewards"])
    flat = list(d["transitions"])
    S, M = len(rewards), len(costs)
    if len(flat) != S * M * S:
        raise ValueError(
            f"transitions has {len(flat)} entries, expected S*M*S = {S * M * S}"
        )
    return ArmModel(
        costs=costs,
        rewards=rewards,
        transitions=np.asarray(flat, dtype=float).reshape(S, M, S),
    )


def instance_to_dict(instance: RmabInstance) -> dict:
    return {
        "discount": float(instance.discount),
        "budget": float(instance.budget),
        "arms": [arm_to_dict(arm) for arm in instance.arms],
    }


def instance_from_dict(d: dict) -> RmabInstance:
    missing = {"discount", "budget", "arms"} - set(d)
    if missing:
        raise ValueError(f"instance document missing keys: {sorted(missing)}")
    instance = RmabInstance(
        arms=tuple(arm_from_dict(a) for a in d["arms"]),
        budget=d["budget"],
        discount=d["discount"],
    )
    require_valid(instance)
    return instance


def save_instance(instance: RmabInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(instance_to_dict(instance), fh, sort_keys=False)


def load_instance(path) -> RmabInstance:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: expected a mapping at top level")
    return instance_from_dict(doc)


def load_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: expected a mapping at top level")
    return doc


def config_hash(resolved: dict) -> str:
    """Stable digest of a fully resolved config (embedded in CSV output)."""
    canon = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()
