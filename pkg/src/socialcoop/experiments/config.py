"""Experiment configuration: a single JSON document binding the game family,
population, type distribution, sweeps, and seeds. All randomness flows from
one master seed; the canonical config hash is embedded in every artifact.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..agents import (
    ConstantAgent,
    HedgeAgent,
    Population,
    RegretMatchingAgent,
    TypeDistribution,
    UniformAgent,
    codebook_for,
    grim_trigger_agent,
    handshake_si_agent,
    CCETrackingAgent,
)
from ..equilibrium import enumerate_nash, pareto_optimal_nash
from ..games import GameClass, JointType, make_coordpref_game, two_matrix_game


class ConfigError(ValueError):
    """Malformed or unresolvable experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    raw: dict
    experiment_id: str
    master_seed: int

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as f:
                raw = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if "game" not in raw:
            raise ConfigError("config is missing the 'game' section")
        return cls(
            raw=raw,
            experiment_id=raw.get("experiment_id", "experiment"),
            master_seed=int(raw.get("master_seed", 0)),
        )

    def get(self, key: str, default: Any = None) -> Any:
        return self.raw.get(key, default)

    def require(self, key: str) -> Any:
        if key not in self.raw:
            raise ConfigError(f"config is missing required key {key!r}")
        return self.raw[key]

    @property
    def hash(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def build_game(spec: dict) -> GameClass:
    try:
        family = spec["family"]
        if family == "coordpref":
            return make_coordpref_game(
                int(spec["n_actions"]), float(spec["off_peak"]), int(spec["horizon"])
            )
        if family == "two_matrix":
            return two_matrix_game(spec["matrix1"], spec["matrix2"], int(spec["horizon"]))
        raise ConfigError(f"unknown game family {family!r}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid game spec: {exc}") from exc


def _resolve_cce_target(params: dict, game: GameClass) -> np.ndarray:
    if "target" in params:
        return np.asarray(params["target"], dtype=float)
    spec = params.get("target_mixed_ne_product")
    if spec is None:
        raise ConfigError("cce_tracking member needs 'target' or 'target_mixed_ne_product'")
    jt = JointType(*spec)
    mixed = [
        e for e in enumerate_nash(jt, game)
        if max(max(e.strategy1), max(e.strategy2)) < 1.0 - 1e-9
    ]
    if not mixed:
        raise ConfigError(f"no fully-mixed Nash equilibrium for joint type {tuple(jt)}")
    e = mixed[0]
    return np.outer(e.s1, e.s2)


def _member_ctor(kind: str, params: dict, game: GameClass):
    codebook = codebook_for(game)
    if kind == "handshake":
        rate = params.get("fallback_learning_rate")
        return lambda: handshake_si_agent(codebook, game, rate)
    if kind == "grim_trigger":
        return lambda: grim_trigger_agent(codebook, game)
    if kind == "hedge":
        rate = params.get("learning_rate")
        return lambda: HedgeAgent(game, rate)
    if kind == "regret_matching":
        return lambda: RegretMatchingAgent(game)
    if kind == "constant":
        action = int(params.get("action", 0))
        return lambda: ConstantAgent(action, game)
    if kind == "uniform":
        return lambda: UniformAgent(game)
    if kind == "cce_tracking":
        target = _resolve_cce_target(params, game)
        slack = float(params.get("watchdog_slack", 0.05))
        shared_seed = int(params.get("shared_seed", 0))
        return lambda: CCETrackingAgent(target, game, slack, shared_seed)
    raise ConfigError(f"unknown population member kind {kind!r}")


def build_population(spec: dict, game: GameClass) -> Population:
    try:
        members = spec["members"]
        name = spec.get("name", "population")
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"invalid population spec: {exc}") from exc
    if not members:
        raise ConfigError("population has no members")
    entries = []
    for m in members:
        kind = m.get("kind")
        ctor = _member_ctor(kind, m.get("params", {}), game)
        entries.append((kind, ctor, float(m.get("weight", 1.0))))
    return Population.of(name, *entries)


def build_type_distribution(spec, game: GameClass) -> TypeDistribution:
    if spec in (None, "uniform"):
        return TypeDistribution.uniform(game)
    if isinstance(spec, dict) and "point_mass" in spec:
        return TypeDistribution.point_mass(JointType(*spec["point_mass"]))
    if isinstance(spec, dict) and "weights" in spec:
        jts, ws = [], []
        for entry in spec["weights"]:
            jts.append(JointType(entry["theta1"], entry["theta2"]))
            ws.append(float(entry["weight"]))
        total = sum(ws)
        return TypeDistribution(tuple(jts), tuple(w / total for w in ws))
    raise ConfigError(f"invalid type distribution spec {spec!r}")
