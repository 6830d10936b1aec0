"""Run configuration: schema-validated JSON in, resolved JSON out.

Unknown keys are rejected so typos fail loudly; every run writes the fully
resolved configuration next to its outputs for provenance.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import jsonschema

from .diffusion import SeedPolicy, Signal, SenderStrategy
from .model import ModelParams
from .rng import RngSpec


class ConfigError(ValueError):
    pass


_DIST_SCHEMA = {
    "type": "array",
    "minItems": 1,
    "items": {
        "type": "object",
        "properties": {"lambda": {"type": "number", "minimum": 0},
                       "prob": {"type": "number", "minimum": 0, "maximum": 1}},
        "required": ["lambda", "prob"],
        "additionalProperties": False,
    },
}

_PAYOFF_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["linear", "power", "capped", "crra", "step"]},
        "p": {"type": "number", "minimum": 1},
        "x_bar": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "b": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

_MODEL_SCHEMA = {
    "type": "object",
    "properties": {
        "gamma_h": {"type": "number", "minimum": 0, "maximum": 1},
        "mu_h1": {"type": "number", "exclusiveMinimum": 0.5, "exclusiveMaximum": 1},
        "mu_l1": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.5},
        "mu_s1": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "q": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "f_h": _DIST_SCHEMA,
        "f_l": _DIST_SCHEMA,
        "payoff": _PAYOFF_SCHEMA,
    },
    "required": ["gamma_h", "mu_h1", "mu_l1", "mu_s1", "q", "f_h", "f_l"],
    "additionalProperties": False,
}

_ENGINE_SCHEMA = {
    "type": "object",
    "properties": {
        "n": {"type": "integer", "minimum": 2},
        "reps": {"type": "integer", "minimum": 1},
        "pilot_reps": {"type": "integer", "minimum": 0},
        "base_seed": {"type": "integer", "minimum": 0},
        "rng_algorithm": {"enum": ["philox", "pcg64"]},
        "tail_cutoff": {"type": "number", "exclusiveMinimum": 0, "maximum": 1e-3},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "max_iter": {"type": "integer", "minimum": 1},
        "grid_n": {"type": "integer", "minimum": 3},
        "refine_iters": {"type": "integer", "minimum": 0},
        "d_max_floor": {"type": "integer", "minimum": 1},
        "seed_exponent": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "edge_budget": {"type": "number", "exclusiveMinimum": 0},
        "threads": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}

_SIGNAL_SCHEMA = {
    "type": "object",
    "properties": {
        "label": {"type": "string"},
        "pi1": {"type": "number", "minimum": 0, "maximum": 1},
        "pi0": {"type": "number", "minimum": 0, "maximum": 1},
        "seeding": {"enum": ["on_l1", "on_lhat1", "uniform", "none"]},
        "k": {"type": "integer", "minimum": 1},
    },
    "required": ["label", "pi1", "pi0", "seeding"],
    "additionalProperties": False,
}

_STRATEGY_SCHEMA = {
    "type": "object",
    "properties": {
        "signals": {"type": "array", "items": _SIGNAL_SCHEMA},
        "seed_exponent": {"type": "number", "exclusiveMinimum": 0,
                          "exclusiveMaximum": 1},
        "sharing_rule": {"enum": ["persuaded", "agree_content", "agree_prose"]},
    },
    "required": ["signals"],
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "properties": {
        "model": _MODEL_SCHEMA,
        "engine": _ENGINE_SCHEMA,
        "strategy": _STRATEGY_SCHEMA,
    },
    "required": ["model"],
    "additionalProperties": False,
}


@dataclass(frozen=True)
class EngineConfig:
    n: int = 100000
    reps: int = 20
    pilot_reps: int = 200
    base_seed: int = 20240601
    rng_algorithm: str = "philox"
    tail_cutoff: float = 1e-9
    tol: float = 1e-12
    max_iter: int = 200000
    grid_n: int = 201
    refine_iters: int = 3
    d_max_floor: int = 64
    seed_exponent: float = 0.5
    edge_budget: float = 1e8
    threads: int = 1

    def rng(self) -> RngSpec:
        return RngSpec(base_seed=self.base_seed, algorithm=self.rng_algorithm)


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    engine: EngineConfig = field(default_factory=EngineConfig)
    strategy: SenderStrategy | None = None

    def to_dict(self) -> dict:
        out = {"model": self.model.to_dict(), "engine": asdict(self.engine)}
        if self.strategy is not None:
            out["strategy"] = {
                "signals": [
                    {"label": s.label, "pi1": s.pi1, "pi0": s.pi0,
                     "seeding": pol.kind,
                     **({"k": pol.k} if pol.kind == "uniform" else {})}
                    for s, pol in zip(self.strategy.signals, self.strategy.seeding)
                ],
                "seed_exponent": self.strategy.seed_exponent,
                "sharing_rule": self.strategy.sharing_rule,
            }
        return out


def parse_config(doc: dict) -> RunConfig:
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {path}: {exc.message}") from exc
    try:
        model = ModelParams.from_dict(doc["model"])
    except ValueError as exc:
        raise ConfigError(f"config invalid at model: {exc}") from exc
    engine = EngineConfig(**doc.get("engine", {}))
    strategy = None
    if "strategy" in doc:
        sdoc = doc["strategy"]
        signals, seeding = [], []
        for s in sdoc["signals"]:
            signals.append(Signal(s["label"], float(s["pi1"]), float(s["pi0"])))
            seeding.append(SeedPolicy(s["seeding"], s.get("k", 1)))
        try:
            strategy = SenderStrategy(
                signals=tuple(signals), seeding=tuple(seeding),
                seed_exponent=sdoc.get("seed_exponent", 0.5),
                sharing_rule=sdoc.get("sharing_rule", "persuaded"),
            )
        except ValueError as exc:
            raise ConfigError(f"config invalid at strategy: {exc}") from exc
    return RunConfig(model=model, engine=engine, strategy=strategy)


def load_config(path) -> RunConfig:
    import json

    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise ConfigError(str(exc)) from exc
    return parse_config(doc)
