"""Experiment configuration: one JSON document per run.

Top-level fields:

    function  periodic-function spec ({"type": "trig"|"sampled", ...})
    gaps      gap-law spec ({"kind": "uniform"|"triangular"|"raised-cosine", ...})
    x         nonzero frequency multiplier
    seed      master seed (overridable by --seed)
    params    subcommand parameters, validated at parse time

See the README for the per-subcommand parameter tables.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidInputError
from .gaps import GapDistribution, gaps_from_json, gaps_to_json
from .periodic import ShapeFunction, function_from_json, function_to_json

DEFAULT_PARAMS = {
    "variance": {"K": None, "G": 4096, "reps": 100_000},
    "density": {"n": 10, "G": 4096},
    "decay": {"nMax": 30, "G": 4096},
    "schedule": {"n": 100_000},
    "blocks": {"nBlocks": 100, "reps": 2000},
    "clt": {"N": 2048, "reps": 1000},
    "lil": {"Nmax": 100_000, "gamma": 1.2, "seeds": 16},
    "chung": {"Nmax": 100_000, "gamma": 1.2, "seeds": 16},
    "kefp": {"a": 1.0, "Tmax": 1_000_000.0},
    "moment4": {"nList": [64, 256], "reps": 10_000, "weights": None},
}

SUBCOMMANDS = tuple(DEFAULT_PARAMS) + ("battery",)


def _positive_int(params: dict, key: str) -> int:
    v = params[key]
    if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
        raise InvalidInputError(f"param {key!r} must be a positive integer, got {v!r}")
    return v


def _power_of_two(params: dict, key: str) -> int:
    v = _positive_int(params, key)
    if v & (v - 1):
        raise InvalidInputError(f"param {key!r} must be a power of two, got {v}")
    return v


@dataclass(frozen=True)
class ExperimentConfig:
    function: ShapeFunction
    gaps: GapDistribution
    x: float
    seed: int
    params: dict = field(default_factory=dict)

    def params_for(self, subcommand: str) -> dict:
        merged = dict(DEFAULT_PARAMS.get(subcommand, {}))
        merged.update(self.params.get(subcommand, {}))
        _validate_params(subcommand, merged)
        return merged

    def canonical(self) -> dict:
        """Round-trippable dict; hashing input."""
        return {
            "function": function_to_json(self.function),
            "gaps": gaps_to_json(self.gaps),
            "x": self.x,
            "seed": self.seed,
            "params": self.params,
        }


def _validate_params(subcommand: str, p: dict) -> None:
    if subcommand == "variance":
        if p["K"] is not None:
            _positive_int(p, "K")
        _power_of_two(p, "G")
        _positive_int(p, "reps")
    elif subcommand == "density":
        _positive_int(p, "n")
        _power_of_two(p, "G")
    elif subcommand == "decay":
        _positive_int(p, "nMax")
        _power_of_two(p, "G")
    elif subcommand == "schedule":
        _positive_int(p, "n")
    elif subcommand == "blocks":
        _positive_int(p, "nBlocks")
        _positive_int(p, "reps")
    elif subcommand == "clt":
        _positive_int(p, "N")
        _positive_int(p, "reps")
    elif subcommand in ("lil", "chung"):
        _positive_int(p, "Nmax")
        _positive_int(p, "seeds")
        if not (1.0 < float(p["gamma"]) <= 2.0):
            raise InvalidInputError("param 'gamma' must lie in (1, 2]")
    elif subcommand == "kefp":
        if float(p["Tmax"]) < 16.0:
            raise InvalidInputError("param 'Tmax' must be at least 16")
    elif subcommand == "moment4":
        _positive_int(p, "reps")
        if p.get("weights") is None:
            if not p.get("nList"):
                raise InvalidInputError("moment4 needs 'weights' or a nonempty 'nList'")
            for n in p["nList"]:
                if not isinstance(n, int) or n <= 0:
                    raise InvalidInputError("moment4 'nList' entries must be positive")


def load_config(path, seed_override=None) -> ExperimentConfig:
    """Parse and validate a config file; raises InvalidInputError."""
    doc = json.loads(Path(path).read_text())
    return parse_config(doc, seed_override)


def parse_config(doc: dict, seed_override=None) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise InvalidInputError("config must be a JSON object")
    for key in ("function", "gaps", "x"):
        if key not in doc:
            raise InvalidInputError(f"config is missing {key!r}")
    x = float(doc["x"])
    if x == 0.0:
        raise InvalidInputError("x must be nonzero")
    seed = int(doc.get("seed", 0)) if seed_override is None else int(seed_override)
    if seed < 0 or seed >= 1 << 64:
        raise InvalidInputError("seed must fit in an unsigned 64-bit integer")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise InvalidInputError("params must be an object keyed by subcommand")
    unknown = set(params) - set(DEFAULT_PARAMS)
    if unknown:
        raise InvalidInputError(f"params for unknown subcommands: {sorted(unknown)}")
    cfg = ExperimentConfig(
        function=function_from_json(doc["function"]),
        gaps=gaps_from_json(doc["gaps"]),
        x=x,
        seed=seed,
        params=params,
    )
    for sub in params:
        cfg.params_for(sub)
    return cfg
