"""Experiment configuration: validation, canonical JSON and content digest."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .correlators import MomentumSpin, PositionSpin
from .engines import ExactEnum, GaussHermite, GaussianAnalytic, Mcmc, MonteCarlo, Schedule, SigmaPoint
from .interpolation import InnerMonteCarlo
from .lattice import Lattice
from .model import ModelParams, measure_from_dict

TASKS = ("check-ss", "check-theorem", "gamma-path", "lemma2", "largen", "saddle", "simulate")
ENGINES = ("exact", "gaussian", "mcmc")
DISORDER_MODES = ("montecarlo", "gauss_hermite", "sigma_point")


class ConfigError(ValueError):
    pass


def _default_task(name):
    f = [{"momentum": [1], "component": 0}]
    return {
        "check-ss": {"q": [1], "m": 0, "n": 0},
        "check-theorem": {"k": 1, "l": 1, "f": f, "basis": "position"},
        "gamma-path": {"t": {"n": 11}, "f": f, "inner": {"mode": "gauss_hermite", "nodes_per_dim": 10}, "fd_step": 1e-3},
        "lemma2": {"t1": 0.25, "t2": 0.75, "j": 1, "l": 1, "f": f, "inner": {"mode": "gauss_hermite", "nodes_per_dim": 10}},
        "largen": {"d": 5.0, "N": 10, "betaDeltaG": 1.0, "q": {"min": 1e-3, "max": 1e-1, "n": 20}},
        "saddle": {"beta": 0.3, "betaDeltaG": 1.0, "d": 3, "L": 8, "exclude_zero_mode": False},
        "simulate": {"sample": 0},
    }[name]


def default_config(task: str) -> dict:
    if task not in TASKS:
        raise ConfigError(f"unknown task {task!r}; expected one of {', '.join(TASKS)}")
    return {
        "model": {"d": 1, "L": 4, "N": 1, "beta": 0.7, "h": 1.0, "J": 1.0, "measure": "spherical"},
        "engine": {"variant": "exact", "seed": 0},
        "disorder": {"mode": "montecarlo", "n_samples": 1000, "base_seed": 0},
        "task": dict(name=task, **_default_task(task)),
        "output": {"format": "json"},
    }


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True, allow_nan=False) + "\n"


@dataclass
class ExperimentConfig:
    data: dict

    def __post_init__(self):
        validate(self.data)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            return cls(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def to_json(self) -> str:
        return canonical_json(self.data)

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json())

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()

    @property
    def task(self) -> str:
        return self.data["task"]["name"]

    def with_overrides(self, seed=None, samples=None, fmt=None) -> "ExperimentConfig":
        data = copy.deepcopy(self.data)
        if seed is not None:
            data["disorder"]["base_seed"] = int(seed)
            data["engine"]["seed"] = int(seed)
            inner = data["task"].get("inner")
            if inner is not None and inner.get("mode") == "montecarlo":
                inner["base_seed"] = int(seed)
        if samples is not None:
            data["disorder"]["n_samples"] = int(samples)
        if fmt is not None:
            data.setdefault("output", {})["format"] = fmt
        return ExperimentConfig(data)

    # builders

    def lattice(self) -> Lattice:
        m = self.data["model"]
        return Lattice(int(m["d"]), int(m["L"]))

    def params(self) -> ModelParams:
        m = self.data["model"]
        spec = m["measure"] if isinstance(m["measure"], dict) else {"measure": m["measure"]}
        if "u" in m:
            spec = dict(spec, u=m["u"])
        if "mu" in m:
            spec = dict(spec, mu=m["mu"])
        return ModelParams(float(m["beta"]), float(m["h"]), float(m.get("J", 1.0)), int(m.get("N", 1)),
                           measure_from_dict(spec))

    def engine(self):
        e = self.data["engine"]
        p, lat = self.params(), self.lattice()
        if e["variant"] == "exact":
            return ExactEnum(p, lat)
        if e["variant"] == "gaussian":
            return GaussianAnalytic(p, lat)
        return Mcmc(p, lat, Schedule(**e.get("schedule", {})), int(e.get("seed", 0)))

    def averager(self):
        dis = self.data["disorder"]
        mode = dis["mode"]
        if mode == "montecarlo":
            return MonteCarlo(int(dis["n_samples"]), int(dis.get("base_seed", 0)))
        if mode == "gauss_hermite":
            return GaussHermite(int(dis.get("nodes_per_dim", 20)))
        return SigmaPoint()

    def inner(self):
        spec = self.data["task"].get("inner", {"mode": "gauss_hermite"})
        mode = spec["mode"]
        if mode == "gauss_hermite":
            return GaussHermite(int(spec.get("nodes_per_dim", 20)))
        if mode == "sigma_point":
            return SigmaPoint()
        return InnerMonteCarlo(int(spec.get("n_inner", 256)), int(spec.get("base_seed", 0)))

    def observables(self):
        return [observable_from_dict(f) for f in self.data["task"].get("f", [])]

    def t_grid(self):
        t = self.data["task"].get("t", {"n": 11})
        if isinstance(t, dict):
            return np.linspace(float(t.get("min", 0.0)), float(t.get("max", 1.0)), int(t["n"]))
        return np.asarray(t, dtype=float)

    def q_grid(self):
        q = self.data["task"].get("q", {"min": 1e-3, "max": 1e-1, "n": 20})
        if isinstance(q, dict):
            return np.geomspace(float(q["min"]), float(q["max"]), int(q["n"]))
        return np.asarray(q, dtype=float)

    def seeds(self) -> dict:
        out = {}
        dis = self.data["disorder"]
        if dis.get("mode") == "montecarlo":
            out["disorder_base_seed"] = int(dis.get("base_seed", 0))
        if self.data["engine"]["variant"] == "mcmc":
            out["engine_seed"] = int(self.data["engine"].get("seed", 0))
        inner = self.data["task"].get("inner")
        if inner is not None and inner.get("mode") == "montecarlo":
            out["inner_base_seed"] = int(inner.get("base_seed", 0))
        return out


def observable_from_dict(spec: dict):
    n = int(spec.get("component", 0))
    if "momentum" in spec:
        return MomentumSpin(tuple(int(c) for c in spec["momentum"]), n)
    if "position" in spec:
        return PositionSpin(int(spec["position"]), n)
    raise ConfigError(f"observable needs 'momentum' or 'position': {spec!r}")


def _require(block, keys, where):
    missing = [k for k in keys if k not in block]
    if missing:
        raise ConfigError(f"{where}: missing key(s) {', '.join(missing)}")


def validate(data: dict):
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    _require(data, ["task"], "config")
    task = data["task"]
    _require(task, ["name"], "task")
    if task["name"] not in TASKS:
        raise ConfigError(f"task.name must be one of {', '.join(TASKS)}, got {task['name']!r}")
    if task["name"] in ("largen", "saddle"):
        return
    _require(data, ["model", "engine", "disorder"], "config")
    _require(data["model"], ["d", "L", "beta", "h", "measure"], "model")
    if data["engine"].get("variant") not in ENGINES:
        raise ConfigError(f"engine.variant must be one of {', '.join(ENGINES)}")
    mode = data["disorder"].get("mode")
    if mode not in DISORDER_MODES:
        raise ConfigError(f"disorder.mode must be one of {', '.join(DISORDER_MODES)}")
    if mode == "montecarlo" and int(data["disorder"].get("n_samples", 0)) < 2:
        raise ConfigError("disorder.n_samples must be >= 2 for Monte Carlo averaging")
    if task["name"] == "check-theorem":
        _require(task, ["k", "l", "f"], "task")
        if int(task["l"]) < 1:
            raise ConfigError("task.l must be >= 1: the l = 0 case is not covered by the proven bound")
        if len(task["f"]) != int(task["k"]):
            raise ConfigError("task.f must list exactly k observables")
    if task["name"] == "lemma2":
        _require(task, ["t1", "t2", "j", "l", "f"], "task")
