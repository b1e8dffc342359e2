"""YAML scenario files: one document describing a whole experiment.

A scenario bundles the WTP curve, the type grid, the service-time
distribution, the system size and the load grid.  Validation is
collect-all: every problem in the file is reported in a single
``ScenarioError`` instead of failing on the first one.

Example::

    model: {p: 1.0, T: 0.05, beta: 3}
    population: {n: 50, delta: 0.02, epsilon: 1.0e-6}
    service:
      kind: hyperexponential
      branches: [[0.5, 0.2], [0.5, 1.8]]
    system: {m: 100, L: 2}
    loads: {start: 0.05, stop: 0.30, step: 0.01}
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import yaml

from .errors import ScenarioError
from .model import (
    DEFAULT_BETA,
    DEFAULT_EPSILON,
    TypePopulation,
    WtpModel,
    grid_population,
)
from .queueing import ServiceDist, require_unit_mean

#: Named built-in scenarios (the two experimental markets).
PRESETS = ("paper-low", "paper-high")

_DEFAULT_LOADS = {"start": 0.05, "stop": 0.30, "step": 0.01}


@dataclass(frozen=True)
class Scenario:
    name: str
    model: WtpModel
    population: TypePopulation
    dist: ServiceDist
    m: int
    L: int
    load_grid: tuple[float, ...]


def preset(name: str, L: int = 2) -> Scenario:
    """The built-in markets: 50 uniform types at spacing 0.02
    ('paper-low', tighter SLAs) or 0.04 ('paper-high'), exponential
    service, 100 servers, loads 0.05..0.30."""
    if name not in PRESETS:
        raise ScenarioError([f"unknown preset {name!r}; choose from {', '.join(PRESETS)}"])
    delta = 0.02 if name == "paper-low" else 0.04
    return Scenario(
        name=name,
        model=WtpModel(),
        population=grid_population(n=50, delta=delta),
        dist=ServiceDist.exponential(),
        m=100,
        L=L,
        load_grid=_expand_loads(_DEFAULT_LOADS, []),
    )


def _expand_loads(spec, problems) -> tuple[float, ...]:
    if isinstance(spec, (list, tuple)):
        loads = [float(x) for x in spec]
    elif isinstance(spec, dict):
        unknown = set(spec) - {"start", "stop", "step"}
        if unknown:
            problems.append(f"loads: unknown keys {sorted(unknown)}")
            return ()
        merged = {**_DEFAULT_LOADS, **spec}
        if merged["step"] <= 0 or merged["stop"] < merged["start"]:
            problems.append("loads: need step > 0 and stop >= start")
            return ()
        count = int(round((merged["stop"] - merged["start"]) / merged["step"])) + 1
        loads = list(np.round(merged["start"] + merged["step"] * np.arange(count), 12))
    else:
        problems.append("loads must be a list or a start/stop/step mapping")
        return ()
    bad = [x for x in loads if not 0.0 < x < 1.0]
    if bad:
        problems.append(f"loads outside (0, 1): {bad}")
    return tuple(loads)


def _section(raw, key, problems, allowed) -> dict:
    sec = raw.get(key, {})
    if sec is None:
        sec = {}
    if not isinstance(sec, dict):
        problems.append(f"{key} must be a mapping")
        return {}
    unknown = set(sec) - allowed
    if unknown:
        problems.append(f"{key}: unknown keys {sorted(unknown)}")
    return {k: v for k, v in sec.items() if k in allowed}


def _build_dist(sec: dict, problems) -> Optional[ServiceDist]:
    kind = sec.get("kind", "exponential")
    try:
        if kind == "exponential":
            return ServiceDist.exponential(float(sec.get("mean", 1.0)))
        if kind == "hyperexponential":
            branches = sec.get("branches")
            if not branches:
                problems.append("service: hyperexponential needs a branches list")
                return None
            return ServiceDist.hyperexponential(
                (float(w), float(m)) for w, m in branches
            )
        problems.append(f"service: unknown kind {kind!r}")
    except (TypeError, ValueError) as exc:
        problems.append(f"service: {exc}")
    except Exception as exc:  # validation errors from ServiceDist
        problems.append(f"service: {exc}")
    return None


def parse(raw: dict, name: str = "scenario") -> Scenario:
    """Build a validated Scenario from a parsed YAML mapping."""
    problems: list[str] = []
    if not isinstance(raw, dict):
        raise ScenarioError(["the scenario document must be a mapping"])
    unknown = set(raw) - {"model", "population", "service", "system", "loads", "name"}
    if unknown:
        problems.append(f"unknown top-level keys {sorted(unknown)}")

    msec = _section(raw, "model", problems, {"p", "T", "beta"})
    psec = _section(raw, "population", problems, {"n", "delta", "epsilon"})
    ssec = _section(raw, "service", problems, {"kind", "mean", "branches"})
    ysec = _section(raw, "system", problems, {"m", "L"})

    model = None
    try:
        model = WtpModel(
            p=float(msec.get("p", 1.0)),
            T=float(msec.get("T", 0.05)),
            beta=float(msec.get("beta", DEFAULT_BETA)),
        )
    except Exception as exc:
        problems.append(f"model: {exc}")

    population = None
    if "delta" not in psec:
        problems.append("population: delta is required")
    else:
        try:
            population = grid_population(
                n=int(psec.get("n", 50)),
                delta=float(psec["delta"]),
                epsilon=float(psec.get("epsilon", DEFAULT_EPSILON)),
            )
        except Exception as exc:
            problems.append(f"population: {exc}")

    dist = _build_dist(ssec, problems)
    if dist is not None:
        try:
            require_unit_mean(dist)
        except Exception as exc:
            problems.append(f"service: {exc}")

    m = ysec.get("m", 100)
    L = ysec.get("L", 2)
    if not isinstance(m, int) or m < 1:
        problems.append(f"system: m must be a positive integer, got {m!r}")
    if not isinstance(L, int) or L < 1:
        problems.append(f"system: L must be a positive integer, got {L!r}")
    elif isinstance(m, int) and m >= 1 and L > m:
        problems.append(f"system: L={L} exceeds the server count m={m}")

    load_grid = _expand_loads(raw.get("loads", dict(_DEFAULT_LOADS)), problems)

    if problems:
        raise ScenarioError(problems)
    return Scenario(
        name=str(raw.get("name", name)),
        model=model,
        population=population,
        dist=dist,
        m=m,
        L=L,
        load_grid=load_grid,
    )


def load(path: str) -> Scenario:
    """Parse and validate a scenario YAML file."""
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ScenarioError([f"scenario file not found: {path}"])
    except yaml.YAMLError as exc:
        raise ScenarioError([f"invalid YAML: {exc}"])
    return parse(raw, name=path)
