"""JSON scenario files: one self-contained document per run.

Layout::

    {
      "states": ["a", "b"],
      "prior": [0.5, 0.5],
      "agents": [{"signals": ["x", "y"], "likelihood": [[0.7, 0.3], [0.3, 0.7]]}],
      "network": {"parents": [null]},          # or {"edges": [[j, i], ...]}, i observes j
      "true_state": "a",                       # or "sample"
      "horizon": 5000,
      "seed": 0,
      "seeds": 20,                             # optional, default 20
      "analysis": {"burn_in_fraction": 0.2, "tail_fraction": 0.2,
                   "thresholds": {"true_mass": 0.99, "r_squared": 0.9}}
    }

Multi-seed runs use seeds ``seed, seed + 1, ..., seed + seeds - 1``.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from . import analysis
from .dynamics import SimConfig, sample_true_state
from .graph import Network
from .model import Model, Prior, SignalStructure, StateSpace, validate_model

DEFAULT_SEEDS = 20


class ScenarioParseError(Exception):
    """The file could not be read or is not a JSON object."""


class ScenarioInvalid(Exception):
    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


@dataclass
class Scenario:
    model: Model
    net: Network
    true_state: Optional[int]  # None means draw from the prior per seed
    horizon: int
    seed: int
    seeds: int = DEFAULT_SEEDS
    burn_in_fraction: float = analysis.BURN_IN_FRACTION
    tail_fraction: float = analysis.TAIL_FRACTION
    true_mass_threshold: float = analysis.TRUE_MASS_THRESHOLD
    r_squared_threshold: float = analysis.R_SQUARED_THRESHOLD
    digest: str = ""
    raw: dict = field(default_factory=dict, repr=False)

    def seed_values(self) -> list[int]:
        return [self.seed + k for k in range(self.seeds)]

    def state_for(self, seed: int) -> int:
        if self.true_state is not None:
            return self.true_state
        return sample_true_state(self.model, seed)

    def sim_config(self, seed: Optional[int] = None) -> SimConfig:
        seed = self.seed if seed is None else seed
        return SimConfig(self.model, self.net, self.state_for(seed), self.horizon, seed)


def read_document(path) -> tuple[dict, bytes]:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ScenarioParseError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioParseError(f"{path}: top level must be a JSON object")
    return doc, data


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def parse(doc: dict, digest: str = "") -> Scenario:
    """Build a :class:`Scenario`, collecting every problem before raising."""
    problems: list[str] = []
    for key in ("states", "prior", "agents", "network", "true_state", "horizon", "seed"):
        if key not in doc:
            problems.append(f"{key}: missing")
    if problems:
        raise ScenarioInvalid(problems)

    labels = doc["states"]
    if not isinstance(labels, list):
        raise ScenarioInvalid(["states: must be a list"])
    try:
        prior = np.array(doc["prior"], dtype=float)
    except (TypeError, ValueError):
        raise ScenarioInvalid(["prior: must be a list of numbers"]) from None
    if prior.ndim != 1:
        raise ScenarioInvalid(["prior: must be a flat list of numbers"])

    structures = []
    agents = doc["agents"]
    if not isinstance(agents, list):
        raise ScenarioInvalid(["agents: must be a list"])
    for i, spec in enumerate(agents):
        try:
            sig = list(spec["signals"])
            lik = np.array(spec["likelihood"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            problems.append(f"agent {i}: malformed entry ({exc})")
            continue
        if lik.ndim != 2:
            problems.append(f"agent {i}: likelihood must be a rectangular matrix")
            continue
        structures.append(SignalStructure(i, tuple(sig), lik))
    if problems:
        raise ScenarioInvalid(problems)

    try:
        hash(tuple(labels))
    except TypeError:
        raise ScenarioInvalid(["states: labels must be strings or numbers"]) from None
    model = Model(StateSpace(tuple(labels)), Prior(prior), tuple(structures))
    problems.extend(validate_model(model))

    net = None
    network = doc["network"]
    try:
        if "parents" in network:
            net = Network(tuple(network["parents"]))
        elif "edges" in network:
            net = Network.from_edges(len(agents), [tuple(e) for e in network["edges"]])
        else:
            problems.append("network: needs 'parents' or 'edges'")
    except (TypeError, ValueError, IndexError) as exc:
        problems.append(f"network: {exc}")
    if net is not None and net.n != model.n:
        problems.append(f"network: {net.n} nodes but {model.n} agents")

    true_state = None
    ts = doc["true_state"]
    if ts != "sample":
        if ts in model.states.labels:
            true_state = model.states.index(ts)
        else:
            problems.append(f"true_state: unknown state {ts!r}")

    for key in ("horizon", "seed"):
        if not _is_int(doc[key]) or doc[key] < 0:
            problems.append(f"{key}: must be a nonnegative integer")
    if _is_int(doc.get("seed")) and doc["seed"] >= 2**64:
        problems.append("seed: must fit in 64 bits")
    seeds = doc.get("seeds", DEFAULT_SEEDS)
    if not _is_int(seeds) or seeds < 1:
        problems.append("seeds: must be a positive integer")

    opts = doc.get("analysis", {}) or {}
    thresholds = opts.get("thresholds", {}) or {}
    kwargs = {}
    for name, key, src in (
        ("burn_in_fraction", "burn_in_fraction", opts),
        ("tail_fraction", "tail_fraction", opts),
        ("true_mass_threshold", "true_mass", thresholds),
        ("r_squared_threshold", "r_squared", thresholds),
    ):
        if key in src:
            v = src[key]
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not 0 <= v <= 1:
                problems.append(f"analysis: {key} must be a number in [0, 1]")
            else:
                kwargs[name] = float(v)

    if problems:
        raise ScenarioInvalid(problems)
    return Scenario(model, net, true_state, doc["horizon"], doc["seed"], seeds,
                    digest=digest, raw=doc, **kwargs)


def load(path) -> Scenario:
    doc, data = read_document(path)
    return parse(doc, hashlib.sha256(data).hexdigest())


def shipped(name: str) -> Path:
    """Path of a scenario bundled with the package, e.g. ``shipped("circle3")``."""
    return Path(str(resources.files("lwrnet") / "scenarios" / f"{name}.json"))


def shipped_names() -> list[str]:
    folder = resources.files("lwrnet") / "scenarios"
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".json"))
