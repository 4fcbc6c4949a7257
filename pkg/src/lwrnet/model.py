"""States, common prior, per-agent signal structures and the closed-form
information quantities built on them (KL divergences, learning rates,
observational-equivalence sets).

All logarithms are natural; rates are in nats per time step.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

# KL threshold below which two likelihood rows are treated as identical.
EQUIVALENCE_TOL = 1e-12
PRIOR_SUM_TOL = 1e-12
ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class StateSpace:
    labels: tuple

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def m(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        return self.labels.index(label)


@dataclass(frozen=True)
class Prior:
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)


@dataclass(frozen=True)
class SignalStructure:
    """Likelihood matrix of one agent: row ``k`` is the signal law under state ``k``."""

    agent_id: int
    signal_labels: tuple
    likelihood: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "signal_labels", tuple(self.signal_labels))
        lik = np.array(self.likelihood, dtype=float)
        if lik.ndim == 1:
            lik = lik[None, :]
        lik.setflags(write=False)
        object.__setattr__(self, "likelihood", lik)

    @property
    def k(self) -> int:
        return len(self.signal_labels)


@dataclass(frozen=True)
class Model:
    states: StateSpace
    prior: Prior
    structures: tuple
    _log_lik: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "structures", tuple(self.structures))
        with np.errstate(divide="ignore"):
            logs = []
            for s in self.structures:
                ll = np.log(s.likelihood)
                ll.setflags(write=False)
                logs.append(ll)
        object.__setattr__(self, "_log_lik", tuple(logs))

    @property
    def m(self) -> int:
        return self.states.m

    @property
    def n(self) -> int:
        return len(self.structures)

    def log_likelihood(self, agent: int) -> np.ndarray:
        """``m x k_i`` array of log-likelihoods (``-inf`` where the entry is 0)."""
        return self._log_lik[agent]

    @property
    def log_prior(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.prior.probs)

    @classmethod
    def from_arrays(cls, prior, likelihoods, state_labels=None, signal_labels=None):
        """Build a model from a prior vector and one ``m x k_i`` matrix per agent.

        Labels default to integer indices.
        """
        prior = np.asarray(prior, dtype=float)
        m = prior.shape[0]
        states = StateSpace(tuple(state_labels) if state_labels is not None else tuple(range(m)))
        structures = []
        for i, lik in enumerate(likelihoods):
            lik = np.asarray(lik, dtype=float)
            labels = signal_labels[i] if signal_labels is not None else tuple(range(lik.shape[-1]))
            structures.append(SignalStructure(i, labels, lik))
        return cls(states, Prior(prior), tuple(structures))

    def restrict(self, agents: Sequence[int]) -> "Model":
        """Sub-model keeping only the listed agents (renumbered in the given order)."""
        structures = [
            SignalStructure(new, self.structures[old].signal_labels, self.structures[old].likelihood)
            for new, old in enumerate(agents)
        ]
        return Model(self.states, self.prior, tuple(structures))


def validate_model(model: Model) -> list[str]:
    """Return every invariant violation of ``model``; an empty list means valid."""
    problems = []
    labels = model.states.labels
    m = len(labels)
    if m < 2:
        problems.append(f"states: need at least 2 states, got {m}")
    if len(set(labels)) != m:
        problems.append("states: labels are not distinct")

    prior = model.prior.probs
    if prior.ndim != 1 or prior.shape[0] != m:
        problems.append(f"prior: length {prior.shape} does not match {m} states")
    else:
        if not np.all(np.isfinite(prior)):
            problems.append("prior: non-finite entries")
        for k, p in enumerate(prior):
            if not p > 0:
                problems.append(f"prior: state {labels[k]!r} has non-positive mass {p}")
        total = float(prior.sum())
        if abs(total - 1.0) > PRIOR_SUM_TOL:
            problems.append(f"prior: entries sum to {total!r}, not 1")

    if model.n < 1:
        problems.append("agents: need at least one agent")
    for i, s in enumerate(model.structures):
        where = f"agent {i}"
        if s.k < 1:
            problems.append(f"{where}: empty signal space")
        if len(set(s.signal_labels)) != s.k:
            problems.append(f"{where}: signal labels are not distinct")
        lik = s.likelihood
        if lik.ndim != 2 or lik.shape[0] != m:
            problems.append(f"{where}: likelihood has {lik.shape[0]} rows, expected {m}")
            continue
        if lik.shape[1] != s.k:
            problems.append(f"{where}: likelihood has {lik.shape[1]} columns, expected {s.k}")
            continue
        for r in range(m):
            row = lik[r]
            if np.any(~np.isfinite(row)) or np.any(row < 0) or np.any(row > 1):
                problems.append(f"{where}: likelihood row {labels[r]!r} has entries outside [0, 1]")
            total = float(row.sum())
            if abs(total - 1.0) > ROW_SUM_TOL:
                problems.append(f"{where}: likelihood row {labels[r]!r} sums to {total!r}, not 1")
    return problems


def kl_divergence(p, q) -> float:
    """D(p || q) in nats, with 0 log(0/q) = 0 and +inf when p puts mass where q has none."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    support = p > 0
    if np.any(q[support] == 0):
        return math.inf
    ps, qs = p[support], q[support]
    d = float(np.sum(ps * (np.log(ps) - np.log(qs))))
    # rounding can leave a tiny negative value for p == q
    return max(d, 0.0)


def _check_index(value: int, bound: int, what: str) -> None:
    if not 0 <= value < bound:
        raise IndexError(f"{what} {value} out of range [0, {bound})")


def pairwise_kl(model: Model, agent: int, state: int) -> np.ndarray:
    """KL from agent's row at ``state`` to every row; entry ``state`` is 0."""
    _check_index(agent, model.n, "agent")
    _check_index(state, model.m, "state")
    lik = model.structures[agent].likelihood
    return np.array([kl_divergence(lik[state], lik[other]) for other in range(model.m)])


def equivalence_set(model: Model, agent: int, state: int, tol: float = EQUIVALENCE_TOL) -> set[int]:
    """States other than ``state`` that the agent's private signals cannot tell apart from it."""
    d = pairwise_kl(model, agent, state)
    return {k for k in range(model.m) if k != state and d[k] <= tol}


def single_agent_rate(model: Model, agent: int, true_state: int) -> float:
    """Asymptotic learning rate of an agent that only sees its own signals."""
    d = pairwise_kl(model, agent, true_state)
    return float(np.min(np.delete(d, true_state)))


def group_kl(model: Model, agents: Iterable[int], true_state: int) -> np.ndarray:
    """Per-state KL of the pooled signals of ``agents``, by additivity over agents."""
    agents = sorted(set(agents))
    if not agents:
        raise ValueError("agent set must be nonempty")
    _check_index(true_state, model.m, "state")
    total = np.zeros(model.m)
    for j in agents:
        total = total + pairwise_kl(model, j, true_state)
    return total


def group_rate(model: Model, agents: Iterable[int], true_state: int) -> float:
    """Learning rate of a Bayesian observer with access to every signal of ``agents``.

    Over the reachable set of an agent this is the network upper bound; over the
    members of a directed circle it is the pooled circle rate (before the 1/l factor).
    """
    total = group_kl(model, agents, true_state)
    return float(np.min(np.delete(total, true_state)))


def product_space_kl(rows_p: Sequence[np.ndarray], rows_q: Sequence[np.ndarray]) -> float:
    """KL between two product measures by explicit enumeration of the joint signal space.

    Exponential in the number of factors; meant as a cross-check on small models.
    """
    total = 0.0
    for outcome in itertools.product(*(range(len(r)) for r in rows_p)):
        p = math.prod(float(r[s]) for r, s in zip(rows_p, outcome))
        if p == 0.0:
            continue
        q = math.prod(float(r[s]) for r, s in zip(rows_q, outcome))
        if q == 0.0:
            return math.inf
        total += p * math.log(p / q)
    return max(total, 0.0)


def circle_rate_bracket(model: Model, circle: Sequence[int], true_state: int) -> tuple[float, float, float]:
    """``(min_i R_i, circle rate / l, max_i R_i)`` for the agents on a circle.

    The lower inequality always holds. The upper one holds for two-state models
    and whenever the private rates are attained at a common false state, but can
    fail when agents rely on each other to break identification problems.
    """
    private = [single_agent_rate(model, j, true_state) for j in circle]
    pooled = group_rate(model, circle, true_state) / len(circle)
    return min(private), pooled, max(private)
