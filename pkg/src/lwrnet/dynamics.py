"""Signal sampling and the two belief-update laws.

Parentless agents run Bayes' rule on their own belief. An agent with a parent
applies the same rule to its parent's previous belief instead of its own
(the memoryless, "learning without recall" update).

Beliefs are carried as normalized log-masses so that masses on rejected states
keep decaying long after they would underflow as plain floats.

Random numbers
--------------
The signal of agent ``i`` at time ``t`` is the inverse-CDF image of the
``t``-th double drawn from ``numpy.random.Generator(Philox(key=(seed, i)))``.
Each agent therefore owns a counter-based stream whose values depend only on
``(seed, i, t)``; agent order, horizon and threading do not change them.
The key ``(seed, 2**64 - 1)`` is reserved for drawing the true state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .graph import Network
from .model import Model

THETA_STREAM = 2**64 - 1


class ZeroNormalizerError(ValueError):
    """Observed signal has zero probability under every state still holding mass."""

    def __init__(self, agent: int, t: Optional[int] = None):
        self.agent = agent
        self.t = t
        where = f"agent {agent}" if t is None else f"agent {agent} at t={t}"
        super().__init__(f"{where}: signal is impossible under the current belief")


@dataclass(frozen=True)
class LogBelief:
    """Log-ratios ``log(mu[k] / mu[ref_state])`` for every ``k != ref_state``."""

    ref_state: int
    lambdas: np.ndarray


def stream(seed: int, key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed, key], dtype=np.uint64)))


def uniforms(seed: int, agent: int, count: int) -> np.ndarray:
    """First ``count`` uniforms of an agent's stream; entry ``t`` feeds time ``t``."""
    return stream(seed, agent).random(count)


def categorical(probs: np.ndarray, u):
    """Inverse-CDF draw; never returns an index with zero probability."""
    cdf = np.cumsum(probs)
    last = int(np.flatnonzero(probs > 0)[-1])
    return np.minimum(np.searchsorted(cdf, u, side="right"), last)


def sample_signal(model: Model, agent: int, true_state: int, seed: int, t: int) -> int:
    u = uniforms(seed, agent, t + 1)[t]
    return int(categorical(model.structures[agent].likelihood[true_state], u))


def sample_signals(model: Model, true_state: int, seed: int, horizon: int) -> np.ndarray:
    """``n x (horizon + 1)`` array of signal indices."""
    out = np.empty((model.n, horizon + 1), dtype=np.int64)
    for i in range(model.n):
        row = model.structures[i].likelihood[true_state]
        out[i] = categorical(row, uniforms(seed, i, horizon + 1))
    return out


def sample_true_state(model: Model, seed: int) -> int:
    u = stream(seed, THETA_STREAM).random()
    return int(categorical(model.prior.probs, u))


def log_normalize(v: np.ndarray) -> np.ndarray:
    """Shift log-masses so that they exponentiate to a probability vector.

    Works along the last axis; raises ``FloatingPointError`` if a row has no
    finite entry.
    """
    top = np.max(v, axis=-1, keepdims=True)
    if not np.all(np.isfinite(top)):
        raise FloatingPointError("all masses are zero")
    shifted = v - top
    return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))


def _log_update(model: Model, agent: int, log_prev: np.ndarray, signal: int) -> np.ndarray:
    try:
        return log_normalize(log_prev + model.log_likelihood(agent)[:, signal])
    except FloatingPointError:
        raise ZeroNormalizerError(agent) from None


def _log(b) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.asarray(b, dtype=float))


def bayes_init(model: Model, agent: int, signal: int) -> np.ndarray:
    """Posterior after the first private signal, starting from the common prior."""
    return np.exp(_log_update(model, agent, model.log_prior, signal))


def bayes_update(model: Model, agent: int, prev, signal: int) -> np.ndarray:
    return np.exp(_log_update(model, agent, _log(prev), signal))


def lwr_update(model: Model, agent: int, neighbor_prev, signal: int) -> np.ndarray:
    """Bayes' rule on the private signal, with the neighbor's belief in place of one's own."""
    return np.exp(_log_update(model, agent, _log(neighbor_prev), signal))


def _sources(net: Network) -> np.ndarray:
    # whose previous belief each agent updates from
    return np.array([i if p is None else p for i, p in enumerate(net.parent)], dtype=np.int64)


def step_log(model: Model, net: Network, prev_log: np.ndarray, signals: Sequence[int], t: Optional[int] = None) -> np.ndarray:
    """One synchronous round on ``n x m`` log-beliefs. Reads only ``prev_log``."""
    src = _sources(net)
    ll = np.stack([model.log_likelihood(i)[:, signals[i]] for i in range(model.n)])
    return _normalize_rows(prev_log[src] + ll, t)


def step(model: Model, net: Network, prev_beliefs, signals: Sequence[int]) -> np.ndarray:
    """One synchronous round on ``n x m`` beliefs."""
    return np.exp(step_log(model, net, _log(prev_beliefs), signals))


def _normalize_rows(raw: np.ndarray, t: Optional[int]) -> np.ndarray:
    top = np.max(raw, axis=-1)
    bad = np.flatnonzero(~np.isfinite(top))
    if bad.size:
        raise ZeroNormalizerError(int(bad[0]), t)
    return log_normalize(raw)


@dataclass(frozen=True)
class SimConfig:
    model: Model
    net: Network
    true_state: int
    horizon: int
    seed: int

    def __post_init__(self):
        if self.model.n != self.net.n:
            raise ValueError(f"model has {self.model.n} agents but network has {self.net.n} nodes")
        if not 0 <= self.true_state < self.model.m:
            raise ValueError(f"true state {self.true_state} out of range")
        if self.horizon < 0:
            raise ValueError("horizon must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class Trajectory:
    """Beliefs of every agent at every time, stored as log-masses.

    ``log_beliefs[i, t]`` is the log of agent ``i``'s belief at time ``t``;
    ``signals[i, t]`` the signal it observed then.
    """

    log_beliefs: np.ndarray
    signals: np.ndarray

    @property
    def beliefs(self) -> np.ndarray:
        return np.exp(self.log_beliefs)

    @property
    def horizon(self) -> int:
        return self.signals.shape[1] - 1

    def belief(self, agent: int, t: int) -> np.ndarray:
        return np.exp(self.log_beliefs[agent, t])

    def log_ratios(self, agent: int, ref_state: int) -> np.ndarray:
        """``(T + 1) x (m - 1)`` log-ratios against ``ref_state`` over time."""
        lb = self.log_beliefs[agent]
        with np.errstate(invalid="ignore"):
            return np.delete(lb, ref_state, axis=1) - lb[:, ref_state:ref_state + 1]


def simulate(cfg: SimConfig) -> Trajectory:
    model, net = cfg.model, cfg.net
    T = cfg.horizon
    signals = sample_signals(model, cfg.true_state, cfg.seed, T)
    n, m = model.n, model.m

    # ll[i, t] = log-likelihood column of agent i's signal at time t
    ll = np.empty((n, T + 1, m))
    for i in range(n):
        ll[i] = model.log_likelihood(i)[:, signals[i]].T

    src = _sources(net)
    out = np.empty((n, T + 1, m))
    out[:, 0] = _normalize_rows(model.log_prior[None, :] + ll[:, 0], 0)
    for t in range(1, T + 1):
        out[:, t] = _normalize_rows(out[src, t - 1] + ll[:, t], t)
    out.setflags(write=False)
    signals.setflags(write=False)
    return Trajectory(out, signals)


def to_log_belief(b, ref_state: int) -> LogBelief:
    b = np.asarray(b, dtype=float)
    if not b[ref_state] > 0:
        raise ValueError(f"reference state {ref_state} has zero mass")
    lb = _log(b)
    return LogBelief(ref_state, np.delete(lb, ref_state) - lb[ref_state])


def belief_from_log_ratios(lb: LogBelief) -> np.ndarray:
    full = np.insert(np.asarray(lb.lambdas, dtype=float), lb.ref_state, 0.0)
    return np.exp(log_normalize(full))


def log_ratio_increments(model: Model, agent: int, signals: np.ndarray, true_state: int) -> np.ndarray:
    """Per-signal log-likelihood ratios ``log(l(s|k) / l(s|true))``, shape ``len(signals) x (m - 1)``."""
    ll = model.log_likelihood(agent)[:, np.asarray(signals)].T
    with np.errstate(invalid="ignore"):
        return np.delete(ll, true_state, axis=1) - ll[:, true_state:true_state + 1]


def prior_ratio_deviation(traj: Trajectory, model: Model, agent: int, true_state: int, others: Sequence[int]) -> float:
    """Largest ``|mu_t(k)/mu_t(true) - nu(k)/nu(true)|`` over ``k`` in ``others`` and all ``t``."""
    if not others:
        return 0.0
    lb = traj.log_beliefs[agent]
    nu = model.prior.probs
    idx = list(others)
    ratios = np.exp(lb[:, idx] - lb[:, [true_state]])
    return float(np.max(np.abs(ratios - nu[idx] / nu[true_state])))


def final_true_mass(traj: Trajectory, agent: int, true_state: int) -> float:
    return float(math.exp(traj.log_beliefs[agent, -1, true_state]))
