"""Empirical learning rates and limiting beliefs, compared against theory."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import dynamics
from .graph import Network, Shape, classify, reachable_ancestors
from .model import Model, equivalence_set, group_rate, single_agent_rate

BURN_IN_FRACTION = 0.2
TAIL_FRACTION = 0.2
TRUE_MASS_THRESHOLD = 0.99
R_SQUARED_THRESHOLD = 0.9
MIN_WINDOW = 10


class WindowTooShort(ValueError):
    pass


@dataclass(frozen=True)
class RateFit:
    """Exponential decay rate of the largest false-to-true belief ratio."""

    rate: float
    r_squared: float
    stderr: float
    points: int

    @property
    def degenerate(self) -> bool:
        """True when every false state already had exactly zero mass."""
        return math.isinf(self.rate)


def fit_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Ordinary least squares ``y ~ a + b x``; returns ``(b, r_squared, stderr_b)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    k = x.size
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ yc) / sxx
    resid = yc - slope * xc
    ss_res = float(resid @ resid)
    ss_tot = float(yc @ yc)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    stderr = math.sqrt(ss_res / (k - 2) / sxx) if k > 2 else math.inf
    return slope, r2, stderr


def max_false_log_ratio(traj: dynamics.Trajectory, agent: int, true_state: int) -> np.ndarray:
    return np.max(traj.log_ratios(agent, true_state), axis=1)


def empirical_rate(traj: dynamics.Trajectory, agent: int, true_state: int,
                   burn_in_fraction: float = BURN_IN_FRACTION) -> RateFit:
    """Regress ``log max_k mu_t(k)/mu_t(true)`` on ``t`` after the burn-in; return ``-slope``."""
    T = traj.horizon
    start = math.ceil(burn_in_fraction * T)
    t = np.arange(start, T + 1)
    if t.size < MIN_WINDOW:
        raise WindowTooShort(f"window [{start}, {T}] has fewer than {MIN_WINDOW} points")
    lam = max_false_log_ratio(traj, agent, true_state)[start:]
    if np.any(np.isnan(lam)) or np.any(lam == np.inf):
        raise WindowTooShort("true state has zero mass inside the window")
    finite = np.isfinite(lam)
    if not finite.any():
        return RateFit(math.inf, math.nan, 0.0, 0)
    if finite.sum() < MIN_WINDOW:
        raise WindowTooShort(f"only {int(finite.sum())} points with positive false mass")
    slope, r2, se = fit_line(t[finite], lam[finite])
    return RateFit(-slope, r2, se, int(finite.sum()))


def predicted_rate(model: Model, net: Network, shape: Shape, agent: int, true_state: int) -> tuple[float, str]:
    """Theoretical asymptotic rate and which case produced it.

    ``"private"`` for parentless isolated agents and roots, ``"circle"`` for
    circle members and their descendants (pooled circle rate over its length),
    ``"root"`` for tree descendants of a parentless root.
    """
    a = shape.anchor[agent]
    circle = shape.circle_of(agent)
    if circle:
        return group_rate(model, circle, true_state) / len(circle), "circle"
    if a == agent:
        return single_agent_rate(model, agent, true_state), "private"
    return single_agent_rate(model, a, true_state), "root"


def limit_support(model: Model, shape: Shape, agent: int, true_state: int) -> set[int]:
    """States that keep positive mass in the limit, besides the true state.

    These are the states no signal feeding the agent's anchor can ever
    separate from the truth: the agent's own equivalence class if it is a
    root, the common equivalence class of the circle otherwise.
    """
    circle = shape.circle_of(agent)
    sources = circle if circle else (shape.anchor[agent],)
    common = None
    for j in sources:
        eq = equivalence_set(model, j, true_state)
        common = eq if common is None else common & eq
    return common


def predicted_limit(model: Model, shape: Shape, agent: int, true_state: int) -> np.ndarray:
    """Prior restricted to the limit support (plus the true state), renormalized.

    For a descendant of a root with an identification problem the descendant's
    belief keeps fluctuating with the path signals; the vector returned is then
    the root's limit.
    """
    keep = sorted(limit_support(model, shape, agent, true_state) | {true_state})
    out = np.zeros(model.m)
    out[keep] = model.prior.probs[keep]
    return out / out.sum()


@dataclass(frozen=True)
class LimitRow:
    agent: int
    tail_mean: np.ndarray
    predicted: np.ndarray
    max_deviation: float
    ratio_deviation: Optional[float]  # only for parentless agents with a nonempty class


def check_limit(traj: dynamics.Trajectory, model: Model, net: Network, shape: Shape, agent: int,
                true_state: int, tail_fraction: float = TAIL_FRACTION) -> LimitRow:
    T = traj.horizon
    start = T - math.floor(tail_fraction * T)
    if T + 1 - start < MIN_WINDOW:
        raise WindowTooShort(f"tail window has fewer than {MIN_WINDOW} points")
    tail = traj.beliefs[agent, start:].mean(axis=0)
    predicted = predicted_limit(model, shape, agent, true_state)
    ratio_dev = None
    if net.parent[agent] is None:
        eq = equivalence_set(model, agent, true_state)
        if eq:
            ratio_dev = dynamics.prior_ratio_deviation(traj, model, agent, true_state, sorted(eq))
    return LimitRow(agent, tail, predicted, float(np.max(np.abs(tail - predicted))), ratio_dev)


@dataclass
class AgentRates:
    agent: int
    private_rate: float
    bound: float
    predicted: float
    kind: str
    fits: dict = field(default_factory=dict)  # seed -> RateFit, or None if the fit failed
    converged: dict = field(default_factory=dict)  # seed -> bool
    final_true_mass: dict = field(default_factory=dict)

    def _converged_rates(self) -> list[float]:
        return [self.fits[s].rate for s in sorted(self.fits) if self.converged[s]]

    @property
    def all_converged(self) -> bool:
        return bool(self.converged) and all(self.converged.values())

    @property
    def empirical_mean(self) -> Optional[float]:
        r = self._converged_rates()
        return float(np.mean(r)) if r else None

    @property
    def empirical_std(self) -> Optional[float]:
        r = self._converged_rates()
        return float(np.std(r, ddof=1)) if len(r) > 1 else None

    @property
    def r_squared(self) -> Optional[float]:
        r = [self.fits[s].r_squared for s in sorted(self.fits) if self.converged[s]]
        return float(np.mean(r)) if r else None

    def slack(self, n_se: float = 3.0) -> float:
        """``n_se`` standard errors of the mean rate across seeds."""
        r = self._converged_rates()
        if len(r) < 2:
            return math.inf
        return n_se * float(np.std(r, ddof=1)) / math.sqrt(len(r))


@dataclass
class RateReport:
    true_state: int
    seeds: list
    agents: list


def _run_seed(model, net, true_state, horizon, seed):
    return dynamics.simulate(dynamics.SimConfig(model, net, true_state, horizon, seed))


def rate_study(model: Model, net: Network, true_state: int, horizon: int, seeds: Sequence[int],
               burn_in_fraction: float = BURN_IN_FRACTION,
               true_mass_threshold: float = TRUE_MASS_THRESHOLD,
               r_squared_threshold: float = R_SQUARED_THRESHOLD,
               workers: int = 1) -> RateReport:
    """Simulate each seed and collect theoretical and regressed rates per agent.

    An agent converges on a seed iff its final mass on the true state exceeds
    ``true_mass_threshold`` and the fit's r-squared exceeds ``r_squared_threshold``.
    Aggregates use converged seeds only.
    """
    shape = classify(net)
    seeds = sorted(int(s) for s in seeds)
    agents = []
    for i in range(model.n):
        pred, kind = predicted_rate(model, net, shape, i, true_state)
        agents.append(AgentRates(
            agent=i,
            private_rate=single_agent_rate(model, i, true_state),
            bound=group_rate(model, reachable_ancestors(net, i), true_state),
            predicted=pred,
            kind=kind,
        ))

    def one(seed):
        traj = _run_seed(model, net, true_state, horizon, seed)
        rows = []
        for i in range(model.n):
            try:
                fit = empirical_rate(traj, i, true_state, burn_in_fraction)
            except WindowTooShort:
                fit = None
            mass = dynamics.final_true_mass(traj, i, true_state)
            ok = (fit is not None and mass > true_mass_threshold
                  and (fit.degenerate or fit.r_squared > r_squared_threshold))
            rows.append((fit, ok, mass))
        return seed, rows

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]

    for seed, rows in results:
        for ar, (fit, ok, mass) in zip(agents, rows):
            ar.fits[seed] = fit
            ar.converged[seed] = ok
            ar.final_true_mass[seed] = mass
    return RateReport(true_state, seeds, agents)
