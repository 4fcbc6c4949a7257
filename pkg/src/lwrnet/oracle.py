"""Brute-force check of the belief recursion.

Unrolling the update rules backwards in time shows that every belief is a
one-shot Bayesian posterior given a specific set of realized signals (its
provenance). This module builds that set by walking the network and
recomputes the posterior from the prior and raw likelihoods directly, without
touching the recursive updater in :mod:`lwrnet.dynamics`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .graph import Network
from .model import Model

TOLERANCE = 1e-9


def provenance(net: Network, i: int, t: int) -> list[tuple[int, int]]:
    """``(agent, time)`` pairs whose signals determine agent ``i``'s belief at time ``t``.

    Follows parents one step back in time per hop. A parentless node reached at
    time ``tau`` contributes its whole private history ``tau, tau-1, ..., 0``.
    On a circle the walk simply keeps going around.
    """
    entries = []
    node, tau = i, t
    while True:
        entries.append((node, tau))
        if tau == 0:
            break
        p = net.parent[node]
        if p is None:
            entries.extend((node, s) for s in range(tau - 1, -1, -1))
            break
        node, tau = p, tau - 1
    return entries


def posterior_from_provenance(model: Model, prov, signals: np.ndarray) -> np.ndarray:
    """Posterior of the common prior given the listed signals, computed in one shot."""
    with np.errstate(divide="ignore"):
        logp = np.log(np.asarray(model.prior.probs, dtype=float))
        for agent, tau in prov:
            lik = np.asarray(model.structures[agent].likelihood, dtype=float)
            logp = logp + np.log(lik[:, int(signals[agent][tau])])
    z = logsumexp(logp)
    if not np.isfinite(z):
        raise ValueError("provenance signals are impossible under every state")
    return np.exp(logp - z)


@dataclass(frozen=True)
class VerifyReport:
    max_deviation: float
    agent: int
    t: int
    tolerance: float = TOLERANCE

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def verify_trajectory(cfg, traj) -> VerifyReport:
    """Compare every simulated belief with its provenance posterior."""
    worst, at = -1.0, (0, 0)
    beliefs = traj.beliefs
    for i in range(cfg.model.n):
        for t in range(traj.horizon + 1):
            expected = posterior_from_provenance(cfg.model, provenance(cfg.net, i, t), traj.signals)
            dev = float(np.max(np.abs(beliefs[i, t] - expected)))
            if dev > worst:
                worst, at = dev, (i, t)
    return VerifyReport(worst, at[0], at[1])
