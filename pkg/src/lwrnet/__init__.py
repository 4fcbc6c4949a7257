"""Bayesian and memoryless belief dynamics on networks where each agent
observes at most one neighbor."""
from .graph import Network, Shape, circle_order_from, classify, reachable_ancestors
from .model import (
    Model,
    equivalence_set,
    group_rate,
    kl_divergence,
    single_agent_rate,
    validate_model,
)
from .dynamics import SimConfig, Trajectory, simulate
from .oracle import provenance, verify_trajectory
from .analysis import empirical_rate, predicted_rate, rate_study

__all__ = [
    "Model", "Network", "Shape", "SimConfig", "Trajectory",
    "circle_order_from", "classify", "empirical_rate", "equivalence_set",
    "group_rate", "kl_divergence", "predicted_rate", "provenance", "rate_study",
    "reachable_ancestors", "simulate", "single_agent_rate", "validate_model",
    "verify_trajectory",
]
__version__ = "0.1.0"
