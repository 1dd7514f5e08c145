"""Quality estimation and ranking from noisy pairwise comparisons."""

from ._pairrank import *  # noqa: F401,F403
from ._pairrank import (
    ConfigError,
    DataError,
    DomainError,
    Error,
    GenerationError,
    NumericalError,
    PreferenceModel,
)

__all__ = [
    "ConfigError",
    "DataError",
    "DomainError",
    "Error",
    "GenerationError",
    "NumericalError",
    "PreferenceModel",
    "aligned_mse",
    "build_graph",
    "epsilon_error",
    "estimate",
    "inverse_preference",
    "kendall_tau",
    "preference_prob",
    "psi",
    "rank_from_qualities",
    "rank_real",
    "sweep",
    "walk_analysis",
]
