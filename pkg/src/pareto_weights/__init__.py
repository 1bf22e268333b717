"""Normalized Pareto family weights: sampling, closed-form laws, the
insertion recursion, and the statistics used to compare them."""

from .errors import ConfigError, DomainError, RegimeError
from .sampling import AlphaParam, draw_population, simulate_replicates
from .streams import DEFAULT_SEED, make_stream

__version__ = "0.1.0"

__all__ = [
    "AlphaParam", "ConfigError", "DEFAULT_SEED", "DomainError", "RegimeError",
    "draw_population", "make_stream", "simulate_replicates", "__version__",
]
