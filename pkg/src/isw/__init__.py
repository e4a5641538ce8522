"""Imaginary sliding window: keep a window's letter frequencies without the
window.

A count vector of fixed total w is updated per symbol by incrementing the
observed symbol's count and decrementing one chosen with probability
count/w — a randomized stand-in for evicting the oldest element of a real
w-symbol buffer, at m*log2(w) bits of state instead of w*log2(m).  The
package bundles the structure itself (naive and log-time forms), reference
window models it is validated against, exact chain analysis of its
convergence, and an adaptive arithmetic coder built on top.
"""

from ._kernel import BACKEND as KERNEL_BACKEND
from .analysis import (
    ChainDistribution,
    CompositionIndex,
    build_transition_matrix,
    evolve_distribution,
    expected_count_exact,
    kl_bound,
    kl_bound_asymptotic,
    kl_divergence,
    monte_carlo_frequencies,
    multinomial_pmf,
    occupancy_all_replaced,
    stationary_distribution,
    surjection_count,
)
from .bits import BitSource, SeededBitSource, SelfFeedBitSource, TableBitSource
from .coder import CoderConfig, CorruptStreamError, StreamHeader, decode, encode
from .context import ContextModel
from .core import (
    IswState,
    draw_uniform,
    estimate_probability,
    isw_step,
    new_isw_state,
    select_naive,
)
from .sumtree import SumTree, isw_step_fast
from .window_models import SwrreBoxes, TrueWindow

__version__ = "0.1.0"

__all__ = [
    "BitSource",
    "ChainDistribution",
    "CoderConfig",
    "CompositionIndex",
    "ContextModel",
    "CorruptStreamError",
    "IswState",
    "KERNEL_BACKEND",
    "SeededBitSource",
    "SelfFeedBitSource",
    "StreamHeader",
    "SumTree",
    "SwrreBoxes",
    "TableBitSource",
    "TrueWindow",
    "build_transition_matrix",
    "decode",
    "draw_uniform",
    "encode",
    "estimate_probability",
    "evolve_distribution",
    "expected_count_exact",
    "isw_step",
    "isw_step_fast",
    "kl_bound",
    "kl_bound_asymptotic",
    "kl_divergence",
    "monte_carlo_frequencies",
    "multinomial_pmf",
    "new_isw_state",
    "occupancy_all_replaced",
    "select_naive",
    "stationary_distribution",
    "surjection_count",
    "__version__",
]
