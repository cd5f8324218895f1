"""Complete verifier for feedforward ReLU networks.

Thin python facade over the C++ core: load networks and properties from
JSON, evaluate them, compute optimized linear-relaxation bounds, and run
the complete branch-and-bound verifier.
"""

from ._core import (
    Network,
    PropertySpec,
    __version__,
    exact_verify,
    load_network,
    load_property,
    lp_lower_bound,
    merge_property,
    optimize_root_bounds,
    root_bounds,
    verify,
)

__all__ = [
    "Network",
    "PropertySpec",
    "__version__",
    "exact_verify",
    "load_network",
    "load_property",
    "lp_lower_bound",
    "merge_property",
    "optimize_root_bounds",
    "root_bounds",
    "verify",
]
