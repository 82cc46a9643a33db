"""Sequential nonlocality sharing in n-star quantum networks."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    UNBOUNDED,
    AlphaBound,
    AlphaSequence,
    BellValue,
    DomainError,
    OutOfRegimeError,
    ProtocolConfig,
    alpha_lower_bound,
    build_alpha_sequence,
    canonical_delta,
    closed_form_branch_factor,
    closed_form_S,
    concurrence_pure,
    max_rounds,
    max_supported_rounds,
    threshold_concurrence,
    tradeoff_frontier,
    untouched_branch_factor,
)
from .noise import NoiseModel  # noqa: E402
from .unsharp import UnsharpConfig, unsharp_closed_form_S, unsharp_gamma_sequence  # noqa: E402
