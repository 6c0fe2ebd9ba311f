"""Joint graph Laplacian and low-rank signal learning."""

from ._core import (
    SolverConfig,
    SolverResult,
    __version__,
    edge_count,
    estimate_transition_acf,
    generate_instance,
    gl_lrss,
    project_cgl_star,
    score,
    svt,
    validate_cgl,
    weighted_difference,
)

__all__ = [
    "SolverConfig",
    "SolverResult",
    "__version__",
    "edge_count",
    "estimate_transition_acf",
    "generate_instance",
    "gl_lrss",
    "project_cgl_star",
    "score",
    "svt",
    "validate_cgl",
    "weighted_difference",
]
