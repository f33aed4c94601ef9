"""Code-switched smart reply engine (C++ core)."""

from ._core import (  # noqa: F401
    Engine,
    Error,
    mrr,
    normalize,
    random_baseline_mrr,
    segment_clauses,
    symmetric_loss,
    synthesize_pair,
    tokenize,
)

__all__ = [
    "Engine",
    "Error",
    "mrr",
    "normalize",
    "random_baseline_mrr",
    "segment_clauses",
    "symmetric_loss",
    "synthesize_pair",
    "tokenize",
]
