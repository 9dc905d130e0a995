"""Grammar-constrained transition-based semantic parsing."""
from ._absynth import (
    AbsynthError,
    Grammar,
    Model,
    Table,
    Tree,
    oracle,
    reconstruct,
    to_text,
    to_tree,
    tokenize,
    validate,
)

__all__ = [
    "AbsynthError",
    "Grammar",
    "Model",
    "Table",
    "Tree",
    "oracle",
    "reconstruct",
    "to_text",
    "to_tree",
    "tokenize",
    "validate",
]
