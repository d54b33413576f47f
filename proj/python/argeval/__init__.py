"""Quantitative argumentation for explainable decision support."""

from ._core import (
    EditRejected,
    NotFound,
    Store,
    aggregate,
    combine,
    eval_condition,
    evaluate,
    generate_grid,
    infer,
    instantiate,
    label_match,
    ndcg,
    normalise_condition,
    root_strength,
)

__all__ = [
    "EditRejected",
    "NotFound",
    "Store",
    "aggregate",
    "combine",
    "eval_condition",
    "evaluate",
    "generate_grid",
    "infer",
    "instantiate",
    "label_match",
    "ndcg",
    "normalise_condition",
    "root_strength",
]
