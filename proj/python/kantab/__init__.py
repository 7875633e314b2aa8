"""Kantorovich metric between labeled Markov chains and adaptive abstraction."""

from ._kantab import (
    Chain,
    KantabError,
    MetricResult,
    chain_metric,
    control,
    exact_kantorovich,
    horizon_for_accuracy,
    kant_metric,
    load_chain,
    parse_chain,
    refine,
    word_distribution,
)

__all__ = [
    "Chain",
    "KantabError",
    "MetricResult",
    "chain_metric",
    "control",
    "exact_kantorovich",
    "horizon_for_accuracy",
    "kant_metric",
    "load_chain",
    "parse_chain",
    "refine",
    "word_distribution",
]
