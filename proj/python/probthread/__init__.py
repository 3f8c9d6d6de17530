"""Exact probabilistic thread algebra: threads, services, instruction sequences and interleaving."""

from fractions import Fraction

from ._core import (
    Error,
    MalformedProbability,
    MissingReply,
    NonRegularProduct,
    OutOfRange,
    ParseError,
    Thread,
    UnguardedRecursion,
    WeightSumNotOne,
    abstract_tau,
    extract,
    interleave,
    sample,
    use,
)
from ._core import outcome_distribution as _outcome_distribution


def outcome_distribution(thread, depth, env="", traces=False):
    """Outcome probabilities as Fractions; `env` uses the `f.m = p` line format."""
    raw = _outcome_distribution(thread, depth, env, traces)
    out = {k: Fraction(raw[k]) for k in ("terminate", "deadlock", "surviving")}
    if traces:
        out["traces"] = {k: Fraction(v) for k, v in raw["traces"].items()}
    return out


__all__ = [
    "Error",
    "MalformedProbability",
    "MissingReply",
    "NonRegularProduct",
    "OutOfRange",
    "ParseError",
    "Thread",
    "UnguardedRecursion",
    "WeightSumNotOne",
    "abstract_tau",
    "extract",
    "interleave",
    "outcome_distribution",
    "sample",
    "use",
]
