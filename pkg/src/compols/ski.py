"""Ski rental: the rent-``b``-days policy class, its degradation factor and phi-class."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import InvalidInputError, PolicyInterval


@dataclass(frozen=True)
class SkiProblem:
    p: int
    b: int

    def __post_init__(self):
        _check_pb(self.p, self.b)


def _check_pb(p, b):
    if int(p) != p or p < 2:
        raise InvalidInputError(f"purchase price p must be an integer >= 2, got {p}")
    if int(b) != b or b < 1:
        raise InvalidInputError(f"rent days b must be an integer >= 1, got {b}")


def ski_cost(prob: SkiProblem, x: int) -> tuple[int, int]:
    """Cost of renting ``b`` days then buying, and the offline cost, for ``x`` ski days."""
    if int(x) != x or x < 1:
        raise InvalidInputError(f"ski days must be an integer >= 1, got {x}")
    alg = x if x <= prob.b else prob.b + prob.p
    return alg, min(x, prob.p)


def ski_df(p: int, b: int) -> float:
    _check_pb(p, b)
    return 0.5 + max(p / (2 * b), b / (2 * p))


def ski_cr(p: int, b: int) -> float:
    return 2.0 * ski_df(p, b)


def worst_ratio_bruteforce(p: int, b: int, horizon: int | None = None) -> float:
    """Largest alg/opt over x in 1..horizon.

    The default horizon is max(10p, b+1); the worst day count for ``b >= p``
    is x = b+1, which a plain 10p horizon misses once b >= 10p.
    """
    prob = SkiProblem(p, b)
    best = 0.0
    for x in range(1, (horizon or max(10 * p, b + 1)) + 1):
        alg, opt = ski_cost(prob, x)
        best = max(best, alg / opt)
    return best


def ski_phi_class(p: int, phi: float) -> PolicyInterval:
    """Integer rent-day values whose DF stays within ``phi``.

    The continuous interval [p/(2phi-1), p(2phi-1)] is rounded inward; ``b = p``
    always qualifies so the result is never empty.
    """
    _check_pb(p, 1)
    if not phi >= 1:
        raise InvalidInputError(f"phi must be >= 1, got {phi}")
    s = 2 * phi - 1
    # guard the rounding against representation noise like 10/(2*1.5-1) = 4.999...
    lo = math.ceil(p / s - 1e-9)
    hi = math.floor(p * s + 1e-9)
    while lo > 1 and ski_df(p, lo - 1) <= phi:
        lo -= 1
    while ski_df(p, lo) > phi:
        lo += 1
    while ski_df(p, hi + 1) <= phi:
        hi += 1
    while ski_df(p, hi) > phi:
        hi -= 1
    if not lo <= p <= hi:
        raise AssertionError(f"empty ski phi-class for p={p}, phi={phi}")
    return PolicyInterval(lo, hi, phi, ski_df(p, lo), ski_df(p, hi), baseline=p, integer=True)


def ski_curve(p: int, b_max_factor: float = 4.0) -> list[tuple[float, float]]:
    """(b/p, DF) pairs for b = 1 .. b_max_factor * p."""
    return [(b / p, ski_df(p, b)) for b in range(1, int(b_max_factor * p) + 1)]
