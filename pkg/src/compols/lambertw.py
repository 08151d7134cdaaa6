"""Real-valued Lambert W on both real branches via Halley iteration."""

from __future__ import annotations

import math

from .core import InvalidInputError

_BRANCH_POINT = -1.0 / math.e


def _initial_guess(x: float, branch: int) -> float:
    # series about the branch point, sign picks the branch
    if x < _BRANCH_POINT + 0.25:
        p = math.sqrt(max(0.0, 2.0 * (math.e * x + 1.0)))
        if branch == -1:
            p = -p
        return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
    if branch == -1:
        l1 = math.log(-x)
        l2 = math.log(-l1)
        return l1 - l2 + l2 / l1
    if x < 3.0:
        return math.log1p(x) * 0.8 if x > -0.2 else x
    l1 = math.log(x)
    l2 = math.log(l1)
    return l1 - l2 + l2 / l1


def lambertw(x: float, branch: int = 0, tol: float = 1e-12, max_iter: int = 100) -> float:
    """Solve w * exp(w) = x for real w.

    ``branch=0`` is the principal branch (w >= -1, defined for x >= -1/e);
    ``branch=-1`` is the lower branch (w <= -1, defined for -1/e <= x < 0).
    Iterates until the residual |w e^w - x| is at most ``tol * |x|``, or
    until the iterate stops moving.
    """
    if branch not in (0, -1):
        raise InvalidInputError("branch must be 0 or -1")
    if x < _BRANCH_POINT - 1e-15:
        raise InvalidInputError(f"W(x) is not real for x={x} < -1/e")
    if branch == -1 and x >= 0:
        raise InvalidInputError("lower branch W_{-1} needs -1/e <= x < 0")
    if x == 0.0:
        return 0.0
    if abs(x - _BRANCH_POINT) < 1e-15:
        return -1.0

    w = _initial_guess(x, branch)
    scale = abs(x)
    for _ in range(max_iter):
        ew = math.exp(w)
        f = w * ew - x
        if abs(f) <= tol * scale:
            break
        wp1 = w + 1.0
        if wp1 == 0.0:
            w += 1e-8 if branch == 0 else -1e-8
            continue
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w_new = w - step
        # keep the iterate on its branch
        if branch == 0 and w_new < -1.0:
            w_new = (w - 1.0) / 2.0 if w > -1.0 else -1.0 + 1e-8
        elif branch == -1 and w_new > -1.0:
            w_new = (w - 1.0) / 2.0
        if abs(w_new - w) <= 4e-16 * max(1.0, abs(w)):
            w = w_new
            break
        w = w_new
    return w
