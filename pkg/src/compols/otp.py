"""One-way trading with the OKP threshold: OTP-Alg(alpha) and its reward in closed form.

A trader holds one unit of an asset and sells ``x_i`` at each rate ``v_i``.
With linear revenue the pseudo-utility maximizer sells up to the utilization
where the marginal cost Psi_alpha meets the rate, i.e. up to
Phi_alpha(v_i), the inverse threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import TOL, InvalidInputError, RateInstance, RunResult
from .okp import ThresholdCurve


def _check_rate(bounds, v):
    if not (bounds.L * (1 - TOL) <= v <= bounds.U * (1 + TOL)):
        raise InvalidInputError(f"rate {v} outside [{bounds.L}, {bounds.U}]")


def inverse_threshold(curve: ThresholdCurve, v: float) -> float:
    """Smallest utilization at which the threshold reaches ``v``, capped at 1."""
    b = curve.bounds
    _check_rate(b, v)
    v = min(max(v, b.L), b.U)
    return min(1.0, b.T * (1.0 + math.log(v / b.L) / curve.alpha))


def selling_level(curve: ThresholdCurve, v: float) -> float:
    """Utilization the trader sells up to at rate ``v``.

    Equal to the inverse threshold except at v = U, where every utilization
    in [z^u, 1) has zero pseudo-utility and the largest maximizer (1) is used.
    """
    if v >= curve.bounds.U * (1 - TOL):
        _check_rate(curve.bounds, v)
        return 1.0
    return inverse_threshold(curve, v)


def otp_step(curve: ThresholdCurve, z: float, rate: float) -> tuple[float, float]:
    if not -TOL <= z <= 1.0 + TOL:
        raise InvalidInputError(f"utilization must lie in [0, 1], got {z}")
    x = max(0.0, selling_level(curve, rate) - z)
    return x, z + x


def otp_simulate(curve: ThresholdCurve, rates) -> tuple[float, list[float]]:
    """Total revenue and per-round sales over the raw rate sequence."""
    z = 0.0
    revenue = 0.0
    sold = []
    for v in rates:
        x, z = otp_step(curve, z, v)
        revenue += v * x
        sold.append(x)
    return revenue, sold


def otp_run(curve: ThresholdCurve, inst: RateInstance) -> RunResult:
    """Run OTP-Alg(alpha); the offline optimum sells everything at the best rate."""
    if inst.bounds != curve.bounds:
        raise InvalidInputError("instance and curve use different density bounds")
    revenue, sold = otp_simulate(curve, inst.rates)
    opt = max(inst.rates) if inst.rates else 0.0
    return RunResult.maximize(revenue, opt, sold, sold and sum(sold))


def increasing_subsequence(rates) -> list[float]:
    """Strictly increasing prefix-maximum subsequence (later non-records sell nothing)."""
    out: list[float] = []
    for v in rates:
        if not out or v > out[-1]:
            out.append(float(v))
    return out


# --- closed form -------------------------------------------------------------

@dataclass(frozen=True)
class RewardSegments:
    """Reward as a piecewise function ``const + coef / alpha``.

    ``breakpoints`` are the alpha values ln(v_i/L)/ln(gamma) of the increasing
    rates; segment k covers (edges[k], edges[k+1]] with edges = (0, *breakpoints, inf),
    truncated when the top rate equals U.
    """

    edges: tuple[float, ...]
    const: tuple[float, ...]
    coef: tuple[float, ...]
    kinds: tuple[str, ...]

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self.edges[1:-1]

    def locate(self, alpha: float) -> int:
        if not alpha > 0:
            raise InvalidInputError(f"alpha must be positive, got {alpha}")
        k = int(np.searchsorted(self.edges, alpha, side="left")) - 1
        return min(max(k, 0), len(self.const) - 1)

    def __call__(self, alpha: float) -> float:
        k = self.locate(alpha)
        return self.const[k] + self.coef[k] / alpha

    def rows(self) -> list[tuple]:
        return [(kind, self.edges[k], self.edges[k + 1], self.const[k], self.coef[k])
                for k, kind in enumerate(self.kinds)]


def reward_segments(inst: RateInstance) -> RewardSegments:
    b = inst.bounds
    for v in inst.rates:
        _check_rate(b, v)
    if b.gamma <= 1:
        raise InvalidInputError("closed form needs U > L")
    v = [min(max(r, b.L), b.U) for r in increasing_subsequence(inst.rates)]
    if not v:
        return RewardSegments((0.0, math.inf), (0.0,), (0.0,), ("empty",))
    T, L, lg = b.T, b.L, math.log(b.gamma)
    n = len(v)
    logs = [math.log(x / L) for x in v]
    beta = [l / lg for l in logs]
    top_is_U = v[-1] >= b.U * (1 - TOL)

    edges = [0.0]
    const, coef, kinds = [v[0]], [0.0], ["first"]
    b_acc = 0.0
    for i in range(1, n):
        edges.append(beta[i - 1])
        b_acc += T * (v[i] - v[i - 1]) * logs[i - 1]
        const.append(v[i] + (v[0] - v[i]) * T)
        coef.append(-b_acc)
        kinds.append("interior")
    if top_is_U:
        # selling at U goes all the way to 1 for every alpha, so the last piece never ends
        kinds[-1] = "tail_at_U" if n > 1 else "first"
        edges.append(math.inf)
    else:
        edges.append(beta[-1])
        prev = [L] + v[:-1]
        d = T * sum(x * math.log(x / p) for x, p in zip(v, prev))
        const.append(v[0] * T)
        coef.append(d)
        kinds.append("tail")
        edges.append(math.inf)
    return RewardSegments(tuple(edges), tuple(const), tuple(coef), tuple(kinds))


def otp_reward_closed_form(inst: RateInstance, alpha: float) -> float:
    return reward_segments(inst)(alpha)


def otp_lipschitz_bound(inst: RateInstance, interval: tuple[float, float]) -> float:
    """Lipschitz constant of the reward on [alpha_lo, alpha_hi] from the segment slopes."""
    lo, hi = interval
    if not 0 < lo < hi:
        raise InvalidInputError(f"need 0 < alpha_lo < alpha_hi, got {interval}")
    seg = reward_segments(inst)
    bound = 0.0
    for k, c in enumerate(seg.coef):
        a, b = seg.edges[k], seg.edges[k + 1]
        if b >= lo and a <= hi and b > a:
            bound = max(bound, abs(c) / lo ** 2)
    return bound


def segments_table(inst: RateInstance) -> list[tuple]:
    """Rows (kind, alpha_from, alpha_to, const, coef) for export."""
    return reward_segments(inst).rows()


def random_rate_instance(bounds, n: int, rng, increasing: bool = True) -> RateInstance:
    rates = bounds.L * np.exp(rng.uniform(0.0, math.log(bounds.gamma), size=n))
    if increasing:
        rates = np.sort(rates)
    return RateInstance(bounds, tuple(float(r) for r in np.clip(rates, bounds.L, bounds.U)))
