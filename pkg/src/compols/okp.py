"""Threshold-based online knapsack: OKP-Alg(alpha), its DF and phi-class.

The threshold curve is flat at ``L`` up to utilization ``T`` and then grows
exponentially at rate ``alpha`` until it saturates at ``U``; a full knapsack
has infinite marginal cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (TOL, DensityBounds, InvalidInputError, KnapsackItem, OkpInstance,
                   PolicyInterval, RunResult, validate_instance)
from .lambertw import lambertw

ADMIT = "admit"
REJECT = "reject"


@dataclass(frozen=True)
class ThresholdCurve:
    bounds: DensityBounds
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0 or not math.isfinite(self.alpha):
            raise InvalidInputError(f"alpha must be a positive real, got {self.alpha}")

    @classmethod
    def from_gamma(cls, gamma: float, alpha: float, L: float = 1.0) -> "ThresholdCurve":
        return cls(DensityBounds.from_gamma(gamma, L), alpha)

    def saturation_point(self) -> float:
        """Utilization z^u where the curve first reaches U (capped at 1)."""
        b = self.bounds
        return min(1.0, b.T * (1.0 + math.log(b.gamma) / self.alpha))


@dataclass(frozen=True)
class OkpState:
    z: float = 0.0
    total_value: float = 0.0


def psi(curve: ThresholdCurve, z: float) -> float:
    """Marginal cost of capacity at utilization ``z``."""
    if not (0.0 <= z <= 1.0 + TOL):
        raise InvalidInputError(f"utilization must lie in [0, 1], got {z}")
    if z >= 1.0:
        return math.inf
    b = curve.bounds
    T = b.T
    if z < T:
        return b.L
    return min(b.U, b.L * math.exp(curve.alpha * (z / T - 1.0)))


def psi_array(curve: ThresholdCurve, z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    b = curve.bounds
    T = b.T
    with np.errstate(over="ignore"):
        out = np.minimum(b.U, b.L * np.exp(curve.alpha * (z / T - 1.0)))
    out = np.where(z < T, b.L, out)
    return np.where(z >= 1.0, np.inf, out)


def psi_integral(curve: ThresholdCurve, z: float) -> float:
    """Exact integral of the threshold over [0, z] for z < 1."""
    b = curve.bounds
    T, a = b.T, curve.alpha
    if z <= T:
        return b.L * z
    zu = curve.saturation_point()
    top = min(z, zu)
    total = b.L * T + b.L * T / a * (math.exp(a * (top / T - 1.0)) - 1.0)
    if z > zu:
        total += b.U * (z - zu)
    return total


def advance_utilization(z: float, w: float) -> float:
    # snap to a full knapsack within tolerance so Psi(1) = +inf applies
    z2 = z + w
    return 1.0 if z2 >= 1.0 - TOL else z2


def okp_step(curve: ThresholdCurve, state: OkpState, item: KnapsackItem) -> tuple[str, OkpState]:
    """Admit ``item`` iff its pseudo-utility is nonnegative and it fits."""
    if state.z > 1.0 + TOL:
        raise InvalidInputError(f"utilization {state.z} exceeds capacity")
    if state.z + item.weight > 1.0 + TOL:
        return REJECT, state
    cost = psi(curve, state.z)
    if math.isinf(cost) or item.value - cost * item.weight < -TOL:
        return REJECT, state
    return ADMIT, OkpState(advance_utilization(state.z, item.weight),
                           state.total_value + item.value)


def okp_run(curve: ThresholdCurve, inst: OkpInstance, *, opt_value: float | None = None) -> RunResult:
    """Run OKP-Alg(alpha) over the arrival order; OPT is the fractional relaxation."""
    from .oracles import fractional_knapsack

    fatal = validate_instance(inst).fatal()
    if fatal:
        raise InvalidInputError("; ".join(fatal[:5]))
    state = OkpState()
    decisions = []
    for item in inst.items:
        decision, state = okp_step(curve, state, item)
        decisions.append(decision)
    if opt_value is None:
        opt_value = fractional_knapsack(inst).value
    return RunResult.maximize(state.total_value, opt_value, decisions, state)


# --- degradation factor ------------------------------------------------------

def okp_df(gamma: float, alpha: float) -> float:
    if not gamma > 1:
        raise InvalidInputError(f"gamma must exceed 1, got {gamma}")
    if not alpha > 0:
        raise InvalidInputError(f"alpha must be positive, got {alpha}")
    if alpha >= 1:
        return alpha * gamma / (alpha + gamma - 1.0)
    return alpha * gamma / (alpha + gamma ** alpha - 1.0)


def okp_cr(gamma: float, alpha: float) -> float:
    """Worst-case ratio of OKP-Alg(alpha): DF times the optimal ratio ln(gamma)+1."""
    return okp_df(gamma, alpha) * (math.log(gamma) + 1.0)


def _bisect(f, lo: float, hi: float, tol: float = 1e-13, max_iter: int = 200) -> float:
    flo = f(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def lambert_alpha_low(gamma: float, phi: float) -> tuple[float, int]:
    """Closed-form lower endpoint of the phi-class, with the branch used.

    The argument -t e^{-t} has two real preimages; one is the trivial -t.
    The nontrivial one is on W_{-1} when t < 1 and on W_0 when t > 1.
    """
    lg = math.log(gamma)
    t = lg * phi / (gamma - phi)
    branch = -1 if t < 1 else 0
    w = lambertw(-t * math.exp(-t), branch)
    return -phi / (gamma - phi) - w / lg, branch


def okp_phi_class(gamma: float, phi: float) -> PolicyInterval:
    """alpha interval whose DF is at most ``phi``.

    The upper end is closed form. The lower end is found by bisection on the
    alpha < 1 branch; the Lambert-W expression is evaluated as a cross-check
    and its discrepancy is stored in ``extra``. When phi >= gamma*T the lower
    branch never reaches phi and the class extends down to (but excludes) 0.
    """
    if not gamma > 1:
        raise InvalidInputError(f"gamma must exceed 1, got {gamma}")
    if not (1.0 <= phi < gamma):
        raise InvalidInputError(f"phi must lie in [1, gamma), got phi={phi}, gamma={gamma}")
    if phi == 1.0:
        return PolicyInterval(1.0, 1.0, 1.0, 1.0, 1.0, baseline=1.0)
    hi = phi * (gamma - 1.0) / (gamma - phi)
    limit_at_zero = gamma / (math.log(gamma) + 1.0)
    extra: dict = {}
    if phi >= limit_at_zero:
        lo = 0.0
        df_lo = limit_at_zero
        extra["open_at_zero"] = True
    else:
        lo = _bisect(lambda a: okp_df(gamma, a) - phi, 1e-12, 1.0)
        df_lo = okp_df(gamma, lo)
        lam, branch = lambert_alpha_low(gamma, phi)
        extra.update(lambert_alpha_low=lam, lambert_branch=branch,
                     lambert_discrepancy=abs(lam - lo))
    return PolicyInterval(lo, hi, phi, df_lo, okp_df(gamma, hi), baseline=1.0, extra=extra)


# --- worst-case instances ----------------------------------------------------

def okp_worst_case(bounds: DensityBounds, alpha: float, weight_cap: float = 1e-4,
                   epsilon: float | None = None) -> OkpInstance:
    """Two-batch adversarial instance for OKP-Alg(alpha).

    Batch one traces the threshold (each density equals the threshold at the
    utilization just before the item) up to z^u for alpha >= 1, or up to a
    full knapsack for alpha < 1. Batch two has total weight 1 at density
    U - epsilon (alpha >= 1) or U (alpha < 1).
    """
    if weight_cap > 1e-2:
        raise InvalidInputError(f"weight_cap must be <= 1e-2, got {weight_cap}")
    L, U = bounds.L, bounds.U
    if epsilon is None:
        # eps * w must clear the 1e-12 admission tolerance or batch two gets admitted
        epsilon = 1e-6 * (U - L)
    if not 0 < epsilon < U - L:
        raise InvalidInputError(f"epsilon must lie in (0, U-L), got {epsilon}")
    curve = ThresholdCurve(bounds, alpha)
    top = curve.saturation_point() if alpha >= 1 else 1.0
    n1 = max(1, math.ceil(top / weight_cap - 1e-9))
    w1 = top / n1
    items = []
    z = 0.0
    for _ in range(n1):
        density = min(U, max(L, psi(curve, z)))
        items.append(KnapsackItem(density * w1, w1))
        z = advance_utilization(z, w1)
    n2 = max(1, math.ceil(1.0 / weight_cap - 1e-9))
    w2 = 1.0 / n2
    d2 = U - epsilon if alpha >= 1 else U
    items.extend(KnapsackItem(d2 * w2, w2) for _ in range(n2))
    return OkpInstance(bounds, tuple(items), weight_cap)


def okp_uniform_instance(bounds: DensityBounds, n_items: int, rng, weight_cap: float = 1e-3,
                         weight_range: tuple[float, float] = (0.2, 1.0)) -> OkpInstance:
    """Random stream with log-uniform densities in [L, U] and weights up to ``weight_cap``."""
    lo, hi = weight_range
    w = rng.uniform(lo * weight_cap, hi * weight_cap, size=n_items)
    d = bounds.L * np.exp(rng.uniform(0.0, math.log(bounds.gamma), size=n_items))
    d = np.clip(d, bounds.L, bounds.U)
    return OkpInstance(bounds, tuple(KnapsackItem(float(di * wi), float(wi)) for di, wi in zip(d, w)),
                       weight_cap)


# --- figure data -------------------------------------------------------------

def threshold_table(gamma: float, alphas, n_points: int = 201) -> list[tuple]:
    """Rows (z, Psi_a1(z), Psi_a2(z), ...) over z in [0, 1)."""
    zs = np.linspace(0.0, 1.0, n_points, endpoint=False)
    cols = [psi_array(ThresholdCurve.from_gamma(gamma, a), zs) for a in alphas]
    return [(float(z), *(float(c[k]) for c in cols)) for k, z in enumerate(zs)]


def df_table(gammas, alphas) -> list[tuple]:
    """Rows (alpha, DF(gamma_1, alpha), ...)."""
    return [(float(a), *(okp_df(g, a) for g in gammas)) for a in alphas]


def df_gamma_table(alphas, gammas) -> list[tuple]:
    """Rows (gamma, DF(gamma, alpha_1), ...)."""
    return [(float(g), *(okp_df(g, a) for a in alphas)) for g in gammas]
