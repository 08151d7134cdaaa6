"""Picking a parameter from a phi-degraded class by online learning.

Each round is one problem instance. An adapter maps (instance, parameter)
to a reward in [0, 1] (online value over offline optimum, or the inverse for
cost problems), and a learner chooses the next grid point: Hedge with full
feedback, EXP3 with bandit feedback, or "play the best parameter of the
previous instance".
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import DensityBounds, InvalidInputError, PolicyInterval, RateInstance, seeded_rng

REWARD_TOL = 1e-9


@dataclass(frozen=True)
class ParameterGrid:
    interval: PolicyInterval
    points: tuple[float, ...]
    phi: float

    def __post_init__(self):
        for p in self.points:
            if p not in self.interval:
                raise InvalidInputError(f"grid point {p} outside [{self.interval.lo}, {self.interval.hi}]")

    @property
    def K(self) -> int:
        return len(self.points)

    @property
    def baseline_index(self) -> int:
        return int(np.argmin([abs(p - self.interval.baseline) for p in self.points]))

    @classmethod
    def from_interval(cls, interval: PolicyInterval, K: int = 21, spacing: str = "log",
                      floor: float = 1e-3) -> "ParameterGrid":
        """K points over the interval with the baseline parameter always included.

        An interval that is open at zero is cut at ``floor`` times its upper end.
        """
        if K < 1:
            raise InvalidInputError("grid needs at least one point")
        lo, hi = interval.lo, interval.hi
        if lo <= 0:
            lo = hi * floor
        if interval.integer:
            pts = np.unique(np.round(np.geomspace(max(lo, 1), hi, K) if spacing == "log"
                                     else np.linspace(lo, hi, K)))
            pts = [float(p) for p in pts if p in interval]
        elif hi <= lo:
            pts = [lo]
        elif spacing == "log":
            pts = list(np.geomspace(lo, hi, K))
        elif spacing == "uniform":
            pts = list(np.linspace(lo, hi, K))
        else:
            raise InvalidInputError(f"unknown spacing {spacing!r}")
        pts = [min(max(float(p), interval.lo), interval.hi) for p in pts]
        base = interval.baseline
        if base in interval and not any(abs(p - base) <= 1e-12 for p in pts):
            k = int(np.argmin([abs(p - base) for p in pts]))
            if 0 < k < len(pts) - 1:
                pts[k] = base
            else:
                pts.append(base)
        return cls(interval, tuple(sorted(set(pts))), interval.phi)


@dataclass
class LearningRun:
    """Per-round record of a learning run.

    ``rewards`` holds every arm's reward (used for regret even when the learner
    only saw its own arm); ``regret[t]`` compares against the best fixed arm over
    rounds 0..t.
    """

    grid: ParameterGrid
    rewards: np.ndarray
    chosen: np.ndarray
    weights: np.ndarray
    regret: np.ndarray
    learner: str = ""

    @property
    def chosen_params(self) -> list[float]:
        return [self.grid.points[k] for k in self.chosen]

    @property
    def played_rewards(self) -> np.ndarray:
        return self.rewards[np.arange(len(self.chosen)), self.chosen]

    def average_reward(self) -> float:
        return float(self.played_rewards.mean())

    def best_fixed(self) -> tuple[int, float]:
        """Best arm in hindsight, ties toward the baseline."""
        means = self.rewards.mean(axis=0)
        return _argmax_toward(means, self.grid), float(means.max())

    def table(self) -> list[tuple]:
        cum = np.cumsum(self.rewards, axis=0)
        rows = []
        for t in range(len(self.chosen)):
            rows.append((t, self.grid.points[self.chosen[t]], float(self.played_rewards[t]),
                         float(cum[t].max() / (t + 1)), float(self.regret[t])))
        return rows


def regret_trace(rewards: np.ndarray, chosen) -> np.ndarray:
    rewards = np.asarray(rewards, dtype=float)
    chosen = np.asarray(chosen, dtype=int)
    best = np.cumsum(rewards, axis=0).max(axis=1)
    got = np.cumsum(rewards[np.arange(len(chosen)), chosen])
    return best - got


def _argmax_toward(values, grid: ParameterGrid) -> int:
    values = np.asarray(values, dtype=float)
    top = values.max()
    ties = np.flatnonzero(values >= top - 1e-12)
    base = grid.interval.baseline
    return int(min(ties, key=lambda k: (abs(grid.points[k] - base), k)))


def _check_rewards(r):
    r = np.asarray(r, dtype=float)
    if np.any(r < -REWARD_TOL) or np.any(r > 1 + REWARD_TOL) or not np.all(np.isfinite(r)):
        raise InvalidInputError("rewards must be normalized into [0, 1]")
    return np.clip(r, 0.0, 1.0)


# --- Hedge -------------------------------------------------------------------

def hedge_distribution(cum_rewards: np.ndarray, eta: float) -> np.ndarray:
    if not eta > 0:
        raise InvalidInputError(f"eta must be positive, got {eta}")
    x = eta * np.asarray(cum_rewards, dtype=float)
    x -= x.max()
    p = np.exp(x)
    return p / p.sum()


def hedge_select(past_rewards, eta: float, rng, K: int | None = None) -> tuple[int, np.ndarray]:
    """Sample an arm with probability proportional to exp(eta * cumulative reward)."""
    past = np.asarray(past_rewards, dtype=float)
    if past.size == 0:
        if K is None:
            raise InvalidInputError("K is needed before any reward is observed")
        cum = np.zeros(K)
    else:
        past = _check_rewards(past.reshape(-1, past.shape[-1]))
        cum = past.sum(axis=0)
    p = hedge_distribution(cum, eta)
    return int(rng.choice(len(p), p=p)), p


def default_eta(K: int, M: int) -> float:
    return math.sqrt(2.0 * math.log(max(K, 2)) / max(M, 1))


# --- EXP3 --------------------------------------------------------------------

@dataclass
class Exp3State:
    log_w: np.ndarray
    gamma: float

    @classmethod
    def start(cls, K: int, gamma: float) -> "Exp3State":
        if not 0 < gamma <= 1:
            raise InvalidInputError(f"exploration rate must lie in (0, 1], got {gamma}")
        return cls(np.zeros(K), gamma)

    def distribution(self) -> np.ndarray:
        w = np.exp(self.log_w - self.log_w.max())
        K = len(w)
        return (1.0 - self.gamma) * w / w.sum() + self.gamma / K


def default_exp3_gamma(K: int, M: int) -> float:
    if K < 2:
        return 1.0
    return min(1.0, math.sqrt(K * math.log(K) / ((math.e - 1.0) * max(M, 1))))


def exp3_select(state: Exp3State, rng) -> tuple[int, np.ndarray]:
    p = state.distribution()
    return int(rng.choice(len(p), p=p)), p


def exp3_update(state: Exp3State, k: int, reward: float, p_k: float) -> Exp3State:
    """Importance-weighted exponential update of the pulled arm only."""
    reward = float(_check_rewards([reward])[0])
    K = len(state.log_w)
    log_w = state.log_w.copy()
    log_w[k] += state.gamma * (reward / p_k) / K
    return Exp3State(log_w, state.gamma)


# --- previous-instance best --------------------------------------------------

def previous_best_select(history, grid: ParameterGrid) -> int:
    """Grid index that was best on the previous instance (baseline on round 0).

    ``history`` is the sequence of past per-arm reward vectors.
    """
    history = list(history)
    if not history:
        return grid.baseline_index
    return _argmax_toward(_check_rewards(history[-1]), grid)


# --- driver ------------------------------------------------------------------

def evaluate_grid(adapter, instance, points, jobs: int = 1) -> np.ndarray:
    """Rewards of every grid point on one instance, in grid order."""
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            vals = list(pool.map(adapter.reward, [instance] * len(points), points))
    else:
        vals = [adapter.reward(instance, p) for p in points]
    return _check_rewards(vals)


def run_learning(adapter, instances, grid: ParameterGrid, learner: str = "hedge", seed: int = 0,
                 eta: float | None = None, gamma: float | None = None, jobs: int = 1,
                 reward_matrix: np.ndarray | None = None) -> LearningRun:
    """Play ``learner`` over the instance stream.

    ``reward_matrix`` (M x K) can be passed to reuse evaluations across learners.
    """
    if learner not in ("hedge", "exp3", "prevbest"):
        raise InvalidInputError(f"unknown learner {learner!r}")
    instances = list(instances)
    M, K = len(instances), grid.K
    if reward_matrix is None:
        reward_matrix = np.vstack([evaluate_grid(adapter, inst, grid.points, jobs)
                                   for inst in instances]) if M else np.zeros((0, K))
    R = _check_rewards(reward_matrix)
    rng = seeded_rng(seed)
    chosen = np.zeros(M, dtype=int)
    weights = np.zeros((M, K))
    if learner == "hedge":
        eta = default_eta(K, M) if eta is None else eta
        cum = np.zeros(K)
        for t in range(M):
            p = hedge_distribution(cum, eta)
            chosen[t] = int(rng.choice(K, p=p))
            weights[t] = p
            cum += R[t]
    elif learner == "exp3":
        state = Exp3State.start(K, default_exp3_gamma(K, M) if gamma is None else gamma)
        for t in range(M):
            k, p = exp3_select(state, rng)
            chosen[t], weights[t] = k, p
            state = exp3_update(state, k, R[t, k], p[k])
    else:
        for t in range(M):
            k = previous_best_select(R[:t], grid)
            chosen[t] = k
            weights[t, k] = 1.0
    return LearningRun(grid, R, chosen, weights, regret_trace(R, chosen), learner)


@dataclass
class BaselineComparison:
    """Per-instance empirical ratios of the baseline, the best fixed point and a learner."""

    baseline: np.ndarray
    best_fixed: np.ndarray
    learner: np.ndarray
    best_param: float
    wins: int
    ties: int
    losses: int
    guarantee: float

    @property
    def improvement(self) -> float:
        """Relative drop of the mean ratio, best fixed point vs baseline."""
        return 1.0 - self.best_fixed.mean() / self.baseline.mean()


def compare_with_baseline(run: LearningRun, guarantee: float, tie_tol: float = 1e-9) -> BaselineComparison:
    """Win/tie/loss split of a learner against the baseline parameter.

    Ratios are 1/reward (offline over online). ``guarantee`` is the worst-case
    ratio certified for every grid point (phi times the optimal ratio).
    """
    with np.errstate(divide="ignore"):
        ratios = 1.0 / run.rewards
    b = run.grid.baseline_index
    k_best, _ = run.best_fixed()
    played = ratios[np.arange(len(run.chosen)), run.chosen]
    base = ratios[:, b]
    diff = played - base
    wins = int(np.sum(diff < -tie_tol))
    losses = int(np.sum(diff > tie_tol))
    return BaselineComparison(base, ratios[:, k_best], played, run.grid.points[k_best],
                              wins, len(diff) - wins - losses, losses, guarantee)


# --- problem adapters --------------------------------------------------------

@dataclass(frozen=True)
class Adapter:
    """Glue between a problem module and the learners.

    ``interval(phi)`` gives the policy class, ``reward(instance, param)`` the
    normalized reward and ``stream(M, seed, regime)`` a list of instances.
    """

    name: str
    interval: Callable
    reward: Callable
    stream: Callable
    guarantee: Callable = field(default=lambda phi: math.inf)


GAMMA = 20.0
REGIME_BLOCK = 5
STREAM_REGIMES = ("stationary", "alternating", "two_regime")


def regime_of(t: int, regime: str) -> int:
    """0/1 label of round ``t``: always 0, alternating, or switching every REGIME_BLOCK rounds."""
    if regime not in STREAM_REGIMES:
        raise InvalidInputError(f"unknown stream regime {regime!r}; choose from {STREAM_REGIMES}")
    if regime == "stationary":
        return 0
    if regime == "alternating":
        return t % 2
    return (t // REGIME_BLOCK) % 2


def _okp_interval(phi):
    from .okp import okp_phi_class
    return okp_phi_class(GAMMA, phi)


def _okp_reward(inst, alpha):
    from .okp import ThresholdCurve, okp_run
    r = okp_run(ThresholdCurve(inst.bounds, alpha), inst)
    return min(1.0, r.alg_value / r.opt_value) if r.opt_value > 0 else 1.0


def _okp_stream(M, seed, regime="stationary", n_items=150):
    from .okp import okp_uniform_instance
    rng = seeded_rng(seed)
    b = DensityBounds.from_gamma(GAMMA)
    out = []
    for t in range(M):
        # regime 1 streams only the lower half of the density range
        hi = b if regime_of(t, regime) == 0 else DensityBounds(b.L, math.sqrt(b.L * b.U))
        inst = okp_uniform_instance(hi, n_items, rng, weight_cap=0.02)
        out.append(type(inst)(b, inst.items, inst.weight_cap))
    return out


def _otp_reward(inst, alpha):
    from .otp import otp_reward_closed_form
    return min(1.0, otp_reward_closed_form(inst, alpha) / max(inst.rates))


def _otp_stream(M, seed, regime="stationary", n_rates=12):
    """Rate paths as a geometric random walk clipped into [L, U]."""
    rng = seeded_rng(seed)
    b = DensityBounds.from_gamma(GAMMA)
    out = []
    for t in range(M):
        drift = 0.15 if regime_of(t, regime) == 0 else -0.05
        steps = rng.normal(drift, 0.35, size=n_rates)
        logs = np.clip(np.cumsum(steps) + rng.uniform(0, 0.5), 0.0, math.log(GAMMA))
        out.append(RateInstance(b, tuple(float(b.L * math.exp(x)) for x in logs)))
    return out


OSC_M = 16


def _osc_interval(phi):
    from .osc import osc_phi_class
    return osc_phi_class(OSC_M, phi)


def _osc_reward(inst, theta):
    from .osc import osc_run
    system, arrivals, seed = inst
    r = osc_run(system, arrivals, theta, seed, opt="exact")
    return min(1.0, r.opt_value / r.alg_value) if r.alg_value > 0 else 1.0


def _osc_stream(M, seed, regime="stationary"):
    from .osc import osc_scenario_generator
    out = []
    for t in range(M):
        kind = "high_overlap" if regime_of(t, regime) == 0 else "low_overlap"
        system, arrivals = osc_scenario_generator(kind, 24, OSC_M, 12, seed * 100003 + t)
        out.append((system, arrivals, seed * 100003 + t))
    return out


def _eac_reward(inst, alpha):
    from .eac import eac_run_instance
    from .okp import ThresholdCurve
    opt = _eac_opt(inst)
    r = eac_run_instance(ThresholdCurve(inst.bounds, alpha), inst, opt_value=opt)
    return min(1.0, r.alg_value / opt) if opt > 0 else 1.0


_EAC_OPT_CACHE: dict = {}


def _eac_opt(inst):
    key = id(inst)
    hit = _EAC_OPT_CACHE.get(key)
    if hit is None or hit[0] is not inst:
        from .oracles import eac_fractional_opt
        if len(_EAC_OPT_CACHE) > 4096:
            _EAC_OPT_CACHE.clear()
        hit = (inst, eac_fractional_opt(inst.requests, inst.horizon).value)
        _EAC_OPT_CACHE[key] = hit
    return hit[1]


def _eac_stream(M, seed, regime="stationary", slots=8):
    from .eac import synthetic_day
    rng = seeded_rng(seed)
    b = DensityBounds.from_gamma(GAMMA)
    out = []
    for t in range(M):
        if regime == "stationary":
            kind = "uniform"
        else:
            kind = "flat" if regime_of(t, regime) == 0 else "late_peak"
        out.append(synthetic_day(b, rng, slots=slots, regime=kind))
    return out


SKI_P = 10


def _ski_interval(phi):
    from .ski import ski_phi_class
    return ski_phi_class(SKI_P, phi)


def _ski_reward(days, b):
    from .ski import SkiProblem, ski_cost
    alg, opt = ski_cost(SkiProblem(SKI_P, int(round(b))), int(days))
    return opt / alg


def _ski_stream(M, seed, regime="stationary"):
    rng = seeded_rng(seed)
    if regime == "stationary":
        return [int(x) for x in rng.integers(1, 4 * SKI_P, size=M)]
    return [int(rng.integers(1, SKI_P // 2 + 1)) if regime_of(t, regime) == 0
            else int(rng.integers(3 * SKI_P, 5 * SKI_P)) for t in range(M)]


def _max_guarantee(phi):
    return phi * (math.log(GAMMA) + 1.0)


ADAPTERS = {
    "okp": Adapter("okp", _okp_interval, _okp_reward, _okp_stream, _max_guarantee),
    "otp": Adapter("otp", _okp_interval, _otp_reward, _otp_stream, _max_guarantee),
    "osc": Adapter("osc", _osc_interval, _osc_reward, _osc_stream),
    "eac": Adapter("eac", _okp_interval, _eac_reward, _eac_stream, _max_guarantee),
    "ski": Adapter("ski", _ski_interval, _ski_reward, _ski_stream, lambda phi: 2.0 * phi),
}


def get_adapter(name: str) -> Adapter:
    try:
        return ADAPTERS[name]
    except KeyError:
        raise InvalidInputError(f"unknown problem {name!r}; choose from {sorted(ADAPTERS)}") from None
