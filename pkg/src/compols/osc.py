"""Online set cover with potential-based subset selection, OSC-Alg(theta).

Each subset carries a weight, initially 1/(theta m). When an uncovered
element arrives, the weights of the subsets containing it are multiplied by
the smallest power of theta that pushes the element's weight above 1, and
then at most ceil(2 theta log2 n) of those subsets are bought so that the
potential sum_{uncovered j} n^{2 w_j} does not increase.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import InfeasibleError, InvalidInputError, PolicyInterval, RunResult, seeded_rng

log = logging.getLogger(__name__)

RANDOM_RETRIES = 32
POTENTIAL_RTOL = 1e-9


@dataclass(frozen=True)
class SetSystem:
    n: int
    membership: tuple[frozenset, ...]
    element_sets: tuple[tuple[int, ...], ...]

    @property
    def m(self) -> int:
        return len(self.membership)

    @classmethod
    def from_sets(cls, n: int, sets) -> "SetSystem":
        if n < 1:
            raise InvalidInputError(f"ground set must be nonempty, got n={n}")
        membership = tuple(frozenset(int(e) for e in s) for s in sets)
        element_sets: list[list[int]] = [[] for _ in range(n)]
        for k, s in enumerate(membership):
            for e in s:
                if not 0 <= e < n:
                    raise InvalidInputError(f"subset {k} contains element {e} outside 0..{n - 1}")
                element_sets[e].append(k)
        return cls(n, membership, tuple(tuple(es) for es in element_sets))

    def incidence(self) -> np.ndarray:
        a = np.zeros((self.n, self.m))
        for k, s in enumerate(self.membership):
            a[list(s), k] = 1.0
        return a


@dataclass(frozen=True)
class OscInstance:
    system: SetSystem
    arrivals: tuple[int, ...]


@dataclass
class CoverState:
    """Mutable per-run state. ``log_potential`` is ln(Phi)."""

    w: np.ndarray
    selected: np.ndarray
    covered: np.ndarray
    augmentations: np.ndarray
    log_potential: float
    events: list = field(default_factory=list)

    @property
    def selected_sets(self) -> list[int]:
        return np.flatnonzero(self.selected).tolist()

    @property
    def cost(self) -> int:
        return int(self.selected.sum())


def selection_budget(n: int, theta: float) -> int:
    return max(1, math.ceil(2.0 * theta * math.log2(max(n, 2)) - 1e-12))


def _log_sum_exp(x: np.ndarray) -> float:
    if x.size == 0:
        return -math.inf
    top = float(x.max())
    return top + math.log(float(np.exp(x - top).sum()))


def log_potential(sys: SetSystem, w: np.ndarray, covered: np.ndarray, incidence=None) -> float:
    """ln(sum over uncovered elements of n^{2 w_i}), recomputed from scratch."""
    a = sys.incidence() if incidence is None else incidence
    w_elem = a @ w
    return _log_sum_exp(2.0 * math.log(sys.n) * w_elem[~covered])


def initial_state(sys: SetSystem, theta: float, incidence=None) -> CoverState:
    _check_theta(theta)
    w = np.full(sys.m, 1.0 / (theta * sys.m))
    covered = np.zeros(sys.n, dtype=bool)
    return CoverState(w, np.zeros(sys.m, dtype=bool), covered, np.zeros(sys.m, dtype=int),
                      log_potential(sys, w, covered, incidence))


def _check_theta(theta):
    if not theta > 1 or not math.isfinite(theta):
        raise InvalidInputError(f"theta must exceed 1, got {theta}")


def min_augmentation_k(w_i: float, theta: float) -> int:
    """Smallest integer k >= 1 with theta**k * w_i > 1."""
    _check_theta(theta)
    if not 0 < w_i < 1:
        raise InvalidInputError(f"augmentation needs 0 < w_i < 1, got {w_i}")
    k = max(1, math.ceil(-math.log(w_i) / math.log(theta)))
    while theta ** k * w_i <= 1.0:
        k += 1
    while k > 1 and theta ** (k - 1) * w_i > 1.0:
        k -= 1
    return k


class _Selector:
    """Potential bookkeeping for one selection step, in shifted log space."""

    def __init__(self, sys, state, incidence, i, delta_sets, delta, theta, log_phi_old):
        self.sys = sys
        self.members = [np.fromiter(sys.membership[s], dtype=int) for s in delta_sets]
        self.delta_sets = delta_sets
        self.theta = theta
        ln_n = math.log(sys.n)
        w_elem = incidence @ state.w
        self.uncovered = ~state.covered
        self.uncovered[i] = False
        self.expo = 2.0 * ln_n * w_elem
        # growth of each element's weight in this step, used for survival odds
        d_elem = incidence[:, delta_sets] @ delta
        self.survive = np.clip(1.0 - d_elem / theta, 0.0, 1.0)
        live = self.expo[self.uncovered]
        self.shift = max(float(live.max()) if live.size else 0.0, log_phi_old)
        self.terms = np.zeros_like(self.expo)
        self.terms[self.uncovered] = np.exp(self.expo[self.uncovered] - self.shift)
        self.phi_old = math.exp(log_phi_old - self.shift) if log_phi_old > -math.inf else 0.0

    def phi_after(self, chosen) -> float:
        mask = self.uncovered.copy()
        for k in chosen:
            mask[self.members[k]] = False
        return float(self.terms[mask].sum())

    def accept(self, phi_new: float) -> bool:
        return phi_new <= self.phi_old * (1.0 + POTENTIAL_RTOL) + 1e-300

    def derandomized(self, budget: int) -> list[int]:
        """Method of conditional expectations over the same product distribution."""
        mask = self.uncovered.copy()
        chosen: list[int] = []
        for remaining in range(budget, 0, -1):
            if float(self.terms[mask].sum()) <= self.phi_old * (1.0 + POTENTIAL_RTOL):
                break
            weights = self.terms * self.survive ** (remaining - 1)
            gains = [float(weights[mem[mask[mem]]].sum()) for mem in self.members]
            best = int(np.argmax(gains))
            if gains[best] <= 0.0:
                break
            if best not in chosen:
                chosen.append(best)
            mask[self.members[best]] = False
        return chosen


def osc_handle_element(sys: SetSystem, state: CoverState, i: int, theta: float, rng,
                       incidence=None) -> CoverState:
    """Process one arrival in place and return the state."""
    if not 0 <= i < sys.n:
        raise InvalidInputError(f"element {i} outside ground set 0..{sys.n - 1}")
    if state.covered[i]:
        return state
    s_i = sys.element_sets[i]
    if not s_i:
        raise InfeasibleError(f"element {i} belongs to no subset")
    a = sys.incidence() if incidence is None else incidence
    s_idx = np.asarray(s_i)
    w_i = float(state.w[s_idx].sum())
    log_phi_old = state.log_potential

    if w_i < 1.0:
        k = min_augmentation_k(w_i, theta)
        factor = theta ** k
        delta = state.w[s_idx] * (factor - 1.0)
        assert np.all(delta / theta <= 1.0 + 1e-12), "selection probability exceeds 1"
        state.w[s_idx] *= factor
        state.augmentations[s_idx] += 1
    else:
        # uncovered yet already heavy: only possible for theta < 2, nothing to augment
        delta = np.zeros(len(s_i))
        state.events.append(("heavy_uncovered", i))

    budget = selection_budget(sys.n, theta)
    sel = _Selector(sys, state, a, i, list(s_i), delta, theta, log_phi_old)
    probs = delta / theta
    p_none = max(0.0, 1.0 - float(probs.sum()))
    cat = np.append(probs, p_none)
    cat = cat / cat.sum()

    chosen = None
    for _ in range(RANDOM_RETRIES):
        draws = rng.choice(len(cat), size=budget, p=cat)
        picks = sorted({int(d) for d in draws if d < len(s_i)})
        picks = _force_cover(picks, delta, state, s_idx)
        if sel.accept(sel.phi_after(picks)):
            chosen = picks
            break
    if chosen is None:
        chosen = _force_cover(sel.derandomized(budget), delta, state, s_idx)
        state.events.append(("derandomized", i))
        if not sel.accept(sel.phi_after(chosen)):
            raise AssertionError(f"no potential-preserving selection for element {i}")

    for k in chosen:
        s = int(s_idx[k])
        state.selected[s] = True
        state.covered[list(sys.membership[s])] = True
    state.covered[i] = True
    state.log_potential = log_potential(sys, state.w, state.covered, a)
    return state


def _force_cover(picks: list[int], delta: np.ndarray, state: CoverState, s_idx) -> list[int]:
    # every candidate contains the arriving element, so only an empty draw needs a forced pick
    if picks:
        return picks
    score = delta if np.any(delta > 0) else state.w[s_idx]
    return [int(np.argmax(score))]


def osc_run(sys: SetSystem, arrivals, theta: float, seed: int = 0, *,
            opt: str | float = "auto", check_invariants: bool = False) -> RunResult:
    """Run OSC-Alg(theta) on ``arrivals``. ``opt`` is "auto", "exact", "greedy" or a number."""
    from .oracles import set_cover_exact, set_cover_greedy

    _check_theta(theta)
    for e in arrivals:
        if not 0 <= e < sys.n:
            raise InvalidInputError(f"arrival {e} outside ground set")
        if not sys.element_sets[e]:
            raise InfeasibleError(f"element {e} belongs to no subset")
    rng = seeded_rng(seed)
    a = sys.incidence()
    state = initial_state(sys, theta, a)
    decisions = []
    for e in arrivals:
        before = state.cost
        was_covered = bool(state.covered[e])
        old_lp = state.log_potential
        osc_handle_element(sys, state, e, theta, rng, a)
        decisions.append(state.cost - before)
        if check_invariants:
            _check_step(sys, state, theta, a, old_lp, was_covered)

    targets = set(arrivals)
    if isinstance(opt, (int, float)):
        opt_value, kind = float(opt), "given"
    elif not targets:
        opt_value, kind = 0.0, "exact"
    elif opt == "greedy" or (opt == "auto" and sys.m > 60):
        res = set_cover_greedy(sys, targets)
        opt_value, kind = res.value, res.kind
    else:
        res = set_cover_exact(sys, targets)
        opt_value, kind = res.value, res.kind
    result = RunResult.minimize(float(state.cost), opt_value, decisions, state)
    result.final_state.events.append(("opt_kind", kind))
    return result


def _check_step(sys, state, theta, a, old_lp, was_covered):
    lp = log_potential(sys, state.w, state.covered, a)
    assert abs(lp - state.log_potential) <= 1e-9 * max(1.0, abs(lp)) or lp == state.log_potential
    if not was_covered:
        assert lp <= old_lp + math.log1p(POTENTIAL_RTOL), "potential increased"
    assert np.all(state.w <= theta * (1 + 1e-12)), "subset weight above theta"


# --- closed forms ------------------------------------------------------------

def osc_cr(n: int, m: int, theta: float) -> float:
    _check_theta(theta)
    if n < 2 or m < 2:
        raise InvalidInputError("need n >= 2 and m >= 2")
    return (2.0 * theta * math.log2(n)) * (2.0 + math.log2(m) / math.log2(theta))


def osc_df(m: int, theta: float) -> float:
    _check_theta(theta)
    if m < 2:
        raise InvalidInputError("need m >= 2")
    lt, lm = math.log2(theta), math.log2(m)
    return theta * (2.0 * lt + lm) / (2.0 * lt * (2.0 + lm))


def argmin_theta(m: int, lo: float = 1.0 + 1e-9, hi: float = 64.0) -> float:
    """theta minimizing the CR formula (n cancels), by golden-section search."""
    f = lambda t: osc_df(m, t)
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    while b - a > 1e-10:
        if f(c) < f(d):
            b, d = d, c
            c = b - g * (b - a)
        else:
            a, c = c, d
            d = a + g * (b - a)
    return 0.5 * (a + b)


def osc_phi_class(m: int, phi: float) -> PolicyInterval:
    """theta interval with DF <= phi, found by bisection on each side of the minimizer."""
    t_star = argmin_theta(m)
    if osc_df(m, t_star) > phi:
        raise InvalidInputError(f"no theta reaches DF <= {phi} for m={m}")
    f = lambda t: osc_df(m, t) - phi

    def bisect(lo, hi, increasing):
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if (f(mid) > 0) == increasing:
                hi = mid
            else:
                lo = mid
            if hi - lo < 1e-13:
                break
        return lo if increasing else hi

    lo = bisect(1.0 + 1e-12, t_star, increasing=False)
    hi_edge = t_star * 2
    while f(hi_edge) <= 0:
        hi_edge *= 2
    hi = bisect(t_star, hi_edge, increasing=True)
    return PolicyInterval(lo, hi, phi, osc_df(m, lo), osc_df(m, hi), baseline=2.0,
                          extra={"argmin_theta": t_star})


def df_table(ms, thetas) -> list[tuple]:
    return [(float(t), *(osc_df(m, t) for m in ms)) for t in thetas]


# --- scenario generators -----------------------------------------------------

def osc_scenario_generator(kind: str, n: int, m: int, arrivals_count: int, seed: int,
                           block: int | None = None, include_full: bool = False,
                           shared_fraction: float = 0.2):
    """Structured random set systems.

    ``high_overlap``: one common arriving element comes first and sits in a
    ``shared_fraction`` share of the subsets, each of which also holds a
    random block of ``block`` other arriving elements (default
    arrivals_count // 40, at least 1). Every remaining subset holds a single
    arriving element. Subsets bought for the common element therefore cover
    many upcoming elements that would otherwise be covered one at a time.

    ``low_overlap``: every subset holds exactly one arriving element (plus
    ``block`` non-arriving padding elements, default 2), so extra subsets
    bought early are wasted.
    """
    if arrivals_count > n or arrivals_count < 0:
        raise InvalidInputError("arrivals_count must lie in [0, n]")
    if kind not in ("high_overlap", "low_overlap"):
        raise InvalidInputError(f"unknown scenario {kind!r}")
    if m < max(1, arrivals_count):
        raise InvalidInputError("need at least one subset per arriving element")
    if not 0 < shared_fraction <= 1:
        raise InvalidInputError("shared_fraction must lie in (0, 1]")
    rng = seeded_rng(seed)
    perm = rng.permutation(n)
    arriving = perm[:arrivals_count]
    others = perm[arrivals_count:]
    sets: list[set] = []

    def padding(k):
        if not len(others) or not k:
            return set()
        return {int(x) for x in rng.choice(others, size=min(len(others), k), replace=False)}

    if kind == "high_overlap":
        order = list(arriving)
        if arrivals_count >= 2:
            hub, rest = int(arriving[0]), arriving[1:]
            size = min(len(rest), block or max(1, arrivals_count // 40))
            n_shared = max(1, int(round(shared_fraction * m)))
            for k in range(m):
                if k < n_shared:
                    s = {hub} | {int(x) for x in rng.choice(rest, size=size, replace=False)}
                else:
                    s = {int(rest[k % len(rest)])}
                sets.append(s | padding(2))
            order = [hub] + [int(x) for x in rng.permutation(rest)]
        else:
            sets = [set(int(x) for x in arriving) | padding(2) for _ in range(m)]
        if include_full:
            sets[0] = set(int(x) for x in arriving)
    else:
        pad = block if block is not None else 2
        for k in range(m):
            s = {int(arriving[k % arrivals_count])} if arrivals_count else set()
            sets.append(s | padding(pad))
        order = [int(x) for x in rng.permutation(arriving)]
    # every ground element must be coverable
    for e in range(n):
        if not any(e in s for s in sets):
            sets[int(rng.integers(0, m))].add(e)
    system = SetSystem.from_sets(n, sets)
    return system, tuple(int(x) for x in order)
