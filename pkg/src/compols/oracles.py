"""Offline reference solvers: knapsack, set cover and EV admission."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .core import InfeasibleError, InvalidInputError, OkpInstance

EXACT = "exact"
FRACTIONAL_UPPER_BOUND = "fractional_upper_bound"
GREEDY = "greedy"
GREEDY_LOWER_BOUND = "greedy_lower_bound"


@dataclass
class OracleResult:
    value: float
    kind: str
    witness: Any = None
    info: dict = field(default_factory=dict)


# --- knapsack ---------------------------------------------------------------

def fractional_knapsack(inst: OkpInstance, capacity: float = 1.0) -> OracleResult:
    """Greedy by density with the boundary item split; the LP optimum."""
    order = sorted(range(len(inst.items)), key=lambda k: -inst.items[k].density)
    room = capacity
    value = 0.0
    fractions = {}
    for k in order:
        if room <= 0:
            break
        it = inst.items[k]
        take = min(1.0, room / it.weight)
        value += take * it.value
        room -= take * it.weight
        fractions[k] = take
    return OracleResult(value, FRACTIONAL_UPPER_BOUND, fractions)


def knapsack_dp(inst: OkpInstance, resolution: float = 1e-4) -> OracleResult:
    """Exact 0/1 optimum.

    When every weight is an integer multiple of ``resolution`` this is a
    dynamic program over discretized capacity; otherwise instances of at most
    40 items are solved by depth-first branch and bound.
    """
    items = inst.items
    if not items:
        return OracleResult(0.0, EXACT, [])
    units = [it.weight / resolution for it in items]
    if all(abs(u - round(u)) <= 1e-6 * max(1.0, u) for u in units):
        return _knapsack_table(inst, [int(round(u)) for u in units], int(round(1.0 / resolution)))
    if len(items) <= 40:
        return _knapsack_bnb(inst)
    raise InvalidInputError(
        f"resolution {resolution} cannot represent the item weights and there are "
        f"{len(items)} > 40 items for branch and bound")


def _knapsack_table(inst, units, cap) -> OracleResult:
    n = len(units)
    best = np.zeros(cap + 1)
    take = np.zeros((n, cap + 1), dtype=bool)
    for k, (u, it) in enumerate(zip(units, inst.items)):
        if u > cap:
            continue
        cand = np.full(cap + 1, -np.inf)
        cand[u:] = best[:cap + 1 - u] + it.value
        better = cand > best
        take[k] = better
        best = np.where(better, cand, best)
    c = int(np.argmax(best))
    value = float(best[c])
    chosen = []
    for k in range(n - 1, -1, -1):
        if take[k, c]:
            chosen.append(k)
            c -= units[k]
    return OracleResult(value, EXACT, sorted(chosen), {"method": "dp"})


def _knapsack_bnb(inst) -> OracleResult:
    order = sorted(range(len(inst.items)), key=lambda k: -inst.items[k].density)
    vals = [inst.items[k].value for k in order]
    wts = [inst.items[k].weight for k in order]
    n = len(order)
    best = [0.0, []]

    def bound(k, room, value):
        for j in range(k, n):
            if wts[j] <= room:
                room -= wts[j]
                value += vals[j]
            else:
                return value + vals[j] * room / wts[j]
        return value

    def go(k, room, value, picked):
        if value > best[0]:
            best[0], best[1] = value, list(picked)
        if k == n or bound(k, room, value) <= best[0] + 1e-15:
            return
        if wts[k] <= room + 1e-15:
            picked.append(order[k])
            go(k + 1, room - wts[k], value + vals[k], picked)
            picked.pop()
        go(k + 1, room, value, picked)

    go(0, 1.0, 0.0, [])
    return OracleResult(best[0], EXACT, sorted(best[1]), {"method": "branch_and_bound"})


def knapsack_bruteforce(inst: OkpInstance) -> float:
    """Enumerate all 2^n subsets; test oracle for tiny instances."""
    best = 0.0
    items = inst.items
    for mask in range(1 << len(items)):
        w = v = 0.0
        for k, it in enumerate(items):
            if mask >> k & 1:
                w += it.weight
                v += it.value
        if w <= 1.0 + 1e-12:
            best = max(best, v)
    return best


# --- set cover ----------------------------------------------------------------

def _relevant_sets(sys, targets):
    targets = set(targets)
    for e in targets:
        if not 0 <= e < sys.n or not sys.element_sets[e]:
            raise InfeasibleError(f"element {e} cannot be covered")
    masks = {}
    for k, s in enumerate(sys.membership):
        hit = s & targets
        if hit:
            masks[k] = hit
    return targets, masks


def set_cover_exact(sys, targets, node_budget: int = 2_000_000) -> OracleResult:
    """Minimum number of subsets covering ``targets``.

    Branch and bound: branch on the uncovered target with the fewest
    candidate subsets; prune with the current best size and a max-coverage
    lower bound.
    """
    targets, masks = _relevant_sets(sys, targets)
    if not targets:
        return OracleResult(0.0, EXACT, [])
    greedy = set_cover_greedy(sys, targets)
    best = [len(greedy.witness), list(greedy.witness)]
    cover_of = {e: [k for k in masks if e in masks[k]] for e in targets}
    nodes = [0]

    def go(uncovered: frozenset, chosen: list):
        nodes[0] += 1
        if nodes[0] > node_budget:
            raise InfeasibleError("set_cover_exact exceeded its node budget")
        if not uncovered:
            if len(chosen) < best[0]:
                best[0], best[1] = len(chosen), list(chosen)
            return
        largest = max(len(masks[k] & uncovered) for k in masks)
        if len(chosen) + math.ceil(len(uncovered) / largest) >= best[0]:
            return
        pivot = min(uncovered, key=lambda e: len(cover_of[e]))
        cands = sorted(cover_of[pivot], key=lambda k: -len(masks[k] & uncovered))
        for k in cands:
            chosen.append(k)
            go(uncovered - masks[k], chosen)
            chosen.pop()

    go(frozenset(targets), [])
    return OracleResult(float(best[0]), EXACT, sorted(best[1]), {"nodes": nodes[0]})


def set_cover_bruteforce(sys, targets) -> int:
    """Smallest cover by enumerating subfamilies in increasing size."""
    targets, masks = _relevant_sets(sys, targets)
    if not targets:
        return 0
    keys = list(masks)
    for size in range(1, len(keys) + 1):
        for combo in itertools.combinations(keys, size):
            if set().union(*(masks[k] for k in combo)) >= targets:
                return size
    raise InfeasibleError("targets cannot be covered")


def set_cover_greedy(sys, targets) -> OracleResult:
    """Classical greedy; within a factor (1 + ln n) of the optimum."""
    targets, masks = _relevant_sets(sys, targets)
    uncovered = set(targets)
    chosen = []
    while uncovered:
        k = max(masks, key=lambda j: (len(masks[j] & uncovered), -j))
        chosen.append(k)
        uncovered -= masks[k]
    factor = 1.0 + math.log(max(1, len(targets)))
    return OracleResult(float(len(chosen)), GREEDY, chosen, {"approximation_factor": factor})


# --- EV admission -------------------------------------------------------------

def eac_fractional_opt(requests, horizon: int) -> OracleResult:
    """LP relaxation of offline EV admission (fractional admission, divisible charging).

    Upper-bounds the 0/1 optimum; on a single slot it equals the fractional
    knapsack value.
    """
    from scipy.optimize import linprog
    from scipy.sparse import coo_matrix

    reqs = list(requests)
    n = len(reqs)
    if n == 0:
        return OracleResult(0.0, FRACTIONAL_UPPER_BOUND, [])
    cols_y = []
    for i, r in enumerate(reqs):
        if not 0 <= r.arrival <= r.departure < horizon:
            raise InvalidInputError(f"request {i} window outside horizon {horizon}")
        cols_y.extend((i, t) for t in range(r.arrival, r.departure + 1))
    nv = n + len(cols_y)
    c = np.zeros(nv)
    c[:n] = [-r.value for r in reqs]
    rows, cols, vals = [], [], []
    # energy: e_i x_i - sum_t y_it <= 0
    for i, r in enumerate(reqs):
        rows.append(i), cols.append(i), vals.append(r.energy)
    for j, (i, t) in enumerate(cols_y):
        rows.append(i), cols.append(n + j), vals.append(-1.0)
        rows.append(n + t), cols.append(n + j), vals.append(1.0)
    a = coo_matrix((vals, (rows, cols)), shape=(n + horizon, nv)).tocsr()
    b = np.concatenate([np.zeros(n), np.ones(horizon)])
    bounds = [(0.0, 1.0)] * n + [(0.0, None)] * len(cols_y)
    res = linprog(c, A_ub=a, b_ub=b, bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    x = res.x[:n]
    return OracleResult(float(-res.fun), FRACTIONAL_UPPER_BOUND, x.tolist())


def eac_greedy(requests, horizon: int) -> OracleResult:
    """Density-ordered admission with water-filling into remaining capacity.

    A feasible (fractional) schedule, hence a lower bound on the LP optimum;
    time coupling means it is not an upper bound on the 0/1 optimum either.
    """
    room = np.ones(horizon)
    order = sorted(range(len(requests)), key=lambda k: -requests[k].value / requests[k].energy)
    value = 0.0
    frac = {}
    for k in order:
        r = requests[k]
        win = slice(r.arrival, r.departure + 1)
        avail = float(room[win].sum())
        if avail <= 1e-15:
            continue
        take = min(1.0, avail / r.energy)
        room[win] = _level_fill(room[win], take * r.energy)
        value += take * r.value
        frac[k] = take
    return OracleResult(value, GREEDY_LOWER_BOUND, frac)


def _level_fill(room: np.ndarray, amount: float) -> np.ndarray:
    # draw ``amount`` from the slots with the most room, levelling them down
    r = np.sort(room)[::-1]
    csum = np.cumsum(r)
    level = 0.0
    for k in range(len(r)):
        nxt = r[k + 1] if k + 1 < len(r) else 0.0
        if csum[k] - (k + 1) * nxt >= amount:
            level = (csum[k] - amount) / (k + 1)
            break
    return np.minimum(room, max(level, 0.0))


def edf_feasible(requests, horizon: int) -> bool:
    """Earliest-deadline-first check that all ``requests`` fit with unit slot capacity."""
    pending = []
    by_arrival = sorted(requests, key=lambda r: r.arrival)
    k = 0
    for t in range(horizon):
        while k < len(by_arrival) and by_arrival[k].arrival <= t:
            r = by_arrival[k]
            pending.append([r.departure, r.energy])
            k += 1
        pending.sort()
        cap = 1.0
        for job in pending:
            if job[0] < t and job[1] > 1e-12:
                return False
            if cap <= 0:
                break
            use = min(cap, job[1])
            job[1] -= use
            cap -= use
        pending = [j for j in pending if j[1] > 1e-12]
        if any(j[0] <= t for j in pending):
            return False
    return not pending and k == len(by_arrival)


def eac_exhaustive(requests, horizon: int) -> OracleResult:
    """Exact 0/1 optimum by enumerating admission sets (<= 16 requests)."""
    reqs = list(requests)
    if len(reqs) > 16:
        raise InvalidInputError("exhaustive EAC search is limited to 16 requests")
    best, witness = 0.0, []
    for mask in range(1 << len(reqs)):
        chosen = [r for k, r in enumerate(reqs) if mask >> k & 1]
        v = sum(r.value for r in chosen)
        if v > best and edf_feasible(chosen, horizon):
            best, witness = v, [k for k in range(len(reqs)) if mask >> k & 1]
    return OracleResult(best, EXACT, witness)
