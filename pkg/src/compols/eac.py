"""EV admission control at a charging station with threshold-based admission.

Each request asks for ``energy`` (a fraction of one slot's capacity) to be
delivered somewhere in the slot window [arrival, departure]. A candidate
schedule is built by water-filling against the threshold Psi_alpha of every
slot's utilization, and the request is admitted when its value covers the
estimated capacity cost of that schedule.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .core import (TOL, DensityBounds, InfeasibleError, InvalidInputError, RunResult,
                   ValidationReport, seeded_rng)
from .okp import ThresholdCurve, psi_array

log = logging.getLogger(__name__)

ADMIT = "admit"
THRESHOLD_REJECT = "threshold_reject"
CAPACITY_REJECT = "capacity_reject"


@dataclass(frozen=True)
class EvRequest:
    arrival: int
    departure: int
    energy: float
    value: float = 0.0

    @property
    def density(self) -> float:
        return self.value / self.energy

    @property
    def window(self) -> range:
        return range(self.arrival, self.departure + 1)


@dataclass(frozen=True)
class EacInstance:
    bounds: DensityBounds
    requests: tuple[EvRequest, ...]
    horizon: int
    weight_cap: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "requests", tuple(self.requests))


@dataclass
class StationState:
    z: np.ndarray
    total_value: float = 0.0

    @classmethod
    def empty(cls, horizon: int) -> "StationState":
        if horizon < 1:
            raise InvalidInputError(f"horizon must be positive, got {horizon}")
        return cls(np.zeros(horizon), 0.0)

    @property
    def horizon(self) -> int:
        return len(self.z)


def validate_eac(inst: EacInstance) -> ValidationReport:
    report = ValidationReport()
    L, U = inst.bounds.L, inst.bounds.U
    for k, r in enumerate(inst.requests):
        if not 0 <= r.arrival <= r.departure < inst.horizon:
            report.violations.append(f"request {k}: window [{r.arrival}, {r.departure}] "
                                     f"outside horizon {inst.horizon}")
        if not r.energy > 0:
            report.violations.append(f"request {k}: nonpositive energy {r.energy}")
            continue
        d = r.density
        if d < L * (1 - TOL) or d > U * (1 + TOL):
            report.violations.append(f"request {k}: density {d:g} outside [{L:g}, {U:g}]")
        if r.energy > inst.weight_cap:
            report.violations.append(
                f"request {k}: energy exceeds cap ({r.energy:g} > {inst.weight_cap:g})")
    return report


def default_chunk(req: EvRequest, weight_cap: float) -> float:
    return min(weight_cap, req.energy) / 4.0


def _check_window(req: EvRequest, horizon: int):
    if not 0 <= req.arrival <= req.departure < horizon:
        raise InvalidInputError(f"window [{req.arrival}, {req.departure}] outside horizon {horizon}")
    if not req.energy > 0:
        raise InvalidInputError(f"energy must be positive, got {req.energy}")


def water_fill(curve: ThresholdCurve, state: StationState, req: EvRequest,
               chunk: float) -> np.ndarray:
    """Candidate schedule over the full horizon (zero outside the window).

    Pieces of size ``chunk`` go one at a time to the window slot with the
    smallest marginal cost Psi(z_t + assigned), then lower utilization, then
    lower index. A piece larger than a slot's room is split over slots.
    """
    _check_window(req, state.horizon)
    if not 0 < chunk:
        raise InvalidInputError(f"chunk must be positive, got {chunk}")
    chunk = min(chunk, req.energy)
    lo, hi = req.arrival, req.departure + 1
    z = state.z[lo:hi]
    room = np.clip(1.0 - z, 0.0, None)
    if room.sum() < req.energy - TOL:
        raise InfeasibleError(f"window capacity {room.sum():g} below demand {req.energy:g}")
    y = np.zeros(state.horizon)
    if hi - lo == 1:
        y[lo] = req.energy
        return y
    assigned = np.zeros(hi - lo)
    n_pieces = max(1, math.ceil(req.energy / chunk - 1e-9))
    remaining = req.energy
    for p in range(n_pieces):
        piece = remaining if p == n_pieces - 1 else chunk
        while piece > TOL:
            level = z + assigned
            free = room - assigned
            cost = psi_array(curve, np.minimum(level, 1.0))
            cost = np.where(free > TOL, cost, np.inf)
            # lexicographic (cost, utilization, index)
            order = np.lexsort((np.arange(len(level)), level, cost))
            t = int(order[0])
            if not math.isfinite(cost[t]):
                raise InfeasibleError("ran out of window capacity while water-filling")
            take = min(piece, float(free[t]))
            assigned[t] += take
            piece -= take
            remaining -= take
    y[lo:hi] = assigned
    return y


def schedule_cost(curve: ThresholdCurve, state: StationState, y: np.ndarray) -> float:
    """Estimated capacity cost sum_t Psi(z_t) y_t of a schedule."""
    used = y > 0
    if not used.any():
        return 0.0
    return float(np.dot(psi_array(curve, state.z[used]), y[used]))


def eac_step(curve: ThresholdCurve, state: StationState, req: EvRequest,
             chunk: float | None = None, weight_cap: float = 0.1) -> tuple[str, StationState]:
    if chunk is None:
        chunk = default_chunk(req, weight_cap)
    try:
        y = water_fill(curve, state, req, chunk)
    except InfeasibleError:
        return CAPACITY_REJECT, state
    cost = schedule_cost(curve, state, y)
    if not math.isfinite(cost) or req.value - cost < -TOL:
        return THRESHOLD_REJECT, state
    z = state.z + y
    z[z >= 1.0 - TOL] = 1.0
    return ADMIT, StationState(z, state.total_value + req.value)


def eac_run(curve: ThresholdCurve, requests, horizon: int, chunk: float | None = None,
            weight_cap: float = 0.1, opt_value: float | None = None) -> RunResult:
    """Process requests in order; OPT is the LP relaxation of the offline problem."""
    from .oracles import eac_fractional_opt

    requests = tuple(requests)
    for r in requests:
        _check_window(r, horizon)
    state = StationState.empty(horizon)
    decisions = []
    for r in requests:
        decision, state = eac_step(curve, state, r, chunk, weight_cap)
        decisions.append(decision)
    if opt_value is None:
        opt_value = eac_fractional_opt(requests, horizon).value
    return RunResult.maximize(state.total_value, opt_value, decisions, state)


def eac_run_instance(curve: ThresholdCurve, inst: EacInstance, chunk: float | None = None,
                     opt_value: float | None = None) -> RunResult:
    return eac_run(curve, inst.requests, inst.horizon, chunk, inst.weight_cap, opt_value)


# --- value model -------------------------------------------------------------

# expected cars present by hour of day at a workplace lot
DEFAULT_OCCUPANCY = (2, 1, 1, 1, 1, 2, 5, 14, 30, 42, 46, 47,
                     45, 44, 42, 38, 30, 22, 14, 10, 7, 5, 4, 3)


@dataclass(frozen=True)
class ValueModel:
    """v = a (n + b e / window) with n read off an hourly occupancy profile."""

    a: float = 12 * 0.06
    b: float = 2.0
    occupancy: tuple[float, ...] = DEFAULT_OCCUPANCY

    def __post_init__(self):
        if not self.a > 0 or not self.b >= 0:
            raise InvalidInputError(f"need a > 0 and b >= 0, got a={self.a}, b={self.b}")
        if len(self.occupancy) != 24:
            raise InvalidInputError("occupancy profile needs 24 hourly values")

    def occupancy_at(self, hour: float) -> float:
        return float(self.occupancy[int(hour) % 24])


def estimate_value(model: ValueModel, energy: float, window: float, n_i: float) -> float:
    """Raw value estimate; ``window`` is the stay length in the units of the energy rate."""
    if not window > 0:
        raise InvalidInputError(f"window length must be positive, got {window}")
    return model.a * (n_i + model.b * energy / window)


def clip_value(value: float, energy: float, bounds: DensityBounds) -> tuple[float, bool]:
    """Clip into [L e, U e]; the flag tells whether clipping happened."""
    lo, hi = bounds.L * energy, bounds.U * energy
    clipped = min(max(value, lo), hi)
    return clipped, clipped != value


def fit_occupancy(sessions, days: int | None = None) -> tuple[float, ...]:
    """Maximum-likelihood Poisson rate per hour of day.

    ``sessions`` are (arrival, departure) datetimes. For every day and hour the
    count of sessions present at the top of the hour is a Poisson draw; the MLE
    of each hourly rate is the mean count over days.
    """
    sessions = list(sessions)
    if not sessions:
        return tuple(0.0 for _ in range(24))
    first = min(a for a, _ in sessions).replace(hour=0, minute=0, second=0, microsecond=0)
    last = max(d for _, d in sessions)
    n_days = days or max(1, (last - first).days + 1)
    counts = np.zeros((n_days, 24))
    for a, d in sessions:
        t = a.replace(minute=0, second=0, microsecond=0)
        if t < a:
            t += timedelta(hours=1)
        while t < d:
            day = (t - first).days
            if 0 <= day < n_days:
                counts[day, t.hour] += 1
            t += timedelta(hours=1)
    return tuple(float(x) for x in counts.mean(axis=0))


# --- trace ingestion ---------------------------------------------------------

TRACE_COLUMNS = ("arrival_ts", "departure_ts", "energy_kwh")


@dataclass
class IngestResult:
    requests: list[EvRequest]
    horizon: int
    origin: datetime | None
    skipped: int = 0
    clipped: int = 0
    hours: list[float] = field(default_factory=list)


def _parse_ts(text: str) -> datetime:
    text = text.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    return datetime.fromisoformat(text)


def ingest_ev_csv(path, model: ValueModel, slot_hours: float = 1.0, capacity_kwh: float = 30.0,
                  bounds: DensityBounds | None = None) -> IngestResult:
    """Read a session trace into slotted requests.

    Slots are counted from midnight of the earliest arrival. A session
    occupies slots floor(arrival) .. ceil(departure) - 1, its energy is
    normalized by ``capacity_kwh`` (the station's deliverable energy per
    slot), and its value comes from ``estimate_value`` with the stay in hours,
    clipped into the density bounds when ``bounds`` is given.
    """
    if not slot_hours > 0 or not capacity_kwh > 0:
        raise InvalidInputError("slot length and capacity must be positive")
    text = Path(path).read_text()
    rows = list(csv.DictReader(text.splitlines()))
    if not text.strip():
        return IngestResult([], 0, None)
    header = text.splitlines()[0]
    missing = [c for c in TRACE_COLUMNS if c not in [h.strip() for h in header.split(",")]]
    if missing:
        raise InvalidInputError(f"trace is missing columns {missing}")
    parsed = []
    skipped = 0
    for row in rows:
        try:
            a = _parse_ts(row["arrival_ts"])
            d = _parse_ts(row["departure_ts"])
            e = float(row["energy_kwh"])
            if not (d > a and e > 0 and math.isfinite(e)):
                raise ValueError("empty window or demand")
            parsed.append((a, d, e))
        except (ValueError, TypeError, AttributeError):
            skipped += 1
    if skipped:
        log.warning("skipped %d invalid trace rows", skipped)
    if not parsed:
        return IngestResult([], 0, None, skipped)
    try:
        origin = min(a for a, _, _ in parsed).replace(hour=0, minute=0, second=0, microsecond=0)
    except TypeError:
        raise InvalidInputError("trace mixes timezone-aware and naive timestamps") from None
    slot = timedelta(hours=slot_hours)
    reqs, hours = [], []
    clipped = 0
    for a, d, e_kwh in parsed:
        s_a = math.floor((a - origin) / slot + 1e-9)
        s_d = math.ceil((d - origin) / slot - 1e-9) - 1
        stay = (d - a).total_seconds() / 3600.0
        e = e_kwh / capacity_kwh
        v = estimate_value(model, e_kwh, stay, model.occupancy_at(a.hour + a.minute / 60))
        if bounds is not None:
            v, was = clip_value(v, e, bounds)
            clipped += was
        reqs.append(EvRequest(s_a, max(s_a, s_d), e, v))
        hours.append(a.hour + a.minute / 60)
    horizon = max(r.departure for r in reqs) + 1
    return IngestResult(reqs, horizon, origin, skipped, clipped, hours)


def split_days(requests, slots_per_day: int) -> list[list[EvRequest]]:
    """Group requests by arrival day; windows are cut at the end of that day."""
    days: dict[int, list[EvRequest]] = {}
    for r in requests:
        day = r.arrival // slots_per_day
        base = day * slots_per_day
        dep = min(r.departure, base + slots_per_day - 1)
        days.setdefault(day, []).append(EvRequest(r.arrival - base, dep - base, r.energy, r.value))
    return [days[k] for k in sorted(days)]


# --- synthetic data ----------------------------------------------------------

def synthetic_day(bounds: DensityBounds, rng, slots: int = 12, demand_factor: float = 2.0,
                  energy_range: tuple[float, float] = (0.02, 0.08), max_stay: int = 6,
                  regime: str = "uniform") -> EacInstance:
    """One over-demanded day: total energy about ``demand_factor`` x station capacity.

    Densities are log-uniform over [L, U] (``uniform``), concentrated near L
    (``flat``), or low early and high late (``late_peak``).
    """
    if regime not in ("uniform", "flat", "late_peak"):
        raise InvalidInputError(f"unknown regime {regime!r}")
    lo_e, hi_e = energy_range
    target = demand_factor * slots
    reqs = []
    total = 0.0
    lg = math.log(bounds.gamma)
    while total < target:
        a = int(rng.integers(0, slots))
        d = min(slots - 1, a + int(rng.integers(0, max_stay)))
        e = float(rng.uniform(lo_e, hi_e))
        if regime == "uniform":
            u = rng.uniform(0.0, 1.0)
        elif regime == "flat":
            u = rng.uniform(0.0, 0.35)
        else:
            frac = a / max(1, slots - 1)
            u = rng.uniform(0.0, 0.3) if frac < 0.5 else rng.uniform(0.6, 1.0)
        density = min(bounds.U, bounds.L * math.exp(u * lg))
        reqs.append(EvRequest(a, d, e, density * e))
        total += e
    reqs.sort(key=lambda r: r.arrival)
    return EacInstance(bounds, tuple(reqs), slots, hi_e)


def synthetic_trace(days: int, seed: int, sessions_per_day: int = 60,
                    start: datetime = datetime(2024, 1, 1)) -> list[tuple[str, str, float]]:
    """Session rows (arrival_ts, departure_ts, energy_kwh) shaped like a workplace lot."""
    rng = seeded_rng(seed)
    weights = np.asarray(DEFAULT_OCCUPANCY, dtype=float)
    arrive_w = np.clip(np.diff(np.append(weights, weights[0])), 0.0, None) + 0.5
    arrive_w /= arrive_w.sum()
    rows = []
    for day in range(days):
        base = start + timedelta(days=day)
        for _ in range(sessions_per_day):
            hour = int(rng.choice(24, p=arrive_w))
            a = base + timedelta(hours=hour, minutes=int(rng.integers(0, 60)))
            stay = float(np.clip(rng.gamma(4.0, 1.6), 0.5, 14.0))
            d = a + timedelta(minutes=round(stay * 60))
            e = round(float(np.clip(rng.gamma(2.5, 4.0), 1.0, 60.0)), 3)
            rows.append((a.isoformat(), d.isoformat(), e))
    rows.sort()
    return rows


def write_trace_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        w.writerows(rows)
