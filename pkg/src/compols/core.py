"""Shared domain types, JSON instance I/O, seeding and validation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

TOL = 1e-12
DEFAULT_WEIGHT_CAP = 1e-3


class InvalidInputError(ValueError):
    """Raised when an argument violates an operation's precondition."""


class InfeasibleError(RuntimeError):
    """Raised when an instance admits no feasible solution (e.g. an uncoverable element)."""


@dataclass(frozen=True)
class DensityBounds:
    """Lower/upper value-density bounds. ``gamma`` and ``T`` are derived."""

    L: float
    U: float

    def __post_init__(self):
        if not (self.L > 0 and self.U >= self.L) or not math.isfinite(self.U):
            raise InvalidInputError(f"need 0 < L <= U < inf, got L={self.L}, U={self.U}")

    @property
    def gamma(self) -> float:
        return self.U / self.L

    @property
    def T(self) -> float:
        return 1.0 / (math.log(self.gamma) + 1.0)

    @classmethod
    def from_gamma(cls, gamma: float, L: float = 1.0) -> "DensityBounds":
        return cls(L, L * gamma)


@dataclass(frozen=True)
class KnapsackItem:
    value: float
    weight: float

    @property
    def density(self) -> float:
        return self.value / self.weight


@dataclass(frozen=True)
class OkpInstance:
    bounds: DensityBounds
    items: tuple[KnapsackItem, ...]
    weight_cap: float = DEFAULT_WEIGHT_CAP

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))


@dataclass(frozen=True)
class RateInstance:
    bounds: DensityBounds
    rates: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))


@dataclass
class RunResult:
    """Outcome of one online run against an offline reference.

    ``ratio`` is always oriented so that 1 is best: opt/alg for
    maximization problems and alg/opt for minimization problems.
    """

    alg_value: float
    opt_value: float
    ratio: float
    decisions: list = field(default_factory=list)
    final_state: Any = None

    @classmethod
    def maximize(cls, alg_value, opt_value, decisions=None, final_state=None):
        return cls(alg_value, opt_value, _safe_ratio(opt_value, alg_value),
                   decisions or [], final_state)

    @classmethod
    def minimize(cls, alg_value, opt_value, decisions=None, final_state=None):
        return cls(alg_value, opt_value, _safe_ratio(alg_value, opt_value),
                   decisions or [], final_state)


@dataclass(frozen=True)
class PolicyInterval:
    """A phi-degraded parameter interval with the DF certified at its endpoints."""

    lo: float
    hi: float
    phi: float
    df_lo: float
    df_hi: float
    baseline: float
    integer: bool = False
    extra: dict = field(default_factory=dict, compare=False)

    def __contains__(self, x) -> bool:
        return self.lo - 1e-12 <= x <= self.hi + 1e-12


def _safe_ratio(num: float, den: float) -> float:
    if den == 0:
        return 1.0 if num == 0 else math.inf
    return num / den


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def fatal(self) -> list[str]:
        """Violations that make an instance unusable (cap excess is only flagged)."""
        return [v for v in self.violations if "exceeds cap" not in v]


def validate_instance(inst: OkpInstance | RateInstance) -> ValidationReport:
    """Check density bounds and weight caps; report rather than raise."""
    report = ValidationReport()
    L, U = inst.bounds.L, inst.bounds.U
    if isinstance(inst, OkpInstance):
        for k, item in enumerate(inst.items):
            if not item.weight > 0:
                report.violations.append(f"item {k}: nonpositive weight {item.weight}")
                continue
            d = item.density
            if d < L * (1 - TOL):
                report.violations.append(f"item {k}: density {d:g} < L={L:g}")
            if d > U * (1 + TOL):
                report.violations.append(f"item {k}: density {d:g} > U={U:g}")
            if item.weight > inst.weight_cap:
                report.violations.append(
                    f"item {k}: weight exceeds cap ({item.weight:g} > {inst.weight_cap:g})")
    elif isinstance(inst, RateInstance):
        for k, r in enumerate(inst.rates):
            if r < L * (1 - TOL) or r > U * (1 + TOL):
                report.violations.append(f"rate {k}: {r:g} outside [{L:g}, {U:g}]")
    else:
        raise TypeError(f"cannot validate {type(inst).__name__}")
    return report


def seeded_rng(seed: int) -> np.random.Generator:
    """PCG64 stream; identical seeds give identical draws on every platform."""
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))


# --- JSON (de)serialization --------------------------------------------------

def instance_to_dict(inst) -> dict:
    from .eac import EacInstance
    from .osc import OscInstance

    if isinstance(inst, OkpInstance):
        return {"type": "okp", "L": inst.bounds.L, "U": inst.bounds.U,
                "weight_cap": inst.weight_cap,
                "items": [{"v": it.value, "w": it.weight} for it in inst.items]}
    if isinstance(inst, RateInstance):
        return {"type": "rate", "L": inst.bounds.L, "U": inst.bounds.U,
                "rates": list(inst.rates)}
    if isinstance(inst, OscInstance):
        return {"type": "osc", "n": inst.system.n,
                "sets": [sorted(s) for s in inst.system.membership],
                "arrivals": list(inst.arrivals)}
    if isinstance(inst, EacInstance):
        return {"type": "eac", "L": inst.bounds.L, "U": inst.bounds.U,
                "weight_cap": inst.weight_cap, "horizon": inst.horizon,
                "requests": [{"a": r.arrival, "d": r.departure, "e": r.energy, "v": r.value}
                             for r in inst.requests]}
    raise TypeError(f"cannot serialize {type(inst).__name__}")


def instance_from_dict(data: dict):
    from .eac import EacInstance, EvRequest
    from .osc import OscInstance, SetSystem

    try:
        kind = data["type"]
        if kind == "okp":
            return OkpInstance(DensityBounds(data["L"], data["U"]),
                               [KnapsackItem(float(it["v"]), float(it["w"])) for it in data["items"]],
                               float(data.get("weight_cap", DEFAULT_WEIGHT_CAP)))
        if kind == "rate":
            return RateInstance(DensityBounds(data["L"], data["U"]), data["rates"])
        if kind == "osc":
            system = SetSystem.from_sets(int(data["n"]), data["sets"])
            return OscInstance(system, tuple(int(i) for i in data["arrivals"]))
        if kind == "eac":
            reqs = [EvRequest(int(r["a"]), int(r["d"]), float(r["e"]), float(r["v"]))
                    for r in data["requests"]]
            return EacInstance(DensityBounds(data["L"], data["U"]), tuple(reqs),
                               int(data["horizon"]),
                               float(data.get("weight_cap", DEFAULT_WEIGHT_CAP)))
    except KeyError as exc:
        raise InvalidInputError(f"instance JSON missing field {exc}") from None
    raise InvalidInputError(f"unknown instance type {data.get('type')!r}")


def dumps_instance(inst) -> str:
    # repr-precision floats keep encode/decode an exact round trip
    return json.dumps(instance_to_dict(inst), indent=1)


def loads_instance(text: str):
    return instance_from_dict(json.loads(text))


def save_instance(inst, path: str | Path) -> None:
    Path(path).write_text(dumps_instance(inst))


def load_instance(path: str | Path):
    return loads_instance(Path(path).read_text())

