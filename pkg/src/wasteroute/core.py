"""Instances, scenario scaling and the empirical service-time model.

Units are fixed throughout the package: kilometres, kilograms, hours.

A stop is either the string ``"depot"``, the string ``"landfill"`` or an
integer micro-route id. Matrices are indexed by node position: the depot is
always node 0, the landfill (current-situation case only) is node 1, and the
micro-routes follow in the order they are listed on the instance.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import NamedTuple, Optional, Sequence, Union

import jsonschema
import numpy as np

from .errors import InfeasibleDemand, InvariantViolation, SchemaError, UnknownStop

DEPOT = "depot"
LANDFILL = "landfill"

Stop = Union[str, int]

# absolute tolerance for distance/time/load comparisons
EPS = 1e-9


class CaseKind(str, enum.Enum):
    CURRENT_SITUATION = "CurrentSituation"
    TRANSFER_STATION = "TransferStation"


@dataclass(frozen=True)
class ServiceTimeModel:
    """Linear speed regression on waste density inside a micro-route.

    ``speed = intercept - slope * (waste / internal_distance)``, clamped from
    below at ``min_speed_floor``.
    """

    intercept: float = 35.0
    slope: float = 0.0979
    min_speed_floor: float = 1.0

    def __post_init__(self):
        if not self.intercept > 0:
            raise InvariantViolation("service model intercept must be > 0")
        if not self.slope >= 0:
            raise InvariantViolation("service model slope must be >= 0")
        if not self.min_speed_floor > 0:
            raise InvariantViolation("service model speed floor must be > 0")


class ServiceTime(NamedTuple):
    hours: float
    speed: float
    density: float
    clamped: bool


def service_time(model: ServiceTimeModel, internal_distance: float, waste: float) -> ServiceTime:
    """Hours needed to collect ``waste`` kg along ``internal_distance`` km.

    ``clamped`` is set when the regression speed fell under the floor.
    """
    if not internal_distance > 0:
        raise InvariantViolation("internal distance must be > 0")
    if waste < 0:
        raise InvariantViolation("waste must be >= 0")
    density = waste / internal_distance
    speed = model.intercept - model.slope * density
    clamped = speed < model.min_speed_floor
    if clamped:
        speed = model.min_speed_floor
    return ServiceTime(internal_distance / speed, speed, density, clamped)


@dataclass(frozen=True)
class MicroRoute:
    id: int
    internal_distance: float
    base_waste: float
    area: Optional[float] = None
    # company-recorded service time; only honoured at the unscaled scenario
    service_time: Optional[float] = None

    def __post_init__(self):
        if isinstance(self.id, bool) or not isinstance(self.id, int) or self.id < 1:
            raise InvariantViolation(f"micro-route id must be a positive integer, got {self.id!r}")
        if not self.internal_distance > 0:
            raise InvariantViolation(f"micro-route {self.id}: internal distance must be > 0")
        if not self.base_waste >= 0:
            raise InvariantViolation(f"micro-route {self.id}: base waste must be >= 0")
        if self.service_time is not None and not self.service_time > 0:
            raise InvariantViolation(f"micro-route {self.id}: service time override must be > 0")


@dataclass(frozen=True)
class TransferSpec:
    large_capacity: float
    roundtrip_to_landfill: float

    def __post_init__(self):
        if not self.large_capacity > 0:
            raise InvariantViolation("transfer vehicle capacity must be > 0")
        if not self.roundtrip_to_landfill >= 0:
            raise InvariantViolation("transfer round trip must be >= 0")


@dataclass(frozen=True)
class Scenario:
    waste_fraction: float

    def __post_init__(self):
        if not self.waste_fraction > 0:
            raise InvariantViolation("waste fraction must be > 0")


def _frozen_matrix(values, size: int, label: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape != (size, size):
        raise InvariantViolation(f"{label} must be {size}x{size}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvariantViolation(f"{label} contains non-finite entries")
    if np.any(arr < 0):
        i, j = np.argwhere(arr < 0)[0]
        raise InvariantViolation(f"{label}[{i}][{j}] is negative ({arr[i, j]})")
    if np.any(np.diag(arr) != 0):
        raise InvariantViolation(f"{label} must have a zero diagonal")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Instance:
    """One shift: micro-routes, travel matrices and vehicle limits."""

    case_kind: CaseKind
    micro_routes: tuple
    d: np.ndarray
    h: np.ndarray
    capacity: float
    time_limit: float
    max_routes: Optional[int] = None
    transfer: Optional[TransferSpec] = None
    service_model: ServiceTimeModel = field(default_factory=ServiceTimeModel)
    waste_fraction: float = 1.0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "case_kind", CaseKind(self.case_kind))
        object.__setattr__(self, "micro_routes", tuple(self.micro_routes))
        ids = [m.id for m in self.micro_routes]
        if len(set(ids)) != len(ids):
            raise InvariantViolation("micro-route ids must be unique")
        size = len(self.stops)
        object.__setattr__(self, "d", _frozen_matrix(self.d, size, "d"))
        object.__setattr__(self, "h", _frozen_matrix(self.h, size, "h"))
        if not self.capacity > 0:
            raise InvariantViolation("capacity must be > 0")
        if not self.time_limit > 0:
            raise InvariantViolation("time limit must be > 0")
        if not self.waste_fraction > 0:
            raise InvariantViolation("waste fraction must be > 0")
        if self.max_routes is not None:
            if self.case_kind is not CaseKind.CURRENT_SITUATION:
                raise InvariantViolation("max_routes applies to the current-situation case only")
            if self.max_routes < 1:
                raise InvariantViolation("max_routes must be >= 1")
        if self.transfer is not None and self.case_kind is not CaseKind.TRANSFER_STATION:
            raise InvariantViolation("transfer data applies to the transfer-station case only")

    # -- structure -------------------------------------------------------
    @property
    def is_cs(self) -> bool:
        return self.case_kind is CaseKind.CURRENT_SITUATION

    @cached_property
    def stops(self) -> tuple:
        head = (DEPOT, LANDFILL) if self.is_cs else (DEPOT,)
        return head + tuple(m.id for m in self.micro_routes)

    @cached_property
    def _node_of(self) -> dict:
        return {s: i for i, s in enumerate(self.stops)}

    @property
    def first_micro_node(self) -> int:
        return 2 if self.is_cs else 1

    @property
    def n(self) -> int:
        return len(self.micro_routes)

    @property
    def route_limit(self) -> int:
        """Route budget K; defaults to one route per micro-route."""
        if self.max_routes is not None:
            return self.max_routes
        return max(1, self.n)

    def node(self, stop: Stop) -> int:
        try:
            return self._node_of[stop]
        except (KeyError, TypeError):
            raise UnknownStop(f"stop {stop!r} does not exist in this instance") from None

    def micro(self, micro_id: int) -> MicroRoute:
        return self.micro_routes[self.node(micro_id) - self.first_micro_node]

    def dist(self, a: Stop, b: Stop) -> float:
        return float(self.d[self.node(a), self.node(b)])

    def travel(self, a: Stop, b: Stop) -> float:
        return float(self.h[self.node(a), self.node(b)])

    # -- derived per-micro data -------------------------------------------
    @cached_property
    def waste(self) -> dict:
        """Effective waste q_i per micro-route id at this instance's fraction."""
        return {m.id: m.base_waste * self.waste_fraction for m in self.micro_routes}

    @cached_property
    def service_times(self) -> dict:
        out = {}
        for m in self.micro_routes:
            if m.service_time is not None and self.waste_fraction == 1.0:
                out[m.id] = m.service_time
            else:
                out[m.id] = service_time(self.service_model, m.internal_distance, self.waste[m.id]).hours
        return out

    @cached_property
    def clamped_micro_routes(self) -> tuple:
        """Ids whose regression speed hit the floor at this waste fraction."""
        return tuple(
            m.id
            for m in self.micro_routes
            if service_time(self.service_model, m.internal_distance, self.waste[m.id]).clamped
        )

    @property
    def total_waste(self) -> float:
        return sum(self.waste.values())

    def check_demand(self) -> None:
        for m in self.micro_routes:
            if self.waste[m.id] > self.capacity + EPS:
                raise InfeasibleDemand(
                    f"micro-route {m.id} needs {self.waste[m.id]:.2f} kg > capacity {self.capacity:.2f} kg"
                )

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.case_kind == other.case_kind
            and self.micro_routes == other.micro_routes
            and np.array_equal(self.d, other.d)
            and np.array_equal(self.h, other.h)
            and self.capacity == other.capacity
            and self.time_limit == other.time_limit
            and self.max_routes == other.max_routes
            and self.transfer == other.transfer
            and self.service_model == other.service_model
            and self.waste_fraction == other.waste_fraction
            and self.name == other.name
        )

    __hash__ = object.__hash__

    def with_matrices(self, d=None, h=None) -> "Instance":
        return replace(self, d=self.d if d is None else d, h=self.h if h is None else h)


def scale_scenario(instance: Instance, scenario: Union[Scenario, float]) -> Instance:
    """Copy of ``instance`` whose waste is multiplied by the scenario fraction.

    Service times follow from the regression at the new waste levels.
    """
    if not isinstance(scenario, Scenario):
        scenario = Scenario(float(scenario))
    scaled = replace(instance, waste_fraction=instance.waste_fraction * scenario.waste_fraction)
    scaled.check_demand()
    return scaled


# -- serialization ---------------------------------------------------------

INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["case_kind", "capacity_Q", "time_limit_T", "micro_routes", "stops", "d_km", "h_h"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "case_kind": {"enum": [c.value for c in CaseKind]},
        "capacity_Q": {"type": "number"},
        "time_limit_T": {"type": "number"},
        "max_routes_K": {"type": "integer"},
        "waste_fraction": {"type": "number"},
        "transfer": {
            "type": "object",
            "required": ["large_capacity_kg", "roundtrip_to_landfill_km"],
            "additionalProperties": False,
            "properties": {
                "large_capacity_kg": {"type": "number"},
                "roundtrip_to_landfill_km": {"type": "number"},
            },
        },
        "service_time_model": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "intercept_kmh": {"type": "number"},
                "slope": {"type": "number"},
                "min_speed_floor_kmh": {"type": "number"},
            },
        },
        "micro_routes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "internal_distance_km", "base_waste_kg"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "integer"},
                    "internal_distance_km": {"type": "number"},
                    "base_waste_kg": {"type": "number"},
                    "area_km2": {"type": "number"},
                    "service_time_h": {"type": "number"},
                },
            },
        },
        "stops": {
            "type": "array",
            "items": {"anyOf": [{"enum": [DEPOT, LANDFILL]}, {"type": "integer"}]},
        },
        "d_km": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "h_h": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
    },
}


def instance_from_dict(data: dict) -> Instance:
    try:
        jsonschema.validate(data, INSTANCE_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{where}: {exc.message}") from None

    kind = CaseKind(data["case_kind"])
    micro_routes = [
        MicroRoute(
            id=m["id"],
            internal_distance=m["internal_distance_km"],
            base_waste=m["base_waste_kg"],
            area=m.get("area_km2"),
            service_time=m.get("service_time_h"),
        )
        for m in data["micro_routes"]
    ]
    stops = list(data["stops"])
    if len(set(map(repr, stops))) != len(stops):
        raise InvariantViolation("stops contain duplicates")
    if DEPOT not in stops:
        raise InvariantViolation("stops must include the depot row")
    if kind is CaseKind.CURRENT_SITUATION and LANDFILL not in stops:
        raise InvariantViolation("current-situation instance is missing the landfill row")
    if kind is CaseKind.TRANSFER_STATION and LANDFILL in stops:
        raise InvariantViolation("transfer-station instance must not address the landfill")
    micro_ids = [m.id for m in micro_routes]
    listed = [s for s in stops if s not in (DEPOT, LANDFILL)]
    if sorted(listed) != sorted(micro_ids):
        raise InvariantViolation("stops must list exactly the micro-route ids")

    head = [DEPOT, LANDFILL] if kind is CaseKind.CURRENT_SITUATION else [DEPOT]
    canonical = head + micro_ids
    for key in ("d_km", "h_h"):
        rows = data[key]
        if len(rows) != len(stops) or any(len(r) != len(stops) for r in rows):
            raise InvariantViolation(f"{key} must be a {len(stops)}x{len(stops)} matrix")
    perm = [stops.index(s) for s in canonical]
    d = np.array(data["d_km"], dtype=float)[np.ix_(perm, perm)]
    h = np.array(data["h_h"], dtype=float)[np.ix_(perm, perm)]

    transfer = None
    if "transfer" in data:
        t = data["transfer"]
        transfer = TransferSpec(t["large_capacity_kg"], t["roundtrip_to_landfill_km"])
    stm = data.get("service_time_model", {})
    model = ServiceTimeModel(
        intercept=stm.get("intercept_kmh", 35.0),
        slope=stm.get("slope", 0.0979),
        min_speed_floor=stm.get("min_speed_floor_kmh", 1.0),
    )
    inst = Instance(
        case_kind=kind,
        micro_routes=micro_routes,
        d=d,
        h=h,
        capacity=data["capacity_Q"],
        time_limit=data["time_limit_T"],
        max_routes=data.get("max_routes_K"),
        transfer=transfer,
        service_model=model,
        waste_fraction=data.get("waste_fraction", 1.0),
        name=data.get("name", ""),
    )
    inst.check_demand()
    return inst


def load_instance(raw: Union[bytes, str]) -> Instance:
    """Parse and fully validate a serialized instance."""
    try:
        data = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SchemaError(f"not valid JSON: {exc}") from None
    return instance_from_dict(data)


def load_instance_file(path) -> Instance:
    with open(path, "rb") as fh:
        return load_instance(fh.read())


def _num(x):
    x = float(x)
    return int(x) if x.is_integer() and abs(x) < 2**53 else x


def instance_to_dict(instance: Instance) -> dict:
    out = {}
    if instance.name:
        out["name"] = instance.name
    out["case_kind"] = instance.case_kind.value
    out["capacity_Q"] = _num(instance.capacity)
    out["time_limit_T"] = _num(instance.time_limit)
    if instance.max_routes is not None:
        out["max_routes_K"] = instance.max_routes
    if instance.waste_fraction != 1.0:
        out["waste_fraction"] = instance.waste_fraction
    if instance.transfer is not None:
        out["transfer"] = {
            "large_capacity_kg": _num(instance.transfer.large_capacity),
            "roundtrip_to_landfill_km": _num(instance.transfer.roundtrip_to_landfill),
        }
    if instance.service_model != ServiceTimeModel():
        sm = instance.service_model
        out["service_time_model"] = {
            "intercept_kmh": _num(sm.intercept),
            "slope": _num(sm.slope),
            "min_speed_floor_kmh": _num(sm.min_speed_floor),
        }
    routes = []
    for m in instance.micro_routes:
        rec = {"id": m.id, "internal_distance_km": _num(m.internal_distance), "base_waste_kg": _num(m.base_waste)}
        if m.area is not None:
            rec["area_km2"] = _num(m.area)
        if m.service_time is not None:
            rec["service_time_h"] = _num(m.service_time)
        routes.append(rec)
    out["micro_routes"] = routes
    out["stops"] = list(instance.stops)
    out["d_km"] = [[_num(v) for v in row] for row in instance.d.tolist()]
    out["h_h"] = [[_num(v) for v in row] for row in instance.h.tolist()]
    return out


def save_instance(instance: Instance) -> bytes:
    """Canonical JSON encoding; ``load_instance`` inverts it exactly."""
    return (json.dumps(instance_to_dict(instance), indent=1) + "\n").encode()


def micro_ids(instance: Instance) -> Sequence[int]:
    return [m.id for m in instance.micro_routes]


def ceil_div(a: float, b: float) -> int:
    """Ceiling of a / b, forgiving float noise just above a positive integer."""
    x = a / b
    r = round(x)
    if (r >= 1 or x <= 0) and abs(x - r) <= 1e-12 * max(1.0, abs(x)):
        return int(r)
    return math.ceil(x)
