"""Feasibility checks and metrics for routing plans.

A route is a list of stops that starts and ends at the depot. In the
current-situation case the vehicle unloads at the landfill, must pass there
right before returning, and never revisits the depot mid-route. In the
transfer-station case the depot doubles as the unload point, so a route may
chain several depot-to-depot trips (``D-1-D-13-D``).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, List, NamedTuple, Sequence

from .core import DEPOT, EPS, LANDFILL, Instance, Stop
from .errors import (
    DuplicateMicroRoute,
    MalformedRoute,
    MissingMicroRoute,
    SchemaError,
)

FULL = "full"
LITERAL = "literal"

# violation tags
CAPACITY = "Capacity"
TIME_LIMIT = "TimeLimit"
MISSING_LANDFILL = "MissingLandfillBeforeDepot"
ILLEGAL_LANDFILL = "IllegalLandfill"
ILLEGAL_DEPOT = "IllegalDepotRevisit"
ROUTE_LIMIT = "RouteLimit"


class Leg(NamedTuple):
    origin: Stop
    dest: Stop
    load: float


class Violation(NamedTuple):
    kind: str
    detail: str


@dataclass(frozen=True)
class RouteMetrics:
    distance: float  # arcs plus internal micro-route paths
    arc_distance: float
    duration: float
    legs: tuple
    waste_collected: float
    micro_routes: tuple
    violations: tuple = ()

    @property
    def feasible(self) -> bool:
        return not self.violations

    @property
    def is_empty(self) -> bool:
        return not self.micro_routes


@dataclass(frozen=True)
class PlanMetrics:
    total_distance: float
    total_arc_distance: float
    total_duration: float
    vehicles_used: int
    per_route: tuple
    violations: tuple = ()

    @property
    def feasible(self) -> bool:
        return not self.violations and all(r.feasible for r in self.per_route)

    @property
    def total_waste(self) -> float:
        return sum(r.waste_collected for r in self.per_route)


@dataclass(frozen=True)
class RoutingPlan:
    routes: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "routes", tuple(tuple(r) for r in self.routes))

    @property
    def micro_ids(self) -> List[int]:
        return [s for r in self.routes for s in r if not isinstance(s, str)]

    def nonempty(self) -> "RoutingPlan":
        return RoutingPlan(r for r in self.routes if any(not isinstance(s, str) for s in r))

    def to_dict(self) -> dict:
        return {"routes": [list(r) for r in self.routes]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict()) + "\n"

    @classmethod
    def from_dict(cls, data) -> "RoutingPlan":
        if not isinstance(data, dict) or not isinstance(data.get("routes"), list):
            raise SchemaError("plan must be an object with a 'routes' list")
        routes = []
        for r in data["routes"]:
            if not isinstance(r, list):
                raise SchemaError("each route must be a list of stops")
            for s in r:
                if not (s in (DEPOT, LANDFILL) or (isinstance(s, int) and not isinstance(s, bool))):
                    raise SchemaError(f"bad stop {s!r}")
            routes.append(r)
        return cls(routes)

    @classmethod
    def from_json(cls, raw) -> "RoutingPlan":
        try:
            return cls.from_dict(json.loads(raw))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from None


def sequence_label(route: Sequence[Stop], depot: str = "D", landfill: str = "L") -> str:
    """``["depot", 8, "landfill", "depot"]`` -> ``"D-8-L-D"``."""
    names = {DEPOT: depot, LANDFILL: landfill}
    return "-".join(names.get(s, str(s)) if isinstance(s, str) else str(s) for s in route)


def evaluate_route(instance: Instance, route: Sequence[Stop], accounting: str = FULL) -> RouteMetrics:
    """Distance, duration, leg loads and every constraint breach of one route.

    ``accounting="full"`` charges all travel plus every service time;
    ``"literal"`` charges only micro-to-micro travel and the service of the
    micro-route reached, which is how the route-duration row of the
    current-situation model is written.
    """
    route = list(route)
    if len(route) < 2 or route[0] != DEPOT or route[-1] != DEPOT:
        raise MalformedRoute(f"route must start and end at the depot: {route!r}")
    nodes = [instance.node(s) for s in route]
    if len(route) > 2:
        for a, b in zip(route, route[1:]):
            if a == b:
                raise MalformedRoute(f"stop {a!r} repeated back to back in {route!r}")
    is_cs = instance.is_cs
    d, h = instance.d, instance.h
    q, s = instance.waste, instance.service_times

    violations = []
    legs = []
    seen = []
    arc = 0.0
    internal = 0.0
    duration = 0.0
    load = 0.0
    collected = 0.0
    over = []
    for pos in range(len(route) - 1):
        a, b = route[pos], route[pos + 1]
        if not isinstance(a, str):
            load += q[a]
            collected += q[a]
        else:
            load = 0.0
        legs.append(Leg(a, b, load))
        if load > instance.capacity + EPS:
            over.append(f"{a}->{b} carries {load:.2f} kg")
        na, nb = nodes[pos], nodes[pos + 1]
        arc += float(d[na, nb])
        if accounting == FULL:
            duration += float(h[na, nb])
        elif not isinstance(a, str) and not isinstance(b, str):
            duration += float(h[na, nb])
        if not isinstance(b, str):
            seen.append(b)
            internal += instance.micro(b).internal_distance
            if accounting == FULL or not isinstance(a, str):
                duration += s[b]
        elif b == LANDFILL:
            if not is_cs:
                violations.append(Violation(ILLEGAL_LANDFILL, "transfer-station routes cannot visit the landfill"))
            elif not seen:
                violations.append(Violation(ILLEGAL_LANDFILL, "landfill visited before any micro-route"))
        elif b == DEPOT and pos + 1 < len(route) - 1 and is_cs:
            violations.append(Violation(ILLEGAL_DEPOT, "vehicle may leave the depot only once"))

    if over:
        violations.append(Violation(CAPACITY, "; ".join(over)))
    if duration > instance.time_limit + EPS:
        violations.append(
            Violation(TIME_LIMIT, f"duration {duration:.4f} h exceeds limit {instance.time_limit:.4f} h")
        )
    if is_cs and len(route) > 2 and route[-2] != LANDFILL:
        violations.append(Violation(MISSING_LANDFILL, f"stop before the final depot is {route[-2]!r}"))

    return RouteMetrics(
        distance=arc + internal,
        arc_distance=arc,
        duration=duration,
        legs=tuple(legs),
        waste_collected=collected,
        micro_routes=tuple(seen),
        violations=tuple(violations),
    )


def check_coverage(instance: Instance, plan: RoutingPlan) -> None:
    visited = plan.micro_ids
    for m in visited:
        instance.node(m)
    if len(set(visited)) != len(visited):
        dup = sorted({m for m in visited if visited.count(m) > 1})
        raise DuplicateMicroRoute(f"micro-routes visited more than once: {dup}")
    missing = sorted(set(m.id for m in instance.micro_routes) - set(visited))
    if missing:
        raise MissingMicroRoute(f"micro-routes never visited: {missing}")


def evaluate_plan(instance: Instance, plan: RoutingPlan, accounting: str = FULL) -> PlanMetrics:
    check_coverage(instance, plan)
    per_route = tuple(evaluate_route(instance, r, accounting) for r in plan.routes)
    vehicles = sum(1 for r in per_route if not r.is_empty)
    violations = []
    if instance.is_cs and vehicles > instance.route_limit:
        violations.append(Violation(ROUTE_LIMIT, f"{vehicles} routes exceed the limit of {instance.route_limit}"))
    return PlanMetrics(
        total_distance=sum(r.distance for r in per_route),
        total_arc_distance=sum(r.arc_distance for r in per_route),
        total_duration=sum(r.duration for r in per_route),
        vehicles_used=vehicles,
        per_route=per_route,
        violations=tuple(violations),
    )


def split_trips(route: Sequence[Stop]) -> List[list]:
    """Depot-to-depot pieces of a route."""
    trips, cur = [], [DEPOT]
    for s in list(route)[1:]:
        cur.append(s)
        if s == DEPOT:
            if len(cur) > 2:
                trips.append(cur)
            cur = [DEPOT]
    return trips


def consolidate_trips(instance: Instance, plan: RoutingPlan) -> RoutingPlan:
    """Chain transfer-station trips into as few vehicle shifts as first-fit allows.

    Arc distance is unchanged; only the vehicle count moves. Trips are packed
    by decreasing duration, each into the first vehicle that keeps within the
    time limit. Current-situation plans are returned untouched.
    """
    if instance.is_cs:
        return plan
    trips = [t for r in plan.routes for t in split_trips(r)]
    timed = []
    for t in trips:
        m = evaluate_route(instance, t)
        timed.append((-m.duration, min(m.micro_routes), t, m.duration))
    timed.sort(key=lambda x: (x[0], x[1]))
    vehicles: List[list] = []
    for _, _, trip, dur in timed:
        for v in vehicles:
            if v[0] + dur <= instance.time_limit + EPS:
                v[0] += dur
                v[1].append(trip)
                break
        else:
            vehicles.append([dur, [trip]])
    routes = []
    for _, vt in vehicles:
        vt.sort(key=lambda t: min(x for x in t if not isinstance(x, str)))
        route = [DEPOT]
        for t in vt:
            route.extend(t[1:])
        routes.append(route)
    routes.sort(key=lambda r: min(x for x in r if not isinstance(x, str)))
    return RoutingPlan(routes)


# -- reports -----------------------------------------------------------------

METRIC_COLUMNS = ["Route", "Sequence of stops", "Route distance [km]", "Route time [h]", "MSW collection [kg]"]


def metrics_rows(plan: RoutingPlan, metrics: PlanMetrics, depot_label="D"):
    rows = []
    k = 0
    for route, m in zip(plan.routes, metrics.per_route):
        if m.is_empty:
            continue
        k += 1
        rows.append([k, sequence_label(route, depot_label), m.distance, m.duration, m.waste_collected])
    return rows


def metrics_table(plan: RoutingPlan, metrics: PlanMetrics, depot_label="D") -> str:
    """Aligned text table, one line per nonempty route plus a totals line."""
    body = [
        [str(k), seq, f"{dist:,.2f}", f"{dur:.2f}", f"{w:,.2f}"]
        for k, seq, dist, dur, w in metrics_rows(plan, metrics, depot_label)
    ]
    body.append(["Total", "", f"{metrics.total_distance:,.2f}", f"{metrics.total_duration:.2f}",
                 f"{metrics.total_waste:,.2f}"])
    widths = [max(len(r[i]) for r in [METRIC_COLUMNS] + body) for i in range(len(METRIC_COLUMNS))]
    lines = []
    for r in [METRIC_COLUMNS] + body:
        cells = [r[0].rjust(widths[0]), r[1].ljust(widths[1])] + [c.rjust(w) for c, w in zip(r[2:], widths[2:])]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def metrics_csv(plan: RoutingPlan, metrics: PlanMetrics, depot_label="D") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRIC_COLUMNS)
    for k, seq, dist, dur, waste in metrics_rows(plan, metrics, depot_label):
        w.writerow([k, seq, f"{dist:.2f}", f"{dur:.2f}", f"{waste:.2f}"])
    return buf.getvalue()


def metrics_dict(plan: RoutingPlan, metrics: PlanMetrics) -> dict:
    return {
        "total_distance_km": metrics.total_distance,
        "total_arc_distance_km": metrics.total_arc_distance,
        "total_duration_h": metrics.total_duration,
        "vehicles_used": metrics.vehicles_used,
        "feasible": metrics.feasible,
        "violations": [list(v) for v in metrics.violations],
        "routes": [
            {
                "stops": list(route),
                "distance_km": m.distance,
                "arc_distance_km": m.arc_distance,
                "duration_h": m.duration,
                "waste_kg": m.waste_collected,
                "legs": [[str(l.origin), str(l.dest), l.load] for l in m.legs],
                "feasible": m.feasible,
                "violations": [list(v) for v in m.violations],
            }
            for route, m in zip(plan.routes, metrics.per_route)
        ],
    }


def iter_micro(route: Iterable[Stop]):
    return (s for s in route if not isinstance(s, str))
