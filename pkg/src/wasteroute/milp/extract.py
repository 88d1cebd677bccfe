"""Translation between MILP assignments and routing plans."""

from __future__ import annotations

import json
from typing import Dict, List, Mapping

from ..core import DEPOT, Instance
from ..errors import ConstraintViolation, DisconnectedTour, FractionalSolution, SchemaError
from ..evaluator import RoutingPlan, split_trips
from .formulations import _xname, token
from .model import MilpModel


def _cs_route_values(instance: Instance, model: MilpModel, route, k: int) -> Dict[str, float]:
    q = instance.waste
    out: Dict[str, float] = {}
    load = 0.0
    for a, b in zip(route, route[1:]):
        load = 0.0 if isinstance(a, str) else load + q[a]
        name = _xname("X", a, b, k)
        if name not in model:
            raise ConstraintViolation(f"arc {a}->{b} does not exist in the model")
        out[name] = out.get(name, 0.0) + 1.0
        vname = _xname("V", a, b, k)
        out[vname] = out.get(vname, 0.0) + load
    return out


def induced_assignment(instance: Instance, model: MilpModel, plan: RoutingPlan) -> Dict[str, float]:
    """The 0/1 arc values a plan switches on, plus its tightest loads and times.

    Current-situation routes map to route indices 1, 2, ... in plan order;
    transfer-station routes are cut into depot-to-depot trips.
    """
    values = {v.name: 0.0 for v in model.variables}
    q, s = instance.waste, instance.service_times
    if model.formulation == "CS":
        routes = [r for r in plan.routes if len(r) > 2]
        if len(routes) > model.routes:
            raise ConstraintViolation(f"plan uses {len(routes)} routes, model has {model.routes}")
        for k, route in enumerate(routes, start=1):
            values.update(_cs_route_values(instance, model, route, k))
        return values

    for route in plan.routes:
        for trip in split_trips(route):
            load = 0.0
            t = 0.0
            for a, b in zip(trip, trip[1:]):
                name = _xname("Y", a, b)
                if name not in model:
                    raise ConstraintViolation(f"arc {a}->{b} does not exist in the model")
                values[name] += 1.0
                if b != DEPOT:
                    load += q[b]
                    t += instance.travel(a, b) + s[b]
                    values[f"U_{token(b)}"] = load
                    values[f"T_{token(b)}"] = t
    return values


def _active_arcs(model: MilpModel, values: Mapping[str, float], family: str):
    by_k: Dict[object, list] = {}
    for v in model.variables:
        if v.key is None or v.key.family != family:
            continue
        if values.get(v.name, 0.0) > 0.5:
            by_k.setdefault(v.key.k, []).append((v.key.i, v.key.j))
    return by_k


def _euler_from_depot(instance: Instance, arcs) -> list:
    adj: Dict[object, list] = {}
    for a, b in arcs:
        adj.setdefault(a, []).append(b)
    for a in adj:
        # pop() takes the last element, so sort descending to walk in node order
        adj[a].sort(key=instance.node, reverse=True)
    if DEPOT not in adj:
        raise DisconnectedTour("route has arcs but never leaves the depot")
    stack, circuit = [DEPOT], []
    while stack:
        u = stack[-1]
        if adj.get(u):
            stack.append(adj[u].pop())
        else:
            circuit.append(stack.pop())
    circuit.reverse()
    if len(circuit) - 1 != len(arcs) or circuit[-1] != DEPOT:
        raise DisconnectedTour("active arcs do not form a single tour through the depot")
    return circuit


def _walk_trips(instance: Instance, arcs) -> List[list]:
    succ: Dict[object, list] = {}
    for a, b in arcs:
        succ.setdefault(a, []).append(b)
    trips = []
    used = 0
    for first in sorted(succ.get(DEPOT, []), key=instance.node):
        trip = [DEPOT, first]
        used += 1
        cur = first
        while cur != DEPOT:
            nxt = succ.get(cur, [])
            if len(nxt) != 1 or len(trip) > len(arcs) + 1:
                raise DisconnectedTour(f"trip through {cur} does not lead back to the depot")
            cur = nxt[0]
            trip.append(cur)
            used += 1
        trips.append(trip)
    if used != len(arcs):
        raise DisconnectedTour("some active arcs form a cycle that skips the depot")
    return trips


def extract_plan(instance: Instance, model: MilpModel, assignment: Mapping[str, float], tol: float = 1e-6) -> RoutingPlan:
    """Turn a feasible MILP assignment into a :class:`RoutingPlan`.

    Continuous variables absent from ``assignment`` are completed with the
    tightest values the binary part allows before every row is checked.
    """
    values = {}
    for name, val in assignment.items():
        if name not in model:
            raise SchemaError(f"assignment names unknown variable {name!r}")
        values[name] = float(val)
    for v in model.binaries:
        x = values.get(v.name, 0.0)
        if min(abs(x), abs(x - 1.0)) > tol:
            raise FractionalSolution(f"{v.name} = {x} is not integral")

    missing = {v.name for v in model.variables if not v.is_binary and v.name not in values}
    known_rows = [c for c in model.constraints if not any(t in missing for t, _ in c.terms)]
    bad = [c.name for c in known_rows if c.slack_violation(values) > tol]
    if bad:
        raise ConstraintViolation(f"{len(bad)} constraints violated, first: {bad[0]}", bad)

    completed: Dict[str, float] = {}
    if model.formulation == "CS":
        routes = []
        for k, arcs in sorted(_active_arcs(model, values, "X").items()):
            tour = _euler_from_depot(instance, arcs)
            routes.append(tour)
            completed.update(_cs_route_values(instance, model, tour, k))
        plan = RoutingPlan(routes)
    else:
        arcs = _active_arcs(model, values, "Y").get(None, [])
        plan = RoutingPlan(_walk_trips(instance, arcs))
        if missing:
            completed = induced_assignment(instance, model, plan)
    for name in missing:
        # potentials of unvisited nodes sit at their lower bound
        values[name] = max(completed.get(name, 0.0), model[name].lower)

    bad = model.violated(values, tol)
    if bad:
        raise ConstraintViolation(f"{len(bad)} constraints violated, first: {bad[0]}", bad)
    return plan


def load_assignment(raw) -> Dict[str, float]:
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from None
    if not isinstance(data, dict) or not all(isinstance(v, (int, float)) for v in data.values()):
        raise SchemaError("assignment must be a JSON object of variable name -> number")
    return {str(k): float(v) for k, v in data.items()}
