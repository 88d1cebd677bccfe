"""The two routing formulations as :class:`MilpModel` objects.

Current situation (depot plus landfill): a three-index vehicle-flow model
with arc binaries ``X_i_j_k`` and arc loads ``V_i_j_k``. The landfill is a
single node of unrestricted degree, so a route may unload several times.

Transfer station (depot doubles as unload point): a two-index model with arc
binaries ``Y_i_j`` plus load potentials ``U_i`` and time potentials ``T_i``
that rule out subtours. Every depot-to-depot trip is bounded by capacity and
by the time limit.

Variant flags:

* ``time_accounting`` (current situation). ``"literal"`` keeps the rows as
  originally written: the duration row charges ``s_j + h_ij`` on
  micro-to-micro arcs only, the load balance ignores arcs leaving the
  landfill and the capacity link covers micro-to-micro arcs only. ``"full"``
  charges every arc's travel time plus every service time and bounds the
  load on micro-to-landfill legs too, which is what makes the model agree
  with :func:`wasteroute.evaluator.evaluate_route`.
* ``degree_repair`` (transfer station). ``"literal"`` takes the successor
  and predecessor sums over micro-routes only, which leaves no way in or out
  of the depot and is infeasible whenever any waste exists. ``"repaired"``
  lets those sums include the depot.
"""

from __future__ import annotations

from ..core import DEPOT, LANDFILL, Instance
from ..errors import WrongCaseKind
from .model import BINARY, CONTINUOUS, EQ, LE, Constraint, MilpModel, Variable, VarKey

FULL = "full"
LITERAL = "literal"
REPAIRED = "repaired"


def token(stop) -> str:
    if stop == DEPOT:
        return "0"
    if stop == LANDFILL:
        return "L"
    return str(stop)


def _xname(fam, i, j, k=None):
    parts = [fam, token(i), token(j)]
    if k is not None:
        parts.append(str(k))
    return "_".join(parts)


def cs_arcs(instance: Instance):
    """Arcs of the current-situation graph; micro-to-depot arcs never exist."""
    stops = instance.stops
    return [
        (a, b)
        for a in stops
        for b in stops
        if a != b and not (not isinstance(a, str) and b == DEPOT)
    ]


def build_cs_model(instance: Instance, time_accounting: str = FULL, routes: int = None) -> MilpModel:
    if not instance.is_cs:
        raise WrongCaseKind("current-situation model needs a CurrentSituation instance")
    if time_accounting not in (FULL, LITERAL):
        raise ValueError(f"unknown time accounting {time_accounting!r}")
    full = time_accounting == FULL
    K = routes if routes is not None else instance.route_limit
    if K < 1:
        raise ValueError("need at least one route")
    Q, T = instance.capacity, instance.time_limit
    q, s = instance.waste, instance.service_times
    M = [m.id for m in instance.micro_routes]
    arcs = cs_arcs(instance)
    arcset = set(arcs)
    ks = range(1, K + 1)

    def X(i, j, k):
        return _xname("X", i, j, k)

    def V(i, j, k):
        return _xname("V", i, j, k)

    variables = [Variable(X(i, j, k), BINARY, 0.0, 1.0, VarKey("X", i, j, k)) for i, j in arcs for k in ks]
    variables += [Variable(V(i, j, k), CONTINUOUS, key=VarKey("V", i, j, k)) for i, j in arcs for k in ks]
    objective = tuple((X(i, j, k), instance.dist(i, j)) for i, j in arcs for k in ks)

    rows = []

    def add(name, terms, sense, rhs, family):
        rows.append(Constraint(name, tuple(terms), sense, float(rhs), family))

    for i in M:
        add(f"visit_{token(i)}", [(X(i, j, k), 1.0) for j in instance.stops if (i, j) in arcset for k in ks],
            EQ, 1, "visit")
    for k in ks:
        add(f"depart_{k}", [(X(DEPOT, j, k), 1.0) for j in [LANDFILL] + M], LE, 1, "depart")
    for j in instance.stops:
        for k in ks:
            terms = [(X(i, j, k), 1.0) for i in instance.stops if (i, j) in arcset]
            terms += [(X(j, i, k), -1.0) for i in instance.stops if (j, i) in arcset]
            add(f"flow_{token(j)}_{k}", terms, EQ, 0, "flow")
    for i in M + [DEPOT]:
        for k in ks:
            add(f"emptyL_{token(i)}_{k}", [(V(LANDFILL, i, k), 1.0)], EQ, 0, "empty_after_landfill")
    for i in M + [LANDFILL]:
        for k in ks:
            add(f"empty0_{token(i)}_{k}", [(V(DEPOT, i, k), 1.0)], EQ, 0, "empty_after_depot")
    preds = [DEPOT, LANDFILL] + M if full else [DEPOT] + M
    for j in M:
        for k in ks:
            terms = [(V(i, j, k), 1.0) for i in preds if i != j]
            terms += [(V(j, i, k), -1.0) for i in M + [LANDFILL] if i != j]
            terms += [(X(i, j, k), Q) for i in preds if i != j]
            add(f"balance_{token(j)}_{k}", terms, LE, Q - q[j], "balance")
    heads = M + [LANDFILL] if full else M
    for i in M:
        for j in heads:
            if i == j:
                continue
            for k in ks:
                add(f"cap_{token(i)}_{token(j)}_{k}", [(V(i, j, k), 1.0), (X(i, j, k), -Q)], LE, 0, "capacity")
    for i in M + [LANDFILL]:
        for j in M + [LANDFILL]:
            if i == j:
                continue
            for k in ks:
                terms = [(X(i, j, k), 1.0)] + [(X(DEPOT, g, k), -1.0) for g in M]
                add(f"link_{token(i)}_{token(j)}_{k}", terms, LE, 0, "depot_link")
    for k in ks:
        terms = []
        for i, j in arcs:
            micro_head = not isinstance(j, str)
            if full:
                coef = instance.travel(i, j) + (s[j] if micro_head else 0.0)
            elif micro_head and not isinstance(i, str):
                coef = instance.travel(i, j) + s[j]
            else:
                continue
            terms.append((X(i, j, k), coef))
        add(f"time_{k}", terms, LE, T, "duration")

    return MilpModel(
        name=instance.name or "current_situation",
        variables=tuple(variables),
        constraints=tuple(rows),
        objective=objective,
        formulation="CS",
        variant=time_accounting,
        routes=K,
    )


def build_ts_model(instance: Instance, degree_repair: str = REPAIRED) -> MilpModel:
    if instance.is_cs:
        raise WrongCaseKind("transfer-station model needs a TransferStation instance")
    if degree_repair not in (REPAIRED, LITERAL):
        raise ValueError(f"unknown degree repair {degree_repair!r}")
    Q, T = instance.capacity, instance.time_limit
    q, s = instance.waste, instance.service_times
    M = [m.id for m in instance.micro_routes]
    nodes = [DEPOT] + M
    arcs = [(a, b) for a in nodes for b in nodes if a != b]

    def Y(i, j):
        return _xname("Y", i, j)

    variables = [Variable(Y(i, j), BINARY, 0.0, 1.0, VarKey("Y", i, j)) for i, j in arcs]
    variables += [Variable(f"U_{token(i)}", CONTINUOUS, q[i], Q, VarKey("U", i)) for i in M]
    variables += [Variable(f"T_{token(i)}", CONTINUOUS, 0.0, T, VarKey("T", i)) for i in nodes]
    objective = tuple((Y(i, j), instance.dist(i, j)) for i, j in arcs)

    rows = []

    def add(name, terms, sense, rhs, family):
        rows.append(Constraint(name, tuple(terms), sense, float(rhs), family))

    around = nodes if degree_repair == REPAIRED else M
    for i in M:
        add(f"succ_{token(i)}", [(Y(i, j), 1.0) for j in around if j != i], EQ, 1, "successor")
    for i in M:
        add(f"pred_{token(i)}", [(Y(j, i), 1.0) for j in around if j != i], EQ, 1, "predecessor")
    for i in M:
        for j in M:
            if i != j:
                add(f"mtz_{token(i)}_{token(j)}",
                    [(f"U_{token(i)}", 1.0), (f"U_{token(j)}", -1.0), (Y(i, j), Q)], LE, Q - q[j], "load_order")
    for i in nodes:
        for j in M:
            if i != j:
                add(f"tprop_{token(i)}_{token(j)}",
                    [(f"T_{token(i)}", 1.0), (f"T_{token(j)}", -1.0), (Y(i, j), T)],
                    LE, T - s[j] - instance.travel(i, j), "time_order")
    for i in M:
        add(f"tret_{token(i)}", [(f"T_{token(i)}", 1.0), (Y(i, DEPOT), T)],
            LE, 2 * T - instance.travel(i, DEPOT), "return_time")

    return MilpModel(
        name=instance.name or "transfer_station",
        variables=tuple(variables),
        constraints=tuple(rows),
        objective=objective,
        formulation="TS",
        variant=degree_repair,
    )


def build_model(instance: Instance, time_accounting: str = FULL, degree_repair: str = REPAIRED) -> MilpModel:
    if instance.is_cs:
        return build_cs_model(instance, time_accounting)
    return build_ts_model(instance, degree_repair)
