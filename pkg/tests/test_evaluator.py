import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wasteroute.core import DEPOT as D
from wasteroute.core import LANDFILL as L
from wasteroute.core import ServiceTimeModel, service_time
from wasteroute.errors import DuplicateMicroRoute, MalformedRoute, MissingMicroRoute, SchemaError, UnknownStop
from wasteroute.evaluator import (
    CAPACITY,
    ILLEGAL_DEPOT,
    ILLEGAL_LANDFILL,
    LITERAL,
    MISSING_LANDFILL,
    ROUTE_LIMIT,
    TIME_LIMIT,
    RoutingPlan,
    consolidate_trips,
    evaluate_plan,
    evaluate_route,
    metrics_csv,
    metrics_dict,
    metrics_table,
    sequence_label,
    split_trips,
)
from wasteroute.synthetic import random_instance

from conftest import make_instance


def kinds(metrics):
    return {v.kind for v in metrics.violations}


def route_8_instance():
    # arcs chosen so the route totals 72.98 km and 5.25 h
    s8 = service_time(ServiceTimeModel(), 47.09, 11811.0).hours
    d = np.array([[0, 10.39, 5.0], [10.39, 0, 9.0], [5.2, 10.5, 0]])
    arc_time = 5.25 - s8
    h = np.array([[0, 0.3, arc_time * 0.2], [0.3, 0, 0.3], [0.2, arc_time * 0.4, 0]])
    h[1, 0] = arc_time * 0.4
    return make_instance("CS", d, [11811.0], internal=[47.09], h=h, ids=[8])


def test_single_micro_route_8_totals():
    inst = route_8_instance()
    m = evaluate_route(inst, [D, 8, L, D])
    assert m.feasible
    assert m.waste_collected == 11811.0
    assert m.distance == pytest.approx(72.98, abs=1e-9)
    assert m.duration == pytest.approx(5.25, abs=1e-9)
    assert [leg.load for leg in m.legs] == [0.0, 11811.0, 0.0]
    assert sequence_label([D, 8, L, D], depot="A") == "A-8-L-A"


def test_empty_route():
    inst = random_instance(3, 1, "CS")
    m = evaluate_route(inst, [D, D])
    assert (m.distance, m.duration, m.feasible, m.is_empty) == (0.0, 0.0, True, True)


def two_micro_cs(Q=15750.0, T=12.0, waste=(9000.0, 9000.0), K=None):
    d = [[0, 14, 3, 4], [14, 0, 15, 16], [3, 15, 0, 2], [4, 16, 2, 0]]
    return make_instance("CS", d, list(waste), internal=[80.0, 80.0], Q=Q, T=T, K=K)


def test_capacity_violation_without_landfill_between():
    inst = two_micro_cs()
    m = evaluate_route(inst, [D, 1, 2, L, D])
    assert kinds(m) == {CAPACITY}
    assert max(leg.load for leg in m.legs) == 18000.0
    ok = evaluate_route(inst, [D, 1, L, 2, L, D])
    assert ok.feasible and max(leg.load for leg in ok.legs) == 9000.0


def test_time_limit_violation():
    inst = two_micro_cs(T=1.0)
    assert TIME_LIMIT in kinds(evaluate_route(inst, [D, 1, L, D]))


def test_full_duration_is_arcs_plus_service():
    inst = two_micro_cs()
    route = [D, 1, L, 2, L, D]
    m = evaluate_route(inst, route)
    arcs = sum(inst.travel(a, b) for a, b in zip(route, route[1:]))
    assert m.duration == pytest.approx(arcs + inst.service_times[1] + inst.service_times[2], rel=1e-12)
    assert m.arc_distance == pytest.approx(3 + 15 + 16 + 16 + 14)
    assert m.distance == pytest.approx(m.arc_distance + 160.0)


def test_literal_duration_counts_micro_to_micro_only():
    inst = two_micro_cs(waste=(5000.0, 5000.0))
    m = evaluate_route(inst, [D, 1, 2, L, D], LITERAL)
    assert m.duration == pytest.approx(inst.travel(1, 2) + inst.service_times[2], rel=1e-12)


def test_missing_landfill_before_depot():
    inst = two_micro_cs(waste=(5000.0, 5000.0))
    assert kinds(evaluate_route(inst, [D, 1, 2, D])) == {MISSING_LANDFILL}


def test_landfill_first_is_illegal():
    inst = two_micro_cs(waste=(5000.0, 5000.0))
    assert ILLEGAL_LANDFILL in kinds(evaluate_route(inst, [D, L, 1, 2, L, D]))


def test_depot_revisit_in_current_situation():
    inst = two_micro_cs()
    assert ILLEGAL_DEPOT in kinds(evaluate_route(inst, [D, 1, L, D, 2, L, D]))


def test_transfer_station_chained_trips_and_landfill():
    d = [[0, 3, 4], [3, 0, 2], [4, 2, 0]]
    inst = make_instance("TS", d, [9000.0, 9000.0], internal=[80.0, 80.0])
    chained = evaluate_route(inst, [D, 1, D, 2, D])
    assert chained.feasible
    assert [leg.load for leg in chained.legs] == [0.0, 9000.0, 0.0, 9000.0]
    assert split_trips([D, 1, D, 2, D]) == [[D, 1, D], [D, 2, D]]
    with pytest.raises(UnknownStop):
        evaluate_route(inst, [D, 1, L, D])


def test_malformed_routes():
    inst = two_micro_cs()
    with pytest.raises(MalformedRoute):
        evaluate_route(inst, [1, L, D])
    with pytest.raises(MalformedRoute):
        evaluate_route(inst, [D, 1, 1, L, D])
    with pytest.raises(MalformedRoute):
        evaluate_route(inst, [D, 1, L, L, D])
    with pytest.raises(UnknownStop):
        evaluate_route(inst, [D, 7, L, D])


def test_coverage_errors():
    inst = two_micro_cs(waste=(5000.0, 5000.0))
    with pytest.raises(MissingMicroRoute):
        evaluate_plan(inst, RoutingPlan([[D, 1, L, D]]))
    with pytest.raises(DuplicateMicroRoute):
        evaluate_plan(inst, RoutingPlan([[D, 1, 2, L, D], [D, 1, L, D]]))


def test_route_limit():
    inst = two_micro_cs(K=1)
    plan = RoutingPlan([[D, 1, L, D], [D, 2, L, D]])
    m = evaluate_plan(inst, plan)
    assert not m.feasible and {v.kind for v in m.violations} == {ROUTE_LIMIT}
    assert evaluate_plan(inst, RoutingPlan([[D, 1, L, 2, L, D]])).feasible


def test_plan_totals_are_column_sums():
    inst = two_micro_cs()
    plan = RoutingPlan([[D, 1, L, D], [D, 2, L, D]])
    m = evaluate_plan(inst, plan)
    assert m.feasible and m.vehicles_used == 2
    assert m.total_distance == sum(r.distance for r in m.per_route)
    assert m.total_duration == sum(r.duration for r in m.per_route)
    assert m.total_waste == 18000.0


def random_cs_plan(inst, rng):
    ids = [m.id for m in inst.micro_routes]
    rng.shuffle(ids)
    cut = sorted(rng.sample(range(1, len(ids)), min(2, len(ids) - 1))) if len(ids) > 1 else []
    groups, prev = [], 0
    for c in cut + [len(ids)]:
        groups.append(ids[prev:c])
        prev = c
    routes = []
    for g in groups:
        r = [D]
        for i, m in enumerate(g):
            r.append(m)
            if i < len(g) - 1 and rng.random() < 0.3:
                r.append(L)
        routes.append(r + [L, D])
    return RoutingPlan(routes)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 7), st.integers(0, 10_000), st.randoms(use_true_random=False))
def test_route_order_and_empty_routes_do_not_matter(n, seed, rng):
    inst = random_instance(n, seed, "CS")
    plan = random_cs_plan(inst, rng)
    base = evaluate_plan(inst, plan)
    shuffled = list(plan.routes)
    rng.shuffle(shuffled)
    other = evaluate_plan(inst, RoutingPlan(shuffled + [[D, D]]))
    assert other.total_distance == pytest.approx(base.total_distance, rel=1e-12)
    assert other.total_duration == pytest.approx(base.total_duration, rel=1e-12)
    assert other.vehicles_used == base.vehicles_used
    assert other.feasible == base.feasible


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 7), st.integers(0, 10_000), st.randoms(use_true_random=False))
def test_extra_landfill_never_raises_a_load(n, seed, rng):
    inst = random_instance(n, seed, "CS")
    route = list(random_cs_plan(inst, rng).routes[0])
    spots = [i for i in range(2, len(route) - 1) if route[i - 1] != L and route[i] != L]
    if not spots:
        return
    i = rng.choice(spots)
    before = evaluate_route(inst, route)
    after = evaluate_route(inst, route[:i] + [L] + route[i:])
    peak = {}
    for leg in before.legs:
        if not isinstance(leg.dest, str):
            peak[leg.dest] = leg.load
    for leg in after.legs:
        if not isinstance(leg.dest, str):
            assert leg.load <= peak[leg.dest] + 1e-9


def test_consolidate_keeps_distance_and_packs_trips():
    inst = random_instance(6, 4, "TS", "city")
    trips = RoutingPlan([[D, m.id, D] for m in inst.micro_routes])
    packed = consolidate_trips(inst, trips)
    a, b = evaluate_plan(inst, trips), evaluate_plan(inst, packed)
    assert b.feasible
    assert b.total_arc_distance == pytest.approx(a.total_arc_distance, rel=1e-12)
    assert b.vehicles_used <= a.vehicles_used
    assert all(r.duration <= inst.time_limit + 1e-9 for r in b.per_route)
    cs = random_instance(3, 4, "CS")
    plan = RoutingPlan([[D, 1, 2, 3, L, D]])
    assert consolidate_trips(cs, plan) is plan


def test_reports():
    inst = two_micro_cs()
    plan = RoutingPlan([[D, 1, L, D], [D, 2, L, D]])
    m = evaluate_plan(inst, plan)
    table = metrics_table(plan, m)
    assert "D-1-L-D" in table and "Total" in table
    assert metrics_csv(plan, m).splitlines()[0].startswith("Route,Sequence of stops")
    assert metrics_dict(plan, m)["vehicles_used"] == 2


def test_plan_json_round_trip():
    plan = RoutingPlan([[D, 8, L, D], [D, 1, L, 13, L, D]])
    assert RoutingPlan.from_json(plan.to_json()) == plan
    with pytest.raises(SchemaError):
        RoutingPlan.from_json('{"routes": [["depot", "school", "depot"]]}')
    with pytest.raises(SchemaError):
        RoutingPlan.from_json("[]")
