import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wasteroute.core import (
    CaseKind,
    MicroRoute,
    Scenario,
    ServiceTimeModel,
    ceil_div,
    instance_to_dict,
    load_instance,
    save_instance,
    scale_scenario,
    service_time,
)
from wasteroute.errors import InfeasibleDemand, InvariantViolation, SchemaError, UnknownStop
from wasteroute.synthetic import random_instance

from conftest import MR22_KG, MR22_KM, make_instance

FRACTIONS = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.05, 1.1]
MR22_WASTE = [4762.00, 5714.40, 6666.80, 7619.20, 8571.60, 9524.00, 10000.20, 10476.40]
MR22_DENSITY = [124.95, 149.94, 174.94, 199.93, 224.92, 249.91, 262.40, 274.90]
MR22_SPEED = [22.77, 20.32, 17.88, 15.43, 12.99, 10.54, 9.32, 8.09]
MR22_HOURS = [1.67, 1.88, 2.13, 2.47, 2.93, 3.62, 4.09, 4.71]


def mr22_instance(**kw):
    d = [[0, 5, 7], [6, 0, 9], [8, 10, 0]]
    return make_instance("CS", d, [MR22_KG], internal=[MR22_KM], **kw)


@pytest.mark.parametrize("i", range(8))
def test_speed_table_for_micro_route_22(i):
    scaled = scale_scenario(mr22_instance(), FRACTIONS[i])
    q = scaled.waste[1]
    st_ = service_time(ServiceTimeModel(), MR22_KM, q)
    assert q == pytest.approx(MR22_WASTE[i], abs=0.005)
    assert st_.density == pytest.approx(MR22_DENSITY[i], abs=0.01)
    assert st_.speed == pytest.approx(MR22_SPEED[i], abs=0.01)
    assert st_.hours == pytest.approx(MR22_HOURS[i], abs=0.01)
    assert scaled.service_times[1] == st_.hours


def test_service_time_hand_values():
    st_ = service_time(ServiceTimeModel(), 38.11, 9524)
    density = 9524 / 38.11
    speed = 35 - 0.0979 * density
    assert st_.hours == pytest.approx(38.11 / speed, rel=1e-12)
    assert not st_.clamped
    assert service_time(ServiceTimeModel(), 38.11, 0).hours == pytest.approx(38.11 / 35)


def test_service_time_clamps_at_floor():
    # density 400 kg/km puts the regression below zero
    st_ = service_time(ServiceTimeModel(), 10.0, 4000.0)
    assert st_.clamped and st_.speed == 1.0 and st_.hours == 10.0


def test_service_time_rejects_bad_inputs():
    with pytest.raises(InvariantViolation):
        service_time(ServiceTimeModel(), 0.0, 10)
    with pytest.raises(InvariantViolation):
        service_time(ServiceTimeModel(), 1.0, -1)
    with pytest.raises(InvariantViolation):
        ServiceTimeModel(intercept=0)
    with pytest.raises(InvariantViolation):
        ServiceTimeModel(slope=-1)


@given(st.floats(1.0, 200.0), st.floats(0.0, 5000.0), st.floats(0.0, 5000.0))
def test_service_time_monotone_in_waste(dist, w1, w2):
    m = ServiceTimeModel()
    a, b = service_time(m, dist, w1), service_time(m, dist, w2)
    if w2 - w1 > 1e-6 and not b.clamped:
        assert a.hours < b.hours
    if w1 <= w2:
        assert a.hours <= b.hours


def test_scale_scenario_endpoints():
    inst = mr22_instance()
    assert scale_scenario(inst, Scenario(0.5)).waste[1] == pytest.approx(4762.00)
    assert scale_scenario(inst, 1.1).waste[1] == pytest.approx(10476.40)
    same = scale_scenario(inst, 1.0)
    assert same == inst
    assert np.array_equal(same.d, inst.d) and np.array_equal(same.h, inst.h)


def test_scale_scenario_rejects_overflow():
    inst = mr22_instance(Q=10000.0)
    with pytest.raises(InfeasibleDemand):
        scale_scenario(inst, 1.1)
    with pytest.raises(InvariantViolation):
        Scenario(0.0)


@settings(max_examples=50)
@given(st.floats(0.1, 1.2), st.floats(0.1, 1.2))
def test_scale_scenario_composes(f, g):
    inst = random_instance(4, 3, "CS")
    inst = inst.with_matrices()
    try:
        twice = scale_scenario(scale_scenario(inst, f), g)
        once = scale_scenario(inst, f * g)
    except InfeasibleDemand:
        return
    for m in inst.micro_routes:
        assert twice.waste[m.id] == pytest.approx(once.waste[m.id], rel=1e-9)
        assert twice.service_times[m.id] == pytest.approx(once.service_times[m.id], rel=1e-9)


def test_service_override_only_at_base_fraction():
    d = [[0, 5, 7], [6, 0, 9], [8, 10, 0]]
    inst = make_instance("CS", d, [9524.0], internal=[38.11], service=[3.0])
    assert inst.service_times[1] == 3.0
    assert scale_scenario(inst, 0.5).service_times[1] == pytest.approx(1.67, abs=0.01)


def test_instance_invariants():
    d = [[0, 1, 2], [1, 0, 1], [2, 1, 0]]
    with pytest.raises(InvariantViolation):
        make_instance("CS", [[0, -1, 2], [1, 0, 1], [2, 1, 0]], [10.0])
    with pytest.raises(InvariantViolation):
        make_instance("CS", [[1, 1, 2], [1, 0, 1], [2, 1, 0]], [10.0])
    with pytest.raises(InvariantViolation):
        make_instance("CS", [[0, 1], [1, 0]], [10.0])
    with pytest.raises(InvariantViolation):
        make_instance("CS", d, [10.0], Q=0)
    with pytest.raises(InvariantViolation):
        make_instance("CS", d, [10.0], T=0)
    with pytest.raises(InvariantViolation):
        MicroRoute(1, 0.0, 5.0)
    with pytest.raises(InvariantViolation):
        MicroRoute(1, 1.0, -5.0)
    with pytest.raises(InvariantViolation):
        MicroRoute(0, 1.0, 5.0)


def test_landfill_only_addressable_in_current_situation():
    cs = make_instance("CS", [[0, 1, 2], [1, 0, 1], [2, 1, 0]], [10.0])
    ts = make_instance("TS", [[0, 1], [1, 0]], [10.0])
    assert cs.node("landfill") == 1 and cs.node(1) == 2
    assert ts.node(1) == 1
    with pytest.raises(UnknownStop):
        ts.node("landfill")
    with pytest.raises(UnknownStop):
        cs.node(99)


def test_matrices_are_read_only():
    inst = random_instance(3, 0, "TS")
    with pytest.raises(ValueError):
        inst.d[0, 1] = 5.0


def minimal_cs_dict():
    return {
        "case_kind": "CurrentSituation",
        "capacity_Q": 15750,
        "time_limit_T": 8,
        "micro_routes": [
            {"id": 22, "internal_distance_km": 38.11, "base_waste_kg": 9524},
            {"id": 8, "internal_distance_km": 47.09, "base_waste_kg": 11811},
        ],
        "stops": ["depot", "landfill", 22, 8],
        "d_km": [[0, 14.2, 3.1, 4.25], [14.2, 0, 15.05, 16.5], [3.33, 15.1, 0, 1.75], [4.0, 16.2, 1.9, 0]],
        "h_h": [[0, 0.4, 0.1, 0.12], [0.4, 0, 0.45, 0.5], [0.11, 0.45, 0, 0.05], [0.12, 0.48, 0.06, 0]],
    }


def test_load_minimal_cs_file():
    inst = load_instance(json.dumps(minimal_cs_dict()))
    assert inst.case_kind is CaseKind.CURRENT_SITUATION
    assert len(inst.stops) == 4
    assert inst.dist(22, 8) == 1.75
    assert inst.waste == {22: 9524.0, 8: 11811.0}


def test_load_reorders_stops_to_canonical():
    data = minimal_cs_dict()
    perm = [2, 0, 3, 1]
    data["stops"] = [data["stops"][i] for i in perm]
    data["d_km"] = [[data["d_km"][i][j] for j in perm] for i in perm]
    data["h_h"] = [[data["h_h"][i][j] for j in perm] for i in perm]
    inst = load_instance(json.dumps(data))
    assert inst.stops == ("depot", "landfill", 22, 8)
    assert inst.dist(22, 8) == 1.75 and inst.dist("landfill", "depot") == 14.2


def test_load_missing_landfill_is_invariant_violation():
    data = minimal_cs_dict()
    data["stops"] = ["depot", 22, 8]
    data["d_km"] = [r[:1] + r[2:] for r in data["d_km"][:1] + data["d_km"][2:]]
    data["h_h"] = [r[:1] + r[2:] for r in data["h_h"][:1] + data["h_h"][2:]]
    with pytest.raises(InvariantViolation, match="landfill"):
        load_instance(json.dumps(data))


def test_load_negative_distance_is_invariant_violation():
    data = minimal_cs_dict()
    data["d_km"][2][3] = -1.0
    with pytest.raises(InvariantViolation):
        load_instance(json.dumps(data))


def test_load_schema_errors():
    with pytest.raises(SchemaError):
        load_instance(b"{not json")
    data = minimal_cs_dict()
    del data["capacity_Q"]
    with pytest.raises(SchemaError):
        load_instance(json.dumps(data))
    data = minimal_cs_dict()
    data["case_kind"] = "Elsewhere"
    with pytest.raises(SchemaError):
        load_instance(json.dumps(data))


def test_load_rejects_demand_over_capacity():
    data = minimal_cs_dict()
    data["capacity_Q"] = 10000
    with pytest.raises(InfeasibleDemand):
        load_instance(json.dumps(data))


def test_round_trip_is_bit_exact():
    inst = load_instance(json.dumps(minimal_cs_dict()))
    raw = save_instance(inst)
    again = load_instance(raw)
    assert again == inst
    assert save_instance(again) == raw
    assert again.micro(22).internal_distance == MR22_KM


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.integers(0, 10_000), st.sampled_from(["CS", "TS"]))
def test_round_trip_random_instances(n, seed, kind):
    inst = random_instance(n, seed, kind)
    assert load_instance(save_instance(inst)) == inst
    assert json.loads(save_instance(inst)) == instance_to_dict(inst)


def test_ceil_div_tolerates_float_noise():
    assert ceil_div(158628, 25000) == 7
    assert ceil_div(25000, 25000) == 1
    assert ceil_div(0.1 + 0.2, 0.3) == 1
    assert ceil_div(25000.5, 25000) == 2
    assert math.isclose(np.float64(0.3), 0.3)
