import csv
import io
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wasteroute.analysis import (
    ShiftPair,
    ShiftResult,
    TransferTrips,
    aggregate_shifts,
    percent_diff,
    run_sweep,
    shift_result,
    transfer_trips,
)
from wasteroute.errors import InfeasibleInput, InvariantViolation
from wasteroute.evaluator import evaluate_plan
from wasteroute.solvers import solve_brute_force, solve_exact
from wasteroute.synthetic import random_instance, random_shifts


def pairs(n_day, n_night, seed, profile="city"):
    return {name: ShiftPair(day, night) for name, (day, night) in random_shifts(n_day, n_night, seed, profile).items()}


def test_percent_diff_examples():
    assert percent_diff(2673.45, 2511.74) == pytest.approx(6.05, abs=0.005)
    assert percent_diff(7.0, 7.0) == 0.0
    assert percent_diff(100.0, 110.0) == pytest.approx(-10.0)
    with pytest.raises(ZeroDivisionError):
        percent_diff(0.0, 5.0)


@given(st.floats(1e-3, 1e6), st.floats(-100.0, 100.0))
def test_percent_diff_recovers_reduction(a, p):
    assert percent_diff(a, a * (1 - p / 100)) == pytest.approx(p, abs=1e-9)


def test_transfer_trip_examples():
    assert transfer_trips(158628, 25000, 25.31) == (7, pytest.approx(177.17))
    assert round(transfer_trips(158628, 25000, 25.31).distance, 2) == 177.17
    assert transfer_trips(0, 25000, 25.31) == TransferTrips(0, 0.0)
    assert transfer_trips(25000, 25000, 25.31) == (1, 25.31)
    with pytest.raises(InvariantViolation):
        transfer_trips(10, 0, 1.0)
    with pytest.raises(InvariantViolation):
        transfer_trips(-1, 10, 1.0)


@given(st.floats(0, 1e6), st.floats(0, 1e6), st.floats(1.0, 5e4))
def test_transfer_trips_monotone_and_sufficient(w1, w2, cap):
    a, b = transfer_trips(min(w1, w2), cap, 10.0), transfer_trips(max(w1, w2), cap, 10.0)
    assert a.trips <= b.trips
    assert b.trips * cap >= max(w1, w2) * (1 - 1e-12)
    assert (b.trips > 0) == (max(w1, w2) > 0)


def test_aggregate_reference_summary():
    cs = aggregate_shifts(ShiftResult(1116.04, 12, 0.0), ShiftResult(1557.41, 12, 0.0))
    assert cs.total_distance == pytest.approx(2673.45, abs=0.01)
    night = ShiftResult(993.99 - 177.17, 9, 158628.0, transfer_trips(158628, 25000, 25.31))
    day = ShiftResult(1517.76 - 128.46, 9, 148832.0, TransferTrips(6, 128.46))
    ts1 = aggregate_shifts(day, night)
    # the per-shift values are themselves rounded, so the sum may land one cent off
    assert abs(ts1.total_distance - 2511.74) <= 0.01 + 1e-9
    assert ts1.vehicles == 9
    ts2 = aggregate_shifts(ShiftResult(1552.53 - 143.40, 12, 0.0, TransferTrips(6, 143.40)),
                           ShiftResult(1156.76 - 199.01, 9, 0.0, TransferTrips(7, 199.01)))
    assert ts2.total_distance == pytest.approx(2709.29, abs=0.01)
    assert ts2.vehicles == 12


def test_aggregate_rejects_infeasible():
    ok = ShiftResult(10.0, 1, 0.0)
    with pytest.raises(InfeasibleInput):
        aggregate_shifts(ok, ShiftResult(10.0, 1, 0.0, feasible=False))
    with pytest.raises(InfeasibleInput):
        aggregate_shifts(None, ok)
    same = aggregate_shifts(ok, ok)
    assert same.vehicles == 1 and same.total_distance == 20.0


def test_shift_pair_validation():
    cs, ts = random_instance(2, 0, "CS"), random_instance(2, 0, "TS")
    with pytest.raises(InvariantViolation):
        ShiftPair(cs, ts)


def test_shift_result_counts_transfer_trips():
    inst = random_instance(5, 2, "TS", "city")
    res = solve_exact(inst)
    shift = shift_result(inst, res)
    waste = inst.total_waste
    assert shift.transfer.trips == math.ceil(waste / inst.transfer.large_capacity - 1e-12)
    assert shift.total_distance == pytest.approx(
        evaluate_plan(inst, res.plan).total_distance + shift.transfer.trips * inst.transfer.roundtrip_to_landfill)


def test_sweep_needs_one_reference():
    cases = pairs(2, 2, 0)
    with pytest.raises(InvariantViolation):
        run_sweep({"TS1": cases["TS1"]}, [1.0])
    with pytest.raises(InvariantViolation):
        run_sweep(cases, [])


def test_sweep_reference_only():
    cases = pairs(2, 2, 1)
    report = run_sweep({"CS": cases["CS"]}, [1.0])
    assert len(report.rows) == 1 and report.alternatives == []
    lines = report.to_csv().splitlines()
    assert len(lines) == 3 and lines[-1].startswith("average")


def hand_case(pair, fraction):
    total, vehicles = 0.0, []
    for inst in pair.scaled(fraction).day, pair.scaled(fraction).night:
        res = solve_brute_force(inst)
        metrics = evaluate_plan(inst, res.plan)
        total += metrics.total_distance
        if not inst.is_cs:
            trips = math.ceil(metrics.total_waste / inst.transfer.large_capacity - 1e-9)
            total += trips * inst.transfer.roundtrip_to_landfill
        vehicles.append(sum(1 for r in res.plan.routes if len(r) > 2))
    return total, max(vehicles)


def test_sweep_matches_oracle_recomputation():
    cases = pairs(3, 3, 4)
    fractions = [0.5, 1.0]
    report = run_sweep(cases, fractions, solver="brute")
    base = sum(inst.total_waste for pair in cases.values() if pair.is_cs for inst in (pair.day, pair.night))
    for row, f in zip(report.rows, fractions):
        assert row.ok
        assert row.total_waste == pytest.approx(f * base, rel=1e-9)
        hand = {name: hand_case(pair, f) for name, pair in cases.items()}
        for name, (dist, veh) in hand.items():
            assert row.outcomes[name].total_distance == pytest.approx(dist, rel=1e-12)
            assert row.outcomes[name].vehicles == veh
        for name in report.alternatives:
            assert row.distance_pct[name] == pytest.approx(percent_diff(hand["CS"][0], hand[name][0]))
    assert report.rows[1].total_waste == pytest.approx(2 * report.rows[0].total_waste, rel=1e-9)


def test_report_percentages_recompute_from_stored_values():
    report = run_sweep(pairs(4, 3, 2), [0.6, 0.8, 1.0], solver="exact")
    reader = list(csv.DictReader(io.StringIO(report.to_csv())))
    data, avg = reader[:-1], reader[-1]
    for row in data:
        cs = float(row["CS_distance_km"])
        for name in report.alternatives:
            ts = float(row[f"{name}_distance_km"])
            assert abs(percent_diff(cs, ts) - float(row[f"{name}_distance_pct_diff"])) <= 0.005
            assert abs(percent_diff(int(row["CS_vehicles"]), int(row[f"{name}_vehicles"]))
                       - float(row[f"{name}_vehicles_pct_diff"])) <= 0.005
    for name in report.alternatives:
        mean = sum(float(r[f"{name}_distance_pct_diff"]) for r in data) / len(data)
        assert float(avg[f"{name}_distance_pct_diff"]) == pytest.approx(mean)
    text = report.to_text()
    assert "Average % diff" in text and "TS2 [% diff]" in text
    plot = list(csv.DictReader(io.StringIO(report.plot_csv())))
    assert len(plot) == 3 * (1 + len(report.alternatives))


def test_sweep_marks_failing_rows():
    cases = pairs(3, 2, 3)
    report = run_sweep(cases, [1.0, 3.0])
    good, bad = report.rows
    assert good.ok and not bad.ok
    assert any("InfeasibleDemand" in e for e in bad.errors)
    assert "ERR" in report.to_text() and "error 300%" in report.to_text()
    assert report.average_distance_pct["TS1"] == pytest.approx(good.distance_pct["TS1"])
