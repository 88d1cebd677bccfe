"""Scenario sweeps and the transfer-station convenience comparison.

A configuration ("case") is a pair of shift instances, day and night, each
solved on its own. Per-case totals add both shifts' route distances plus the
station-to-landfill ferry distance; the vehicle count is the larger of the
two shifts' nonempty route counts, ferry vehicle excluded. Transfer-station
cases are reported against the single current-situation case as a
percentage reduction.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence

from .core import Instance, ceil_div, scale_scenario
from .errors import InfeasibleDemand, InfeasibleInput, InvariantViolation, WasteRouteError
from .evaluator import evaluate_plan
from .solvers import AnnealingParams, SolveResult, solve


def percent_diff(value_cs: float, value_ts: float) -> float:
    """Reduction of ``value_ts`` relative to ``value_cs`` in percent (negative = increase)."""
    if value_cs == 0:
        raise ZeroDivisionError("percent_diff is undefined when the reference value is 0")
    return (value_cs - value_ts) * 100.0 / value_cs


class TransferTrips(NamedTuple):
    trips: int
    distance: float


def transfer_trips(shift_waste: float, large_capacity: float, roundtrip: float) -> TransferTrips:
    """Full-truck round trips from the station to the landfill for one shift."""
    if not large_capacity > 0:
        raise InvariantViolation("large-vehicle capacity must be > 0")
    if shift_waste < 0:
        raise InvariantViolation("shift waste must be >= 0")
    trips = ceil_div(shift_waste, large_capacity) if shift_waste > 0 else 0
    return TransferTrips(trips, trips * roundtrip)


@dataclass(frozen=True)
class ShiftPair:
    day: Instance
    night: Instance

    def __post_init__(self):
        a, b = self.day, self.night
        if a.case_kind != b.case_kind:
            raise InvariantViolation("day and night shifts must share the case kind")
        if a.capacity != b.capacity or a.time_limit != b.time_limit:
            raise InvariantViolation("day and night shifts must share capacity and time limit")

    @property
    def is_cs(self) -> bool:
        return self.day.is_cs

    def scaled(self, fraction: float) -> "ShiftPair":
        return ShiftPair(scale_scenario(self.day, fraction), scale_scenario(self.night, fraction))

    @property
    def total_waste(self) -> float:
        return self.day.total_waste + self.night.total_waste


@dataclass(frozen=True)
class ShiftResult:
    """What one solved shift contributes to a case total."""

    route_distance: float
    vehicles: int
    waste: float
    transfer: Optional[TransferTrips] = None
    feasible: bool = True

    @property
    def transfer_distance(self) -> float:
        return self.transfer.distance if self.transfer else 0.0

    @property
    def total_distance(self) -> float:
        return self.route_distance + self.transfer_distance


def shift_result(instance: Instance, result: SolveResult) -> ShiftResult:
    """Route distance (internal micro-route paths included), vehicles and ferry trips of a solved shift."""
    if result.plan is None:
        raise InfeasibleInput(f"shift {instance.name or '?'} has no plan (status {result.status})")
    metrics = evaluate_plan(instance, result.plan)
    feasible = metrics.feasible and all(r.feasible for r in metrics.per_route)
    transfer = None
    if not instance.is_cs and instance.transfer is not None:
        transfer = transfer_trips(metrics.total_waste, instance.transfer.large_capacity,
                                  instance.transfer.roundtrip_to_landfill)
    return ShiftResult(metrics.total_distance, metrics.vehicles_used, metrics.total_waste, transfer, feasible)


class CaseTotals(NamedTuple):
    total_distance: float
    vehicles: int


def aggregate_shifts(day: ShiftResult, night: ShiftResult) -> CaseTotals:
    """Both shifts' distances summed (ferry trips included); vehicles = the larger shift's count."""
    for label, shift in (("day", day), ("night", night)):
        if shift is None or not shift.feasible:
            raise InfeasibleInput(f"{label} shift result is not feasible")
    return CaseTotals(day.total_distance + night.total_distance, max(day.vehicles, night.vehicles))


# -- sweeps ---------------------------------------------------------------------

@dataclass
class CaseOutcome:
    total_distance: Optional[float] = None
    vehicles: Optional[int] = None
    error: Optional[str] = None


@dataclass
class ScenarioRow:
    fraction: float
    total_waste: float
    outcomes: Dict[str, CaseOutcome]
    distance_pct: Dict[str, Optional[float]] = field(default_factory=dict)
    vehicles_pct: Dict[str, Optional[float]] = field(default_factory=dict)

    @property
    def errors(self) -> List[str]:
        return [f"{name}: {o.error}" for name, o in self.outcomes.items() if o.error]

    @property
    def ok(self) -> bool:
        return not self.errors


@dataclass
class ScenarioReport:
    reference: str
    alternatives: List[str]
    rows: List[ScenarioRow]
    average_distance_pct: Dict[str, Optional[float]]
    average_vehicles_pct: Dict[str, Optional[float]]

    # -- machine output -----------------------------------------------------
    def header(self) -> List[str]:
        cols = ["waste_fraction", "total_waste_kg", f"{self.reference}_distance_km"]
        cols += [f"{name}_distance_pct_diff" for name in self.alternatives]
        cols += [f"{self.reference}_vehicles"]
        cols += [f"{name}_vehicles_pct_diff" for name in self.alternatives]
        cols += [f"{name}_distance_km" for name in self.alternatives]
        cols += [f"{name}_vehicles" for name in self.alternatives]
        cols += ["error"]
        return cols

    def _cells(self, row: ScenarioRow) -> list:
        ref = row.outcomes[self.reference]
        cells = [row.fraction, row.total_waste, ref.total_distance]
        cells += [row.distance_pct.get(n) for n in self.alternatives]
        cells += [ref.vehicles]
        cells += [row.vehicles_pct.get(n) for n in self.alternatives]
        cells += [row.outcomes[n].total_distance for n in self.alternatives]
        cells += [row.outcomes[n].vehicles for n in self.alternatives]
        cells += ["; ".join(row.errors)]
        return cells

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        for row in self.rows:
            w.writerow(["" if c is None else _csv_num(c) for c in self._cells(row)])
        avg = ["average", "", ""]
        avg += [_csv_num(self.average_distance_pct[n]) for n in self.alternatives]
        avg += [""]
        avg += [_csv_num(self.average_vehicles_pct[n]) for n in self.alternatives]
        avg += [""] * (2 * len(self.alternatives)) + [""]
        w.writerow(avg)
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "reference": self.reference,
            "alternatives": list(self.alternatives),
            "rows": [dict(zip(self.header(), self._cells(r))) for r in self.rows],
            "average_distance_pct_diff": dict(self.average_distance_pct),
            "average_vehicles_pct_diff": dict(self.average_vehicles_pct),
        }

    def plot_csv(self) -> str:
        """Long format: one line per (fraction, case) with distance and vehicles."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["waste_fraction", "case", "total_distance_km", "vehicles"])
        for row in self.rows:
            for name in [self.reference] + list(self.alternatives):
                o = row.outcomes[name]
                w.writerow([_csv_num(row.fraction), name,
                            "" if o.total_distance is None else _csv_num(o.total_distance),
                            "" if o.vehicles is None else o.vehicles])
        return buf.getvalue()

    # -- human output -------------------------------------------------------
    def to_text(self) -> str:
        ref, alts = self.reference, self.alternatives
        head = ["Waste", "Total waste [kg]", f"{ref} [km]"] + [f"{n} [% diff]" for n in alts]
        head += [f"{ref} [no]"] + [f"{n} [% diff]" for n in alts]
        body = []
        for row in self.rows:
            o = row.outcomes[ref]
            line = [f"{row.fraction * 100:g}%", f"{row.total_waste:,.2f}", _fmt(o.total_distance, "{:,.2f}")]
            line += [_fmt(row.distance_pct.get(n), "{:.2f}%") for n in alts]
            line += [_fmt(o.vehicles, "{}")]
            line += [_fmt(row.vehicles_pct.get(n), "{:.2f}%") for n in alts]
            body.append(line)
        avg = ["Average % diff", "-", "-"] + [_fmt(self.average_distance_pct[n], "{:.2f}%") for n in alts]
        avg += ["-"] + [_fmt(self.average_vehicles_pct[n], "{:.2f}%") for n in alts]
        body.append(avg)
        widths = [max(len(r[i]) for r in [head] + body) for i in range(len(head))]
        lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in [head] + body]
        notes = [f"{r.fraction * 100:g}%: {e}" for r in self.rows for e in r.errors]
        if notes:
            lines.append("")
            lines += [f"error {n}" for n in notes]
        return "\n".join(lines) + "\n"


def _fmt(value, pattern: str) -> str:
    return "ERR" if value is None else pattern.format(value)


def _csv_num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _safe_pct(cs, ts) -> Optional[float]:
    try:
        return percent_diff(cs, ts)
    except ZeroDivisionError:
        return None


def _mean(values: Sequence[float]) -> Optional[float]:
    values = [v for v in values if v is not None]
    return math.fsum(values) / len(values) if values else None


def solve_case(pair: ShiftPair, solver: str = "exact", params: Optional[AnnealingParams] = None,
               max_nodes: Optional[int] = None, max_seconds: Optional[float] = None) -> CaseOutcome:
    shifts = []
    for inst in (pair.day, pair.night):
        result = solve(inst, solver, params=params, max_nodes=max_nodes, max_seconds=max_seconds)
        if result.plan is None:
            return CaseOutcome(error=f"{result.status} ({inst.name or 'shift'})")
        shifts.append(shift_result(inst, result))
    totals = aggregate_shifts(*shifts)
    return CaseOutcome(totals.total_distance, totals.vehicles)


def run_sweep(cases: Dict[str, ShiftPair], fractions: Sequence[float], solver: str = "exact",
              params: Optional[AnnealingParams] = None, max_nodes: Optional[int] = None,
              max_seconds: Optional[float] = None) -> ScenarioReport:
    """Scale every case to each fraction, solve both shifts and compare against the reference.

    ``cases`` must hold exactly one current-situation pair (the reference);
    the rest are transfer-station alternatives, kept in the given order.
    Rows whose scaling or solving fails carry an error note instead of
    numbers; the averages skip them.
    """
    refs = [name for name, pair in cases.items() if pair.is_cs]
    if len(refs) != 1:
        raise InvariantViolation(f"need exactly one current-situation case, got {len(refs)}")
    if not fractions or any(not f > 0 for f in fractions):
        raise InvariantViolation("fractions must be a non-empty list of positive numbers")
    ref = refs[0]
    alts = [name for name in cases if name != ref]
    base_waste = cases[ref].total_waste

    rows = []
    for f in fractions:
        outcomes = {}
        for name, pair in cases.items():
            try:
                outcomes[name] = solve_case(pair.scaled(f), solver, params, max_nodes, max_seconds)
            except InfeasibleDemand as exc:
                outcomes[name] = CaseOutcome(error=f"InfeasibleDemand: {exc}")
            except WasteRouteError as exc:
                outcomes[name] = CaseOutcome(error=f"{type(exc).__name__}: {exc}")
        row = ScenarioRow(f, base_waste * f, outcomes)
        base = outcomes[ref]
        for name in alts:
            o = outcomes[name]
            ok = base.error is None and o.error is None
            row.distance_pct[name] = _safe_pct(base.total_distance, o.total_distance) if ok else None
            row.vehicles_pct[name] = _safe_pct(base.vehicles, o.vehicles) if ok else None
        rows.append(row)

    return ScenarioReport(
        reference=ref,
        alternatives=alts,
        rows=rows,
        average_distance_pct={n: _mean([r.distance_pct[n] for r in rows]) for n in alts},
        average_vehicles_pct={n: _mean([r.vehicles_pct[n] for r in rows]) for n in alts},
    )


__all__ = [
    "CaseOutcome", "CaseTotals", "ScenarioReport", "ScenarioRow", "ShiftPair", "ShiftResult", "TransferTrips",
    "aggregate_shifts", "percent_diff", "run_sweep", "shift_result", "solve_case", "transfer_trips",
]
