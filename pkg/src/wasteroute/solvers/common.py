"""Pieces shared by the exact and heuristic solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

from ..core import DEPOT, EPS, LANDFILL, Instance
from ..evaluator import RoutingPlan, consolidate_trips, evaluate_plan

OPTIMAL = "Optimal"
FEASIBLE_BOUND = "FeasibleBound"
INFEASIBLE = "Infeasible"
LIMIT_REACHED = "LimitReached"


@dataclass
class SolveResult:
    plan: Optional[RoutingPlan]
    objective: float
    lower_bound: float
    status: str
    gap: float
    nodes_explored: int = 0
    wall_time: float = 0.0
    solver: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def has_plan(self) -> bool:
        return self.plan is not None

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "solver": self.solver,
            "status": self.status,
            "objective_km": None if self.plan is None else self.objective,
            "lower_bound_km": self.lower_bound,
            "gap": self.gap,
            "nodes_explored": self.nodes_explored,
            "plan": None if self.plan is None else self.plan.to_dict(),
        }
        out.update(self.extra)
        if include_timing:
            out["wall_time_s"] = self.wall_time
        return out


def relative_gap(objective: float, bound: float) -> float:
    if objective <= EPS:
        return 0.0
    return max(0.0, (objective - bound) / objective)


class Kernel:
    """Plain-list view of an instance for tight inner loops.

    Nodes are matrix indices: 0 is the depot, 1 the landfill in the
    current-situation case; ``unload`` is wherever loads reset mid-route.
    """

    def __init__(self, instance: Instance):
        self.instance = instance
        self.is_cs = instance.is_cs
        self.d = instance.d.tolist()
        self.h = instance.h.tolist()
        self.size = len(self.d)
        self.D = 0
        self.L = 1 if self.is_cs else None
        self.unload = 1 if self.is_cs else 0
        self.micros = list(range(instance.first_micro_node, self.size))
        self.n = len(self.micros)
        self.q = [0.0] * self.size
        self.s = [0.0] * self.size
        for node in self.micros:
            mid = instance.stops[node]
            self.q[node] = instance.waste[mid]
            self.s[node] = instance.service_times[mid]
        self.Q = float(instance.capacity)
        self.T = float(instance.time_limit)
        self.K = instance.route_limit if self.is_cs else self.n
        self.stops = instance.stops
        self.pos = [-1] * self.size
        for i, m in enumerate(self.micros):
            self.pos[m] = i
        self._return_times()
        self._bound_tables()

    def _return_times(self):
        # Floyd-Warshall on travel times; a lower bound on any real detour
        size = self.size
        sp = [row[:] for row in self.h]
        for k in range(size):
            spk = sp[k]
            for i in range(size):
                sik = sp[i][k]
                row = sp[i]
                for j in range(size):
                    if sik + spk[j] < row[j]:
                        row[j] = sik + spk[j]
        if self.is_cs:
            self.ret = [sp[i][self.L] + self.h[self.L][self.D] for i in range(size)]
            self.ret[self.L] = self.h[self.L][self.D]
        else:
            self.ret = [sp[i][self.D] for i in range(size)]

    def _bound_tables(self):
        d, micros = self.d, self.micros
        fresh_sources = [self.D, self.L] if self.is_cs else [self.D]
        self.cheapest_in = [0.0] * self.size
        self.extra_fresh = [0.0] * self.size
        self.to_unload = [0.0] * self.size
        self.t_min = [0.0] * self.size
        for m in micros:
            from_micro = min((d[p][m] for p in micros if p != m), default=math.inf)
            from_fresh = min(d[p][m] for p in fresh_sources)
            self.cheapest_in[m] = min(from_micro, from_fresh)
            self.extra_fresh[m] = max(0.0, from_fresh - from_micro) if from_micro < math.inf else 0.0
            self.to_unload[m] = d[m][self.unload]
            self.t_min[m] = self.s[m] + min(self.h[p][m] for p in range(self.size) if p != m)
        self.by_extra = sorted(micros, key=lambda m: (self.extra_fresh[m], m))
        self.by_unload = sorted(micros, key=lambda m: (self.to_unload[m], m))
        self.close_cost = d[self.L][self.D] if self.is_cs else 0.0

    def remaining_bound(self, rem: int, cur: int, load: float, t: float) -> float:
        """Admissible lower bound on the arc distance still to be driven.

        ``rem`` is a bitmask over ``micros`` positions; ``cur`` the node the
        vehicle is at (depot = a route/trip not started yet), ``load`` the
        waste aboard since the last unload and ``t`` the elapsed time of the
        current route (current trip in the transfer-station case).
        """
        micros = self.micros
        at_micro = cur >= (2 if self.is_cs else 1)
        active = cur != self.D
        Q, T = self.Q, self.T
        if not rem:
            if not active:
                return 0.0
            if self.is_cs:
                return (self.to_unload[cur] if at_micro else 0.0) + self.close_cost
            return self.to_unload[cur]

        total_in = 0.0
        waste = 0.0
        tneed = 0.0
        big = 0
        big_fits = False
        half = Q / 2
        r = rem
        idx = 0
        while r:
            if r & 1:
                m = micros[idx]
                total_in += self.cheapest_in[m]
                qm = self.q[m]
                waste += qm
                tneed += self.t_min[m]
                if qm > half:
                    big += 1
                    if at_micro and load + qm <= Q + EPS:
                        big_fits = True
            r >>= 1
            idx += 1

        open_room = (Q - load) if at_micro else 0.0
        fresh = _ceil_pos((waste - open_room) / Q)
        fresh = max(fresh, big - (1 if big_fits else 0))
        time_room = max(0.0, T - t) if active else 0.0
        new_routes = _ceil_pos((tneed - time_room) / T)
        if self.is_cs and not active:
            new_routes = max(new_routes, 1)
        fresh = max(fresh, new_routes)
        if not at_micro:
            fresh = max(fresh, 1)

        bound = total_in
        if fresh:
            bound += self._smallest(self.by_extra, self.extra_fresh, rem, fresh)
        unloads = fresh + (1 if at_micro else 0)
        if unloads:
            bound += self._smallest_unload(rem, cur if at_micro else -1, unloads)
        if self.is_cs:
            bound += (new_routes + (1 if active else 0)) * self.close_cost
        return bound

    def _smallest(self, order, table, rem, k):
        pos = self.pos
        total = 0.0
        for m in order:
            if rem >> pos[m] & 1:
                total += table[m]
                k -= 1
                if not k:
                    break
        return total

    def _smallest_unload(self, rem, extra_node, k):
        pos = self.pos
        total = 0.0
        for m in self.by_unload:
            if m == extra_node or rem >> pos[m] & 1:
                total += self.to_unload[m]
                k -= 1
                if not k:
                    break
        return total

    def root_bound(self) -> float:
        return self.remaining_bound((1 << self.n) - 1, self.D, 0.0, 0.0)

    # -- conversions ------------------------------------------------------
    def to_stops(self, node_route) -> list:
        return [self.stops[v] for v in node_route]

    def plan_from_nodes(self, node_routes) -> RoutingPlan:
        return RoutingPlan(self.to_stops(r) for r in node_routes)

    def arc_cost(self, node_route) -> float:
        d = self.d
        return sum(d[a][b] for a, b in zip(node_route, node_route[1:]))


def _ceil_pos(x: float) -> int:
    if x <= EPS:
        return 0
    c = math.ceil(x - 1e-9)
    return max(c, 0)


def lower_bound(instance: Instance) -> float:
    """Root bound used by both solvers."""
    return Kernel(instance).root_bound()


def finalize(instance: Instance, plan: RoutingPlan) -> RoutingPlan:
    """Solver output as a vehicle plan (transfer-station trips chained)."""
    return consolidate_trips(instance, plan)


def plan_objective(instance: Instance, plan: RoutingPlan) -> float:
    return evaluate_plan(instance, plan).total_arc_distance


def single_micro_infeasible(instance: Instance) -> List[int]:
    """Micro-routes that no route can serve even alone."""
    k = Kernel(instance)
    bad = []
    for m in k.micros:
        if k.q[m] > k.Q + EPS:
            bad.append(k.stops[m])
            continue
        if k.is_cs:
            t = k.h[0][m] + k.s[m] + k.h[m][k.L] + k.h[k.L][0]
        else:
            t = k.h[0][m] + k.s[m] + k.h[m][0]
        if t > k.T + EPS:
            bad.append(k.stops[m])
    return bad


__all__ = [
    "DEPOT", "LANDFILL", "FEASIBLE_BOUND", "INFEASIBLE", "LIMIT_REACHED", "OPTIMAL", "Kernel", "SolveResult",
    "finalize", "lower_bound", "plan_objective", "relative_gap", "single_micro_infeasible",
]
