"""Exact solvers: depth-first branch-and-bound and a brute-force oracle."""

from __future__ import annotations

import math
import time
from typing import Dict, List, Optional

from ..core import EPS, Instance
from ..errors import ConstructionFailed, TooLarge
from ..evaluator import RoutingPlan, evaluate_plan, evaluate_route
from .common import (
    FEASIBLE_BOUND,
    INFEASIBLE,
    LIMIT_REACHED,
    OPTIMAL,
    Kernel,
    SolveResult,
    finalize,
    relative_gap,
    single_micro_infeasible,
)

BRUTE_FORCE_MAX = 7
TIME_CHECK_EVERY = 1000


def _infeasible(solver: str, started: float, nodes: int = 0, **extra) -> SolveResult:
    return SolveResult(
        plan=None, objective=math.inf, lower_bound=math.inf, status=INFEASIBLE, gap=math.inf,
        nodes_explored=nodes, wall_time=time.perf_counter() - started, solver=solver, extra=extra,
    )


# -- brute force ---------------------------------------------------------------

def _best_single_routes(k: Kernel) -> Dict[int, tuple]:
    """Cheapest feasible single route (a trip in the transfer-station case) per subset.

    Sequences are grown one stop at a time; load and elapsed time only ever
    grow along a prefix, so a prefix that already breaks either limit is cut.
    """
    d, h, q, s = k.d, k.h, k.q, k.s
    Q, T = k.Q, k.T
    D, L = k.D, k.L
    micros = k.micros
    best: Dict[int, tuple] = {}

    def record(mask, cost, path):
        old = best.get(mask)
        if old is None or cost < old[0] - EPS or (abs(cost - old[0]) <= EPS and path < old[1]):
            best[mask] = (cost, path)

    # stack entries: (mask, last, load, elapsed, cost, path)
    stack = []
    for m in micros:
        if q[m] <= Q + EPS and h[D][m] + s[m] <= T + EPS:
            stack.append((1 << k.pos[m], m, q[m], h[D][m] + s[m], d[D][m], (D, m)))
    while stack:
        mask, last, load, t, cost, path = stack.pop()
        at_micro = last != L
        if k.is_cs:
            if last == L:
                if t + h[L][D] <= T + EPS:
                    record(mask, cost + d[L][D], path + (D,))
            elif t + h[last][L] <= T + EPS:
                stack.append((mask, L, 0.0, t + h[last][L], cost + d[last][L], path + (L,)))
        elif t + h[last][D] <= T + EPS:
            record(mask, cost + d[last][D], path + (D,))
        for m in micros:
            bit = 1 << k.pos[m]
            if mask & bit:
                continue
            nl = (load if at_micro else 0.0) + q[m]
            nt = t + h[last][m] + s[m]
            if nl <= Q + EPS and nt <= T + EPS:
                stack.append((mask | bit, m, nl, nt, cost + d[last][m], path + (m,)))
    return best


def _partition(best: Dict[int, tuple], n: int, max_routes: int):
    """Minimum-cost cover of all micro-routes by at most ``max_routes`` disjoint routes."""
    full = (1 << n) - 1
    # layer[r][mask]: cheapest way to cover mask with exactly r routes
    prev = {0: (0.0, ())}
    answer = None
    for _ in range(max_routes):
        cur: Dict[int, tuple] = {}
        for mask, (cost, routes) in prev.items():
            free = full & ~mask
            if not free:
                continue
            low = free & -free
            sub = free
            while sub:
                if sub & low and sub in best:
                    c, path = best[sub]
                    key = mask | sub
                    cand = (cost + c, routes + (path,))
                    old = cur.get(key)
                    if old is None or cand[0] < old[0] - EPS:
                        cur[key] = cand
                sub = (sub - 1) & free
        if full in cur and (answer is None or cur[full][0] < answer[0] - EPS):
            answer = cur[full]
        prev = cur
        if not prev:
            break
    return answer


def solve_brute_force(instance: Instance) -> SolveResult:
    """Enumerate every feasible route for every subset, then every partition.

    Each subset's best route is re-checked with the evaluator before it can
    take part in a partition.
    """
    started = time.perf_counter()
    if instance.n > BRUTE_FORCE_MAX:
        raise TooLarge(f"brute force handles at most {BRUTE_FORCE_MAX} micro-routes, got {instance.n}")
    if instance.n == 0:
        return SolveResult(RoutingPlan([]), 0.0, 0.0, OPTIMAL, 0.0, 0, time.perf_counter() - started, "brute")
    k = Kernel(instance)
    best = _best_single_routes(k)
    for mask, (cost, path) in list(best.items()):
        m = evaluate_route(instance, k.to_stops(path))
        if not m.feasible or abs(m.arc_distance - cost) > 1e-6 * max(1.0, cost):
            raise AssertionError(f"enumerated route {path} disagrees with the evaluator")
    limit = k.K if instance.is_cs else k.n
    answer = _partition(best, k.n, limit)
    if answer is None:
        return _infeasible("brute", started, nodes=len(best))
    cost, paths = answer
    micro_nodes = set(k.micros)
    paths = sorted(paths, key=lambda p: min(k.stops[x] for x in p if x in micro_nodes))
    plan = finalize(instance, k.plan_from_nodes(paths))
    objective = evaluate_plan(instance, plan).total_arc_distance
    return SolveResult(
        plan=plan, objective=objective, lower_bound=objective, status=OPTIMAL, gap=0.0,
        nodes_explored=len(best), wall_time=time.perf_counter() - started, solver="brute",
    )


# -- branch and bound ----------------------------------------------------------

def _unwind(path) -> List[int]:
    out = []
    while path is not None:
        path, node = path
        out.append(node)
    out.reverse()
    return out


def _nodes_to_routes(k: Kernel, nodes: List[int]) -> List[List[int]]:
    routes, cur = [], [k.D]
    for v in nodes[1:]:
        cur.append(v)
        if v == k.D:
            if len(cur) > 2:
                routes.append(cur)
            cur = [k.D]
    return routes


def _warm_start(instance: Instance, initial: Optional[RoutingPlan]):
    if initial is None:
        from .heuristic import construct_initial  # deferred: heuristic imports common only

        try:
            initial = construct_initial(instance, seed=0)
        except ConstructionFailed:
            return None, math.inf
    metrics = evaluate_plan(instance, initial)
    if not metrics.feasible or any(not r.feasible for r in metrics.per_route):
        return None, math.inf
    return initial, metrics.total_arc_distance


def solve_exact(
    instance: Instance,
    max_nodes: Optional[int] = None,
    max_seconds: Optional[float] = None,
    initial: Optional[RoutingPlan] = None,
) -> SolveResult:
    """Depth-first branch-and-bound over partial route constructions.

    Routes are built one at a time. A new route must contain the remaining
    micro-route with the smallest id, which removes route-permutation
    symmetry. Children are tried nearest micro-route first (ties by id), then
    a landfill visit, then closing the route. A node is dropped as soon as
    its cost plus :meth:`Kernel.remaining_bound` reaches the incumbent.
    ``initial`` seeds the incumbent; by default the greedy construction does.
    """
    started = time.perf_counter()
    if instance.n == 0:
        return SolveResult(RoutingPlan([]), 0.0, 0.0, OPTIMAL, 0.0, 0, time.perf_counter() - started, "exact")
    if single_micro_infeasible(instance):
        return _infeasible("exact", started)

    k = Kernel(instance)
    d, h, q, s, ret = k.d, k.h, k.q, k.s, k.ret
    D, L, Q, T = k.D, k.L, k.Q, k.T
    is_cs = k.is_cs
    pos = k.pos
    ids = k.stops
    by_dist = [sorted(k.micros, key=lambda m, a=a: (d[a][m], ids[m])) for a in range(k.size)]
    by_id = sorted(k.micros, key=lambda m: ids[m])
    route_cap = k.K

    inc_plan, incumbent = _warm_start(instance, initial)
    inc_nodes = None
    root_bound = k.root_bound()
    full = (1 << k.n) - 1

    # (bound, cost, rem, cur, load, t, routes, pending designated node or -1, path)
    stack = [(root_bound, 0.0, full, D, 0.0, 0.0, 0, -1, (None, D))]
    nodes = 0
    limited = False
    bound_of = k.remaining_bound

    while stack:
        if max_nodes is not None and nodes >= max_nodes:
            limited = True
            break
        if max_seconds is not None and nodes % TIME_CHECK_EVERY == 0 and time.perf_counter() - started > max_seconds:
            limited = True
            break
        bound, cost, rem, cur, load, t, routes, desig, path = stack.pop()
        nodes += 1
        if bound >= incumbent - EPS:
            continue
        if cur == D and not rem:
            incumbent = cost
            inc_nodes = _unwind(path)
            continue

        children = []

        def push(b, c, r, v, ld, tt, rt, dg):
            if b < incumbent - EPS:
                children.append((b, c, r, v, ld, tt, rt, dg, (path, v)))

        if cur == D:
            if is_cs and routes >= route_cap:
                continue
            first = next(m for m in by_id if rem >> pos[m] & 1)
            for m in by_dist[D]:
                if not rem >> pos[m] & 1:
                    continue
                nt = h[D][m] + s[m]
                if q[m] > Q + EPS or nt + ret[m] > T + EPS:
                    continue
                nr = rem & ~(1 << pos[m])
                nc = cost + d[D][m]
                push(nc + bound_of(nr, m, q[m], nt), nc, nr, m, q[m], nt, routes + 1, -1 if m == first else first)
        else:
            at_micro = cur != L
            base_load = load if at_micro else 0.0
            for m in by_dist[cur]:
                if not rem >> pos[m] & 1:
                    continue
                nl = base_load + q[m]
                nt = t + h[cur][m] + s[m]
                if nl > Q + EPS or nt + ret[m] > T + EPS:
                    continue
                nr = rem & ~(1 << pos[m])
                nc = cost + d[cur][m]
                push(nc + bound_of(nr, m, nl, nt), nc, nr, m, nl, nt, routes, -1 if m == desig else desig)
            if is_cs:
                if at_micro:
                    nt = t + h[cur][L]
                    if nt + ret[L] <= T + EPS:
                        nc = cost + d[cur][L]
                        push(nc + bound_of(rem, L, 0.0, nt), nc, rem, L, 0.0, nt, routes, desig)
                elif desig < 0 and t + h[L][D] <= T + EPS:
                    nc = cost + d[L][D]
                    push(nc + bound_of(rem, D, 0.0, 0.0), nc, rem, D, 0.0, 0.0, routes, -1)
            elif desig < 0 and t + h[cur][D] <= T + EPS:
                nc = cost + d[cur][D]
                push(nc + bound_of(rem, D, 0.0, 0.0), nc, rem, D, 0.0, 0.0, routes, -1)
        # stack is LIFO: push in reverse so the preferred child is expanded first
        children.reverse()
        stack.extend(children)

    if inc_nodes is not None:
        plan = finalize(instance, k.plan_from_nodes(_nodes_to_routes(k, inc_nodes)))
    else:
        plan = inc_plan
    elapsed = time.perf_counter() - started

    if plan is None:
        if not limited:
            return _infeasible("exact", started, nodes)
        lb = min((entry[0] for entry in stack), default=root_bound)
        return SolveResult(None, math.inf, lb, LIMIT_REACHED, math.inf, nodes, elapsed, "exact")

    objective = evaluate_plan(instance, plan).total_arc_distance
    if not limited:
        return SolveResult(plan, objective, objective, OPTIMAL, 0.0, nodes, elapsed, "exact")
    lb = min([objective] + [entry[0] for entry in stack])
    return SolveResult(plan, objective, lb, FEASIBLE_BOUND, relative_gap(objective, lb), nodes, elapsed, "exact")


__all__ = ["BRUTE_FORCE_MAX", "solve_brute_force", "solve_exact"]
