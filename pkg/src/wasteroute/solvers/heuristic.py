"""Greedy construction plus simulated annealing for city-sized shifts.

Inside this module a solution is a list of routes, each a list of node
indices without the depot at either end. Current-situation routes always end
with the landfill and never start with it or visit it twice in a row.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from typing import List, Optional

from ..core import EPS, Instance
from ..errors import ConstructionFailed, InvariantViolation
from ..evaluator import RoutingPlan, evaluate_plan
from .common import (
    FEASIBLE_BOUND,
    INFEASIBLE,
    LIMIT_REACHED,
    Kernel,
    SolveResult,
    finalize,
    relative_gap,
    single_micro_infeasible,
)


@dataclass(frozen=True)
class AnnealingParams:
    """Annealing schedule. ``None`` fields are sized from the instance.

    ``initial_temperature`` defaults to 10% of the construction objective and
    ``moves_per_epoch`` to 50 moves per micro-route. ``max_epochs`` caps the
    number of cooling steps; 0 returns the construction untouched.
    """

    initial_temperature: Optional[float] = None
    cooling_rate: float = 0.97
    moves_per_epoch: Optional[int] = None
    min_temperature: float = 1e-3
    seed: int = 0
    restarts: int = 4
    max_epochs: Optional[int] = None

    def __post_init__(self):
        if not 0 < self.cooling_rate < 1:
            raise InvariantViolation("cooling_rate must lie strictly between 0 and 1")
        if not self.min_temperature > 0:
            raise InvariantViolation("min_temperature must be > 0")
        if self.initial_temperature is not None and not self.initial_temperature > self.min_temperature:
            raise InvariantViolation("initial_temperature must exceed min_temperature")
        if self.moves_per_epoch is not None and self.moves_per_epoch < 1:
            raise InvariantViolation("moves_per_epoch must be >= 1")
        if self.restarts < 1:
            raise InvariantViolation("restarts must be >= 1")
        if self.max_epochs is not None and self.max_epochs < 0:
            raise InvariantViolation("max_epochs must be >= 0")


def restart_seed(seed: int, restart: int) -> int:
    """Independent 64-bit seed for one restart, derived from the user seed."""
    return random.Random(f"{seed}:{restart}").getrandbits(64)


# -- route arithmetic -------------------------------------------------------------

def route_cost(k: Kernel, route) -> float:
    d = k.d
    prev = k.D
    total = 0.0
    for v in route:
        total += d[prev][v]
        prev = v
    return total + d[prev][k.D]


def route_feasible(k: Kernel, route) -> bool:
    h, q, s, L = k.h, k.q, k.s, k.L
    Q = k.Q + EPS
    prev = k.D
    load = 0.0
    t = 0.0
    for v in route:
        t += h[prev][v]
        if v == L:
            load = 0.0
        else:
            load += q[v]
            if load > Q:
                return False
            t += s[v]
        prev = v
    return t + h[prev][k.D] <= k.T + EPS


def normalize_cs(k: Kernel, route) -> list:
    """Drop leading and doubled landfill visits and make the route end at the landfill."""
    L = k.L
    out = []
    for v in route:
        if v == L and (not out or out[-1] == L):
            continue
        out.append(v)
    if out and out[-1] != L:
        out.append(L)
    return out


def two_opt_delta(k: Kernel, route, i: int, j: int) -> float:
    """Change in arc distance from reversing ``route[i..j]`` (inclusive).

    ``route`` excludes the depot ends. Distances may be asymmetric, so the
    reversed inner arcs are re-priced as well as the two boundary arcs.
    """
    d = k.d
    full = [k.D] + list(route) + [k.D]
    a, b = i + 1, j + 1
    before, after = full[a - 1], full[b + 1]
    old = d[before][full[a]] + d[full[b]][after]
    new = d[before][full[b]] + d[full[a]][after]
    for p in range(a, b):
        old += d[full[p]][full[p + 1]]
        new += d[full[p + 1]][full[p]]
    return new - old


# -- construction -----------------------------------------------------------------

def _construct(k: Kernel, rng: random.Random) -> List[list]:
    d, h, q, s, L, D = k.d, k.h, k.q, k.s, k.L, k.D
    Q, T = k.Q + EPS, k.T + EPS
    ids = k.stops
    if k.is_cs:
        home = [h[m][L] + h[L][D] for m in range(k.size)]
    else:
        home = [h[m][D] for m in range(k.size)]

    def fits(cur, load, t, m):
        return load + q[m] <= Q and t + h[cur][m] + s[m] + home[m] <= T

    remaining = set(k.micros)
    routes = []
    while remaining:
        starters = sorted((m for m in remaining if fits(D, 0.0, 0.0, m)), key=lambda m: ids[m])
        if not starters:
            raise ConstructionFailed("no remaining micro-route can be served from the depot")
        first = rng.choice(starters)
        route = [first]
        remaining.discard(first)
        cur, load, t = first, q[first], h[D][first] + s[first]
        while True:
            options = [m for m in remaining if fits(cur, load if cur != L else 0.0, t, m)]
            if options:
                m = min(options, key=lambda x: (d[cur][x], ids[x]))
                load = (load if cur != L else 0.0) + q[m]
                t += h[cur][m] + s[m]
                route.append(m)
                remaining.discard(m)
                cur = m
                continue
            if k.is_cs and cur != L:
                after = t + h[cur][L]
                # unload now if that lets at least one more micro-route in
                if any(fits(L, 0.0, after, m) for m in remaining):
                    route.append(L)
                    cur, load, t = L, 0.0, after
                    continue
            break
        if k.is_cs and route[-1] != L:
            route.append(L)
        routes.append(route)
    if k.is_cs and len(routes) > k.K:
        raise ConstructionFailed(f"greedy construction needs {len(routes)} routes, limit is {k.K}")
    return routes


def _to_plan(k: Kernel, routes) -> RoutingPlan:
    return k.plan_from_nodes([[k.D] + list(r) + [k.D] for r in routes if r])


def construct_initial(instance: Instance, seed: int = 0) -> RoutingPlan:
    """Greedy nearest-feasible construction.

    Each route starts from a micro-route drawn with ``seed`` and keeps
    appending the nearest micro-route that still fits capacity and time
    (including the way home). In the current-situation case the vehicle
    unloads at the landfill when nothing fits but something would after
    unloading; otherwise the route closes and a new one opens.
    """
    bad = single_micro_infeasible(instance)
    if bad:
        raise ConstructionFailed(f"micro-routes infeasible even alone: {bad}")
    k = Kernel(instance)
    return finalize(instance, _to_plan(k, _construct(k, random.Random(seed))))


# -- annealing --------------------------------------------------------------------

MOVES_CS = ("relocate", "swap", "two_opt", "landfill_insert", "landfill_remove", "landfill_move", "merge", "split")
MOVES_TS = ("relocate", "swap", "two_opt", "merge", "split")


class _Annealer:
    def __init__(self, k: Kernel, rng: random.Random):
        self.k = k
        self.rng = rng
        self.L = k.L
        self.moves = MOVES_CS if k.is_cs else MOVES_TS

    def _micro_positions(self, routes):
        L = self.L
        return [(r, i) for r, route in enumerate(routes) for i, v in enumerate(route) if v != L]

    def _fix(self, route):
        return normalize_cs(self.k, route) if self.k.is_cs else route

    def propose(self, routes):
        """A random neighbour as ``{route index: new route}`` (index -1 = new route), or None."""
        rng, L = self.rng, self.L
        kind = self.moves[rng.randrange(len(self.moves))]
        if kind == "relocate":
            positions = self._micro_positions(routes)
            r, i = positions[rng.randrange(len(positions))]
            src = routes[r][:i] + routes[r][i + 1:]
            v = routes[r][i]
            dest = rng.randrange(len(routes) + 1)
            if dest == r:
                limit = len(src) + (0 if self.k.is_cs else 1)
                j = rng.randrange(max(limit, 1))
                return {r: self._fix(src[:j] + [v] + src[j:])}
            if dest == len(routes):
                return {r: self._fix(src), -1: self._fix([v])}
            tgt = routes[dest]
            j = rng.randrange(len(tgt) + 1)
            return {r: self._fix(src), dest: self._fix(tgt[:j] + [v] + tgt[j:])}
        if kind == "swap":
            positions = self._micro_positions(routes)
            if len(positions) < 2:
                return None
            (r1, i1), (r2, i2) = rng.sample(positions, 2)
            if r1 == r2:
                route = routes[r1][:]
                route[i1], route[i2] = route[i2], route[i1]
                return {r1: route}
            a, b = routes[r1][:], routes[r2][:]
            a[i1], b[i2] = b[i2], a[i1]
            return {r1: a, r2: b}
        if kind == "two_opt":
            r = rng.randrange(len(routes))
            route = routes[r]
            span = len(route) - (1 if self.k.is_cs else 0)
            if span < 2:
                return None
            i, j = sorted(rng.sample(range(span), 2))
            return {r: self._fix(route[:i] + route[i:j + 1][::-1] + route[j + 1:])}
        if kind == "landfill_insert":
            cands = [(r, i) for r, route in enumerate(routes) for i in range(1, len(route))
                     if route[i - 1] != L and route[i] != L]
            if not cands:
                return None
            r, i = cands[rng.randrange(len(cands))]
            return {r: routes[r][:i] + [L] + routes[r][i:]}
        if kind in ("landfill_remove", "landfill_move"):
            cands = [(r, i) for r, route in enumerate(routes) for i in range(len(route) - 1) if route[i] == L]
            if not cands:
                return None
            r, i = cands[rng.randrange(len(cands))]
            route = routes[r][:i] + routes[r][i + 1:]
            if kind == "landfill_remove":
                return {r: self._fix(route)}
            j = rng.randrange(1, len(route))
            return {r: self._fix(route[:j] + [L] + route[j:])}
        if kind == "merge":
            if len(routes) < 2:
                return None
            r1, r2 = rng.sample(range(len(routes)), 2)
            return {r1: self._fix(routes[r1] + routes[r2]), r2: []}
        # split
        r = rng.randrange(len(routes))
        route = routes[r]
        body = len(route) - (1 if self.k.is_cs else 0)
        if body < 2:
            return None
        j = rng.randrange(1, body)
        return {r: self._fix(route[:j]), -1: self._fix(route[j:])}

    def run(self, routes, params: AnnealingParams, temperature: float, moves: int):
        k, rng = self.k, self.rng
        routes = [r[:] for r in routes]
        costs = [route_cost(k, r) for r in routes]
        current = sum(costs)
        best, best_cost = [r[:] for r in routes], current
        history = []
        epoch = 0
        max_routes = k.K if k.is_cs else k.n
        while temperature > params.min_temperature and (params.max_epochs is None or epoch < params.max_epochs):
            for _ in range(moves):
                change = self.propose(routes)
                if change is None:
                    continue
                ok = True
                delta = 0.0
                new_costs = {}
                for r, route in change.items():
                    if route and not route_feasible(k, route):
                        ok = False
                        break
                    c = route_cost(k, route) if route else 0.0
                    new_costs[r] = c
                    delta += c - (costs[r] if r >= 0 else 0.0)
                if not ok:
                    continue
                added = -1 in change and bool(change[-1])
                emptied = sum(1 for r, route in change.items() if r >= 0 and not route)
                if len(routes) + added - emptied > max_routes:
                    continue
                if delta > 0 and rng.random() >= math.exp(-delta / temperature):
                    continue
                for r, route in change.items():
                    if r >= 0:
                        routes[r] = route
                        costs[r] = new_costs[r]
                if added:
                    routes.append(change[-1])
                    costs.append(new_costs[-1])
                if any(not r for r in routes):
                    keep = [i for i, r in enumerate(routes) if r]
                    routes = [routes[i] for i in keep]
                    costs = [costs[i] for i in keep]
                current = sum(costs)
                if current < best_cost - EPS:
                    best_cost = current
                    best = [r[:] for r in routes]
            history.append(best_cost)
            temperature *= params.cooling_rate
            epoch += 1
        return best, best_cost, history


def anneal(instance: Instance, params: AnnealingParams = AnnealingParams(), start: Optional[RoutingPlan] = None,
           restart: int = 0):
    """One annealing run; returns ``(plan, objective, best-per-epoch history)``."""
    k = Kernel(instance)
    rseed = restart_seed(params.seed, restart)
    rng = random.Random(rseed)
    if start is None:
        routes = _construct(k, random.Random(rseed))
    else:
        routes = _plan_to_routes(k, start)
    initial = sum(route_cost(k, r) for r in routes)
    temperature = params.initial_temperature
    if temperature is None:
        temperature = max(0.1 * initial, 10 * params.min_temperature)
    moves = params.moves_per_epoch or 50 * k.n
    best, cost, history = _Annealer(k, rng).run(routes, params, temperature, moves)
    return finalize(instance, _to_plan(k, best)), cost, history


def _plan_to_routes(k: Kernel, plan: RoutingPlan) -> List[list]:
    node = k.instance.node
    routes = []
    for route in plan.routes:
        nodes = [node(s) for s in route]
        cur = []
        for v in nodes[1:]:
            if v == k.D:
                if cur:
                    routes.append(cur)
                cur = []
            else:
                cur.append(v)
    return routes


def solve_heuristic(instance: Instance, params: AnnealingParams = AnnealingParams()) -> SolveResult:
    """Best of ``params.restarts`` annealing runs, each from its own greedy start.

    Ties go to the lowest restart index. The bound reported is the same root
    bound the branch-and-bound starts from.
    """
    started = time.perf_counter()
    if instance.n == 0:
        return SolveResult(RoutingPlan([]), 0.0, 0.0, FEASIBLE_BOUND, 0.0, 0, 0.0, "heuristic")
    bad = single_micro_infeasible(instance)
    if bad:
        return SolveResult(None, math.inf, math.inf, INFEASIBLE, math.inf, 0, time.perf_counter() - started,
                           "heuristic", {"reason": f"micro-routes infeasible even alone: {bad}"})
    try:
        runs = [anneal(instance, params, restart=r) for r in range(params.restarts)]
    except ConstructionFailed as exc:
        # greedy ran past the route limit; that proves nothing about the instance
        bound = Kernel(instance).root_bound()
        return SolveResult(None, math.inf, bound, LIMIT_REACHED, math.inf, 0, time.perf_counter() - started,
                           "heuristic", {"reason": str(exc)})
    plan, _, _ = min(runs, key=lambda run: run[1])
    metrics = evaluate_plan(instance, plan)
    if not metrics.feasible or any(not r.feasible for r in metrics.per_route):
        raise AssertionError("annealing produced a plan the evaluator rejects")
    objective = metrics.total_arc_distance
    bound = min(Kernel(instance).root_bound(), objective)
    return SolveResult(
        plan=plan, objective=objective, lower_bound=bound, status=FEASIBLE_BOUND,
        gap=relative_gap(objective, bound), nodes_explored=0,
        wall_time=time.perf_counter() - started, solver="heuristic",
    )


__all__ = [
    "AnnealingParams", "anneal", "construct_initial", "normalize_cs", "restart_seed", "route_cost",
    "route_feasible", "solve_heuristic", "two_opt_delta",
]
