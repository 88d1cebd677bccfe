"""A small, solver-independent mixed-integer linear program container."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Mapping, NamedTuple, Optional, Tuple

import numpy as np

from ..errors import NameCollision

BINARY = "B"
CONTINUOUS = "C"

LE, EQ, GE = "<=", "=", ">="

MAX_NAME = 255


class VarKey(NamedTuple):
    family: str  # X, V, Y, U or T
    i: object
    j: object = None
    k: Optional[int] = None


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str
    lower: float = 0.0
    upper: float = math.inf
    key: Optional[VarKey] = None

    @property
    def is_binary(self) -> bool:
        return self.kind == BINARY


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: Tuple[Tuple[str, float], ...]
    sense: str
    rhs: float
    family: str = ""

    def activity(self, values: Mapping[str, float]) -> float:
        return sum(c * values.get(v, 0.0) for v, c in self.terms)

    def slack_violation(self, values: Mapping[str, float]) -> float:
        """Amount by which ``values`` breaks this row (0 when satisfied)."""
        act = self.activity(values)
        if self.sense == LE:
            return max(0.0, act - self.rhs)
        if self.sense == GE:
            return max(0.0, self.rhs - act)
        return abs(act - self.rhs)


@dataclass(frozen=True)
class MilpModel:
    name: str
    variables: Tuple[Variable, ...]
    constraints: Tuple[Constraint, ...]
    objective: Tuple[Tuple[str, float], ...]
    formulation: str = ""
    variant: str = ""
    routes: int = 0
    _index: Dict[str, int] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        index = {}
        for pos, v in enumerate(self.variables):
            if v.name in index:
                raise NameCollision(f"duplicate variable name {v.name!r}")
            if len(v.name) > MAX_NAME:
                raise NameCollision(f"variable name longer than {MAX_NAME} chars: {v.name[:40]}...")
            if v.is_binary and (v.lower != 0 or v.upper != 1):
                raise ValueError(f"binary variable {v.name} must have bounds [0, 1]")
            index[v.name] = pos
        rows = set()
        for c in self.constraints:
            if c.name in rows or c.name in index:
                raise NameCollision(f"duplicate constraint name {c.name!r}")
            if len(c.name) > MAX_NAME:
                raise NameCollision(f"constraint name longer than {MAX_NAME} chars: {c.name[:40]}...")
            rows.add(c.name)
            for v, _ in c.terms:
                if v not in index:
                    raise ValueError(f"constraint {c.name} references undeclared variable {v}")
        for v, _ in self.objective:
            if v not in index:
                raise ValueError(f"objective references undeclared variable {v}")
        object.__setattr__(self, "_index", index)

    def __getitem__(self, name: str) -> Variable:
        return self.variables[self._index[name]]

    def __contains__(self, name: str) -> bool:
        return name in self._index

    @property
    def binaries(self):
        return [v for v in self.variables if v.is_binary]

    def count(self, family: str) -> int:
        return sum(1 for v in self.variables if v.key is not None and v.key.family == family)

    def objective_value(self, values: Mapping[str, float]) -> float:
        return sum(c * values.get(v, 0.0) for v, c in self.objective)

    def violated(self, values: Mapping[str, float], tol: float = 1e-6):
        """Names of rows and bounds broken by ``values`` (missing names read as 0)."""
        bad = []
        for v in self.variables:
            x = values.get(v.name, 0.0)
            if x < v.lower - tol or x > v.upper + tol:
                bad.append(f"bound:{v.name}")
        for c in self.constraints:
            if c.slack_violation(values) > tol:
                bad.append(c.name)
        return bad

    def as_arrays(self):
        """Dense ``(c, A, lo, hi, lb, ub, integrality, names)`` with ``lo <= A x <= hi``.

        Handy for feeding an external LP/MILP engine in tests and notebooks.
        """
        names = [v.name for v in self.variables]
        n = len(names)
        c = np.zeros(n)
        for v, coef in self.objective:
            c[self._index[v]] += coef
        A = np.zeros((len(self.constraints), n))
        lo = np.full(len(self.constraints), -np.inf)
        hi = np.full(len(self.constraints), np.inf)
        for r, con in enumerate(self.constraints):
            for v, coef in con.terms:
                A[r, self._index[v]] += coef
            if con.sense in (LE, EQ):
                hi[r] = con.rhs
            if con.sense in (GE, EQ):
                lo[r] = con.rhs
        lb = np.array([v.lower for v in self.variables])
        ub = np.array([v.upper for v in self.variables])
        integrality = np.array([1 if v.is_binary else 0 for v in self.variables])
        return c, A, lo, hi, lb, ub, integrality, names
