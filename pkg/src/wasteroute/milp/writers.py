"""MPS and CPLEX-LP text writers for :class:`MilpModel`.

Output is deterministic: columns follow the model's variable order, rows its
constraint order, and numbers are printed in shortest round-trip form.
"""

from __future__ import annotations

import math

from .model import BINARY, EQ, GE, LE, MilpModel

_ROW_TYPE = {LE: "L", EQ: "E", GE: "G"}
OBJ_ROW = "OBJ"


def _num(x: float) -> str:
    x = float(x)
    if x == 0:
        return "0"
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def write_mps(model: MilpModel) -> str:
    """Whitespace-delimited MPS with MARKER INTORG/INTEND around binary columns."""
    out = [f"NAME          {model.name or 'model'}", "ROWS", f" N  {OBJ_ROW}"]
    for c in model.constraints:
        out.append(f" {_ROW_TYPE[c.sense]}  {c.name}")

    by_col = {v.name: [] for v in model.variables}
    for v, coef in model.objective:
        if coef != 0:
            by_col[v].append((OBJ_ROW, coef))
    for c in model.constraints:
        for v, coef in c.terms:
            if coef != 0:
                by_col[v].append((c.name, coef))

    out.append("COLUMNS")
    in_int = False
    marker = 0
    for v in model.variables:
        if v.is_binary and not in_int:
            out.append(f"    MARKER{marker:04d}  'MARKER'  'INTORG'")
            marker += 1
            in_int = True
        elif not v.is_binary and in_int:
            out.append(f"    MARKER{marker:04d}  'MARKER'  'INTEND'")
            marker += 1
            in_int = False
        entries = by_col[v.name]
        if not entries:
            # keep the column declared so readers see every variable
            entries = [(OBJ_ROW, 0.0)]
        for row, coef in entries:
            out.append(f"    {v.name}  {row}  {_num(coef)}")
    if in_int:
        out.append(f"    MARKER{marker:04d}  'MARKER'  'INTEND'")

    out.append("RHS")
    for c in model.constraints:
        if c.rhs != 0:
            out.append(f"    RHS  {c.name}  {_num(c.rhs)}")

    out.append("BOUNDS")
    for v in model.variables:
        if v.kind == BINARY:
            out.append(f" BV BND  {v.name}")
            continue
        lo, up = v.lower, v.upper
        if lo == -math.inf and up == math.inf:
            out.append(f" FR BND  {v.name}")
            continue
        if lo == up:
            out.append(f" FX BND  {v.name}  {_num(lo)}")
            continue
        if lo == -math.inf:
            out.append(f" MI BND  {v.name}")
        elif lo != 0:
            out.append(f" LO BND  {v.name}  {_num(lo)}")
        if up != math.inf:
            out.append(f" UP BND  {v.name}  {_num(up)}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def _expr(terms, width=8):
    parts = []
    for idx, (v, coef) in enumerate(terms):
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = v if mag == 1 else f"{_num(mag)} {v}"
        if idx == 0:
            parts.append(body if sign == "+" else f"- {body}")
        else:
            parts.append(f"{sign} {body}")
    if not parts:
        return ["0"]
    lines = []
    for start in range(0, len(parts), width):
        lines.append(" ".join(parts[start:start + width]))
    return lines


def write_lp(model: MilpModel) -> str:
    out = [f"\\ Problem: {model.name or 'model'}", "Minimize"]
    obj = [(v, c) for v, c in model.objective if c != 0]
    if not obj and model.variables:
        obj = [(model.variables[0].name, 0.0)]
    if obj and all(c == 0 for _, c in obj):
        out.append(f" obj: 0 {obj[0][0]}")
    else:
        lines = _expr(obj)
        out.append(f" obj: {lines[0]}")
        out.extend(f"   {ln}" for ln in lines[1:])
    out.append("Subject To")
    for c in model.constraints:
        terms = [(v, coef) for v, coef in c.terms if coef != 0]
        lines = _expr(terms) if terms else ["0 " + c.terms[0][0]] if c.terms else ["0"]
        lines[-1] = f"{lines[-1]} {c.sense} {_num(c.rhs)}"
        out.append(f" {c.name}: {lines[0]}")
        out.extend(f"   {ln}" for ln in lines[1:])
    out.append("Bounds")
    for v in model.variables:
        if v.kind == BINARY:
            continue
        lo, up = v.lower, v.upper
        if lo == -math.inf and up == math.inf:
            out.append(f" {v.name} free")
        elif lo == up:
            out.append(f" {v.name} = {_num(lo)}")
        elif up == math.inf:
            if lo != 0:
                out.append(f" {v.name} >= {_num(lo)}")
        else:
            low = "-inf" if lo == -math.inf else _num(lo)
            out.append(f" {low} <= {v.name} <= {_num(up)}")
    bins = [v.name for v in model.variables if v.kind == BINARY]
    if bins:
        out.append("Binaries")
        for start in range(0, len(bins), 8):
            out.append(" " + " ".join(bins[start:start + 8]))
    out.append("End")
    return "\n".join(out) + "\n"


def export_model(model: MilpModel, fmt: str = "mps") -> bytes:
    fmt = fmt.lower()
    if fmt == "mps":
        return write_mps(model).encode()
    if fmt == "lp":
        return write_lp(model).encode()
    raise ValueError(f"unknown export format {fmt!r}")
