"""MILP formulations, file export and assignment/plan translation."""

from .extract import extract_plan, induced_assignment, load_assignment
from .formulations import FULL, LITERAL, REPAIRED, build_cs_model, build_model, build_ts_model, cs_arcs
from .model import BINARY, CONTINUOUS, Constraint, MilpModel, Variable, VarKey
from .writers import export_model, write_lp, write_mps

__all__ = [
    "BINARY", "CONTINUOUS", "Constraint", "FULL", "LITERAL", "MilpModel", "REPAIRED", "Variable", "VarKey",
    "build_cs_model", "build_model", "build_ts_model", "cs_arcs", "export_model", "extract_plan",
    "induced_assignment", "load_assignment", "write_lp", "write_mps",
]
