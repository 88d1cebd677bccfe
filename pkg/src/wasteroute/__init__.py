"""Sequencing waste-collection micro-routes into vehicle routes."""

from .core import (
    DEPOT,
    LANDFILL,
    CaseKind,
    Instance,
    MicroRoute,
    Scenario,
    ServiceTimeModel,
    TransferSpec,
    load_instance,
    load_instance_file,
    save_instance,
    scale_scenario,
    service_time,
)
from .evaluator import RoutingPlan, evaluate_plan, evaluate_route

__version__ = "0.1.0"

__all__ = [
    "DEPOT", "LANDFILL", "CaseKind", "Instance", "MicroRoute", "RoutingPlan", "Scenario", "ServiceTimeModel",
    "TransferSpec", "evaluate_plan", "evaluate_route", "load_instance", "load_instance_file", "save_instance",
    "scale_scenario", "service_time",
]
