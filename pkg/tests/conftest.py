import numpy as np
import pytest

from wasteroute.core import CaseKind, Instance, MicroRoute, TransferSpec
from wasteroute.synthetic import random_instance

# reference micro-route 22: internal distance and average waste
MR22_KM = 38.11
MR22_KG = 9524.0


def make_instance(kind, d, waste, internal=None, Q=15750.0, T=8.0, h=None, K=None, ids=None,
                  service=None, transfer=None, speed=30.0):
    """Hand-built instance; ``d`` is over [depot, (landfill,) micros...]."""
    d = np.asarray(d, dtype=float)
    n = len(waste)
    ids = ids or list(range(1, n + 1))
    internal = internal or [10.0] * n
    service = service or [None] * n
    micros = [MicroRoute(i, dist, q, service_time=s) for i, dist, q, s in zip(ids, internal, waste, service)]
    if h is None:
        h = d / speed
    kind = CaseKind.CURRENT_SITUATION if kind == "CS" else CaseKind.TRANSFER_STATION
    if kind is CaseKind.TRANSFER_STATION and transfer is None:
        transfer = TransferSpec(25000.0, 25.31)
    return Instance(case_kind=kind, micro_routes=micros, d=d, h=np.asarray(h, dtype=float), capacity=Q,
                    time_limit=T, max_routes=K, transfer=transfer)


def campaign(n, seed, kind):
    """The mixed random family used by the oracle campaigns."""
    profile = "campaign" if seed % 2 == 0 else "city"
    return random_instance(n, seed, kind, profile)


@pytest.fixture
def cs_small():
    return random_instance(4, 11, "CS")


@pytest.fixture
def ts_small():
    return random_instance(4, 11, "TS")
