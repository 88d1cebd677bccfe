"""Random but plausible city geometries for tests, demos and benchmarks.

A city is a disc of micro-routes. Each micro-route has its own entrance and
exit point, so the road-distance matrix is asymmetric. Road distance is the
straight-line distance times a circuity factor and travel time is road
distance over a fixed driving speed.

The default layout follows the scale of a mid-sized city: the depot sits
just outside the disc, the landfill well away from it, and an alternative
transfer-station site lies on the far side of the city, closer to the
landfill than the depot is.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .core import CaseKind, Instance, MicroRoute, TransferSpec

Point = Tuple[float, float]


@dataclass(frozen=True)
class Profile:
    """Ranges micro-routes are drawn from. Densities are kg per internal km."""

    capacity: float
    time_limit: float
    waste: Tuple[float, float]
    internal_distance: Tuple[float, float]
    density: Tuple[float, float]


PROFILES: Dict[str, Profile] = {
    # city-scale shift: heavy micro-routes, one or two per unload
    "city": Profile(15750.0, 8.0, (7000.0, 12000.0), (38.0, 80.0), (100.0, 200.0)),
    # small test instances where routes mix several micro-routes
    "campaign": Profile(15750.0, 8.0, (2000.0, 9000.0), (15.0, 45.0), (60.0, 200.0)),
}


@dataclass(frozen=True)
class Layout:
    city_radius: float = 4.0
    depot: Point = (1.5, 5.5)
    landfill: Point = (13.0, -3.0)
    station: Point = (1.6, -7.3)
    circuity: float = 1.3
    speed_kmh: float = 30.0
    gate_spread: float = 0.6
    large_capacity: float = 25000.0


@dataclass
class City:
    """Micro-route geometry plus facility sites; builds instances per case."""

    micro_routes: List[MicroRoute]
    entrances: List[Point]
    exits: List[Point]
    layout: Layout = field(default_factory=Layout)
    profile: Profile = PROFILES["campaign"]
    name: str = "synthetic"

    def _road(self, a: Point, b: Point) -> float:
        return self.layout.circuity * math.hypot(a[0] - b[0], a[1] - b[1])

    def _matrices(self, facilities: List[Point]):
        outs = list(facilities) + list(self.exits)
        ins = list(facilities) + list(self.entrances)
        size = len(outs)
        d = np.zeros((size, size))
        for i in range(size):
            for j in range(size):
                if i != j:
                    d[i, j] = round(self._road(outs[i], ins[j]), 6)
        h = np.round(d / self.layout.speed_kmh, 6)
        return d, h

    def current_situation(self, max_routes: Optional[int] = None) -> Instance:
        d, h = self._matrices([self.layout.depot, self.layout.landfill])
        return Instance(
            case_kind=CaseKind.CURRENT_SITUATION, micro_routes=tuple(self.micro_routes), d=d, h=h,
            capacity=self.profile.capacity, time_limit=self.profile.time_limit, max_routes=max_routes,
            name=f"{self.name}-CS",
        )

    def transfer_station(self, site: Optional[Point] = None, label: str = "TS") -> Instance:
        site = self.layout.depot if site is None else site
        d, h = self._matrices([site])
        roundtrip = round(2 * self._road(site, self.layout.landfill), 6)
        return Instance(
            case_kind=CaseKind.TRANSFER_STATION, micro_routes=tuple(self.micro_routes), d=d, h=h,
            capacity=self.profile.capacity, time_limit=self.profile.time_limit,
            transfer=TransferSpec(self.layout.large_capacity, roundtrip), name=f"{self.name}-{label}",
        )

    def cases(self) -> Dict[str, Instance]:
        """The usual three configurations: current, station at the depot, station on the far side."""
        return {
            "CS": self.current_situation(),
            "TS1": self.transfer_station(self.layout.depot, "TS1"),
            "TS2": self.transfer_station(self.layout.station, "TS2"),
        }


def _in_disc(rng: random.Random, radius: float) -> Point:
    r = radius * math.sqrt(rng.random())
    a = rng.uniform(0, 2 * math.pi)
    return (r * math.cos(a), r * math.sin(a))


def random_city(n: int, seed: int = 0, profile: str = "campaign", layout: Optional[Layout] = None,
                first_id: int = 1, name: str = "synthetic") -> City:
    """``n`` micro-routes with ids ``first_id..first_id+n-1``."""
    rng = random.Random(seed)
    prof = PROFILES[profile]
    layout = layout or Layout()
    micros, entrances, exits = [], [], []
    for idx in range(n):
        centre = _in_disc(rng, layout.city_radius)
        spread = layout.gate_spread
        entrances.append((centre[0] + rng.uniform(-spread, spread), centre[1] + rng.uniform(-spread, spread)))
        exits.append((centre[0] + rng.uniform(-spread, spread), centre[1] + rng.uniform(-spread, spread)))
        dist = round(rng.uniform(*prof.internal_distance), 2)
        waste = round(min(max(dist * rng.uniform(*prof.density), prof.waste[0]), prof.waste[1]))
        micros.append(MicroRoute(first_id + idx, dist, float(waste)))
    return City(micros, entrances, exits, layout, prof, name)


def random_instance(n: int, seed: int = 0, case_kind: str = "CS", profile: str = "campaign",
                    layout: Optional[Layout] = None) -> Instance:
    city = random_city(n, seed, profile, layout)
    if case_kind in ("CS", CaseKind.CURRENT_SITUATION, CaseKind.CURRENT_SITUATION.value):
        return city.current_situation()
    return city.transfer_station()


def random_shifts(n_day: int, n_night: int, seed: int = 0, profile: str = "city",
                  layout: Optional[Layout] = None) -> Dict[str, Tuple[Instance, Instance]]:
    """Day and night cities sharing one layout; returns ``{case: (day, night)}``."""
    day = random_city(n_day, seed, profile, layout, first_id=1, name="day")
    night = random_city(n_night, seed + 1_000_003, profile, layout, first_id=n_day + 1, name="night")
    day_cases, night_cases = day.cases(), night.cases()
    return {key: (day_cases[key], night_cases[key]) for key in day_cases}


__all__ = ["City", "Layout", "PROFILES", "Profile", "random_city", "random_instance", "random_shifts"]
