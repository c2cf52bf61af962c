# Copyright 2022 InstaDeep Ltd. All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

from enum import Enum
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

import numpy as np
from typing_extensions import NamedTuple, TypeAlias

from downlink.errors import ConfigError

Seconds: TypeAlias = float
Hours: TypeAlias = int
Degrees: TypeAlias = float
# Boolean or integer vector, one entry per OID or per image data.
Genes: TypeAlias = np.ndarray

# Marks an image data that has no window in stage two of a chromosome.
UNASSIGNED = -1


class DistributionKind(str, Enum):
    """Instance families, each tied to a subset of ground stations."""

    ND = "ND"  # normal stations
    PD = "PD"  # polar station
    MD = "MD"  # all four stations

    @property
    def oid_grid(self) -> Tuple[int, ...]:
        """OID counts used in the benchmark sweeps of this family."""
        if self is DistributionKind.MD:
            return tuple(range(100, 1001, 100))
        return tuple(range(50, 501, 50))


class SatelliteClass(str, Enum):
    """Satellite series, which fixes the observation duration range of its OIDs."""

    GAOFEN = "GaoFen"
    SUPERVIEW = "SuperView"
    EARTH_RESOURCE = "EarthResource"

    @property
    def duration_range(self) -> Tuple[float, float]:
        return _DURATION_RANGES[self]

    @classmethod
    def from_name(cls, name: str) -> "SatelliteClass":
        """Infer the class from a catalog name such as `GF0101` or `SV03`."""
        prefix = name[:2].upper()
        if prefix not in _NAME_PREFIXES:
            raise ValueError(f"Cannot infer satellite class from name {name!r}.")
        return _NAME_PREFIXES[prefix]


_DURATION_RANGES = {
    SatelliteClass.GAOFEN: (60.0, 120.0),
    SatelliteClass.SUPERVIEW: (10.0, 60.0),
    SatelliteClass.EARTH_RESOURCE: (120.0, 200.0),
}
_NAME_PREFIXES = {
    "GF": SatelliteClass.GAOFEN,
    "SV": SatelliteClass.SUPERVIEW,
    "ZY": SatelliteClass.EARTH_RESOURCE,
}


class SegmentationStrategy(str, Enum):
    """How original image data are cut into segments before scheduling."""

    MINIMUM = "min"
    STOCHASTIC = "stoch"
    NONE = "none"


class SelectionMode(str, Enum):
    """Elitist selection used by the evolutionary loop."""

    NSGA2 = "nsga2"
    CREM = "crem"  # random elitism baseline


class ViolationKind(str, Enum):
    """The feasibility checks performed by the schedule validator."""

    UNIQUENESS = "Uniqueness"
    CAPACITY = "Capacity"
    SETUP_TIME = "SetupTime"
    SATELLITE_OVERLAP = "SatelliteOverlap"
    FAMILY_INCOMPLETE = "FamilyIncomplete"
    WINDOW_REUSE = "WindowReuse"


class Satellite(NamedTuple):
    """An earth observation satellite described by its epoch orbital elements.

    Distances are in km and angles in degrees.
    """

    id: int
    name: str
    semi_major_axis: float
    eccentricity: float
    inclination: Degrees
    raan: Degrees
    arg_perigee: Degrees
    mean_anomaly_epoch: Degrees

    @property
    def satellite_class(self) -> SatelliteClass:
        return SatelliteClass.from_name(self.name)


class GroundStation(NamedTuple):
    """A receiving station. Antenna limits collapse to a minimum elevation mask."""

    id: int
    name: str
    latitude: Degrees
    longitude: Degrees
    altitude: float = 0.0  # km
    min_elevation: Degrees = 5.0


class OriginalImageData(NamedTuple):
    """The product of one observation (OID).

    release: seconds relative to horizon start, may be negative.
    due: validity in hours after release, derived from priority.
    duration: observation seconds.
    """

    id: int
    priority: int
    release: Seconds
    due: Hours
    duration: Seconds
    satellite: int


class VisibleTimeWindow(NamedTuple):
    """A contact interval between one satellite and one ground station (VTW)."""

    id: int
    sw: Seconds
    ew: Seconds
    satellite: int
    station: int

    @property
    def length(self) -> Seconds:
        return self.ew - self.sw


class ImageData(NamedTuple):
    """An OID or one segment of it. `family` is the id of the source OID."""

    id: int
    family: int
    priority: int
    release: Seconds
    due: Hours
    satellite: int
    nd: Seconds  # share of the source observation duration


class DownlinkMission(NamedTuple):
    """One transmission executed inside one VTW.

    `families` holds the OID ids touched by the payload; it is derived from the
    payload and kept for objective bookkeeping.
    """

    id: int
    window: int
    st: Seconds
    w: Seconds
    payload: Tuple[int, ...]
    satellite: int
    station: int
    families: FrozenSet[int] = frozenset()

    @property
    def end(self) -> Seconds:
        return self.st + self.w


class Instance(NamedTuple):
    """Immutable problem input. Windows are sorted by sw ascending."""

    satellites: Tuple[Satellite, ...]
    stations: Tuple[GroundStation, ...]
    horizon: Tuple[Seconds, Seconds]
    oids: Tuple[OriginalImageData, ...]
    vtws: Tuple[VisibleTimeWindow, ...]
    rp: float = 4.0  # downlink seconds per observation second
    msid: Seconds = 10.0
    sigma: Seconds = 60.0
    epoch: str = "2020-10-15T00:00:00Z"


class Chromosome(NamedTuple):
    """Two-stage encoding of a downlink plan.

    stage1: bool vector over the instance OIDs (scheduled bit).
    stage2: int vector over the image data holding a VTW id or `UNASSIGNED`.
    """

    stage1: Genes
    stage2: Genes


class ObjectiveVector(NamedTuple):
    """Failure rate and segmentation times, both minimised and in [0, 1]."""

    fr: float
    st: float


class Schedule(NamedTuple):
    """A decoded plan.

    scheduled: bool vector over the instance OIDs.
    assignment: stage two after repair, so the schedule re-encodes exactly.
    """

    missions: Tuple[DownlinkMission, ...]
    scheduled: Genes
    assignment: Genes
    objectives: Optional[ObjectiveVector] = None

    def to_chromosome(self) -> Chromosome:
        return Chromosome(self.scheduled.copy(), self.assignment.copy())


class Violation(NamedTuple):
    """A broken constraint. `subjects` holds the ids involved."""

    kind: ViolationKind
    subjects: Tuple[int, ...]
    detail: str


class Individual(NamedTuple):
    """A member of the evolutionary population."""

    chromosome: Chromosome
    schedule: Schedule
    objectives: ObjectiveVector


class EvolutionConfig(NamedTuple):
    """Parameters of the two-stage evolutionary algorithm."""

    pop_size: int = 100
    archive_size: int = 100
    max_iter: int = 50
    ir: float = 0.4
    mr: float = 0.8
    seed: int = 42
    selection: SelectionMode = SelectionMode.NSGA2
    box_grid: int = 100
    use_reorder: bool = True
    ref_point: Tuple[float, float] = (1.0, 1.0)

    @classmethod
    def from_config(cls, config: Dict[str, Any]) -> "EvolutionConfig":
        """Build from the `system` section of a run config (plus `arch.ref_point`)."""
        system = config["system"]
        ref_point = config.get("arch", {}).get("ref_point", (1.0, 1.0))
        try:
            evo_config = cls(
                pop_size=int(system["pop_size"]),
                archive_size=int(system["archive_size"]),
                max_iter=int(system["max_iter"]),
                ir=float(system["ir"]),
                mr=float(system["mr"]),
                seed=int(system["seed"]),
                selection=SelectionMode(str(system["selection"]).lower()),
                box_grid=int(system["box_grid"]),
                use_reorder=bool(system.get("use_reorder", True)),
                ref_point=(float(ref_point[0]), float(ref_point[1])),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Invalid system config: {e}") from e
        evo_config.check()
        return evo_config

    def check(self) -> None:
        """Raise `ConfigError` when a parameter is out of range."""
        for name in ("ir", "mr"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}.")
        for name in ("pop_size", "archive_size"):
            if getattr(self, name) < 2:
                raise ConfigError(f"{name} must be at least 2, got {getattr(self, name)}.")
        if self.max_iter < 0:
            raise ConfigError(f"max_iter must be non-negative, got {self.max_iter}.")
        if self.box_grid < 1:
            raise ConfigError(f"box_grid must be positive, got {self.box_grid}.")
        if min(self.ref_point) <= 0.0:
            raise ConfigError(f"ref_point must be positive, got {self.ref_point}.")


class ProblemConfig(NamedTuple):
    """The `problem` section of a run config, parsed and range checked."""

    kind: DistributionKind = DistributionKind.PD
    strategy: SegmentationStrategy = SegmentationStrategy.MINIMUM
    rp: float = 4.0
    msid: float = 10.0
    sigma: float = 60.0
    vtw_step: float = 10.0
    min_elevation: float = 5.0
    playback_uses_rp: bool = False

    @classmethod
    def from_config(cls, config: Dict[str, Any]) -> "ProblemConfig":
        problem = config["problem"]
        try:
            problem_config = cls(
                kind=DistributionKind(str(problem["kind"]).upper()),
                strategy=SegmentationStrategy(str(problem["strategy"]).lower()),
                rp=float(problem["rp"]),
                msid=float(problem["msid"]),
                sigma=float(problem["sigma"]),
                vtw_step=float(problem["vtw_step"]),
                min_elevation=float(problem["min_elevation"]),
                playback_uses_rp=bool(problem.get("playback_uses_rp", False)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Invalid problem config: {e}") from e
        problem_config.check()
        return problem_config

    def check(self) -> None:
        """Raise `ConfigError` when a parameter is out of range."""
        for name in ("rp", "msid", "vtw_step"):
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}.")
        if not self.sigma >= 0.0:
            raise ConfigError(f"sigma must be non-negative, got {self.sigma}.")
        if not -90.0 <= self.min_elevation < 90.0:
            raise ConfigError(f"min_elevation must lie in [-90, 90), got {self.min_elevation}.")


class RunTrace(NamedTuple):
    """Outcome of one evolutionary run.

    hv: archive hypervolume after each iteration (length = iterations executed).
    """

    hv: List[float]
    initial_hv: float
    archive: List[Individual]
    wall_time: float


class FrontSummary(NamedTuple):
    """Non-dominated points of an archive with the statistics reported per run."""

    points: List[ObjectiveVector]
    hv: float
    fr_min: float
    fr_mean: float
    fr_max: float
    st_min: float
    st_mean: float
    st_max: float


class MonteCarloEstimate(NamedTuple):
    value: float
    stderr: float
