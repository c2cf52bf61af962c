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

"""Synthesis of benchmark instances."""
import functools
import logging
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from downlink.errors import ConfigError, DomainError, GenerationError
from downlink.model import SECONDS_PER_HOUR, due_time
from downlink.types import (
    DistributionKind,
    GroundStation,
    Instance,
    OriginalImageData,
    ProblemConfig,
    Satellite,
    VisibleTimeWindow,
)
from downlink.utils.instance_io import load_instance, load_vtws, with_vtws
from downlink.utils.orbit import compute_vtws

HORIZON = (0.0, 86400.0)
EPOCH = "2020-10-15T00:00:00Z"
RELEASE_SPAN = (-86400.0, 86400.0)
DRAW_BUDGET_FACTOR = 100

logger = logging.getLogger(__name__)

# Epoch elements: a (km), e, i, RAAN, argument of perigee, mean anomaly (degrees).
SATELLITE_CATALOG: Tuple[Satellite, ...] = (
    Satellite(1, "GF0101", 7145.08, 0.001, 98.55, 359.06, 152.17, 265.39),
    Satellite(2, "GF0201", 7011.57, 0.002, 97.83, 2.89, 98.15, 257.45),
    Satellite(3, "GF0601", 7020.45, 0.002, 97.99, 6.87, 56.94, 94.33),
    Satellite(4, "SV01", 6901.65, 0.002, 97.43, 1.01, 124.24, 242.68),
    Satellite(5, "SV02", 6894.39, 0.001, 97.54, 11.87, 128.22, 90.39),
    Satellite(6, "SV03", 6883.14, 0.000, 97.51, 5.98, 341.26, 106.70),
    Satellite(7, "SV04", 6884.95, 0.004, 97.51, 6.14, 92.52, 195.65),
    Satellite(8, "ZY02C", 7143.90, 0.002, 98.64, 341.91, 57.55, 186.17),
    Satellite(9, "ZY3", 6875.80, 0.001, 97.41, 0.79, 59.20, 71.87),
    Satellite(10, "ZY0104", 7145.08, 0.001, 98.55, 359.06, 152.17, 265.39),
)

STATION_CATALOG: Dict[str, Tuple[float, float]] = {
    "Miyun": (40.0, 117.0),
    "Kashi": (39.0, 76.0),
    "Sanya": (18.0, 109.0),
    "Kiruna": (67.0, 21.0),
}

# Registry mapping instance families to the stations they use.
_distribution_registry: Dict[DistributionKind, Tuple[str, ...]] = {
    DistributionKind.ND: ("Miyun", "Kashi", "Sanya"),
    DistributionKind.PD: ("Kiruna",),
    DistributionKind.MD: ("Miyun", "Kashi", "Sanya", "Kiruna"),
}


def make_stations(
    kind: DistributionKind, min_elevation: float = 5.0
) -> Tuple[GroundStation, ...]:
    """Stations of an instance family. Ids follow the catalog order."""
    names = list(STATION_CATALOG)
    return tuple(
        GroundStation(names.index(name) + 1, name, *STATION_CATALOG[name], 0.0, min_elevation)
        for name in _distribution_registry[kind]
    )


@functools.lru_cache(maxsize=16)
def _cached_windows(
    kind: DistributionKind, step: float, sigma: float, min_elevation: float
) -> Tuple[VisibleTimeWindow, ...]:
    # Windows depend only on geometry, so every seed of a family shares them.
    return compute_vtws(
        SATELLITE_CATALOG, make_stations(kind, min_elevation), HORIZON, step, sigma, EPOCH
    )


def _window_starts(
    vtws: Sequence[VisibleTimeWindow],
) -> Dict[int, np.ndarray]:
    starts: Dict[int, list] = {}
    for w in vtws:
        starts.setdefault(w.satellite, []).append(w.sw)
    return {sat: np.sort(np.asarray(sw)) for sat, sw in starts.items()}


def _has_window(starts: Dict[int, np.ndarray], oid: OriginalImageData) -> bool:
    sw = starts.get(oid.satellite)
    if sw is None:
        return False
    first = np.searchsorted(sw, oid.release, side="left")
    return bool(first < len(sw) and sw[first] < oid.release + SECONDS_PER_HOUR * oid.due)


def generate_instance(
    kind: Union[DistributionKind, str],
    n_oid: int,
    seed: int,
    *,
    rp: float = 4.0,
    msid: float = 10.0,
    sigma: float = 60.0,
    vtw_step: float = 10.0,
    min_elevation: float = 5.0,
    vtws: Optional[Sequence[VisibleTimeWindow]] = None,
) -> Instance:
    """Synthesise an instance of the given family with exactly `n_oid` valid OIDs.

    OIDs are drawn until `n_oid` of them have at least one candidate window.
    The output is a pure function of the arguments.

    Args:
        kind: instance family (ND, PD or MD).
        n_oid: number of valid OIDs to produce.
        seed: seed of the OID draws.
        vtws: precomputed windows to use instead of the internal propagator.

    Raises:
        DomainError: if rp or msid is not positive or sigma is negative.
        GenerationError: if the draw budget runs out before `n_oid` valid OIDs exist.
    """
    kind = DistributionKind(kind)
    if not (rp > 0.0 and msid > 0.0 and sigma >= 0.0):
        raise DomainError(f"Need rp > 0, msid > 0 and sigma >= 0, got {rp}, {msid}, {sigma}.")
    if n_oid < 1:
        raise GenerationError(f"n_oid must be positive, got {n_oid}.")
    if n_oid not in kind.oid_grid:
        logger.warning(f"{kind.value}-{n_oid} is outside the benchmark grid {kind.oid_grid}.")

    stations = make_stations(kind, min_elevation)
    if vtws is None:
        windows = _cached_windows(kind, float(vtw_step), float(sigma), float(min_elevation))
    else:
        windows = tuple(vtws)
    starts = _window_starts(windows)

    rng = np.random.default_rng(seed)
    oids = []
    budget = DRAW_BUDGET_FACTOR * n_oid
    for _ in range(budget):
        sat = SATELLITE_CATALOG[int(rng.integers(len(SATELLITE_CATALOG)))]
        priority = int(rng.integers(1, 11))
        duration = float(rng.uniform(*sat.satellite_class.duration_range))
        release = float(rng.uniform(*RELEASE_SPAN))
        oid = OriginalImageData(
            id=len(oids) + 1,
            priority=priority,
            release=release,
            due=due_time(priority),
            duration=duration,
            satellite=sat.id,
        )
        if _has_window(starts, oid):
            oids.append(oid)
            if len(oids) == n_oid:
                break
    else:
        raise GenerationError(
            f"Only {len(oids)} of {n_oid} valid OIDs found for {kind.value} "
            f"after {budget} draws."
        )

    return Instance(
        satellites=SATELLITE_CATALOG,
        stations=stations,
        horizon=HORIZON,
        oids=tuple(oids),
        vtws=windows,
        rp=rp,
        msid=msid,
        sigma=sigma,
        epoch=EPOCH,
    )


def make(config: Dict) -> Instance:
    """Create the instance described by the `problem` section of a config.

    An `instance_path` loads a saved instance; otherwise one is generated.
    A `vtws_path` replaces the windows with externally computed ones.

    Raises:
        ConfigError: if the `problem` section holds an unknown family or
            strategy, or a parameter out of range.
    """
    problem = config["problem"]
    parsed = ProblemConfig.from_config(config)
    if problem.get("instance_path"):
        instance = load_instance(problem["instance_path"])
    else:
        external = load_vtws(problem["vtws_path"]) if problem.get("vtws_path") else None
        try:
            n_oid, seed = int(problem["n_oid"]), int(problem["seed"])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Invalid problem config: {e}") from e
        instance = generate_instance(
            parsed.kind,
            n_oid,
            seed,
            rp=parsed.rp,
            msid=parsed.msid,
            sigma=parsed.sigma,
            vtw_step=parsed.vtw_step,
            min_elevation=parsed.min_elevation,
            vtws=external,
        )
        return instance

    if problem.get("vtws_path"):
        instance = with_vtws(instance, load_vtws(problem["vtws_path"]))
    return instance
