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

"""Two-body orbit propagation and ground station visibility."""
import logging
from datetime import datetime
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy import optimize
from scipy.spatial.transform import Rotation

from downlink.errors import DomainError, NumericalError
from downlink.types import GroundStation, Satellite, Seconds, VisibleTimeWindow

MU_EARTH = 398600.4418  # km^3 / s^2
EARTH_ROTATION_RATE = 7.2921159e-5  # rad / s
EARTH_RADIUS = 6378.137  # WGS-84 equatorial radius, km
EARTH_FLATTENING = 1 / 298.257223563
KEPLER_TOL = 1e-10
KEPLER_MAX_ITER = 50

logger = logging.getLogger(__name__)


def gmst(epoch: str) -> float:
    """Greenwich mean sidereal angle of a UTC ISO timestamp, in radians."""
    when = datetime.fromisoformat(epoch.replace("Z", "+00:00")).replace(tzinfo=None)
    days = (np.datetime64(when) - np.datetime64("2000-01-01T12:00")) / np.timedelta64(1, "D")
    ut1 = days / 36525.0
    theta = 67310.54841 + ut1 * (876600 * 3600 + 8640184.812866 + ut1 * (0.093104 - ut1 * 6.2e-6))
    return float(np.deg2rad(theta / 240.0) % (2 * np.pi))


def orbital_period(sat: Satellite) -> Seconds:
    return float(2 * np.pi * np.sqrt(sat.semi_major_axis**3 / MU_EARTH))


def solve_kepler(mean_anomaly: np.ndarray, eccentricity: float) -> np.ndarray:
    """Eccentric anomaly E with E - e sin E = M, by Newton iteration."""
    ecc_anomaly = np.array(mean_anomaly, dtype=float, copy=True)
    for _ in range(KEPLER_MAX_ITER):
        residual = ecc_anomaly - eccentricity * np.sin(ecc_anomaly) - mean_anomaly
        if np.all(np.abs(residual) < KEPLER_TOL):
            return ecc_anomaly
        ecc_anomaly = ecc_anomaly - residual / (1.0 - eccentricity * np.cos(ecc_anomaly))
    raise NumericalError(
        f"Kepler's equation did not converge in {KEPLER_MAX_ITER} iterations (e={eccentricity})."
    )


def propagate_inertial(sat: Satellite, t: Union[float, np.ndarray]) -> np.ndarray:
    """Position in the inertial frame (km) at `t` seconds after epoch, shape (..., 3)."""
    t = np.asarray(t, dtype=float)
    a, e = sat.semi_major_axis, sat.eccentricity
    mean_motion = np.sqrt(MU_EARTH / a**3)
    mean_anomaly = np.deg2rad(sat.mean_anomaly_epoch) + mean_motion * t
    mean_anomaly = np.mod(mean_anomaly, 2 * np.pi)
    ecc_anomaly = solve_kepler(mean_anomaly, e)

    # Perifocal coordinates.
    x_p = a * (np.cos(ecc_anomaly) - e)
    y_p = a * np.sqrt(1.0 - e**2) * np.sin(ecc_anomaly)

    # Perifocal to inertial: Rz(raan) Rx(inc) Rz(argp).
    rotation = Rotation.from_euler(
        "ZXZ", [sat.raan, sat.inclination, sat.arg_perigee], degrees=True
    ).as_matrix()
    perifocal = np.stack([x_p, y_p, np.zeros_like(x_p)], axis=-1)
    return perifocal @ rotation.T


def propagate(
    sat: Satellite, t: Union[float, np.ndarray], gmst0: float = 0.0
) -> np.ndarray:
    """Earth-fixed position (km) at `t` seconds after epoch.

    The earth-fixed frame turns at a constant rate from the sidereal angle `gmst0`
    it holds at epoch.
    """
    r_inertial = propagate_inertial(sat, t)
    theta = gmst0 + EARTH_ROTATION_RATE * np.asarray(t, dtype=float)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    x = cos_t * r_inertial[..., 0] + sin_t * r_inertial[..., 1]
    y = -sin_t * r_inertial[..., 0] + cos_t * r_inertial[..., 1]
    return np.stack([x, y, r_inertial[..., 2]], axis=-1)


def station_position(station: GroundStation) -> np.ndarray:
    """Earth-fixed position (km) of a station on the WGS-84 ellipsoid."""
    lat, lon = np.deg2rad([station.latitude, station.longitude])
    e2 = EARTH_FLATTENING * (2 - EARTH_FLATTENING)
    n = EARTH_RADIUS / np.sqrt(1 - e2 * np.sin(lat) ** 2)
    return np.array(
        [
            (n + station.altitude) * np.cos(lat) * np.cos(lon),
            (n + station.altitude) * np.cos(lat) * np.sin(lon),
            (n * (1 - e2) + station.altitude) * np.sin(lat),
        ]
    )


def elevation(
    sat: Satellite, station: GroundStation, t: Union[float, np.ndarray], gmst0: float = 0.0
) -> np.ndarray:
    """Elevation angle (degrees) of the satellite seen from the station."""
    lat, lon = np.deg2rad([station.latitude, station.longitude])
    rel = propagate(sat, t, gmst0) - station_position(station)
    # Local "up" for the geodetic latitude.
    up = np.array([np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)])
    distance = np.linalg.norm(rel, axis=-1)
    return np.rad2deg(np.arcsin(np.clip(rel @ up / distance, -1.0, 1.0)))


def _refine(
    sat: Satellite, station: GroundStation, lo: float, hi: float, gmst0: float
) -> float:
    """Horizon crossing between two scan samples, to 0.1 s."""
    func = lambda t: float(elevation(sat, station, t, gmst0)) - station.min_elevation
    return float(optimize.bisect(func, lo, hi, xtol=0.1))


def _passes(
    sat: Satellite,
    station: GroundStation,
    horizon: Tuple[Seconds, Seconds],
    step: Seconds,
    gmst0: float,
) -> List[Tuple[float, float]]:
    start, end = horizon
    times = np.arange(start, end, step)
    times = np.append(times, end)
    visible = elevation(sat, station, times, gmst0) >= station.min_elevation

    passes = []
    rise = start if visible[0] else None
    for k in range(1, len(times)):
        if visible[k] and not visible[k - 1]:
            rise = _refine(sat, station, times[k - 1], times[k], gmst0)
        elif not visible[k] and visible[k - 1]:
            assert rise is not None
            passes.append((rise, _refine(sat, station, times[k - 1], times[k], gmst0)))
            rise = None
    if rise is not None:
        passes.append((rise, end))
    return passes


def compute_vtws(
    sats: Sequence[Satellite],
    stations: Sequence[GroundStation],
    horizon: Tuple[Seconds, Seconds],
    step: Seconds = 10.0,
    sigma: Seconds = 60.0,
    epoch: str = "2020-10-15T00:00:00Z",
) -> Tuple[VisibleTimeWindow, ...]:
    """Visible time windows of every (satellite, station) pair over the horizon.

    The elevation is sampled every `step` seconds and each crossing of the
    station mask is refined by bisection. Windows shorter than `2 * sigma` are
    dropped. The result is ordered by (sw, satellite, station) and numbered from 1.
    """
    if step <= 0:
        raise DomainError(f"Scan step must be positive, got {step}.")
    gmst0 = gmst(epoch)
    found = []
    for sat in sats:
        for station in stations:
            for sw, ew in _passes(sat, station, horizon, step, gmst0):
                if ew - sw >= 2 * sigma:
                    found.append((sw, sat.id, station.id, ew))
    found.sort()
    logger.debug(f"Computed {len(found)} windows for {len(sats)}x{len(stations)} pairs.")
    return tuple(
        VisibleTimeWindow(id=i + 1, sw=sw, ew=ew, satellite=sat_id, station=station_id)
        for i, (sw, sat_id, station_id, ew) in enumerate(found)
    )
