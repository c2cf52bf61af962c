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

import numpy as np
import pytest

from downlink.errors import DomainError
from downlink.types import GroundStation, Satellite
from downlink.utils import orbit
from downlink.utils.make_instance import SATELLITE_CATALOG

KIRUNA = GroundStation(4, "Kiruna", 67.0, 21.0)


def test_solve_kepler_satisfies_equation() -> None:
    mean_anomaly = np.linspace(0.0, 2 * np.pi, 101)
    for e in (0.0, 0.001, 0.1, 0.7):
        ecc_anomaly = orbit.solve_kepler(mean_anomaly, e)
        residual = ecc_anomaly - e * np.sin(ecc_anomaly) - mean_anomaly
        assert np.max(np.abs(residual)) < 1e-10


def test_circular_orbit_keeps_radius() -> None:
    sat = Satellite(1, "SV03", 7000.0, 0.0, 97.5, 10.0, 0.0, 0.0)
    t = np.linspace(0.0, orbit.orbital_period(sat), 50)
    radius = np.linalg.norm(orbit.propagate(sat, t, gmst0=1.0), axis=-1)
    assert radius == pytest.approx(np.full(50, 7000.0), rel=1e-9)


def test_orbit_repeats_after_one_period() -> None:
    sat = SATELLITE_CATALOG[1]
    period = orbit.orbital_period(sat)
    start, end = orbit.propagate_inertial(sat, np.array([0.0, period]))
    assert np.linalg.norm(end - start) < 1e-4


def test_station_on_ellipsoid_surface() -> None:
    equator = GroundStation(9, "eq", 0.0, 0.0)
    pole = GroundStation(9, "pole", 90.0, 0.0)
    assert orbit.station_position(equator) == pytest.approx([orbit.EARTH_RADIUS, 0.0, 0.0])
    polar_radius = orbit.EARTH_RADIUS * (1 - orbit.EARTH_FLATTENING)
    assert orbit.station_position(pole)[2] == pytest.approx(polar_radius, rel=1e-9)


def test_compute_vtws_properties() -> None:
    sats = SATELLITE_CATALOG[:3]
    vtws = orbit.compute_vtws(sats, (KIRUNA,), (0.0, 86400.0), step=10.0, sigma=60.0)
    assert vtws, "a polar station sees sun-synchronous satellites several times a day"
    assert [w.id for w in vtws] == list(range(1, len(vtws) + 1))
    assert all(a.sw <= b.sw for a, b in zip(vtws, vtws[1:]))
    assert all(w.length >= 120.0 for w in vtws)
    gmst0 = orbit.gmst("2020-10-15T00:00:00Z")
    sat_by_id = {s.id: s for s in sats}
    for w in vtws[:5]:
        mid = 0.5 * (w.sw + w.ew)
        assert float(orbit.elevation(sat_by_id[w.satellite], KIRUNA, mid, gmst0)) >= 5.0
        if w.sw > 0.0:
            assert float(orbit.elevation(sat_by_id[w.satellite], KIRUNA, w.sw - 1.0, gmst0)) < 5.0


def test_compute_vtws_rejects_bad_step() -> None:
    with pytest.raises(DomainError):
        orbit.compute_vtws(SATELLITE_CATALOG[:1], (KIRUNA,), (0.0, 100.0), step=0.0)
