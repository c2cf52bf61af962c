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

import pytest

from downlink.errors import DomainError
from downlink.model import candidate_windows, due_time, playback_feasible, segmental
from downlink.types import Instance, OriginalImageData, SatelliteClass, VisibleTimeWindow


@pytest.mark.parametrize(
    "priority, hours", [(1, 24), (3, 24), (4, 12), (6, 12), (7, 6), (9, 6), (10, 3)]
)
def test_due_time_bands(priority: int, hours: int) -> None:
    assert due_time(priority) == hours


@pytest.mark.parametrize("priority", [0, 11, -3])
def test_due_time_rejects_out_of_range(priority: int) -> None:
    with pytest.raises(DomainError):
        due_time(priority)


def test_candidate_windows_filters_satellite_and_validity(tiny_instance: Instance) -> None:
    oid1, oid2, _ = tiny_instance.oids
    assert [w.id for w in candidate_windows(oid1, tiny_instance.vtws)] == [1, 3]
    assert [w.id for w in candidate_windows(oid2, tiny_instance.vtws)] == [2]


def test_candidate_windows_uses_window_start_only() -> None:
    oid = OriginalImageData(1, 10, 0.0, 3, 30.0, 1)
    expiry = 3 * 3600.0
    windows = (
        VisibleTimeWindow(1, -50.0, 200.0, 1, 1),  # opens before release
        VisibleTimeWindow(2, expiry - 10.0, expiry + 500.0, 1, 1),  # opens in time, ends late
        VisibleTimeWindow(3, expiry, expiry + 500.0, 1, 1),  # opens at expiry
    )
    assert [w.id for w in candidate_windows(oid, windows)] == [2]


def test_playback_feasible_compares_total_capacity() -> None:
    oid = OriginalImageData(1, 5, 0.0, 12, 100.0, 1)
    windows = (VisibleTimeWindow(1, 0.0, 60.0, 1, 1), VisibleTimeWindow(2, 100.0, 150.0, 1, 1))
    assert playback_feasible(oid, windows)
    assert not playback_feasible(oid, windows, rp=4.0)
    assert not playback_feasible(oid, ())


def test_segmental_is_strict() -> None:
    oid = OriginalImageData(1, 5, 0.0, 12, 20.0, 1)
    assert not segmental(oid, 10.0)
    assert segmental(oid._replace(duration=20.5), 10.0)


@pytest.mark.parametrize(
    "name, cls",
    [
        ("GF0601", SatelliteClass.GAOFEN),
        ("SV03", SatelliteClass.SUPERVIEW),
        ("ZY02C", SatelliteClass.EARTH_RESOURCE),
    ],
)
def test_satellite_class_from_name(name: str, cls: SatelliteClass) -> None:
    assert SatelliteClass.from_name(name) is cls


def test_satellite_class_rejects_unknown_prefix() -> None:
    with pytest.raises(ValueError):
        SatelliteClass.from_name("XX01")
