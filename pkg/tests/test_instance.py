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

import json
import logging
import re
from pathlib import Path
from typing import Any, Callable, Dict

import pytest

from downlink.errors import DomainError, GenerationError, InstanceParseError
from downlink.model import candidate_windows
from downlink.types import DistributionKind, Instance, VisibleTimeWindow
from downlink.utils.instance_io import (
    instance_to_dict,
    load_instance,
    load_vtws,
    save_instance,
    save_vtws,
    with_vtws,
)
from downlink.utils.make_instance import generate_instance, make, make_stations


def test_generated_instance_shape(small_instance: Instance) -> None:
    assert len(small_instance.oids) == 60
    assert {g.name for g in small_instance.stations} == {"Miyun", "Kashi", "Sanya", "Kiruna"}
    assert all(candidate_windows(t, small_instance.vtws) for t in small_instance.oids)
    for t in small_instance.oids:
        sat = next(s for s in small_instance.satellites if s.id == t.satellite)
        low, high = sat.satellite_class.duration_range
        assert low <= t.duration <= high
        assert 1 <= t.priority <= 10


def test_generation_is_deterministic() -> None:
    assert generate_instance("PD", 50, seed=9) == generate_instance("PD", 50, seed=9)
    assert generate_instance("PD", 50, seed=9) != generate_instance("PD", 50, seed=10)


@pytest.mark.parametrize(
    "kind, stations",
    [
        (DistributionKind.ND, {"Miyun", "Kashi", "Sanya"}),
        (DistributionKind.PD, {"Kiruna"}),
        (DistributionKind.MD, {"Miyun", "Kashi", "Sanya", "Kiruna"}),
    ],
)
def test_distribution_stations(kind: DistributionKind, stations: set) -> None:
    assert {g.name for g in make_stations(kind)} == stations


def test_off_grid_count_warns(caplog: pytest.LogCaptureFixture) -> None:
    with caplog.at_level(logging.WARNING):
        instance = generate_instance("PD", 37, seed=1)
    assert len(instance.oids) == 37
    assert "outside the benchmark grid" in caplog.text


def test_generation_without_windows_fails() -> None:
    with pytest.raises(GenerationError):
        generate_instance("PD", 5, seed=1, vtws=())
    with pytest.raises(GenerationError):
        generate_instance("PD", 0, seed=1)


@pytest.mark.parametrize("params", [{"rp": 0.0}, {"msid": -1.0}, {"sigma": -0.5}])
def test_generation_rejects_bad_parameters(params: Dict[str, float]) -> None:
    with pytest.raises(DomainError):
        generate_instance("PD", 5, seed=1, **params)


def test_instance_file_round_trip(tmp_path: Path, small_instance: Instance) -> None:
    path = tmp_path / "md.json"
    save_instance(small_instance, str(path))
    assert load_instance(str(path)) == small_instance


@pytest.mark.parametrize(
    "mutate, where",
    [
        (lambda d: d["vtws"][2].update(sw=d["vtws"][2]["ew"] + 1.0), "vtws[2]"),
        (lambda d: d["oids"][2].update(priority=11), "oids[2]"),
        (lambda d: d.update(version=99), "version"),
        (lambda d: d["oids"][0].update(satellite=99), "oids[0]"),
    ],
)
def test_bad_instance_names_record(
    tmp_path: Path, tiny_instance: Instance, mutate: Callable, where: str
) -> None:
    data = instance_to_dict(tiny_instance)
    mutate(data)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(InstanceParseError, match=re.escape(where)):
        load_instance(str(path))


def test_unsorted_windows_rejected(tmp_path: Path, tiny_instance: Instance) -> None:
    data = instance_to_dict(tiny_instance)
    data["vtws"] = list(reversed(data["vtws"]))
    path = tmp_path / "unsorted.json"
    path.write_text(json.dumps(data))
    with pytest.raises(InstanceParseError, match="starts before its predecessor"):
        load_instance(str(path))


def test_with_vtws_sorts_and_replaces(tmp_path: Path, tiny_instance: Instance) -> None:
    windows = (
        VisibleTimeWindow(8, 5000.0, 5200.0, 4, 1),
        VisibleTimeWindow(7, 100.0, 300.0, 1, 1),
    )
    path = tmp_path / "vtws.json"
    save_vtws(windows, str(path))
    replaced = with_vtws(tiny_instance, load_vtws(str(path)))
    assert [w.id for w in replaced.vtws] == [7, 8]
    assert replaced.oids == tiny_instance.oids


def test_make_reads_instance_path(
    tmp_path: Path, tiny_instance: Instance, run_config: Dict[str, Any]
) -> None:
    path = tmp_path / "tiny.json"
    save_instance(tiny_instance, str(path))
    run_config["problem"]["instance_path"] = str(path)
    assert make(run_config) == tiny_instance
