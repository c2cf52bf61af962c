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

from pathlib import Path
from typing import Any, Dict

import pytest

from downlink.schedule import Problem
from downlink.segmentation import build_nt
from downlink.types import (
    GroundStation,
    Instance,
    OriginalImageData,
    SegmentationStrategy,
    VisibleTimeWindow,
)
from downlink.utils.make_instance import SATELLITE_CATALOG, generate_instance


@pytest.fixture
def tiny_instance() -> Instance:
    """Two satellites, one station, three windows and three OIDs.

    OID 1 (priority 10, 30 s) and OID 3 (priority 1, 15 s) belong to satellite 1
    and may use windows 1 and 3; OID 2 (priority 1, 15 s) belongs to satellite 4
    and may only use window 2. At rp=4 window 1 holds 30 observation seconds,
    windows 2 and 3 hold 25.
    """
    gf, sv = SATELLITE_CATALOG[0], SATELLITE_CATALOG[3]
    return Instance(
        satellites=(gf, sv),
        stations=(GroundStation(1, "Miyun", 40.0, 117.0),),
        horizon=(0.0, 86400.0),
        oids=(
            OriginalImageData(1, 10, 0.0, 3, 30.0, gf.id),
            OriginalImageData(2, 1, 0.0, 24, 15.0, sv.id),
            OriginalImageData(3, 1, 0.0, 24, 15.0, gf.id),
        ),
        vtws=(
            VisibleTimeWindow(1, 100.0, 220.0, gf.id, 1),
            VisibleTimeWindow(2, 300.0, 400.0, sv.id, 1),
            VisibleTimeWindow(3, 1000.0, 1100.0, gf.id, 1),
        ),
        rp=4.0,
        msid=10.0,
        sigma=60.0,
    )


@pytest.fixture
def tiny_problem(tiny_instance: Instance) -> Problem:
    """Image data 1-3 are the three 10 s segments of OID 1, 4 is OID 2 and 5 is OID 3."""
    return Problem(tiny_instance, build_nt(tiny_instance, SegmentationStrategy.MINIMUM))


@pytest.fixture(scope="session")
def small_instance() -> Instance:
    return generate_instance("MD", 60, seed=3)


@pytest.fixture(scope="session")
def small_problem(small_instance: Instance) -> Problem:
    return Problem(small_instance, build_nt(small_instance, SegmentationStrategy.MINIMUM))


@pytest.fixture
def run_config(tmp_path: Path) -> Dict[str, Any]:
    """A resolved run config, as hydra would produce it, for a small generated problem."""
    return {
        "logger": {
            "use_tf": False,
            "use_neptune": False,
            "use_json": True,
            "base_exp_path": str(tmp_path / "logs"),
            "system_name": "de_nsga2",
            "kwargs": {"neptune_project": None, "neptune_tag": [], "json_path": None},
        },
        "arch": {"num_workers": 1, "output_dir": None, "ref_point": [1.0, 1.0]},
        "system": {
            "seed": 0,
            "pop_size": 8,
            "archive_size": 8,
            "max_iter": 3,
            "ir": 0.4,
            "mr": 0.8,
            "selection": "nsga2",
            "box_grid": 100,
            "use_reorder": True,
        },
        "problem": {
            "kind": "PD",
            "n_oid": 20,
            "seed": 5,
            "instance_path": None,
            "vtws_path": None,
            "strategy": "min",
            "msid": 10.0,
            "playback_uses_rp": False,
            "rp": 4.0,
            "sigma": 60.0,
            "vtw_step": 10.0,
            "min_elevation": 5.0,
        },
    }
