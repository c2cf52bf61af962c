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

import copy
from pathlib import Path
from typing import Any, Dict

import pandas as pd
import pytest

from downlink.errors import ConfigError
from downlink.experiment import THREADS_ENV, ExperimentSpec, num_workers, run_sweep


def _sweep_config(
    run_config: Dict[str, Any], out_dir: Path, axis: str = "reorder", **experiment: Any
) -> Dict[str, Any]:
    config = copy.deepcopy(run_config)
    config["system"].update(pop_size=4, archive_size=4, max_iter=2)
    config["arch"]["output_dir"] = str(out_dir)
    config["experiment"] = {"axis": axis, "values": [True, False], "seeds": [0, 1], **experiment}
    return config


def test_experiment_from_config(tmp_path: Path, run_config: Dict[str, Any]) -> None:
    spec = ExperimentSpec.from_config(_sweep_config(run_config, tmp_path, values=["true", "0"]))
    assert spec.axis == "reorder"
    assert spec.values == (True, False)
    assert spec.seeds == (0, 1)
    assert spec.label(True) == "reorder=True"


def test_experiment_without_axis(tmp_path: Path, run_config: Dict[str, Any]) -> None:
    spec = ExperimentSpec.from_config(_sweep_config(run_config, tmp_path, axis="none"))
    assert spec.values == ("default",)
    assert spec.label("default") == "default"
    config = spec.cell_config("default", 3)
    assert config["system"]["seed"] == 3
    assert config["system"]["use_reorder"] == run_config["system"]["use_reorder"]


@pytest.mark.parametrize(
    "experiment",
    [
        {"axis": "population"},
        {"axis": "ir", "values": []},
        {"axis": "ir", "values": [0.5, 1.5]},
        {"axis": "reorder", "values": ["maybe"]},
        {"axis": "strategy", "values": ["min", "fast"]},
        {"seeds": []},
    ],
)
def test_bad_experiment_config(
    tmp_path: Path, run_config: Dict[str, Any], experiment: Dict
) -> None:
    with pytest.raises(ConfigError):
        ExperimentSpec.from_config(_sweep_config(run_config, tmp_path, **experiment))


def test_cell_config(tmp_path: Path, run_config: Dict[str, Any]) -> None:
    base = _sweep_config(run_config, tmp_path, axis="ir", values=[0.2, 0.6])
    spec = ExperimentSpec.from_config(base)
    config = spec.cell_config(0.6, 1)
    assert config["system"]["ir"] == 0.6
    assert config["system"]["seed"] == 1
    assert config["arch"]["output_dir"] == str(tmp_path / "runs" / "ir=0.6" / "seed_1")
    assert config["logger"]["system_name"] == "de_nsga2_ir=0.6"
    assert base["system"]["ir"] == run_config["system"]["ir"]


def test_num_workers(monkeypatch: pytest.MonkeyPatch, run_config: Dict[str, Any]) -> None:
    config = copy.deepcopy(run_config)
    config["arch"]["num_workers"] = 3
    assert num_workers(config) == 3

    config["arch"]["num_workers"] = None
    monkeypatch.setenv(THREADS_ENV, "2")
    assert num_workers(config) == 2

    monkeypatch.setenv(THREADS_ENV, "many")
    with pytest.raises(ConfigError):
        num_workers(config)

    config["arch"]["num_workers"] = 0
    with pytest.raises(ConfigError):
        num_workers(config)


def test_sweep_writes_tables(tmp_path: Path, run_config: Dict[str, Any]) -> None:
    spec = ExperimentSpec.from_config(_sweep_config(run_config, tmp_path))
    tables = run_sweep(spec, workers=1)

    for name in ("summary", "final_hv", "ssr", "best_fronts"):
        assert (tmp_path / f"{name}.csv").is_file()
    assert (tmp_path / "fronts.svg").read_text().startswith("<?xml")
    assert (tmp_path / "hv.svg").is_file()
    assert (tmp_path / "runs" / "reorder=False" / "seed_1" / "trace.json").is_file()

    summary = tables["summary"]
    assert summary["cell"].tolist() == ["reorder=True", "reorder=False"]
    assert summary["runs"].tolist() == [2, 2]
    assert (summary["hv_q1"] <= summary["hv_median"]).all()
    assert (summary["hv_median"] <= summary["hv_q3"]).all()
    assert len(tables["final_hv"]) == 4
    # Three satellite classes per run.
    assert len(tables["ssr"]) == 12
    assert tables["ssr"]["ssr_min"].between(0.0, 1.0).all()
    assert (tables["ssr"]["ssr_min"] <= tables["ssr"]["ssr_max"]).all()

    reread = pd.read_csv(tmp_path / "final_hv.csv")
    assert reread["hv"].tolist() == pytest.approx(tables["final_hv"]["hv"].tolist())


def test_parallel_sweep_matches_serial(tmp_path: Path, run_config: Dict[str, Any]) -> None:
    serial = run_sweep(
        ExperimentSpec.from_config(_sweep_config(run_config, tmp_path / "serial")), workers=1
    )
    parallel = run_sweep(
        ExperimentSpec.from_config(_sweep_config(run_config, tmp_path / "parallel")), workers=2
    )
    pd.testing.assert_frame_equal(serial["final_hv"], parallel["final_hv"])
    pd.testing.assert_frame_equal(serial["best_fronts"], parallel["best_fronts"])
    for run in ("reorder=True/seed_0", "reorder=False/seed_1"):
        a = (tmp_path / "serial" / "runs" / run / "trace.json").read_text()
        b = (tmp_path / "parallel" / "runs" / run / "trace.json").read_text()
        assert a == b
