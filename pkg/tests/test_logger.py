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
from pathlib import Path
from typing import Any, Dict

import pytest
from pytest_mock import MockerFixture

from downlink.logger import logger_setup
from downlink.types import FrontSummary, ObjectiveVector
from downlink.utils.logger_tools import JsonWriter, Logger, get_experiment_path, instance_name

_SUMMARY = FrontSummary(
    points=[ObjectiveVector(0.2, 0.5), ObjectiveVector(0.4, 0.1)],
    hv=0.42,
    fr_max=0.4,
    fr_mean=0.3,
    fr_min=0.2,
    st_max=0.5,
    st_mean=0.3,
    st_min=0.1,
)


def test_instance_and_experiment_names(run_config: Dict[str, Any]) -> None:
    assert instance_name(run_config) == "PD-20-s5"
    assert get_experiment_path(run_config, "json") == "json/de_nsga2/PD-20-s5/min/seed_0"
    run_config["problem"]["instance_path"] = "/data/instances/md-500.json"
    assert instance_name(run_config) == "md-500"


def test_json_writer_layout(tmp_path: Path) -> None:
    writer = JsonWriter(str(tmp_path), "de_nsga2", "PD-20-s5", seed=3)
    writer.write(1, "evolution/hypervolume", 0.3)
    writer.write(1, "evolution/front_size", 4.0)
    writer.write(1, "absolute/hypervolume", 0.35)

    data = json.loads((tmp_path / "metrics.json").read_text())
    run = data["downlink"]["PD-20-s5"]["de_nsga2"]["seed_3"]
    assert run["step_1"]["step_count"] == 1
    assert run["step_1"]["hypervolume"] == [0.3]
    assert run["step_1"]["front_size"] == [4.0]
    assert run["absolute_metrics"] == {"hypervolume": [0.35]}


def test_json_writer_appends_runs(tmp_path: Path) -> None:
    JsonWriter(str(tmp_path), "de_nsga2", "PD-20-s5", seed=0).write(1, "evolution/hypervolume", 0.1)
    JsonWriter(str(tmp_path), "de_crem", "PD-20-s5", seed=0).write(1, "evolution/hypervolume", 0.2)
    runs = json.loads((tmp_path / "metrics.json").read_text())["downlink"]["PD-20-s5"]
    assert set(runs) == {"de_nsga2", "de_crem"}


def test_log_fn_writes_json(run_config: Dict[str, Any]) -> None:
    log = logger_setup(run_config)
    assert log(_SUMMARY, iteration=2, iters_per_second=10.0) == pytest.approx(0.42)
    log(_SUMMARY, iteration=2, absolute_metric=True)

    path = Path(run_config["logger"]["base_exp_path"]) / get_experiment_path(run_config, "json")
    run = json.loads((path / "metrics.json").read_text())["downlink"]["PD-20-s5"]["de_nsga2"]
    metrics = run["seed_0"]
    assert metrics["step_2"]["iters_per_second"] == [10.0]
    assert metrics["step_2"]["min_failure_rate"] == [0.2]
    assert metrics["absolute_metrics"]["front_size"] == [2.0]
    assert "iters_per_second" not in metrics["absolute_metrics"]


def test_shared_json_path(run_config: Dict[str, Any]) -> None:
    run_config["logger"]["kwargs"]["json_path"] = "sweep"
    logger = Logger(run_config)
    logger.log_stat("evolution/hypervolume", 0.1, 1)
    base = Path(run_config["logger"]["base_exp_path"])
    assert (base / "json" / "sweep" / "metrics.json").is_file()


def test_no_sinks(run_config: Dict[str, Any], tmp_path: Path) -> None:
    run_config["logger"]["use_json"] = False
    log = logger_setup(run_config)
    assert log(_SUMMARY, iteration=1) == pytest.approx(0.42)
    assert not (tmp_path / "logs").exists()


def test_neptune_sink(run_config: Dict[str, Any], mocker: MockerFixture) -> None:
    run = mocker.MagicMock()
    mocker.patch("downlink.utils.logger_tools.get_neptune_logger", return_value=run)
    run_config["logger"]["use_neptune"] = True
    logger = Logger(run_config)
    logger.log_stat("evolution/hypervolume", 0.1, 4)
    run["evolution/hypervolume"].log.assert_called_with(0.1, step=4)
    logger.stop()
    run.stop.assert_called_once()


def test_final_log_closes_neptune_run(run_config: Dict[str, Any], mocker: MockerFixture) -> None:
    run = mocker.MagicMock()
    mocker.patch("downlink.utils.logger_tools.get_neptune_logger", return_value=run)
    run_config["logger"]["use_neptune"] = True
    log = logger_setup(run_config)
    log(_SUMMARY, iteration=1)
    run.stop.assert_not_called()
    log(_SUMMARY, iteration=1, absolute_metric=True)
    run["absolute/hypervolume"].log.assert_any_call(0.42, step=1)
    run.stop.assert_called_once()
