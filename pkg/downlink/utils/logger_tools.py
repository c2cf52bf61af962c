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
import os
import time
from datetime import datetime
from typing import Any, Dict, Optional

from colorama import Fore, Style


class Logger:
    """Logger class for logging to tensorboard, neptune and a per-run metrics json.

    The tensorboard and neptune sinks need the `loggers` extra and are only
    imported when switched on.
    """

    def __init__(self, cfg: Dict) -> None:
        """Initialise the logger."""
        self.console_logger = get_python_logger()
        self.unique_token = datetime.now().strftime("%Y%m%d%H%M%S")

        self.use_tb = bool(cfg["logger"]["use_tf"])
        self.use_neptune = bool(cfg["logger"]["use_neptune"])
        self.use_json = bool(cfg["logger"]["use_json"])
        self.should_log = self.use_tb or self.use_neptune or self.use_json

        if self.use_tb:
            self._setup_tb(cfg)
        if self.use_neptune:
            self._setup_neptune(cfg)
        if self.use_json:
            self._setup_json(cfg)

    def _setup_tb(self, cfg: Dict) -> None:
        """Set up tensorboard logging."""
        from tensorboard_logger import configure, log_value

        tb_exp_path = get_experiment_path(cfg, "tensorboard")
        tb_logs_path = os.path.join(
            cfg["logger"]["base_exp_path"], f"{tb_exp_path}/{self.unique_token}"
        )
        configure(tb_logs_path)
        self.tb_logger = log_value

    def _setup_neptune(self, cfg: Dict) -> None:
        """Set up neptune logging."""
        self.neptune_logger = get_neptune_logger(cfg)

    def _setup_json(self, cfg: Dict) -> None:
        json_logs_path = os.path.join(
            cfg["logger"]["base_exp_path"], get_experiment_path(cfg, "json")
        )
        # A shared path lets a whole sweep write into one metrics file.
        if cfg["logger"]["kwargs"]["json_path"] is not None:
            json_logs_path = os.path.join(
                cfg["logger"]["base_exp_path"], "json", cfg["logger"]["kwargs"]["json_path"]
            )

        self.json_logger = JsonWriter(
            path=json_logs_path,
            system_name=cfg["logger"]["system_name"],
            instance_name=instance_name(cfg),
            seed=cfg["system"]["seed"],
        )

    def log_stat(self, key: str, value: float, step: int) -> None:
        """Log a single stat.

        Args:
            key (str): the metric that should be logged, prefixed by its group
                (`evolution/` or `absolute/`).
            value (float): the value of the metric that should be logged
            step (int): the current iteration
        """
        if self.use_tb:
            self.tb_logger(key, value, step)

        if self.use_neptune:
            self.neptune_logger[key].log(value, step=step)

        if self.use_json:
            self.json_logger.write(step, key, value)

    def stop(self) -> None:
        """Close the sinks that hold a connection open."""
        if self.use_neptune:
            self.neptune_logger.stop()


def get_python_logger() -> logging.Logger:
    """Set up a custom python logger."""
    logger = logging.getLogger()
    logger.handlers = []
    ch = logging.StreamHandler()
    formatter = logging.Formatter(f"{Fore.CYAN}{Style.BRIGHT}%(message)s", "%H:%M:%S")
    ch.setFormatter(formatter)
    logger.addHandler(ch)
    # Set to info to suppress debug outputs.
    logger.setLevel("INFO")

    return logger


def get_neptune_logger(cfg: Dict) -> Any:
    """Set up neptune logging."""
    import neptune
    from neptune.utils import stringify_unsupported

    tags = cfg["logger"]["kwargs"]["neptune_tag"]
    project = cfg["logger"]["kwargs"]["neptune_project"]

    run = neptune.init_run(project=project, tags=tags)
    run["config"] = stringify_unsupported(cfg)

    return run


def instance_name(config: Dict) -> str:
    """Name of the problem instance a run works on, e.g. `PD-100-s7` or the instance file stem."""
    problem = config["problem"]
    if problem.get("instance_path"):
        return os.path.splitext(os.path.basename(problem["instance_path"]))[0]
    return f"{problem['kind']}-{problem['n_oid']}-s{problem['seed']}"


def get_experiment_path(config: Dict, logger_type: str) -> str:
    """Helper function to create the experiment path."""
    exp_path = (
        f"{logger_type}/{config['logger']['system_name']}/{instance_name(config)}"
        + f"/{config['problem']['strategy']}/seed_{config['system']['seed']}"
    )

    return exp_path


class JsonWriter:
    """
    Writer of the `metrics.json` file holding the per-iteration front metrics of runs.

    The file nests `downlink -> instance name -> solver name -> seed_<n>`. Each run
    holds one `step_<iteration>` entry per logged iteration (its `step_count`,
    `elapsed_time` and one list per metric, e.g. `hypervolume`) and an
    `absolute_metrics` entry with the final front.

    Args:
        path (str): where to write the file
        system_name (str): solver name
        instance_name (str): instance name
        seed (int): random seed of the experiment
    """

    def __init__(
        self,
        path: str,
        system_name: str,
        instance_name: str,
        seed: int,
        environment_name: str = "downlink",
    ):
        self.path = path
        self.file_name = "metrics.json"
        self.run_data: Dict = {"absolute_metrics": {}}
        self.start_time: Optional[float] = None

        # If the file already exists, load it
        if os.path.isfile(f"{self.path}/{self.file_name}"):
            with open(f"{self.path}/{self.file_name}", "r") as f:
                data = json.load(f)
        else:
            os.makedirs(self.path, exist_ok=True)
            data = {}

        self.data = data
        runs = self.data.setdefault(environment_name, {}).setdefault(instance_name, {})
        runs.setdefault(system_name, {})[f"seed_{seed}"] = self.run_data
        self._flush()

    def write(self, step: int, key: str, value: float) -> None:
        """
        Writes a step to the json reporting file

        Args:
            step (int): the current iteration
            key (str): the metric that should be logged
            value (float): the value of the metric that should be logged
        """
        current_time = time.time()
        if self.start_time is None:
            self.start_time = current_time

        logging_prefix, *metric_key = key.split("/")
        metrics = {"/".join(metric_key): [value]}

        if logging_prefix == "evolution":
            step_metrics: Dict[str, Any] = {
                "step_count": step,
                "elapsed_time": current_time - self.start_time,
            }
            step_metrics.update(metrics)
            self.run_data.setdefault(f"step_{step}", {}).update(step_metrics)

        if logging_prefix == "absolute":
            self.run_data["absolute_metrics"].update(metrics)

        self._flush()

    def _flush(self) -> None:
        with open(f"{self.path}/{self.file_name}", "w") as f:
            json.dump(self.data, f, indent=4)
