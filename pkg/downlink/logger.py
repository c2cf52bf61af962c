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

"""Logger setup."""
from typing import Dict, Protocol

from colorama import Fore, Style

from downlink.types import FrontSummary
from downlink.utils.logger_tools import Logger


# Not in types.py because we only use it here.
class LogFn(Protocol):
    def __call__(
        self,
        summary: FrontSummary,
        iteration: int = 0,
        iters_per_second: float = 0.0,
        absolute_metric: bool = False,
    ) -> float:
        ...


def get_logger_tools(logger: Logger) -> LogFn:
    """Get the logger function."""

    def log(
        summary: FrontSummary,
        iteration: int = 0,
        iters_per_second: float = 0.0,
        absolute_metric: bool = False,
    ) -> float:
        """Log the archive front of one iteration.

        Args:
            summary (FrontSummary): the archive's non-dominated front.
            iteration (int): the current iteration, 0 for the initial archive.
            iters_per_second (float): throughput of the evolutionary loop.
            absolute_metric (bool): whether this is the final front of the run.
        """
        prefix = "absolute/" if absolute_metric else "evolution/"

        if logger.should_log:
            logger.log_stat(f"{prefix}hypervolume", summary.hv, iteration)
            logger.log_stat(f"{prefix}min_failure_rate", summary.fr_min, iteration)
            logger.log_stat(f"{prefix}min_segmentation_times", summary.st_min, iteration)
            logger.log_stat(f"{prefix}front_size", float(len(summary.points)), iteration)
            if not absolute_metric:
                logger.log_stat(f"{prefix}iters_per_second", iters_per_second, iteration)

        log_string = (
            f"Iteration {iteration:04d} | "
            f"HV {summary.hv:.4f} | "
            f"Min FR {summary.fr_min:.4f} | "
            f"Mean FR {summary.fr_mean:.4f} | "
            f"Min ST {summary.st_min:.4f} | "
            f"Mean ST {summary.st_mean:.4f} | "
            f"Front Size {len(summary.points)} "
        )

        if absolute_metric:
            logger.console_logger.info(
                f"{Fore.BLUE}{Style.BRIGHT}ABSOLUTE METRIC: {log_string}{Style.RESET_ALL}"
            )
            # The absolute metric is the last entry of a run.
            logger.stop()
        else:
            log_string += f"| Iter/s {iters_per_second:.2e}"
            logger.console_logger.info(
                f"{Fore.GREEN}{Style.BRIGHT}EVOLUTION: {log_string}{Style.RESET_ALL}"
            )

        return summary.hv

    return log


def logger_setup(config: Dict) -> LogFn:
    """Setup the logger."""
    logger = Logger(config)
    return get_logger_tools(logger)
