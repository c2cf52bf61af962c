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

"""Sweeps of the solver over one parameter axis and a set of seeds."""
import copy
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from downlink.errors import ConfigError
from downlink.logger import logger_setup
from downlink.metrics import single_success_rate, summarize_front
from downlink.systems.de_nsga2 import make_problem, run, write_results
from downlink.types import EvolutionConfig, FrontSummary, ProblemConfig, SatelliteClass
from downlink.utils.dumps import CSV_OPTIONS
from downlink.utils.svg import Series, write_chart

logger = logging.getLogger(__name__)

THREADS_ENV = "DOWNLINK_SCHED_THREADS"


def _parse_bool(value: Any) -> bool:
    if isinstance(value, str):
        if value.lower() in ("true", "1", "yes"):
            return True
        if value.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"Expected a boolean, got {value!r}.")
    return bool(value)


def _probability(value: Any) -> float:
    p = float(value)
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"Sweep values must lie in [0, 1], got {p}.")
    return p


# axis -> (config section, key, parser)
AXES: Dict[str, Tuple[str, str, Callable[[Any], Any]]] = {
    "ir": ("system", "ir", _probability),
    "mr": ("system", "mr", _probability),
    "strategy": ("problem", "strategy", str),
    "selection": ("system", "selection", str),
    "reorder": ("system", "use_reorder", _parse_bool),
}


class ExperimentSpec(NamedTuple):
    """A sweep: every value of `axis` crossed with every seed.

    `config` is the base run config; with axis `none` only the seeds vary.
    """

    axis: str
    values: Tuple[Any, ...]
    seeds: Tuple[int, ...]
    output_dir: str
    config: Dict

    @classmethod
    def from_config(cls, config: Dict) -> "ExperimentSpec":
        experiment = config.get("experiment") or {}
        axis = str(experiment.get("axis", "none")).lower()
        if axis != "none" and axis not in AXES:
            raise ConfigError(
                f"Unknown sweep axis {axis!r}; expected none or one of {sorted(AXES)}."
            )
        values: Tuple[Any, ...] = ("default",)
        if axis != "none":
            parse = AXES[axis][2]
            values = tuple(parse(v) for v in experiment.get("values") or ())
            if not values:
                raise ConfigError(f"Sweep over {axis} needs at least one value.")
        seeds = tuple(int(s) for s in experiment.get("seeds") or ())
        if not seeds:
            raise ConfigError("An experiment needs at least one seed.")
        output_dir = config["arch"].get("output_dir") or "results/experiment"
        spec = cls(axis, values, seeds, output_dir, config)
        # Fail before any cell starts.
        for value in values:
            cell = spec.cell_config(value, seeds[0])
            EvolutionConfig.from_config(cell)
            ProblemConfig.from_config(cell)
        return spec

    def label(self, value: Any) -> str:
        return "default" if self.axis == "none" else f"{self.axis}={value}"

    def cell_config(self, value: Any, seed: int) -> Dict:
        """Run config of one (value, seed) cell. Every cell writes under its own directory."""
        config = copy.deepcopy(self.config)
        if self.axis != "none":
            section, key, _ = AXES[self.axis]
            config[section][key] = value
        config["system"]["seed"] = int(seed)
        config["arch"]["output_dir"] = os.path.join(
            self.output_dir, "runs", self.label(value), f"seed_{seed}"
        )
        config["logger"]["system_name"] = f"{config['logger']['system_name']}_{self.label(value)}"
        config["logger"]["kwargs"]["json_path"] = None
        return config


class CellResult(NamedTuple):
    label: str
    seed: int
    hv: List[float]  # initial archive first
    summary: FrontSummary
    ssr: Dict[str, Tuple[float, float]]  # class -> (min, max) over the final front


def run_cell(label: str, config: Dict) -> CellResult:
    """Solve one cell and write its per-run files."""
    evo_config = EvolutionConfig.from_config(config)
    problem = make_problem(config)
    trace = run(problem, evo_config, logger_setup(config))
    write_results(trace, problem, evo_config, config["arch"]["output_dir"])

    summary = summarize_front(trace.archive, evo_config.ref_point)
    front = [ind for ind in trace.archive if ind.objectives in summary.points]
    ssr = {}
    for cls in SatelliteClass:
        rates = [single_success_rate(ind.schedule, problem.instance, cls) for ind in front]
        ssr[cls.value] = (min(rates), max(rates))
    return CellResult(
        label=label,
        seed=evo_config.seed,
        hv=[trace.initial_hv, *trace.hv],
        summary=summary,
        ssr=ssr,
    )


def num_workers(config: Dict) -> int:
    """Worker processes for a sweep: `arch.num_workers`, then the environment, then CPUs."""
    configured = config["arch"].get("num_workers")
    if configured is None:
        configured = os.environ.get(THREADS_ENV) or os.cpu_count() or 1
    try:
        workers = int(configured)
    except ValueError as e:
        raise ConfigError(f"Invalid worker count {configured!r}.") from e
    if workers < 1:
        raise ConfigError(f"Worker count must be positive, got {workers}.")
    return workers


def _summary_rows(spec: ExperimentSpec, results: Sequence[CellResult]) -> pd.DataFrame:
    rows = []
    for value in spec.values:
        label = spec.label(value)
        cell = [r for r in results if r.label == label]
        hv = np.array([r.hv[-1] for r in cell])
        rows.append(
            {
                "cell": label,
                "runs": len(cell),
                "hv_mean": hv.mean(),
                "hv_std": hv.std(),
                "hv_q1": np.quantile(hv, 0.25),
                "hv_median": np.median(hv),
                "hv_q3": np.quantile(hv, 0.75),
                **{
                    stat: float(np.mean([getattr(r.summary, stat) for r in cell]))
                    for stat in ("fr_max", "fr_mean", "fr_min", "st_max", "st_mean", "st_min")
                },
            }
        )
    return pd.DataFrame(rows)


def write_tables(spec: ExperimentSpec, results: Sequence[CellResult]) -> Dict[str, pd.DataFrame]:
    """Summary, final hypervolume, SSR and best-front tables plus the two charts."""
    out = spec.output_dir
    os.makedirs(out, exist_ok=True)
    tables = {
        "summary": _summary_rows(spec, results),
        "final_hv": pd.DataFrame(
            [{"cell": r.label, "seed": r.seed, "hv": r.hv[-1]} for r in results]
        ),
        "ssr": pd.DataFrame(
            [
                {"cell": r.label, "seed": r.seed, "class": cls, "ssr_min": lo, "ssr_max": hi}
                for r in results
                for cls, (lo, hi) in r.ssr.items()
            ]
        ),
    }

    best_fronts = []
    front_series, hv_series = [], []
    for value in spec.values:
        label = spec.label(value)
        cell = [r for r in results if r.label == label]
        best = max(cell, key=lambda r: (r.hv[-1], -r.seed))
        best_fronts.extend(
            {"cell": label, "seed": best.seed, "fr": p.fr, "st": p.st} for p in best.summary.points
        )
        front_series.append(
            Series(label, [p.fr for p in best.summary.points], [p.st for p in best.summary.points])
        )
        median = np.median(np.array([r.hv for r in cell]), axis=0)
        hv_series.append(Series(label, list(range(len(median))), median.tolist()))
    tables["best_fronts"] = pd.DataFrame(best_fronts, columns=["cell", "seed", "fr", "st"])

    for name, table in tables.items():
        table.to_csv(os.path.join(out, f"{name}.csv"), **CSV_OPTIONS)
    write_chart(os.path.join(out, "fronts.svg"), front_series, "Best final fronts", "FR", "ST")
    write_chart(
        os.path.join(out, "hv.svg"), hv_series, "Median archive HV", "iteration", "HV", lines=True
    )
    return tables


def run_sweep(
    spec: ExperimentSpec, workers: Optional[int] = None
) -> Dict[str, pd.DataFrame]:
    """Run every cell of the sweep, in parallel when more than one worker is allowed."""
    labels = [spec.label(v) for v in spec.values for _ in spec.seeds]
    cells = [spec.cell_config(v, s) for v in spec.values for s in spec.seeds]
    workers = num_workers(spec.config) if workers is None else workers
    logger.info(f"Running {len(cells)} cells on {min(workers, len(cells))} worker(s).")

    if workers == 1 or len(cells) == 1:
        results = [run_cell(label, c) for label, c in zip(labels, cells)]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(cells))) as pool:
            results = list(pool.map(run_cell, labels, cells))
    return write_tables(spec, results)
