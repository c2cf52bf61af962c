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

"""Two-stage differential evolution with NSGA-II elitism for satellite image data downlink."""
import copy
import os
import time
from typing import Dict, List, Optional

import hydra
import numpy as np
from colorama import Fore, Style
from omegaconf import DictConfig, OmegaConf
from rich.pretty import pprint

from downlink.logger import LogFn, logger_setup
from downlink.metrics import summarize_front
from downlink.objectives import evaluate
from downlink.operators import (
    improve,
    initialize,
    mutation_operator,
    swap_between,
    swap_within,
    trigger,
)
from downlink.schedule import Problem
from downlink.segmentation import build_nt
from downlink.selection import box_combine, elitist_select
from downlink.types import EvolutionConfig, Individual, ProblemConfig, RunTrace, Schedule
from downlink.utils import dumps
from downlink.utils.make_instance import make
from downlink.utils.rng import substream

# Stream keys for per-generation draws that belong to no single individual.
SHUFFLE_KEY = 1 << 30
SELECT_KEY = SHUFFLE_KEY + 1
# Second key under an individual's index, used by the improve step.
IMPROVE_KEY = 1


def make_individual(schedule: Schedule, problem: Problem) -> Individual:
    objectives = evaluate(schedule, problem.instance.oids, problem.instance.msid)
    schedule = schedule._replace(objectives=objectives)
    return Individual(schedule.to_chromosome(), schedule, objectives)


def initial_population(problem: Problem, config: EvolutionConfig) -> List[Individual]:
    """Random individuals, each improved by insert and reorder."""
    population = []
    for i, schedule in enumerate(initialize(problem, config.pop_size, config.seed)):
        rng = substream(config.seed, 0, i, IMPROVE_KEY)
        schedule = improve(schedule, problem, config.ir, rng, config.use_reorder)
        population.append(make_individual(schedule, problem))
    return population


def generate_offspring(
    elites: List[Individual], problem: Problem, config: EvolutionConfig, generation: int
) -> List[Individual]:
    """Mutation, crossover between shuffled elite pairs and swap within, then improve.

    Child `i` draws from `substream(seed, generation, i)`, a pair's crossover
    from the stream of its first child.
    """
    order = substream(config.seed, generation, SHUFFLE_KEY).permutation(len(elites))
    parents = np.resize(order, config.pop_size + config.pop_size % 2)

    offspring: List[Individual] = []
    for k in range(0, len(parents), 2):
        rngs = [substream(config.seed, generation, k), substream(config.seed, generation, k + 1)]
        a, b = (
            mutation_operator(elites[parents[k + c]].schedule, problem, config.mr, rngs[c])
            for c in range(2)
        )
        if trigger(rngs[0], config.mr):
            a, b = swap_between(a, b, problem, rngs[0])
        for child, rng in zip((a, b), rngs):
            if trigger(rng, config.mr):
                child = swap_within(child, problem, rng)
            child = improve(child, problem, config.ir, rng, config.use_reorder)
            offspring.append(make_individual(child, problem))
    return offspring[: config.pop_size]


def run(problem: Problem, config: EvolutionConfig, log: Optional[LogFn] = None) -> RunTrace:
    """Evolve an archive of downlink schedules.

    The archive hypervolume is recorded after every iteration against
    `config.ref_point`.
    """
    config.check()
    start_time = time.time()

    population = initial_population(problem, config)
    elites = elitist_select(
        population, config.archive_size, config.selection, substream(config.seed, 0, SELECT_KEY)
    )
    summary = summarize_front(elites, config.ref_point)
    initial_hv = summary.hv
    if log is not None:
        log(summary, iteration=0)

    hv: List[float] = []
    for generation in range(1, config.max_iter + 1):
        iter_start = time.time()
        offspring = generate_offspring(elites, problem, config, generation)
        pool = box_combine(elites, offspring, config.box_grid)
        elites = elitist_select(
            pool,
            config.archive_size,
            config.selection,
            substream(config.seed, generation, SELECT_KEY),
        )
        summary = summarize_front(elites, config.ref_point)
        hv.append(summary.hv)
        if log is not None:
            elapsed = max(time.time() - iter_start, 1e-9)
            log(summary, iteration=generation, iters_per_second=1.0 / elapsed)

    if log is not None:
        log(summary, iteration=config.max_iter, absolute_metric=True)
    return RunTrace(hv, initial_hv, elites, time.time() - start_time)


def make_problem(config: Dict) -> Problem:
    """Instance and image data for the `problem` section of a config.

    Stochastic segmentation is seeded with the run seed, so restarts see
    different cuts of the same instance.
    """
    problem_config = ProblemConfig.from_config(config)
    instance = make(config)
    image_data = build_nt(
        instance,
        problem_config.strategy,
        seed=int(config["system"]["seed"]),
        playback_uses_rp=problem_config.playback_uses_rp,
    )
    return Problem(instance, image_data)


def write_results(trace: RunTrace, problem: Problem, config: EvolutionConfig, out_dir: str) -> None:
    """Trace dump, front table, hypervolume curve and the best compromise schedule."""
    os.makedirs(out_dir, exist_ok=True)
    dumps.save_trace(trace, problem, os.path.join(out_dir, "trace.json"), config.ref_point)
    dumps.save_front_csv(trace.archive, os.path.join(out_dir, "front.csv"), config.ref_point)
    dumps.save_hv_csv(trace, os.path.join(out_dir, "hv.csv"))
    best = dumps.best_compromise(trace.archive)
    dumps.save_schedule(best.schedule, problem, os.path.join(out_dir, "schedule.json"))


def run_experiment(_config: Dict) -> RunTrace:
    """Runs experiment."""
    config = copy.deepcopy(_config)
    evo_config = EvolutionConfig.from_config(config)
    log = logger_setup(config)

    problem = make_problem(config)
    pprint(config)

    trace = run(problem, evo_config, log)
    if config["arch"].get("output_dir"):
        write_results(trace, problem, evo_config, config["arch"]["output_dir"])
    return trace


@hydra.main(config_path="../configs", config_name="default_de_nsga2.yaml", version_base="1.2")
def hydra_entry_point(cfg: DictConfig) -> None:
    """Experiment entry point."""
    # Convert config to python dict.
    cfg: Dict = OmegaConf.to_container(cfg, resolve=True)

    # Run experiment.
    run_experiment(cfg)

    print(f"{Fore.CYAN}{Style.BRIGHT}DE+NSGA-II experiment completed{Style.RESET_ALL}")


if __name__ == "__main__":
    hydra_entry_point()
