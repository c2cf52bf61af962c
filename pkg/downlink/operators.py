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

"""Initialisation and the bi-stage operators.

Every operator maps feasible schedules to feasible schedules.
"""
from typing import List, Tuple

import numpy as np

from downlink.errors import ContractError
from downlink.schedule import Plan, Problem, decode
from downlink.types import Chromosome, Schedule
from downlink.utils.rng import substream


def trigger(rng: np.random.Generator, threshold: float) -> bool:
    """Fire when a uniform draw exceeds `threshold`: 0 always fires, 1 never does."""
    return bool(rng.random() > threshold)


def random_schedule(problem: Problem, rng: np.random.Generator) -> Schedule:
    """Schedule each OID with probability one half into random candidate windows, then repair."""
    chromosome = problem.empty_chromosome()
    for i in problem.release_order:
        if not problem.schedulable(i) or rng.random() >= 0.5:
            continue
        chromosome.stage1[i] = True
        members = problem.family_members[i]
        candidates = problem.candidates[i]
        picks = rng.integers(len(candidates), size=len(members))
        chromosome.stage2[members] = [candidates[k] for k in picks]
    return decode(chromosome, problem)


def initialize(problem: Problem, pop_size: int, seed: int) -> List[Schedule]:
    """The initial population. Individual `i` draws from `substream(seed, 0, i)`."""
    return [random_schedule(problem, substream(seed, 0, i)) for i in range(pop_size)]


def _place_family(plan: Plan, oid_pos: int) -> bool:
    """First-fit every member of a family, or leave the plan as it was."""
    problem = plan.problem
    placed = []
    for j in problem.family_members[oid_pos]:
        j = int(j)
        for window_id in problem.candidates[oid_pos]:
            if plan.fits(window_id, problem.nd[j]):
                plan.add(j, window_id)
                placed.append(j)
                break
        else:
            for k in placed:
                plan.remove(k)
            return False
    plan.scheduled[oid_pos] = True
    return True


def insert_operator(
    schedule: Schedule, problem: Problem, ir: float, rng: np.random.Generator
) -> Schedule:
    """Try to add unscheduled OIDs, visited in random order, each with probability 1 - ir."""
    plan = Plan.from_schedule(problem, schedule)
    unscheduled = [
        i for i in np.flatnonzero(~schedule.scheduled) if problem.schedulable(int(i))
    ]
    changed = False
    for i in rng.permutation(unscheduled):
        if trigger(rng, ir):
            changed |= _place_family(plan, int(i))
    return plan.to_schedule() if changed else schedule


def reorder_operator(schedule: Schedule, problem: Problem) -> Schedule:
    """Gather the segments of each scheduled family into as few windows as capacity allows.

    For every family the used windows are tried as targets from fullest to
    emptiest; segments elsewhere move in while the target still fits.
    """
    plan = Plan.from_schedule(problem, schedule)
    changed = False
    for i in np.flatnonzero(schedule.scheduled):
        members = [int(j) for j in problem.family_members[i]]
        windows = plan.family_windows(int(i))
        if len(windows) < 2:
            continue
        targets = sorted(windows, key=lambda w: (-plan.load[w], problem.window_pos[w]))
        for target in targets:
            if target not in plan.family_windows(int(i)):
                continue
            for j in members:
                if plan.assignment[j] != target and plan.fits(target, problem.nd[j]):
                    plan.move(j, target)
                    changed = True
    return plan.to_schedule() if changed else schedule


def mutation_operator(
    schedule: Schedule, problem: Problem, mr: float, rng: np.random.Generator
) -> Schedule:
    """Drop whole scheduled families, each with probability 1 - mr."""
    plan = Plan.from_schedule(problem, schedule)
    changed = False
    for i in np.flatnonzero(schedule.scheduled):
        if trigger(rng, mr):
            plan.unschedule(int(i))
            changed = True
    return plan.to_schedule() if changed else schedule


def swap_within(schedule: Schedule, problem: Problem, rng: np.random.Generator) -> Schedule:
    """Exchange the windows of two segments of different families when both moves stay feasible."""
    assigned = np.flatnonzero(schedule.assignment >= 0)
    if len(assigned) < 2:
        return schedule
    first = int(rng.choice(assigned))
    window_a = int(schedule.assignment[first])
    family_a = int(problem.nt_oid[first])
    partners = [
        int(j)
        for j in assigned
        if problem.nt_oid[j] != family_a and schedule.assignment[j] != window_a
    ]
    if not partners:
        return schedule
    second = partners[int(rng.integers(len(partners)))]
    window_b = int(schedule.assignment[second])
    family_b = int(problem.nt_oid[second])
    allowed = problem.candidate_sets
    if window_b not in allowed[family_a] or window_a not in allowed[family_b]:
        return schedule

    plan = Plan.from_schedule(problem, schedule)
    plan.remove(first)
    plan.remove(second)
    if not plan.fits(window_b, problem.nd[first]):
        return schedule
    plan.add(first, window_b)
    if not plan.fits(window_a, problem.nd[second]):
        return schedule
    plan.add(second, window_a)
    return plan.to_schedule()


def _check_shape(schedule: Schedule, problem: Problem) -> None:
    if len(schedule.scheduled) != problem.n_oid or len(schedule.assignment) != problem.n_nt:
        raise ContractError("Schedule does not belong to this problem.")


def swap_between(
    a: Schedule, b: Schedule, problem: Problem, rng: np.random.Generator
) -> Tuple[Schedule, Schedule]:
    """One-point crossover on the OID index: families from the cut on swap all their genes."""
    _check_shape(a, problem)
    _check_shape(b, problem)
    cut = int(rng.integers(problem.n_oid + 1))
    oid_tail = np.arange(problem.n_oid) >= cut
    nt_tail = problem.nt_oid >= cut
    if not oid_tail.any():
        return a, b

    stage1_a, stage1_b = a.scheduled.copy(), b.scheduled.copy()
    stage2_a, stage2_b = a.assignment.copy(), b.assignment.copy()
    stage1_a[oid_tail], stage1_b[oid_tail] = b.scheduled[oid_tail], a.scheduled[oid_tail]
    stage2_a[nt_tail], stage2_b[nt_tail] = b.assignment[nt_tail], a.assignment[nt_tail]
    return (
        decode(Chromosome(stage1_a, stage2_a), problem),
        decode(Chromosome(stage1_b, stage2_b), problem),
    )


def improve(
    schedule: Schedule,
    problem: Problem,
    ir: float,
    rng: np.random.Generator,
    use_reorder: bool = True,
) -> Schedule:
    """Insert, then reorder."""
    schedule = insert_operator(schedule, problem, ir, rng)
    if use_reorder:
        schedule = reorder_operator(schedule, problem)
    return schedule
