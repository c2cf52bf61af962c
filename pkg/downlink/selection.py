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

"""Non-dominated sorting, crowding distance and the elitist archive updates."""
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from downlink.types import Individual, ObjectiveVector, SelectionMode

Points = Union[np.ndarray, Sequence[ObjectiveVector], Sequence[Sequence[float]]]


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """Minimisation dominance: no worse everywhere and better somewhere."""
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def _as_array(points: Points) -> np.ndarray:
    if len(points) == 0:
        return np.zeros((0, 2))
    return np.asarray(points, dtype=float).reshape(len(points), -1)


def nondominated_sort(points: Points) -> List[List[int]]:
    """Partition points into fronts of indices, best front first.

    Equal points never dominate each other and share a front.
    """
    f = _as_array(points)
    n = len(f)
    if n == 0:
        return []
    no_worse = np.all(f[:, None, :] <= f[None, :, :], axis=2)
    better = np.any(f[:, None, :] < f[None, :, :], axis=2)
    # dom[i, j]: point i dominates point j
    dom = no_worse & better
    dominated_by = dom.sum(axis=0)

    fronts = []
    current = [i for i in range(n) if dominated_by[i] == 0]
    while current:
        fronts.append(current)
        next_front = []
        for p in current:
            for q in np.flatnonzero(dom[p]):
                dominated_by[q] -= 1
                if dominated_by[q] == 0:
                    next_front.append(int(q))
        current = sorted(next_front)
    return fronts


def crowding_distance(front: Points) -> np.ndarray:
    """Crowding distance of each point of one front.

    Extreme points of every objective get infinity; the others sum the gaps
    between their neighbours, normalised by the objective range.
    """
    f = _as_array(front)
    n, n_obj = f.shape
    distance = np.zeros(n)
    if n <= 2:
        distance[:] = np.inf
        return distance
    for m in range(n_obj):
        order = np.argsort(f[:, m], kind="stable")
        values = f[order, m]
        distance[order[0]] = distance[order[-1]] = np.inf
        span = values[-1] - values[0]
        if span <= 0.0:
            continue
        distance[order[1:-1]] += (values[2:] - values[:-2]) / span
    return distance


def _objectives(pool: Sequence[Individual]) -> np.ndarray:
    return np.array([ind.objectives for ind in pool], dtype=float).reshape(len(pool), 2)


def elitist_select(
    pool: Sequence[Individual],
    k: int,
    mode: SelectionMode,
    rng: np.random.Generator,
) -> List[Individual]:
    """Keep `k` individuals of the pool.

    NSGA2 fills front by front and truncates the last front by descending
    crowding distance. CREM keeps a uniform random subset.
    """
    if len(pool) <= k:
        return list(pool)
    if SelectionMode(mode) is SelectionMode.CREM:
        keep = np.sort(rng.choice(len(pool), size=k, replace=False))
        return [pool[i] for i in keep]

    survivors: List[int] = []
    f = _objectives(pool)
    for front in nondominated_sort(f):
        if len(survivors) + len(front) <= k:
            survivors.extend(front)
            continue
        distance = crowding_distance(f[front])
        order = np.argsort(-distance, kind="stable")
        survivors.extend(front[i] for i in order[: k - len(survivors)])
        break
    return [pool[i] for i in survivors]


def _box(objectives: Sequence[float], grid: int) -> Tuple[int, ...]:
    return tuple(int(min(grid - 1, max(0, np.floor(v * grid)))) for v in objectives)


def box_combine(
    best: Sequence[Individual], offspring: Sequence[Individual], grid: int
) -> List[Individual]:
    """Merge offspring into the elite pool using one slot per objective box.

    The unit objective square is cut into `grid` x `grid` boxes. An offspring
    dominated by a non-dominated pool member is rejected. Otherwise it enters
    an empty box, or replaces the box incumbent it dominates.
    """
    pool = list(best)
    f = _objectives(pool)
    fronts = nondominated_sort(f)
    first = set(fronts[0]) if fronts else set()
    boxes: Dict[Tuple[int, ...], int] = {}
    for i in sorted(first):
        boxes.setdefault(_box(pool[i].objectives, grid), i)

    for child in offspring:
        if any(dominates(pool[i].objectives, child.objectives) for i in first):
            continue
        box = _box(child.objectives, grid)
        incumbent = boxes.get(box)
        if incumbent is not None and not dominates(child.objectives, pool[incumbent].objectives):
            continue
        position = len(pool)
        pool.append(child)
        beaten = {i for i in first if dominates(child.objectives, pool[i].objectives)}
        first = (first - beaten) | {position}
        for stale_box, i in list(boxes.items()):
            if i in beaten:
                del boxes[stale_box]
        boxes[box] = position
    return pool
