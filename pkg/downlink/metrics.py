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

"""Quality indicators: hypervolume, its Monte-Carlo estimate, success rates and front summaries."""
from typing import Sequence, Tuple, Union

import numpy as np

from downlink.errors import DomainError
from downlink.selection import nondominated_sort
from downlink.types import (
    FrontSummary,
    Individual,
    Instance,
    MonteCarloEstimate,
    ObjectiveVector,
    Schedule,
    SatelliteClass,
)

REF_TOL = 1e-12
MAX_HSO_DIM = 4
# Samples drawn per batch by the Monte-Carlo estimator.
MC_CHUNK = 1_000_000

Front = Union[np.ndarray, Sequence[Sequence[float]]]


def _check_front(front: Front, ref: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    r = np.asarray(ref, dtype=float)
    f = np.asarray(front, dtype=float).reshape(-1, len(r))
    if len(f) and np.any(f > r + REF_TOL):
        worst = f[np.argmax(np.max(f - r, axis=1))]
        raise DomainError(f"Point {worst.tolist()} does not dominate the reference {r.tolist()}.")
    if len(r) > MAX_HSO_DIM:
        raise DomainError(f"Hypervolume supports at most {MAX_HSO_DIM} objectives, got {len(r)}.")
    return np.minimum(f, r), r


def _hv2d(f: np.ndarray, r: np.ndarray) -> float:
    f = f[np.lexsort((f[:, 1], f[:, 0]))]
    volume, best_y = 0.0, r[1]
    for i, (x, y) in enumerate(f):
        if y >= best_y:
            continue
        next_x = r[0]
        # width runs until the next point that improves on y
        for x2, y2 in f[i + 1 :]:
            if y2 < y:
                next_x = x2
                break
        volume += (next_x - x) * (r[1] - y)
        best_y = y
    return volume


def _hso(f: np.ndarray, r: np.ndarray) -> float:
    """Slice on the last objective and recurse on the remaining ones."""
    if len(f) == 0:
        return 0.0
    if len(r) == 1:
        return float(r[0] - f[:, 0].min())
    if len(r) == 2:
        return _hv2d(f, r)
    order = np.argsort(f[:, -1], kind="stable")
    f = f[order]
    depths = np.append(f[1:, -1], r[-1]) - f[:, -1]
    volume = 0.0
    for i, depth in enumerate(depths):
        if depth > 0.0:
            volume += depth * _hso(f[: i + 1, :-1], r[:-1])
    return volume


def hypervolume(front: Front, ref: Sequence[float] = (1.0, 1.0)) -> float:
    """Exact volume dominated by `front` and bounded by `ref` (minimisation).

    Points may touch the reference point; they then add nothing.

    Raises:
        DomainError: a point is worse than `ref` in some objective.
    """
    f, r = _check_front(front, ref)
    return _hso(f, r)


def hv_monte_carlo(
    front: Front,
    ref: Sequence[float],
    n_samples: int,
    rng: np.random.Generator,
) -> MonteCarloEstimate:
    """Estimate the hypervolume by uniform sampling of the box below `ref`.

    The box spans from the origin (or the front's minimum if lower) to `ref`.
    """
    if n_samples <= 0:
        raise DomainError(f"n_samples must be positive, got {n_samples}.")
    f, r = _check_front(front, ref)
    if len(f) == 0:
        return MonteCarloEstimate(0.0, 0.0)
    low = np.minimum(f.min(axis=0), 0.0)
    box = float(np.prod(r - low))
    hits = 0
    remaining = n_samples
    while remaining:
        size = min(MC_CHUNK, remaining)
        samples = rng.uniform(low, r, size=(size, len(r)))
        covered = np.zeros(size, dtype=bool)
        for p in f:
            covered |= np.all(samples >= p, axis=1)
        hits += int(covered.sum())
        remaining -= size
    p_hat = hits / n_samples
    return MonteCarloEstimate(box * p_hat, box * np.sqrt(p_hat * (1.0 - p_hat) / n_samples))


def single_success_rate(
    schedule: Schedule, instance: Instance, satellite_class: Union[SatelliteClass, str]
) -> float:
    """Share of the OIDs taken by satellites of one class that get transmitted."""
    satellite_class = SatelliteClass(satellite_class)
    members = {s.id for s in instance.satellites if s.satellite_class is satellite_class}
    mask = np.array([t.satellite in members for t in instance.oids], dtype=bool)
    if not mask.any():
        return 0.0
    return float(np.count_nonzero(schedule.scheduled[mask]) / np.count_nonzero(mask))


def summarize_front(
    archive: Sequence[Individual], ref: Sequence[float] = (1.0, 1.0)
) -> FrontSummary:
    """Non-dominated objective vectors of an archive with their hypervolume and spread."""
    objectives = np.array([ind.objectives for ind in archive], dtype=float).reshape(-1, 2)
    first = nondominated_sort(objectives)[0]
    points = []
    for i in first:
        point = ObjectiveVector(*map(float, objectives[i]))
        if point not in points:
            points.append(point)
    points.sort()
    f = np.array(points)
    return FrontSummary(
        points=points,
        hv=hypervolume(f, ref),
        fr_min=float(f[:, 0].min()),
        fr_mean=float(f[:, 0].mean()),
        fr_max=float(f[:, 0].max()),
        st_min=float(f[:, 1].min()),
        st_mean=float(f[:, 1].mean()),
        st_max=float(f[:, 1].max()),
    )
