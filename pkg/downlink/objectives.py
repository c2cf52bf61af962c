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

"""The two minimised objectives: transmission failure rate and segmentation times."""
import math
from collections import Counter
from typing import Sequence

from downlink.types import ObjectiveVector, OriginalImageData, Schedule


def failure_rate(schedule: Schedule, oids: Sequence[OriginalImageData]) -> float:
    """Priority and duration weighted share of OIDs that are not transmitted."""
    total = math.fsum(t.priority * t.duration for t in oids)
    sent = math.fsum(
        t.priority * t.duration for t, x in zip(oids, schedule.scheduled) if x
    )
    return max(0.0, 1.0 - sent / total)


def segmentation_count(schedule: Schedule, oid: OriginalImageData) -> int:
    """Number of missions that carry some part of `oid`."""
    return sum(1 for m in schedule.missions if oid.id in m.families)


def max_segmentation_times(oids: Sequence[OriginalImageData], msid: float) -> int:
    """Normaliser of the segmentation objective, never below one."""
    return max(1, math.floor(max(t.duration for t in oids) / msid))


def segmentation_objective(
    schedule: Schedule, oids: Sequence[OriginalImageData], msid: float
) -> float:
    """Mean number of missions per scheduled OID, scaled into [0, 1].

    Unscheduled OIDs count zero but stay in the denominator.
    """
    counts: Counter = Counter()
    for m in schedule.missions:
        counts.update(m.families)
    total = sum(counts[t.id] for t, x in zip(oids, schedule.scheduled) if x)
    return total / (len(oids) * max_segmentation_times(oids, msid))


def evaluate(
    schedule: Schedule, oids: Sequence[OriginalImageData], msid: float
) -> ObjectiveVector:
    """Both objectives of a schedule. Store them with `schedule._replace(objectives=...)`."""
    if schedule.objectives is not None:
        return schedule.objectives
    return ObjectiveVector(
        fr=failure_rate(schedule, oids), st=segmentation_objective(schedule, oids, msid)
    )
