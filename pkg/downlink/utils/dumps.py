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

"""Result files: schedule dumps, run traces and front tables."""
import json
import os
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError, model_validator

from downlink.errors import InstanceParseError
from downlink.metrics import summarize_front
from downlink.schedule import Problem
from downlink.types import (
    UNASSIGNED,
    DownlinkMission,
    ImageData,
    Individual,
    Instance,
    ObjectiveVector,
    RunTrace,
    Schedule,
)
from downlink.utils.instance_io import INSTANCE_FORMAT_VERSION, describe_validation_error, read_json

CSV_OPTIONS: Dict[str, Any] = {"index": False, "lineterminator": "\n", "encoding": "utf-8"}


class _ImageDataRecord(BaseModel):
    id: int
    family: int
    nd: float


class _MissionRecord(BaseModel):
    id: int
    window: int
    st: float
    w: float
    payload: List[int]
    satellite: int
    station: int

    @model_validator(mode="after")
    def check_mission(self) -> "_MissionRecord":
        if self.w < 0.0:
            raise ValueError(f"mission {self.id} has negative duration {self.w}")
        return self


class _ScheduleFile(BaseModel):
    version: int
    image_data: List[_ImageDataRecord]
    scheduled_oids: List[int]
    missions: List[_MissionRecord]
    objectives: Dict[str, float] = {}

    @model_validator(mode="after")
    def check_references(self) -> "_ScheduleFile":
        if self.version != INSTANCE_FORMAT_VERSION:
            raise ValueError(f"unsupported format version {self.version}")
        ids = {x.id for x in self.image_data}
        if len(ids) != len(self.image_data):
            raise ValueError("image data ids are not unique")
        return self


def _write_json(data: Dict[str, Any], path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w") as f:
        json.dump(data, f, indent=2)


def _mission_dict(m: DownlinkMission) -> Dict[str, Any]:
    return {
        "id": m.id,
        "window": m.window,
        "st": m.st,
        "w": m.w,
        "payload": list(m.payload),
        "satellite": m.satellite,
        "station": m.station,
    }


def _schedule_body(schedule: Schedule, problem: Problem) -> Dict[str, Any]:
    body: Dict[str, Any] = {
        "scheduled_oids": [
            t.id for t, x in zip(problem.instance.oids, schedule.scheduled) if x
        ],
        "missions": [_mission_dict(m) for m in schedule.missions],
    }
    if schedule.objectives is not None:
        body["objectives"] = schedule.objectives._asdict()
    return body


def _image_data(problem: Problem) -> List[Dict[str, Any]]:
    return [{"id": x.id, "family": x.family, "nd": x.nd} for x in problem.image_data]


def schedule_to_dict(schedule: Schedule, problem: Problem) -> Dict[str, Any]:
    """A self-contained schedule: the image data it was built on travel with it."""
    return {
        "version": INSTANCE_FORMAT_VERSION,
        "image_data": _image_data(problem),
        **_schedule_body(schedule, problem),
    }


def save_schedule(schedule: Schedule, problem: Problem, path: str) -> None:
    _write_json(schedule_to_dict(schedule, problem), path)


def schedule_from_dict(
    data: Dict[str, Any], instance: Instance, source: str = "<dict>"
) -> Tuple[Schedule, Problem]:
    """Rebuild a schedule and its problem over `instance`.

    The missions are taken as written, so a corrupted file yields a schedule
    the validator can report on.
    """
    try:
        parsed = _ScheduleFile.model_validate(data)
    except ValidationError as e:
        raise InstanceParseError(f"{source}: {describe_validation_error(e)}") from e

    oids = {t.id: t for t in instance.oids}
    image_data = []
    for k, x in enumerate(parsed.image_data):
        if x.family not in oids:
            raise InstanceParseError(f"{source}: image_data[{k}] refers to unknown OID {x.family}")
        t = oids[x.family]
        image_data.append(ImageData(x.id, t.id, t.priority, t.release, t.due, t.satellite, x.nd))
    problem = Problem(instance, image_data)

    unknown = set(parsed.scheduled_oids) - set(oids)
    if unknown:
        raise InstanceParseError(
            f"{source}: scheduled_oids refers to unknown OIDs {sorted(unknown)}"
        )
    scheduled = np.array([t.id in set(parsed.scheduled_oids) for t in instance.oids], dtype=bool)

    assignment = np.full(problem.n_nt, UNASSIGNED, dtype=np.int64)
    missions = []
    for m in parsed.missions:
        families = set()
        for x in m.payload:
            if x in problem.nt_pos:
                assignment[problem.nt_pos[x]] = m.window
                families.add(problem.image_data[problem.nt_pos[x]].family)
        missions.append(
            DownlinkMission(
                m.id,
                m.window,
                m.st,
                m.w,
                tuple(m.payload),
                m.satellite,
                m.station,
                frozenset(families),
            )
        )
    objectives = ObjectiveVector(**parsed.objectives) if parsed.objectives else None
    return Schedule(tuple(missions), scheduled, assignment, objectives), problem


def load_schedule(path: str, instance: Instance) -> Tuple[Schedule, Problem]:
    return schedule_from_dict(read_json(path), instance, source=path)


def trace_to_dict(
    trace: RunTrace, problem: Problem, ref: Sequence[float] = (1.0, 1.0)
) -> Dict[str, Any]:
    """Everything a run produced except its wall time, so equal runs give equal files."""
    summary = summarize_front(trace.archive, ref)
    return {
        "version": INSTANCE_FORMAT_VERSION,
        "initial_hv": trace.initial_hv,
        "hv": list(trace.hv),
        "front": [p._asdict() for p in summary.points],
        "image_data": _image_data(problem),
        "archive": [_schedule_body(ind.schedule, problem) for ind in trace.archive],
    }


def save_trace(
    trace: RunTrace, problem: Problem, path: str, ref: Sequence[float] = (1.0, 1.0)
) -> None:
    _write_json(trace_to_dict(trace, problem, ref), path)


def save_front_csv(
    archive: Sequence[Individual], path: str, ref: Sequence[float] = (1.0, 1.0)
) -> None:
    """Non-dominated objective vectors of an archive, one row per point."""
    points = summarize_front(archive, ref).points
    pd.DataFrame(points, columns=["fr", "st"]).to_csv(path, **CSV_OPTIONS)


def save_hv_csv(trace: RunTrace, path: str) -> None:
    """Archive hypervolume per iteration, iteration 0 being the initial archive."""
    hv = [trace.initial_hv, *trace.hv]
    pd.DataFrame({"iteration": range(len(hv)), "hv": hv}).to_csv(path, **CSV_OPTIONS)


def best_compromise(archive: Sequence[Individual]) -> Individual:
    """The archive member with the largest (1 - FR) x (1 - ST)."""
    return max(archive, key=lambda ind: (1.0 - ind.objectives.fr) * (1.0 - ind.objectives.st))
