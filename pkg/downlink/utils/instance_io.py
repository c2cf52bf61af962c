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

"""Versioned JSON files for instances and externally computed windows."""
import json
import os
from typing import Any, Dict, List, Sequence, Tuple

from pydantic import BaseModel, ValidationError, field_validator, model_validator

from downlink.errors import InstanceParseError
from downlink.model import due_time
from downlink.types import (
    GroundStation,
    Instance,
    OriginalImageData,
    Satellite,
    VisibleTimeWindow,
)

# Bump the major version on breaking changes to the file layout.
INSTANCE_FORMAT_VERSION = 1


class _SatelliteRecord(BaseModel):
    id: int
    name: str
    semi_major_axis: float
    eccentricity: float
    inclination: float
    raan: float
    arg_perigee: float
    mean_anomaly_epoch: float

    @model_validator(mode="after")
    def check_elements(self) -> "_SatelliteRecord":
        if self.semi_major_axis <= 6378.0:
            raise ValueError(f"semi_major_axis {self.semi_major_axis} km is inside the earth")
        if not 0.0 <= self.eccentricity < 1.0:
            raise ValueError(f"eccentricity {self.eccentricity} is not in [0, 1)")
        for name in ("inclination", "raan", "arg_perigee", "mean_anomaly_epoch"):
            if not 0.0 <= getattr(self, name) < 360.0:
                raise ValueError(f"{name} must lie in [0, 360)")
        return self


class _StationRecord(BaseModel):
    id: int
    name: str
    latitude: float
    longitude: float
    altitude: float = 0.0
    min_elevation: float = 5.0

    @model_validator(mode="after")
    def check_location(self) -> "_StationRecord":
        if abs(self.latitude) > 90.0 or abs(self.longitude) > 180.0:
            raise ValueError(f"station {self.id} has an invalid location")
        if not 0.0 <= self.min_elevation < 90.0:
            raise ValueError(f"min_elevation {self.min_elevation} is not in [0, 90)")
        return self


class _OidRecord(BaseModel):
    id: int
    priority: int
    release: float
    due: int
    duration: float
    satellite: int

    @model_validator(mode="after")
    def check_oid(self) -> "_OidRecord":
        if self.duration <= 0.0:
            raise ValueError(f"duration must be positive, got {self.duration}")
        if not 1 <= self.priority <= 10:
            raise ValueError(f"priority must lie in [1, 10], got {self.priority}")
        if self.due != due_time(self.priority):
            raise ValueError(f"due {self.due} h does not match priority {self.priority}")
        return self


class _VtwRecord(BaseModel):
    id: int
    sw: float
    ew: float
    satellite: int
    station: int

    @model_validator(mode="after")
    def check_bounds(self) -> "_VtwRecord":
        if not self.sw < self.ew:
            raise ValueError(f"window {self.id} ends before it starts (sw={self.sw}, ew={self.ew})")
        return self


def _check_windows(vtws: Sequence[_VtwRecord]) -> None:
    seen = set()
    for k, w in enumerate(vtws):
        if w.id in seen:
            raise ValueError(f"vtws[{k}] reuses window id {w.id}")
        seen.add(w.id)
        if k and w.sw < vtws[k - 1].sw:
            raise ValueError(f"vtws[{k}] (id={w.id}) starts before its predecessor")


class _VtwFile(BaseModel):
    version: int
    vtws: List[_VtwRecord]

    @field_validator("version")
    @classmethod
    def check_version(cls, v: int) -> int:
        if v != INSTANCE_FORMAT_VERSION:
            raise ValueError(f"unsupported format version {v}, expected {INSTANCE_FORMAT_VERSION}")
        return v

    @model_validator(mode="after")
    def check_windows(self) -> "_VtwFile":
        _check_windows(self.vtws)
        return self


class _InstanceFile(_VtwFile):
    epoch: str
    horizon_s: Tuple[float, float]
    rp: float
    msid_s: float
    sigma_s: float
    satellites: List[_SatelliteRecord]
    stations: List[_StationRecord]
    oids: List[_OidRecord]

    @model_validator(mode="after")
    def check_references(self) -> "_InstanceFile":
        if self.rp <= 0.0 or self.msid_s <= 0.0:
            raise ValueError("rp and msid_s must be positive")
        sat_ids = {s.id for s in self.satellites}
        station_ids = {g.id for g in self.stations}
        for k, w in enumerate(self.vtws):
            if w.satellite not in sat_ids or w.station not in station_ids:
                raise ValueError(f"vtws[{k}] (id={w.id}) refers to an unknown satellite or station")
        for k, t in enumerate(self.oids):
            if t.satellite not in sat_ids:
                raise ValueError(f"oids[{k}] (id={t.id}) refers to unknown satellite {t.satellite}")
        return self


def describe_validation_error(error: ValidationError) -> str:
    """Name the offending record of the first validation error."""
    first = error.errors()[0]
    loc = first["loc"]
    where = "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in loc).lstrip(".")
    return f"{where or 'file'}: {first['msg']}"


def read_json(path: str) -> Dict[str, Any]:
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise InstanceParseError(f"{path}: not valid JSON ({e})") from e
    if not isinstance(data, dict):
        raise InstanceParseError(f"{path}: expected a JSON object at top level")
    return data


def _to_windows(records: Sequence[_VtwRecord]) -> Tuple[VisibleTimeWindow, ...]:
    return tuple(VisibleTimeWindow(r.id, r.sw, r.ew, r.satellite, r.station) for r in records)


def instance_to_dict(instance: Instance) -> Dict[str, Any]:
    return {
        "version": INSTANCE_FORMAT_VERSION,
        "epoch": instance.epoch,
        "horizon_s": list(instance.horizon),
        "rp": instance.rp,
        "msid_s": instance.msid,
        "sigma_s": instance.sigma,
        "satellites": [s._asdict() for s in instance.satellites],
        "stations": [g._asdict() for g in instance.stations],
        "oids": [t._asdict() for t in instance.oids],
        "vtws": [w._asdict() for w in instance.vtws],
    }


def instance_from_dict(data: Dict[str, Any], source: str = "<dict>") -> Instance:
    try:
        parsed = _InstanceFile.model_validate(data)
    except ValidationError as e:
        raise InstanceParseError(f"{source}: {describe_validation_error(e)}") from e

    return Instance(
        satellites=tuple(Satellite(**s.model_dump()) for s in parsed.satellites),
        stations=tuple(GroundStation(**g.model_dump()) for g in parsed.stations),
        horizon=(parsed.horizon_s[0], parsed.horizon_s[1]),
        oids=tuple(OriginalImageData(**t.model_dump()) for t in parsed.oids),
        vtws=_to_windows(parsed.vtws),
        rp=parsed.rp,
        msid=parsed.msid_s,
        sigma=parsed.sigma_s,
        epoch=parsed.epoch,
    )


def save_instance(instance: Instance, path: str) -> None:
    """Write an instance as JSON. Floats are written with full precision."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w") as f:
        json.dump(instance_to_dict(instance), f, indent=2)


def load_instance(path: str) -> Instance:
    """Read an instance file written by `save_instance` (or by hand).

    Raises:
        InstanceParseError: on schema, version or window-order violations; the
            message names the offending record.
    """
    return instance_from_dict(read_json(path), source=path)


def save_vtws(vtws: Sequence[VisibleTimeWindow], path: str) -> None:
    with open(path, "w") as f:
        json.dump(
            {"version": INSTANCE_FORMAT_VERSION, "vtws": [w._asdict() for w in vtws]}, f, indent=2
        )


def load_vtws(path: str) -> Tuple[VisibleTimeWindow, ...]:
    """Read a standalone `vtws` block, e.g. windows exported from an external tool."""
    data = read_json(path)
    try:
        parsed = _VtwFile.model_validate(data)
    except ValidationError as e:
        raise InstanceParseError(f"{path}: {describe_validation_error(e)}") from e
    return _to_windows(parsed.vtws)


def with_vtws(instance: Instance, vtws: Sequence[VisibleTimeWindow]) -> Instance:
    """Swap the windows of an instance. Windows are re-sorted and re-validated."""
    ordered = sorted(vtws, key=lambda w: (w.sw, w.satellite, w.station, w.id))
    data = instance_to_dict(instance)
    data["vtws"] = [w._asdict() for w in ordered]
    return instance_from_dict(data)
