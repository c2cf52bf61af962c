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

"""Pure predicates over the problem entities."""
from typing import Sequence, Tuple

from downlink.errors import DomainError
from downlink.types import Hours, OriginalImageData, Seconds, VisibleTimeWindow

SECONDS_PER_HOUR = 3600.0


def due_time(priority: int) -> Hours:
    """Hours an OID stays valid after release. Urgent data expire sooner."""
    if not 1 <= priority <= 10 or int(priority) != priority:
        raise DomainError(f"Priority must be an integer in [1, 10], got {priority}.")
    if priority <= 3:
        return 24
    if priority <= 6:
        return 12
    if priority <= 9:
        return 6
    return 3


def candidate_windows(
    oid: OriginalImageData, windows: Sequence[VisibleTimeWindow]
) -> Tuple[VisibleTimeWindow, ...]:
    """Windows of the OID's satellite that open between its release and its expiry.

    Only the window start is compared with the expiry; input order is preserved.
    """
    expiry = oid.release + SECONDS_PER_HOUR * oid.due
    return tuple(
        w
        for w in windows
        if w.satellite == oid.satellite and oid.release <= w.sw < expiry
    )


def playback_feasible(
    oid: OriginalImageData, windows: Sequence[VisibleTimeWindow], rp: float = 1.0
) -> bool:
    """Whether the candidate windows can hold the OID at all.

    With the default `rp=1` the observation duration is compared with the total
    window length as is; pass the instance rp to compare downlink time instead.
    """
    capacity: Seconds = sum(w.ew - w.sw for w in windows)
    return oid.duration * rp <= capacity


def segmental(oid: OriginalImageData, msid: Seconds) -> bool:
    """An OID is worth cutting only when it is longer than two minimum segments."""
    return oid.duration > 2.0 * msid
