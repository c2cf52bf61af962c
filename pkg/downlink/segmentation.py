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

"""Cutting original image data into segments (the image data set NT)."""
import math
from typing import List, Optional, Tuple, Union

import numpy as np

from downlink.errors import ContractError
from downlink.model import candidate_windows, playback_feasible, segmental
from downlink.types import ImageData, Instance, OriginalImageData, SegmentationStrategy


def segmentation_counts(duration: float, msid: float) -> Tuple[int, float]:
    """Number of whole minimum segments and the remainder left over."""
    n_segments = math.floor(duration / msid)
    return n_segments, duration - n_segments * msid


def _segments(oid: OriginalImageData, parts: List[float]) -> List[ImageData]:
    # Ids are filled in by build_nt; the last part absorbs rounding so the family sums to d.
    parts[-1] = oid.duration - math.fsum(parts[:-1])
    return [
        ImageData(
            id=0,
            family=oid.id,
            priority=oid.priority,
            release=oid.release,
            due=oid.due,
            satellite=oid.satellite,
            nd=nd,
        )
        for nd in parts
    ]


def minimum_segment(oid: OriginalImageData, msid: float) -> List[ImageData]:
    """Cut an OID into the fewest segments of at least `msid`, sharing the remainder evenly."""
    if not segmental(oid, msid):
        raise ContractError(f"OID {oid.id} (d={oid.duration}) is too short to segment.")
    n_segments, remainder = segmentation_counts(oid.duration, msid)
    return _segments(oid, [msid + remainder / n_segments] * n_segments)


def stochastic_segment(
    oid: OriginalImageData, msid: float, rng: np.random.Generator
) -> List[ImageData]:
    """Cut an OID into a random number of random-length segments of at least `msid`.

    The count is uniform in [2, floor(d / msid)] and the slack above the minimum
    sizes is split by a uniform point of the simplex.
    """
    if not segmental(oid, msid):
        raise ContractError(f"OID {oid.id} (d={oid.duration}) is too short to segment.")
    max_segments, _ = segmentation_counts(oid.duration, msid)
    n_segments = int(rng.integers(2, max_segments + 1))
    slack = oid.duration - n_segments * msid
    shares = rng.dirichlet(np.ones(n_segments))
    return _segments(oid, [msid + slack * float(share) for share in shares])


def build_nt(
    instance: Instance,
    strategy: Union[SegmentationStrategy, str],
    seed: Optional[int] = None,
    playback_uses_rp: bool = False,
) -> List[ImageData]:
    """Build the image data set of an instance.

    OIDs whose candidate windows cannot hold them are dropped. Short OIDs pass
    through whole, the rest are cut according to `strategy`. Ids are assigned
    sequentially by (family, index).
    """
    strategy = SegmentationStrategy(strategy)
    rng = np.random.default_rng(seed)
    rp = instance.rp if playback_uses_rp else 1.0

    nt: List[ImageData] = []
    for oid in instance.oids:
        if not playback_feasible(oid, candidate_windows(oid, instance.vtws), rp):
            continue
        if strategy is SegmentationStrategy.NONE or not segmental(oid, instance.msid):
            segments = _segments(oid, [oid.duration])
        elif strategy is SegmentationStrategy.MINIMUM:
            segments = minimum_segment(oid, instance.msid)
        else:
            segments = stochastic_segment(oid, instance.msid, rng)
        nt.extend(segments)

    return [nt_j._replace(id=j + 1) for j, nt_j in enumerate(nt)]
