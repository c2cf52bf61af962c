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

"""Decoding chromosomes into downlink missions, and checking plans for feasibility."""
import bisect
import math
from collections import defaultdict
from typing import DefaultDict, Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import numpy as np

from downlink.errors import ContractError, DomainError
from downlink.model import candidate_windows
from downlink.types import (
    UNASSIGNED,
    Chromosome,
    DownlinkMission,
    ImageData,
    Instance,
    Schedule,
    Violation,
    ViolationKind,
)

# Slack for floating point comparisons of times and durations (seconds).
EPS = 1e-9


class Problem:
    """An instance with its image data and the lookup tables shared by all individuals.

    Positions (`*_pos`) index `instance.oids`, `instance.vtws` and `image_data`;
    ids are the values stored in the records themselves.
    """

    def __init__(self, instance: Instance, image_data: Sequence[ImageData]):
        self.instance = instance
        self.image_data: Tuple[ImageData, ...] = tuple(image_data)
        self.rp = instance.rp
        self.sigma = instance.sigma
        self.n_oid = len(instance.oids)
        self.n_nt = len(self.image_data)

        self.oid_pos = {t.id: i for i, t in enumerate(instance.oids)}
        self.nt_pos = {x.id: j for j, x in enumerate(self.image_data)}
        self.window_pos = {w.id: k for k, w in enumerate(instance.vtws)}
        self.windows = {w.id: w for w in instance.vtws}

        self.nd = np.array([x.nd for x in self.image_data], dtype=float)
        self.nt_oid = np.array([self.oid_pos[x.family] for x in self.image_data], dtype=np.int64)
        members: List[List[int]] = [[] for _ in instance.oids]
        for j, i in enumerate(self.nt_oid):
            members[i].append(j)
        self.family_members = [np.array(m, dtype=np.int64) for m in members]

        self.candidates: List[Tuple[int, ...]] = [
            tuple(w.id for w in candidate_windows(t, instance.vtws)) for t in instance.oids
        ]
        self.candidate_sets: List[FrozenSet[int]] = [frozenset(c) for c in self.candidates]
        # Bounds how far back a mission can reach when looking for clashes.
        self.max_window_length = max((w.length for w in instance.vtws), default=0.0)

        self.weights = np.array([t.priority * t.duration for t in instance.oids], dtype=float)
        self.durations = np.array([t.duration for t in instance.oids], dtype=float)
        releases = np.array([t.release for t in instance.oids], dtype=float)
        self.release_order = np.argsort(releases, kind="stable")

    def schedulable(self, oid_pos: int) -> bool:
        """Whether the OID survived segmentation and has somewhere to go."""
        return len(self.family_members[oid_pos]) > 0 and len(self.candidates[oid_pos]) > 0

    def empty_chromosome(self) -> Chromosome:
        return Chromosome(
            np.zeros(self.n_oid, dtype=bool), np.full(self.n_nt, UNASSIGNED, dtype=np.int64)
        )


class Plan:
    """Mutable, always feasible working copy of an assignment.

    Every mission starts at its window start and lasts rp times its payload, so a
    window's mission is fully described by its load (sum of nd). Used windows are
    indexed per station and per satellite as `(sw, window_id)` lists kept sorted,
    so clash checks only visit missions close in time.
    """

    def __init__(self, problem: Problem):
        self.problem = problem
        self.assignment = np.full(problem.n_nt, UNASSIGNED, dtype=np.int64)
        self.scheduled = np.zeros(problem.n_oid, dtype=bool)
        self.load: Dict[int, float] = {}
        self.members: DefaultDict[int, Set[int]] = defaultdict(set)
        self._ends: Dict[int, float] = {}
        self._by_station: DefaultDict[int, List[Tuple[float, int]]] = defaultdict(list)
        self._by_satellite: DefaultDict[int, List[Tuple[float, int]]] = defaultdict(list)

    @classmethod
    def from_schedule(cls, problem: Problem, schedule: Schedule) -> "Plan":
        plan = cls(problem)
        for j, window_id in enumerate(schedule.assignment):
            if window_id != UNASSIGNED:
                plan.add(j, int(window_id))
        plan.scheduled[:] = schedule.scheduled
        return plan

    def copy(self) -> "Plan":
        other = Plan(self.problem)
        other.assignment = self.assignment.copy()
        other.scheduled = self.scheduled.copy()
        other.load = dict(self.load)
        other._ends = dict(self._ends)
        for window_id, members in self.members.items():
            other.members[window_id] = set(members)
        for station, used in self._by_station.items():
            other._by_station[station] = list(used)
        for sat, used in self._by_satellite.items():
            other._by_satellite[sat] = list(used)
        return other

    def end(self, window_id: int, load: Optional[float] = None) -> float:
        """End of the window's mission, for its current load or a hypothetical one."""
        if load is None:
            if window_id in self._ends:
                return self._ends[window_id]
            load = 0.0
        return self.problem.windows[window_id].sw + self.problem.rp * load

    @staticmethod
    def _between(used: List[Tuple[float, int]], lo: float, hi: float) -> List[int]:
        """Ids of the used windows whose start lies in [lo, hi]."""
        first = bisect.bisect_left(used, (lo, -math.inf))
        last = bisect.bisect_right(used, (hi, math.inf))
        return [window_id for _, window_id in used[first:last]]

    def conflicts(self, window_id: int, end: float) -> bool:
        """Whether a mission in `window_id` lasting until `end` clashes with another mission.

        Missions of one satellite must not overlap; missions of different
        satellites at one station need `sigma` between them. No mission outlasts
        its window, so only windows starting less than the longest window before
        `sw` can still be running.
        """
        window = self.problem.windows[window_id]
        start, sigma = window.sw, self.problem.sigma
        lo = start - self.problem.max_window_length - sigma - EPS
        for other_id in self._between(self._by_station[window.station], lo, end + sigma + EPS):
            other = self.problem.windows[other_id]
            if other_id == window_id or other.satellite == window.satellite:
                continue
            if not (self._ends[other_id] + sigma <= start + EPS or end + sigma <= other.sw + EPS):
                return True
        for other_id in self._between(self._by_satellite[window.satellite], lo, end + EPS):
            if other_id == window_id:
                continue
            other = self.problem.windows[other_id]
            if self._ends[other_id] > start + EPS and end > other.sw + EPS:
                return True
        return False

    def fits(self, window_id: int, extra: float) -> bool:
        """Whether `extra` observation seconds can join the window's mission."""
        new_load = self.load.get(window_id, 0.0) + extra
        if self.problem.rp * new_load > self.problem.windows[window_id].length + EPS:
            return False
        return not self.conflicts(window_id, self.end(window_id, new_load))

    def add(self, nt_pos: int, window_id: int) -> None:
        window = self.problem.windows[window_id]
        if window_id not in self.load:
            bisect.insort(self._by_station[window.station], (window.sw, window_id))
            bisect.insort(self._by_satellite[window.satellite], (window.sw, window_id))
        self.assignment[nt_pos] = window_id
        self.load[window_id] = self.load.get(window_id, 0.0) + self.problem.nd[nt_pos]
        self._ends[window_id] = window.sw + self.problem.rp * self.load[window_id]
        self.members[window_id].add(nt_pos)

    def remove(self, nt_pos: int) -> None:
        window_id = int(self.assignment[nt_pos])
        if window_id == UNASSIGNED:
            return
        self.assignment[nt_pos] = UNASSIGNED
        members = self.members[window_id]
        members.discard(nt_pos)
        window = self.problem.windows[window_id]
        if members:
            self.load[window_id] -= self.problem.nd[nt_pos]
            self._ends[window_id] = window.sw + self.problem.rp * self.load[window_id]
        else:
            del self.members[window_id]
            del self.load[window_id]
            del self._ends[window_id]
            for used in (self._by_station[window.station], self._by_satellite[window.satellite]):
                del used[bisect.bisect_left(used, (window.sw, window_id))]

    def move(self, nt_pos: int, window_id: int) -> None:
        self.remove(nt_pos)
        self.add(nt_pos, window_id)

    def unschedule(self, oid_pos: int) -> None:
        for j in self.problem.family_members[oid_pos]:
            self.remove(int(j))
        self.scheduled[oid_pos] = False

    def family_windows(self, oid_pos: int) -> Set[int]:
        return {
            int(self.assignment[j])
            for j in self.problem.family_members[oid_pos]
            if self.assignment[j] != UNASSIGNED
        }

    def to_chromosome(self) -> Chromosome:
        return Chromosome(self.scheduled.copy(), self.assignment.copy())

    def to_schedule(self) -> Schedule:
        problem = self.problem
        used = sorted(self.members, key=problem.window_pos.__getitem__)
        missions = []
        for mission_id, window_id in enumerate(used, start=1):
            window = problem.windows[window_id]
            payload = sorted(self.members[window_id])
            missions.append(
                DownlinkMission(
                    id=mission_id,
                    window=window_id,
                    st=window.sw,
                    w=problem.rp * float(np.sum(problem.nd[payload])),
                    payload=tuple(problem.image_data[j].id for j in payload),
                    satellite=window.satellite,
                    station=window.station,
                    families=frozenset(problem.image_data[j].family for j in payload),
                )
            )
        return Schedule(tuple(missions), self.scheduled.copy(), self.assignment.copy())


def _eviction_key(problem: Problem, oid_pos: int) -> Tuple[float, int]:
    return problem.weights[oid_pos], problem.instance.oids[oid_pos].id


def decode(chromosome: Chromosome, problem: Problem) -> Schedule:
    """Turn a chromosome into a feasible schedule, repairing it where needed.

    Families with a missing or invalid assignment are dropped whole. Over-full
    windows evict their families in ascending priority x duration until they fit.
    Windows are then opened in start order; a window whose mission would clash
    with an already opened one has all its families dropped.
    """
    if len(chromosome.stage1) != problem.n_oid or len(chromosome.stage2) != problem.n_nt:
        raise ContractError(
            f"Chromosome shape ({len(chromosome.stage1)}, {len(chromosome.stage2)}) does not "
            f"match the problem ({problem.n_oid} OIDs, {problem.n_nt} image data)."
        )

    groups: DefaultDict[int, Set[int]] = defaultdict(set)
    alive: Set[int] = set()
    for i in np.flatnonzero(chromosome.stage1):
        i = int(i)
        members = problem.family_members[i]
        if len(members) == 0:
            continue
        genes = chromosome.stage2[members]
        if all(int(g) in problem.candidate_sets[i] for g in genes):
            alive.add(i)
            for j, g in zip(members, genes):
                groups[int(g)].add(int(j))

    def evict(oid_pos: int) -> None:
        alive.discard(oid_pos)
        for j in problem.family_members[oid_pos]:
            groups[int(chromosome.stage2[j])].discard(int(j))

    order = sorted(groups, key=problem.window_pos.__getitem__)

    # Capacity: evicting only lightens other windows, so one pass suffices.
    for window_id in order:
        length = problem.windows[window_id].length
        while problem.rp * float(np.sum(problem.nd[list(groups[window_id])])) > length + EPS:
            families = {int(problem.nt_oid[j]) for j in groups[window_id]}
            evict(min(families, key=lambda i: _eviction_key(problem, i)))

    # Set-up time and satellite overlap: open windows in start order.
    plan = Plan(problem)
    for window_id in order:
        members = sorted(groups[window_id])
        if not members:
            continue
        load = float(np.sum(problem.nd[members]))
        if plan.conflicts(window_id, plan.end(window_id, load)):
            for i in sorted({int(problem.nt_oid[j]) for j in members}):
                evict(i)
                for j in problem.family_members[i]:
                    plan.remove(int(j))
            continue
        for j in members:
            plan.add(j, window_id)

    plan.scheduled[sorted(alive)] = True
    return plan.to_schedule()


def window_load(schedule: Schedule, problem: Problem, window_id: int) -> float:
    """Downlink seconds the schedule spends in a window (0 if unused)."""
    if window_id not in problem.windows:
        raise DomainError(f"Unknown window id {window_id}.")
    for mission in schedule.missions:
        if mission.window == window_id:
            return problem.rp * float(
                sum(problem.image_data[problem.nt_pos[x]].nd for x in mission.payload)
            )
    return 0.0


def _check_missions(
    schedule: Schedule, problem: Problem
) -> Tuple[List[Violation], Dict[int, float]]:
    """Per-mission checks. Returns violations and the transmitted nd per OID id."""
    violations = []
    transmitted: DefaultDict[int, float] = defaultdict(float)
    seen: Dict[int, int] = {}
    per_window: DefaultDict[int, List[int]] = defaultdict(list)

    for m in schedule.missions:
        per_window[m.window].append(m.id)
        window = problem.windows.get(m.window)
        if window is None:
            violations.append(
                Violation(ViolationKind.CAPACITY, (m.id,), f"mission {m.id} uses unknown window")
            )
            continue

        total_nd = 0.0
        for x in m.payload:
            if x in seen:
                violations.append(
                    Violation(
                        ViolationKind.UNIQUENESS,
                        (x, seen[x], m.id),
                        f"image data {x} is sent by missions {seen[x]} and {m.id}",
                    )
                )
            seen[x] = m.id
            if x not in problem.nt_pos:
                violations.append(
                    Violation(
                        ViolationKind.FAMILY_INCOMPLETE,
                        (x, m.id),
                        f"mission {m.id} sends unknown image data {x}",
                    )
                )
                continue
            data = problem.image_data[problem.nt_pos[x]]
            total_nd += data.nd
            transmitted[data.family] += data.nd
            oid_pos = problem.oid_pos[data.family]
            if m.window not in problem.candidate_sets[oid_pos]:
                violations.append(
                    Violation(
                        ViolationKind.CAPACITY,
                        (m.id, x),
                        f"window {m.window} cannot serve image data {x} of OID {data.family}",
                    )
                )

        if (
            m.w > window.length + EPS
            or m.st < window.sw - EPS
            or m.st + m.w > window.ew + EPS
            or m.w < problem.rp * total_nd - EPS
        ):
            violations.append(
                Violation(
                    ViolationKind.CAPACITY,
                    (m.id, m.window),
                    f"mission {m.id} [{m.st}, {m.st + m.w}] needs {problem.rp * total_nd} s "
                    f"inside window {m.window} [{window.sw}, {window.ew}]",
                )
            )

    for window_id, mission_ids in per_window.items():
        if len(mission_ids) > 1:
            violations.append(
                Violation(
                    ViolationKind.WINDOW_REUSE,
                    (window_id, *mission_ids),
                    f"window {window_id} hosts missions {mission_ids}",
                )
            )
    return violations, transmitted


def _check_timing(schedule: Schedule, sigma: float) -> List[Violation]:
    violations = []
    missions = sorted(schedule.missions, key=lambda m: (m.st, m.id))
    for a_idx, a in enumerate(missions):
        for b in missions[a_idx + 1 :]:
            if a.satellite == b.satellite:
                if a.end > b.st + EPS and b.end > a.st + EPS:
                    violations.append(
                        Violation(
                            ViolationKind.SATELLITE_OVERLAP,
                            (a.id, b.id),
                            f"satellite {a.satellite} runs missions {a.id} and {b.id} at once",
                        )
                    )
            elif a.station == b.station:
                if not (a.end + sigma <= b.st + EPS or b.end + sigma <= a.st + EPS):
                    violations.append(
                        Violation(
                            ViolationKind.SETUP_TIME,
                            (a.id, b.id),
                            f"station {a.station} switches from satellite {a.satellite} to "
                            f"{b.satellite} with less than {sigma} s between missions "
                            f"{a.id} and {b.id}",
                        )
                    )
    return violations


def validate_schedule(schedule: Schedule, problem: Problem) -> List[Violation]:
    """Every broken constraint of a schedule. An empty list means feasible."""
    violations, transmitted = _check_missions(schedule, problem)
    violations.extend(_check_timing(schedule, problem.sigma))

    for i, oid in enumerate(problem.instance.oids):
        expected = oid.duration if schedule.scheduled[i] else 0.0
        sent = transmitted.get(oid.id, 0.0)
        if abs(sent - expected) > EPS * max(1.0, oid.duration):
            violations.append(
                Violation(
                    ViolationKind.FAMILY_INCOMPLETE,
                    (oid.id,),
                    f"OID {oid.id} sends {sent} of {oid.duration} s "
                    f"(scheduled={bool(schedule.scheduled[i])})",
                )
            )
    return violations
