"""Core value types for the recruitment pipeline.

Devices, tasks, contact events and the enclosing Scenario are plain
immutable dataclasses shared by every other module.  All coordinates live
on the normalized unit square; all timestamps are integer seconds since
the scenario epoch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DeviceId = int
OwnerId = int
TaskId = int
SkillId = int

ETA_SUM_TOL = 1e-9


class ValidationError(ValueError):
    """An entity violates a scenario invariant."""


class ParseError(ValueError):
    """A scenario file is malformed (reported with its line number)."""


class ConfigError(ValueError):
    """A configuration object is internally inconsistent."""


@dataclass(frozen=True, slots=True)
class Location:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValidationError(f"non-finite location ({self.x}, {self.y})")


def euclidean_distance(p: Location, q: Location) -> float:
    """Planar Euclidean distance in map units."""
    return math.hypot(p.x - q.x, p.y - q.y)


@dataclass(frozen=True, slots=True)
class Device:
    """An IoT object: position, owner and per-skill expertise/price quotes."""

    id: DeviceId
    owner: OwnerId
    location: Location
    is_public: bool
    skill_level: tuple[float, ...]
    skill_cost: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.id < 0 or self.owner < 0:
            raise ValidationError(f"device {self.id}: negative identifier")
        if len(self.skill_level) != len(self.skill_cost):
            raise ValidationError(
                f"device {self.id}: skill_level and skill_cost lengths differ"
            )
        for s, lv in enumerate(self.skill_level):
            if not (0.0 <= lv <= 1.0):
                raise ValidationError(
                    f"device {self.id}: skill level {lv} for skill {s} outside [0, 1]"
                )
        for s, c in enumerate(self.skill_cost):
            if not (math.isfinite(c) and c >= 0.0):
                raise ValidationError(
                    f"device {self.id}: cost {c} for skill {s} must be finite and >= 0"
                )


@dataclass(frozen=True, slots=True)
class Task:
    """A sensing request: who asks, where, which skills, and the search radius."""

    id: TaskId
    requester: DeviceId
    location: Location
    required: tuple[int, ...]
    radius: float

    def __post_init__(self) -> None:
        if self.id < 0:
            raise ValidationError(f"task {self.id}: negative identifier")
        if any(q not in (0, 1) for q in self.required):
            raise ValidationError(f"task {self.id}: required mask must be 0/1")
        if not any(self.required):
            raise ValidationError(f"task {self.id}: at least one skill must be required")
        if not (math.isfinite(self.radius) and self.radius > 0.0):
            raise ValidationError(f"task {self.id}: radius must be positive")

    @property
    def required_skills(self) -> tuple[SkillId, ...]:
        return tuple(s for s, q in enumerate(self.required) if q)


@dataclass(frozen=True, slots=True)
class ContactEvent:
    """One co-presence interval between two devices."""

    a: DeviceId
    b: DeviceId
    start: int
    end: int

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise ValidationError(f"contact ({self.a}, {self.b}): self-contact")
        if self.start >= self.end:
            raise ValidationError(
                f"contact ({self.a}, {self.b}): start {self.start} >= end {self.end}"
            )


@dataclass(eq=True)
class Scenario:
    """A full problem instance.

    Immutable by convention after construction; derived lookup tables are
    private caches and excluded from equality.
    """

    devices: tuple[Device, ...]
    tasks: tuple[Task, ...]
    owner_social: tuple[tuple[OwnerId, OwnerId, float], ...]
    contact_log: tuple[ContactEvent, ...]
    weights: tuple[float, float, float]
    distance_price: float
    trust_threshold: float
    n_skills: int

    _device_by_id: dict = field(init=False, repr=False, compare=False)
    _task_by_id: dict = field(init=False, repr=False, compare=False)
    _owner_adj: dict = field(init=False, repr=False, compare=False)
    _cache: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.weights) != 3:
            raise ValidationError("weights must have exactly three entries")
        if any(w < 0.0 for w in self.weights):
            raise ValidationError(f"weights must be non-negative, got {self.weights}")
        if abs(sum(self.weights) - 1.0) > ETA_SUM_TOL:
            raise ValidationError(
                f"weights must sum to 1 within {ETA_SUM_TOL}, got sum {sum(self.weights)!r}"
            )
        if not (math.isfinite(self.distance_price) and self.distance_price >= 0.0):
            raise ValidationError("distance_price must be finite and >= 0")
        if not (0.0 <= self.trust_threshold <= 1.0):
            raise ValidationError("trust_threshold must lie in [0, 1]")
        if self.n_skills < 1:
            raise ValidationError("n_skills must be >= 1")

        by_id: dict[DeviceId, Device] = {}
        for dev in self.devices:
            if dev.id in by_id:
                raise ValidationError(f"device {dev.id}: duplicate id")
            if len(dev.skill_level) != self.n_skills:
                raise ValidationError(
                    f"device {dev.id}: expected {self.n_skills} skill entries, "
                    f"got {len(dev.skill_level)}"
                )
            if not (0.0 <= dev.location.x <= 1.0 and 0.0 <= dev.location.y <= 1.0):
                raise ValidationError(
                    f"device {dev.id}: location outside the unit square"
                )
            by_id[dev.id] = dev

        task_by_id: dict[TaskId, Task] = {}
        for task in self.tasks:
            if task.id in task_by_id:
                raise ValidationError(f"task {task.id}: duplicate id")
            if len(task.required) != self.n_skills:
                raise ValidationError(
                    f"task {task.id}: required mask length != n_skills"
                )
            if task.requester not in by_id:
                raise ValidationError(
                    f"task {task.id}: requester {task.requester} is not a known device"
                )
            task_by_id[task.id] = task

        adj: dict[OwnerId, dict[OwnerId, float]] = {}
        for a, b, w in self.owner_social:
            if a == b:
                raise ValidationError(f"owner edge ({a}, {b}): self-loop")
            if w <= 0.0:
                raise ValidationError(f"owner edge ({a}, {b}): weight must be > 0")
            adj.setdefault(a, {})[b] = w
            adj.setdefault(b, {})[a] = w

        for ev in self.contact_log:
            if ev.a not in by_id or ev.b not in by_id:
                raise ValidationError(
                    f"contact ({ev.a}, {ev.b}): references unknown device"
                )

        object.__setattr__(self, "_device_by_id", by_id)
        object.__setattr__(self, "_task_by_id", task_by_id)
        object.__setattr__(self, "_owner_adj", adj)
        object.__setattr__(self, "_cache", {})

    # -- lookups ----------------------------------------------------------

    def device(self, device_id: DeviceId) -> Device:
        return self._device_by_id[device_id]

    def task(self, task_id: TaskId) -> Task:
        return self._task_by_id[task_id]

    def owner_neighbors(self, owner: OwnerId) -> dict[OwnerId, float]:
        return self._owner_adj.get(owner, {})

    # -- cached array views (built on first use, keyed per scenario) -------

    def device_index(self) -> dict[DeviceId, int]:
        idx = self._cache.get("device_index")
        if idx is None:
            idx = {dev.id: i for i, dev in enumerate(self.devices)}
            self._cache["device_index"] = idx
        return idx

    def coords(self) -> np.ndarray:
        arr = self._cache.get("coords")
        if arr is None:
            arr = np.array(
                [(d.location.x, d.location.y) for d in self.devices], dtype=float
            ).reshape(len(self.devices), 2)
            self._cache["coords"] = arr
        return arr

    def skill_matrix(self) -> np.ndarray:
        arr = self._cache.get("skills")
        if arr is None:
            arr = np.array([d.skill_level for d in self.devices], dtype=float)
            self._cache["skills"] = arr
        return arr

    def cost_matrix(self) -> np.ndarray:
        arr = self._cache.get("costs")
        if arr is None:
            arr = np.array([d.skill_cost for d in self.devices], dtype=float)
            self._cache["costs"] = arr
        return arr

    def owner_vector(self) -> np.ndarray:
        arr = self._cache.get("owners")
        if arr is None:
            arr = np.array([d.owner for d in self.devices], dtype=int)
            self._cache["owners"] = arr
        return arr

    def warm_caches(self) -> None:
        """Materialize all derived arrays (so later timed code paths only read)."""
        self.device_index()
        self.coords()
        self.skill_matrix()
        self.cost_matrix()
        self.owner_vector()
