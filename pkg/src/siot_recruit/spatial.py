"""Radius-based candidate filtering (the first stage of the pipeline)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import DeviceId, Scenario, Task, TaskId


@dataclass(frozen=True, slots=True)
class CandidatePool:
    """Devices strictly within the task radius, requester excluded."""

    task: TaskId
    members: tuple[DeviceId, ...]


def filter_by_radius(scenario: Scenario, task: Task) -> CandidatePool:
    """Linear scan keeping devices with distance < task.radius.

    The boundary is strict: a device at exactly the radius is excluded.
    """
    if scenario.task(task.id) is not task and scenario.task(task.id) != task:
        raise ValueError(f"task {task.id} does not belong to this scenario")
    coords = scenario.coords()
    dx = coords[:, 0] - task.location.x
    dy = coords[:, 1] - task.location.y
    inside = np.hypot(dx, dy) < task.radius
    members = sorted(
        dev.id
        for dev, keep in zip(scenario.devices, inside)
        if keep and dev.id != task.requester
    )
    return CandidatePool(task=task.id, members=tuple(members))
