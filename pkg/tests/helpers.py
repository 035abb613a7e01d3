"""Compact builders for hand-crafted scenarios in tests."""

from __future__ import annotations

from siot_recruit.domain import ContactEvent, Device, Location, Scenario, Task

THIRDS = (1 / 3, 1 / 3, 1 / 3)


def dev(
    device_id: int,
    owner: int = 0,
    at: tuple[float, float] = (0.5, 0.5),
    skills: tuple[float, ...] | None = None,
    costs: tuple[float, ...] | None = None,
    public: bool = False,
    n_skills: int = 2,
) -> Device:
    if skills is None:
        skills = (0.5,) * n_skills
    if costs is None:
        costs = (1.0,) * len(skills)
    return Device(
        id=device_id,
        owner=owner,
        location=Location(*at),
        is_public=public,
        skill_level=skills,
        skill_cost=costs,
    )


def task(
    task_id: int,
    requester: int,
    at: tuple[float, float] = (0.5, 0.5),
    required: tuple[int, ...] = (1, 0),
    radius: float = 1.5,
) -> Task:
    return Task(
        id=task_id,
        requester=requester,
        location=Location(*at),
        required=required,
        radius=radius,
    )


def scenario(
    devices,
    tasks=(),
    owner_edges=(),
    contacts=(),
    weights=THIRDS,
    price: float = 0.0,
    threshold: float = 0.0,
) -> Scenario:
    devices = tuple(devices)
    return Scenario(
        devices=devices,
        tasks=tuple(tasks),
        owner_social=tuple(owner_edges),
        contact_log=tuple(contacts),
        weights=weights,
        distance_price=price,
        trust_threshold=threshold,
        n_skills=len(devices[0].skill_level) if devices else 1,
    )


def contact(a: int, b: int, start_h: float, minutes: float) -> ContactEvent:
    start = int(start_h * 3600)
    return ContactEvent(a=a, b=b, start=start, end=start + int(minutes * 60))
