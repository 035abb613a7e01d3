import math

import pytest
from hypothesis import given, strategies as st

from helpers import dev, scenario, task
from siot_recruit.domain import (
    ContactEvent,
    Device,
    Location,
    Task,
    ValidationError,
    euclidean_distance,
)

coord = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
points = st.builds(Location, coord, coord)


def test_distance_identity():
    assert euclidean_distance(Location(0, 0), Location(0, 0)) == 0.0


def test_distance_3_4_5():
    assert euclidean_distance(Location(0, 0), Location(3, 4)) == 5.0


def test_distance_hand_computed():
    # sqrt(0.3^2 + 0.4^2) = sqrt(0.09 + 0.16) = 0.5
    d = euclidean_distance(Location(0.1, 0.2), Location(0.4, 0.6))
    assert math.isclose(d, 0.5, rel_tol=1e-12)


@given(points, points)
def test_distance_symmetric(p, q):
    assert euclidean_distance(p, q) == euclidean_distance(q, p)


@given(points, points, points)
def test_distance_triangle_inequality(p, q, r):
    assert euclidean_distance(p, r) <= (
        euclidean_distance(p, q) + euclidean_distance(q, r) + 1e-12
    )


@given(points, points)
def test_distance_zero_iff_equal(p, q):
    d = euclidean_distance(p, q)
    assert d >= 0.0
    assert (d == 0.0) == (p.x == q.x and p.y == q.y)


def test_location_rejects_non_finite():
    with pytest.raises(ValidationError):
        Location(math.nan, 0.0)
    with pytest.raises(ValidationError):
        Location(0.0, math.inf)


def test_device_rejects_bad_skill_level():
    with pytest.raises(ValidationError):
        dev(0, skills=(1.2, 0.5))
    with pytest.raises(ValidationError):
        dev(0, skills=(-0.1, 0.5))


def test_device_rejects_negative_cost():
    with pytest.raises(ValidationError):
        dev(0, costs=(-1.0, 0.0))


def test_device_rejects_mismatched_vectors():
    with pytest.raises(ValidationError):
        Device(
            id=0, owner=0, location=Location(0, 0), is_public=False,
            skill_level=(0.5, 0.5), skill_cost=(1.0,),
        )


def test_task_requires_a_skill_and_positive_radius():
    with pytest.raises(ValidationError):
        task(0, requester=0, required=(0, 0))
    with pytest.raises(ValidationError):
        task(0, requester=0, required=(1, 0), radius=0.0)
    with pytest.raises(ValidationError):
        task(0, requester=0, required=(1, 2))


def test_task_required_skills():
    t = task(0, requester=0, required=(1, 0, 1), radius=0.2)
    assert t.required_skills == (0, 2)


def test_contact_event_invariants():
    with pytest.raises(ValidationError):
        ContactEvent(a=1, b=1, start=0, end=10)
    with pytest.raises(ValidationError):
        ContactEvent(a=1, b=2, start=10, end=10)


def test_scenario_weight_sum_tolerance():
    devices = [dev(0)]
    scenario(devices, weights=(1 / 3, 1 / 3, 1 / 3))  # off by ~2e-16: fine
    with pytest.raises(ValidationError):
        scenario(devices, weights=(0.5, 0.5, 1e-8))
    with pytest.raises(ValidationError):
        scenario(devices, weights=(1.2, -0.2, 0.0))


def test_scenario_rejects_duplicate_device_ids():
    with pytest.raises(ValidationError):
        scenario([dev(0), dev(0)])


def test_scenario_rejects_unknown_requester():
    with pytest.raises(ValidationError):
        scenario([dev(0)], tasks=[task(0, requester=99)])


def test_scenario_rejects_location_outside_unit_square():
    with pytest.raises(ValidationError):
        scenario([dev(0, at=(1.5, 0.5))])


def test_scenario_rejects_wrong_skill_count():
    with pytest.raises(ValidationError):
        scenario([dev(0, n_skills=2), dev(1, n_skills=3)])


def test_scenario_rejects_contact_with_unknown_device():
    with pytest.raises(ValidationError):
        scenario([dev(0), dev(1)], contacts=[ContactEvent(0, 7, 0, 10)])


def test_scenario_lookups():
    s = scenario([dev(0), dev(3)], tasks=[task(1, requester=3)])
    assert s.device(3).id == 3
    assert s.task(1).requester == 3


def test_domain_types_immutable():
    d = dev(0)
    with pytest.raises(AttributeError):
        d.owner = 5
    t = task(0, requester=0)
    with pytest.raises(AttributeError):
        t.radius = 2.0
