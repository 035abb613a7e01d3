import math

import pytest
from hypothesis import given, settings, strategies as st

from helpers import dev, scenario, task
from siot_recruit.spatial import filter_by_radius


def pool_for(devices, t):
    scn = scenario(devices, tasks=[t])
    return filter_by_radius(scn, t)


def test_all_inclusive_radius_excludes_only_requester():
    devices = [dev(i, at=(0.1 * i, 0.1 * i)) for i in range(8)]
    t = task(0, requester=3, at=(0.0, 0.0), radius=2.0)
    pool = pool_for(devices, t)
    assert pool.members == (0, 1, 2, 4, 5, 6, 7)


def test_tiny_radius_empty_pool():
    devices = [dev(i, at=(0.5 + 0.05 * (i + 1), 0.5)) for i in range(4)]
    t = task(0, requester=0, at=(0.5, 0.5), radius=1e-9)
    assert pool_for(devices, t).members == ()


def test_three_nearest_of_five():
    # devices at distances 0.1..0.5 from the task; R=0.35 keeps the 3 nearest
    devices = [dev(i, at=(0.1 * (i + 1), 0.0)) for i in range(5)]
    devices.append(dev(99, at=(0.99, 0.99)))  # requester, far away
    t = task(0, requester=99, at=(0.0, 0.0), radius=0.35)
    pool = pool_for(devices, t)
    brute = sorted(
        d.id for d in devices
        if d.id != 99 and math.hypot(d.location.x, d.location.y) < 0.35
    )
    assert list(pool.members) == brute == [0, 1, 2]


def test_boundary_is_strict():
    devices = [dev(0, at=(0.5, 0.0)), dev(1, at=(0.0, 0.5)), dev(9, at=(0.9, 0.9))]
    t = task(0, requester=9, at=(0.0, 0.0), radius=0.5)
    assert pool_for(devices, t).members == ()
    t2 = task(0, requester=9, at=(0.0, 0.0), radius=math.nextafter(0.5, 1.0))
    assert pool_for(devices, t2).members == (0, 1)


def test_requester_excluded_even_at_distance_zero():
    devices = [dev(0, at=(0.2, 0.2)), dev(1, at=(0.2, 0.2))]
    t = task(0, requester=0, at=(0.2, 0.2), radius=0.1)
    assert pool_for(devices, t).members == (1,)


def test_rejects_foreign_task():
    scn = scenario([dev(0)], tasks=[task(0, requester=0)])
    foreign = task(5, requester=0)
    with pytest.raises(KeyError):
        filter_by_radius(scn, foreign)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.floats(min_value=0, max_value=1, allow_nan=False),
            st.floats(min_value=0, max_value=1, allow_nan=False),
        ),
        min_size=1, max_size=12,
    ),
    st.floats(min_value=1e-6, max_value=1.5),
    st.floats(min_value=1e-6, max_value=1.5),
)
def test_pool_monotone_in_radius(points, r1, r2):
    r_small, r_big = sorted((r1, r2))
    devices = [dev(i, at=p) for i, p in enumerate(points)]
    t_small = task(0, requester=0, at=(0.5, 0.5), radius=r_small)
    t_big = task(0, requester=0, at=(0.5, 0.5), radius=r_big)
    small = set(pool_for(devices, t_small).members)
    big = set(pool_for(devices, t_big).members)
    assert small <= big
