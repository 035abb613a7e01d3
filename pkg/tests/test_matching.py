import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import best_assignment_bruteforce
from siot_recruit.matching import (
    InfeasibleAssignment,
    max_bipartite_matching,
    solve_assignment,
)


def random_instance(rng, max_tasks=3, max_skills=2, max_workers=8, dyadic=False):
    """Random slot/candidate structure mirroring the real recruitment shape:
    a worker is available for all slots of a task or none of them."""
    n_tasks = rng.randint(1, max_tasks)
    workers = list(range(rng.randint(1, max_workers)))
    slot_ids = []
    candidates = []
    for t in range(n_tasks):
        skills = rng.sample(range(max_skills + 2), rng.randint(1, max_skills))
        avail = [w for w in workers if rng.random() < 0.8]
        for s in sorted(skills):
            slot_ids.append((t, s))
            if dyadic:
                candidates.append({w: rng.randrange(0, 9) / 8.0 for w in avail})
            else:
                candidates.append({w: rng.uniform(-1, 1) for w in avail})
    return slot_ids, candidates


def test_single_slot_argmax():
    result = solve_assignment([(0, 0)], [{1: 0.3, 2: 0.7}])
    assert result.triples == ((0, 2, 0),)
    assert result.value == 0.7


def test_two_slots_separate_workers():
    result = solve_assignment(
        [(0, 0), (0, 1)],
        [{1: 0.9, 2: 0.5}, {1: 0.8, 2: 0.1}],
    )
    # worker 1 cannot take both slots: best total is 0.5 + 0.8
    assert result.triples == ((0, 1, 1), (0, 2, 0))
    assert result.value == pytest.approx(1.3)


def test_infeasible_when_workers_scarce():
    with pytest.raises(InfeasibleAssignment):
        solve_assignment([(0, 0), (0, 1)], [{1: 0.5}, {1: 0.5}])


def test_infeasible_on_hall_violation():
    with pytest.raises(InfeasibleAssignment):
        solve_assignment(
            [(0, 0), (1, 0), (2, 0)],
            [{1: 0.5, 2: 0.1}, {1: 0.2}, {1: 0.9, 2: 0.4}],
        )


def test_negative_weights_still_assigned():
    result = solve_assignment([(0, 0)], [{4: -0.5, 5: -0.2}])
    assert result.triples == ((0, 5, 0),)
    assert result.value == -0.2


def test_empty_instance():
    result = solve_assignment([], [])
    assert result.triples == ()
    assert result.value == 0.0


def test_tie_break_prefers_smallest_triple_list():
    # both workers at equal weight on both slots: four optima, and the
    # smallest sorted triple list pairs worker 1 with skill 0
    result = solve_assignment(
        [(0, 0), (0, 1)],
        [{1: 0.5, 2: 0.5}, {1: 0.5, 2: 0.5}],
    )
    assert result.triples == ((0, 1, 0), (0, 2, 1))


def test_tie_break_four_way_restricted():
    # slots s0 with {8, 9} and s1 with {1, 2}; all weights equal -> the
    # documented order compares sorted triples, so (0,1,1) then (0,8,0) wins
    result = solve_assignment(
        [(0, 0), (0, 1)],
        [{8: 0.5, 9: 0.5}, {1: 0.5, 2: 0.5}],
    )
    assert result.triples == ((0, 1, 1), (0, 8, 0))


def test_tie_break_matches_oracle_on_dyadic_instances():
    rng = random.Random(99)
    for _ in range(250):
        slot_ids, candidates = random_instance(rng, dyadic=True)
        oracle = best_assignment_bruteforce(slot_ids, candidates)
        if oracle is None or not all(candidates):
            with pytest.raises(InfeasibleAssignment):
                solve_assignment(slot_ids, candidates)
            continue
        result = solve_assignment(slot_ids, candidates)
        assert result.triples == oracle[1]
        assert result.value == oracle[0]


def test_exact_on_continuous_instances():
    rng = random.Random(5)
    for _ in range(250):
        slot_ids, candidates = random_instance(rng)
        oracle = best_assignment_bruteforce(slot_ids, candidates)
        if oracle is None:
            with pytest.raises(InfeasibleAssignment):
                solve_assignment(slot_ids, candidates)
            continue
        result = solve_assignment(slot_ids, candidates)
        assert result.value == oracle[0]
        assert result.triples == oracle[1]


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 10**9), st.booleans())
def test_solver_equals_oracle_property(seed, dyadic):
    rng = random.Random(seed)
    slot_ids, candidates = random_instance(rng, dyadic=dyadic)
    oracle = best_assignment_bruteforce(slot_ids, candidates)
    if oracle is None:
        with pytest.raises(InfeasibleAssignment):
            solve_assignment(slot_ids, candidates)
        return
    result = solve_assignment(slot_ids, candidates)
    assert result.value == oracle[0]
    assert result.triples == oracle[1]


def test_monotone_in_added_worker():
    rng = random.Random(31)
    for _ in range(60):
        slot_ids, candidates = random_instance(rng, max_workers=6)
        try:
            before = solve_assignment(slot_ids, candidates).value
        except InfeasibleAssignment:
            continue
        extended = [dict(c) for c in candidates]
        new_worker = 1000
        for c in extended:
            c[new_worker] = rng.uniform(-1, 1)
        after = solve_assignment(slot_ids, extended).value
        assert after >= before - 1e-12


def test_max_bipartite_matching_basics():
    matched = max_bipartite_matching([{1, 2}, {1}, {2, 3}])
    assert len(matched) == 3
    assert sorted(matched) == [0, 1, 2]
    assert len(set(matched.values())) == 3
    partial = max_bipartite_matching([{1}, {1}])
    assert len(partial) == 1
