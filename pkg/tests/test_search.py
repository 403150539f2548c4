from __future__ import annotations

import numpy as np
import pytest
from scipy import stats

from trisearch import topomap
from trisearch.search import (
    FullCoverage,
    Patrol,
    TargetLedger,
    Targets,
    mission_step,
    next_waypoint_modified,
    next_waypoint_random,
    next_waypoint_semirandom,
    sense_targets,
)
from trisearch.topomap import TopoMap
from trisearch.trigrid import GridFrame, six_neighbors

FRAME = GridFrame((0.0, 0.0), 0.0, 1.0)


def star_map(visited_neighbors=(), extra_unvisited=()):
    """Centre vertex plus its six neighbours, with chosen ones already visited."""
    m = TopoMap(FRAME)
    topomap.mark_visited(m, (0, 0))
    for c in six_neighbors((0, 0)):
        m._add_detected(c)
        if c in visited_neighbors:
            topomap.mark_visited(m, c)
    for c in extra_unvisited:
        m._add_detected(c)
    return m


def test_random_uniform_over_six():
    m = star_map()
    rng = np.random.default_rng(0)
    counts = {c: 0 for c in six_neighbors((0, 0))}
    for _ in range(6000):
        counts[next_waypoint_random(m, (0, 0), rng)] += 1
    p = stats.chisquare(list(counts.values())).pvalue
    assert p > 0.01


def test_random_stays_when_nothing_unvisited():
    m = star_map(visited_neighbors=six_neighbors((0, 0)))
    rng = np.random.default_rng(1)
    assert next_waypoint_random(m, (0, 0), rng) is None


def test_random_single_candidate():
    m = TopoMap(FRAME)
    topomap.mark_visited(m, (0, 0))
    m._add_detected((1, 0))
    rng = np.random.default_rng(2)
    for _ in range(10):
        assert next_waypoint_random(m, (0, 0), rng) == (1, 0)


def test_random_patrol_always_moves():
    m = star_map(visited_neighbors=six_neighbors((0, 0)))
    rng = np.random.default_rng(3)
    assert next_waypoint_random(m, (0, 0), rng, patrol=True) in six_neighbors((0, 0))


def test_semirandom_prefers_unvisited():
    visited = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    m = star_map(visited_neighbors=visited)
    rng = np.random.default_rng(4)
    counts = {(1, -1): 0, (-1, 1): 0}
    for _ in range(4000):
        counts[next_waypoint_semirandom(m, (0, 0), rng)] += 1
    assert set(counts) == {(1, -1), (-1, 1)}
    p = stats.chisquare(list(counts.values())).pvalue
    assert p > 0.01


def test_semirandom_falls_back_to_all_neighbors():
    m = star_map(visited_neighbors=six_neighbors((0, 0)), extra_unvisited=[(5, 5)])
    rng = np.random.default_rng(5)
    seen = {next_waypoint_semirandom(m, (0, 0), rng) for _ in range(500)}
    assert seen == set(six_neighbors((0, 0)))


def test_semirandom_stays_when_map_exhausted():
    m = star_map(visited_neighbors=six_neighbors((0, 0)))
    rng = np.random.default_rng(6)
    assert next_waypoint_semirandom(m, (0, 0), rng) is None
    assert next_waypoint_semirandom(m, (0, 0), rng, patrol=True) is not None


def test_modified_not_restricted_to_neighbors():
    m = star_map(visited_neighbors=six_neighbors((0, 0)), extra_unvisited=[(3, 0)])
    assert next_waypoint_modified(m, (0.0, 0.0)) == (3, 0)


def test_modified_stays_when_done():
    m = star_map(visited_neighbors=six_neighbors((0, 0)))
    assert next_waypoint_modified(m, (0.0, 0.0)) is None


def test_modified_tie_deterministic():
    m = TopoMap(FRAME)
    m._add_detected((2, 0))
    m._add_detected((-2, 0))
    for _ in range(5):
        assert next_waypoint_modified(m, (0.0, 0.0)) == (-2, 0)


def test_policy_replay_is_deterministic():
    m = star_map()
    seq1 = [next_waypoint_random(m, (0, 0), np.random.default_rng(99)) for _ in range(1)]
    rng_a = np.random.default_rng(123)
    rng_b = np.random.default_rng(123)
    a = [next_waypoint_random(m, (0, 0), rng_a) for _ in range(50)]
    b = [next_waypoint_random(m, (0, 0), rng_b) for _ in range(50)]
    assert a == b
    assert seq1[0] in six_neighbors((0, 0))


def test_target_sensing_radius():
    ledger = TargetLedger(1)
    sense_targets(ledger, [(0.0, 0.0)], [(0.9, 0.0)], r_s=1.0)
    assert ledger.flags == [True]
    ledger2 = TargetLedger(1)
    sense_targets(ledger2, [(0.0, 0.0)], [(1.1, 0.0)], r_s=1.0)
    assert ledger2.flags == [False]


def test_mission_step_targets():
    mission = Targets(((0.0, 0.0), (5.0, (0.0)), (9.0, 0.0)))
    ledger = TargetLedger(3)
    done = mission_step(mission, ledger, [], [(0.1, 0.0), (5.0, 0.5)], r_s=1.0)
    assert ledger.count == 2
    assert not done
    done = mission_step(mission, ledger, [], [(9.0, 0.1)], r_s=1.0)
    assert done


def test_mission_step_coverage_and_patrol():
    covered = star_map(visited_neighbors=six_neighbors((0, 0)))
    partial = star_map()
    assert mission_step(FullCoverage(), None, [covered], [], 1.0)
    assert not mission_step(FullCoverage(), None, [covered, partial], [], 1.0)
    assert not mission_step(Patrol(reset_period=500), None, [covered], [], 1.0)


def test_ledger_monotone():
    ledger = TargetLedger(2)
    assert ledger.mark(0)
    assert not ledger.mark(0)
    assert ledger.count == 1
    assert not ledger.all_detected


def test_mission_validation():
    with pytest.raises(ValueError):
        Targets(())
    with pytest.raises(ValueError):
        Patrol(reset_period=0)
