from __future__ import annotations

import math

import numpy as np
import pytest

from trisearch import topomap
from trisearch.netsim import MapPacket
from trisearch.topomap import SensorModel, TopoMap
from trisearch.trigrid import GridFrame, six_neighbors
from trisearch.world import Workspace

BIG = [(-10.0, -10.0), (10.0, -10.0), (10.0, 10.0), (-10.0, 10.0)]
FRAME = GridFrame((0.0, 0.0), 0.0, 1.0)
SENSOR = SensorModel(r_s=1.0 / math.sqrt(3.0), n_rays=19, max_range=5.0)


def fresh_map():
    m = TopoMap(FRAME)
    topomap.mark_visited(m, (0, 0))
    return m


def test_detect_open_area_all_six():
    w = Workspace(BIG, margin=0.2)
    m = fresh_map()
    added = topomap.detect_vertices(m, (0.0, 0.0), w, SENSOR)
    assert len(added) == 6
    assert set(added) == set(six_neighbors((0, 0)))


def test_detect_wall_blocks_two_rays():
    # Thin wall east of the robot cuts line of sight to exactly two neighbours:
    # (1,0) at y=0 and (0,1) at (0.5, 0.866); the (1,-1) ray passes south of it.
    wall = [(0.4, -0.05), (0.45, -0.05), (0.45, 2.0), (0.4, 2.0)]
    w = Workspace(BIG, [wall], margin=0.2)
    m = fresh_map()
    added = topomap.detect_vertices(m, (0.0, 0.0), w, SENSOR)
    assert len(added) == 4
    assert (1, 0) not in m.entries
    assert (0, 1) not in m.entries


def test_detect_margin_band_excludes():
    # Vertex (1,0) ends up 0.2 from the obstacle face, under the 0.3 margin.
    block = [(1.2, -0.5), (2.2, -0.5), (2.2, 0.5), (1.2, 0.5)]
    w = Workspace(BIG, [block], margin=0.3)
    m = fresh_map()
    added = topomap.detect_vertices(m, (0.0, 0.0), w, SENSOR)
    assert (1, 0) not in m.entries
    assert len(added) == 5


def test_detect_never_downgrades_visited():
    w = Workspace(BIG, margin=0.2)
    m = fresh_map()
    topomap.mark_visited(m, (1, 0))
    topomap.detect_vertices(m, (0.0, 0.0), w, SENSOR)
    assert m.is_visited((1, 0))


def test_mark_visited_transitions():
    m = TopoMap(FRAME)
    m._add_detected((2, 2))
    assert topomap.mark_visited(m, (2, 2))
    assert m.is_visited((2, 2))
    assert not topomap.mark_visited(m, (2, 2))  # idempotent
    assert topomap.mark_visited(m, (5, 5))      # absent -> inserted visited
    assert m.is_visited((5, 5))


def test_merge_union_disjoint():
    a = TopoMap(FRAME)
    for c in [(0, 0), (1, 0), (0, 1)]:
        a._add_detected(c)
    b_coords = [(3, 0), (4, 0), (3, 1), (4, 1)]
    pkt = MapPacket(sender=1, vertices=tuple((c, False) for c in b_coords), frame=FRAME)
    topomap.merge(a, pkt)
    assert len(a) == 7


def test_merge_visited_dominant():
    a = TopoMap(FRAME)
    a._add_detected((0, 0))
    topomap.merge(a, MapPacket(sender=1, vertices=(((0, 0), True),), frame=FRAME))
    assert a.is_visited((0, 0))
    # The reverse order keeps visited too.
    b = TopoMap(FRAME)
    topomap.mark_visited(b, (0, 0))
    topomap.merge(b, MapPacket(sender=1, vertices=(((0, 0), False),), frame=FRAME))
    assert b.is_visited((0, 0))


def random_packet(rng) -> MapPacket:
    coords = {(int(rng.integers(-3, 4)), int(rng.integers(-3, 4))) for _ in range(rng.integers(1, 10))}
    return MapPacket(
        sender=0,
        vertices=tuple((c, bool(rng.integers(2))) for c in sorted(coords)),
        frame=FRAME,
    )


def state_of(m: TopoMap):
    return (frozenset(m.entries.items()), frozenset(m.tombstones))


def test_merge_semilattice_laws():
    rng = np.random.default_rng(42)
    for _ in range(80):
        pa, pb = random_packet(rng), random_packet(rng)
        ab = topomap.merge(topomap.merge(TopoMap(FRAME), pa), pb)
        ba = topomap.merge(topomap.merge(TopoMap(FRAME), pb), pa)
        assert state_of(ab) == state_of(ba)  # commutative
        twice = topomap.merge(ab, pa)
        assert state_of(twice) == state_of(ba)  # idempotent
        pc = random_packet(rng)
        left = topomap.merge(topomap.merge(topomap.merge(TopoMap(FRAME), pa), pb), pc)
        right = topomap.merge(topomap.merge(topomap.merge(TopoMap(FRAME), pa), pc), pb)
        assert state_of(left) == state_of(right)  # order-insensitive


def test_merge_frame_mismatch_rejected():
    other = GridFrame((0.0, 0.0), 0.5, 1.0)
    m = TopoMap(FRAME)
    with pytest.raises(ValueError):
        topomap.merge(m, MapPacket(sender=1, vertices=(((0, 0), False),), frame=other))


def test_nearest_unvisited_cases():
    m = TopoMap(FRAME)
    assert topomap.nearest_unvisited(m, (0.0, 0.0)) is None
    m._add_detected((1, 0))
    assert topomap.nearest_unvisited(m, (0.0, 0.0)) == (1, 0)
    m._add_detected((3, 0))
    assert topomap.nearest_unvisited(m, (0.0, 0.0)) == (1, 0)
    topomap.mark_visited(m, (1, 0))
    topomap.mark_visited(m, (3, 0))
    assert topomap.nearest_unvisited(m, (0.0, 0.0)) is None


def test_nearest_unvisited_tie_break():
    m = TopoMap(FRAME)
    m._add_detected((1, 0))
    m._add_detected((-1, 0))
    # Both at distance 1 from the origin pose; smallest (a, b) wins.
    assert topomap.nearest_unvisited(m, (0.0, 0.0)) == (-1, 0)


def test_reset_visited():
    m = TopoMap(FRAME)
    for i in range(5):
        topomap.mark_visited(m, (i, 0))
    topomap.reset_visited(m)
    assert len(m.unvisited) == 5
    assert topomap.nearest_unvisited(m, (0.0, 0.0)) == (0, 0)
    empty = TopoMap(FRAME)
    topomap.reset_visited(empty)
    assert len(empty) == 0


def test_tombstone_blocks_merge_and_detect():
    w = Workspace(BIG, margin=0.2)
    m = fresh_map()
    topomap.detect_vertices(m, (0.0, 0.0), w, SENSOR)
    assert topomap.delete_vertex(m, (1, 0))
    assert (1, 0) not in m.entries
    topomap.merge(m, MapPacket(sender=1, vertices=(((1, 0), False),), frame=FRAME))
    assert (1, 0) not in m.entries
    topomap.detect_vertices(m, (0.0, 0.0), w, SENSOR)
    assert (1, 0) not in m.entries
    # Physical occupation overrides the tombstone.
    topomap.mark_visited(m, (1, 0))
    assert m.is_visited((1, 0))


def test_delete_never_removes_visited():
    m = fresh_map()
    assert not topomap.delete_vertex(m, (0, 0))
    assert m.is_visited((0, 0))


def test_detected_set_stays_connected():
    w = Workspace(BIG, [[(0.4, -0.05), (0.45, -0.05), (0.45, 2.0), (0.4, 2.0)]], margin=0.2)
    m = fresh_map()
    pose = (0.0, 0.0)
    rng = np.random.default_rng(6)
    for _ in range(30):
        topomap.detect_vertices(m, pose, w, SENSOR)
        options = [c for c in six_neighbors(
            __import__("trisearch.trigrid", fromlist=["nearest_vertex"]).nearest_vertex(FRAME, pose))
            if c in m.entries]
        nxt = options[int(rng.integers(len(options)))]
        topomap.mark_visited(m, nxt)
        pose = m.vertex_xy(nxt)
        # Six-neighbour connectivity of the detected set.
        coords = set(m.entries)
        start = next(iter(coords))
        seen = {start}
        stack = [start]
        while stack:
            for nb in six_neighbors(stack.pop()):
                if nb in coords and nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        assert seen == coords


def test_csv_rows(tmp_path):
    m = fresh_map()
    m._add_detected((1, 0))
    path = tmp_path / "map.csv"
    topomap.dump_csv(m, str(path))
    text = path.read_text()
    assert "a,b,state" in text
    assert "0,0,visited" in text
    assert "1,0,detected" in text
