from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from amoebot.engine import AmoebotWorld, InvalidPinCount
from amoebot.grid import Direction, GridCoord, rotate, rotate_coord
from amoebot.oracle import boundary_amoebots, oracle_first_occurrence_edges, oracle_skeleton, oracle_spanning_check
from amoebot.shapes import HEXAGON7, RING, TRIANGLE, blob_with_holes, random_blob
from amoebot.skeleton import canonical_skeleton, principal_direction, skeleton_path, spanning_tree

directions = st.sampled_from(list(Direction))
signs = st.sampled_from([1, -1])


def skel(S, d=Direction.N, s=1):
    return canonical_skeleton(AmoebotWorld(S, pins_per_edge=4), d, s)


def test_principal_direction():
    assert principal_direction(Direction.N) == Direction.N
    assert principal_direction(Direction.E, 1) == Direction.ENE
    assert principal_direction(Direction.E, -1) == Direction.ESE


def test_triangle_skeleton_is_outer_cycle():
    sk = skel(TRIANGLE)
    assert sk.split == (0, 1)
    assert {o[0] for o in sk.cycle} == set(TRIANGLE) and len(sk.cycle) == 3
    assert skeleton_path(sk).positions[0] == (0, 1)


def test_ring_skeleton_fuses_both_cycles():
    sk = skel(RING)
    assert sk.starts == [(0, 1)] and sk.paths == [[(0, 1)]]
    assert len(sk.cycle) == 12


def test_two_amoebots_visit_the_bond_twice():
    sk = skel([(0, 0), (1, 0)])
    assert [o[0] for o in sk.cycle].count((0, 0)) == 1 and len(sk.cycle) == 2
    assert len(skeleton_path(sk)) == 2


def test_needs_four_pins():
    with pytest.raises(InvalidPinCount):
        canonical_skeleton(AmoebotWorld(TRIANGLE), Direction.N)


def check_skeleton(S, sk):
    cyc = sk.cycle
    # successor pointers close one cycle
    for (v, _, s), (w, p, _) in zip(cyc, cyc[1:] + cyc[:1]):
        assert s == w and p == v
    assert boundary_amoebots(S) <= {o[0] for o in cyc}
    bonds = Counter(frozenset((o[0], o[2])) for o in cyc if o[2] is not None)
    assert max(bonds.values(), default=0) <= 2


@given(st.integers(3, 60), st.integers(0, 4), st.integers(0, 10 ** 6), directions, signs)
def test_skeleton_matches_oracle(n, holes, seed, d, s):
    S = blob_with_holes(n, holes, seed)
    sk = skel(S, d, s)
    check_skeleton(S, sk)
    assert sk.cycle == oracle_skeleton(S, d, s).cycle


@given(st.integers(3, 50), st.integers(0, 10 ** 6), directions, signs)
def test_skeleton_rotation_equivariance(n, seed, d, s):
    S = random_blob(n, seed, hole_prob=0.1)
    rot = lambda c: None if c is None else rotate_coord(c)  # noqa: E731
    a = skel(S, d, s)
    b = skel([rotate_coord(c) for c in S], rotate(d, 60), s)
    assert b.cycle == [tuple(rot(c) for c in o) for o in a.cycle]


def test_spanning_tree_examples():
    w = AmoebotWorld(TRIANGLE, pins_per_edge=4)
    t = spanning_tree(w, skeleton_path(canonical_skeleton(w, Direction.N)))
    assert len(t.edges) == 2 and t.root == (0, 1)
    w = AmoebotWorld(HEXAGON7, pins_per_edge=4)
    t = spanning_tree(w, skeleton_path(canonical_skeleton(w, Direction.N)))
    assert len(t.path_edges) == 5 and len(t.edges) == 6
    assert frozenset((GridCoord(0, 0), GridCoord(0, 1))) in t.edges
    w = AmoebotWorld([(0, 0)], pins_per_edge=4)
    t = spanning_tree(w, skeleton_path(canonical_skeleton(w, Direction.N)))
    assert t.edges == set()


@given(st.integers(1, 60), st.integers(0, 4), st.integers(0, 10 ** 6), directions, signs)
def test_spanning_tree_valid(n, holes, seed, d, s):
    S = blob_with_holes(n, holes, seed)
    w = AmoebotWorld(S, pins_per_edge=4)
    sk = canonical_skeleton(w, d, s)
    t = spanning_tree(w, skeleton_path(sk))
    assert oracle_spanning_check(t.edges, S)
    assert t.path_edges == oracle_first_occurrence_edges([o[0] for o in sk.cycle])
