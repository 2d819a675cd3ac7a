from hypothesis import given
from hypothesis import strategies as st

from amoebot.grid import Axis, Direction, GridCoord, mirror_coord, on_axis, rotate, rotate_coord
from amoebot.oracle import (empty_regions, oracle_boundaries, oracle_f_d, oracle_maxima, oracle_skeleton,
                            oracle_spanning_check, oracle_stripe, oracle_symmetry, reflect_coord)
from amoebot.shapes import LINE3, RING, TRIANGLE, hexagon, random_blob

directions = st.sampled_from(list(Direction))


def test_stripe_examples():
    assert oracle_stripe(LINE3, (0, 0), Direction.ENE) == set(LINE3)
    assert oracle_stripe(LINE3, (0, 0), Direction.N) == {(0, 0)}
    assert oracle_stripe(RING, (0, 1), Direction.E) == {(0, 1)}


def test_maxima_and_f_d():
    assert oracle_maxima(RING, RING, Direction.N) == {(0, 1)}
    assert oracle_f_d(LINE3, (0, 0), Direction.E) == 2


def test_boundary_examples():
    bs = oracle_boundaries(RING)
    assert sorted(len(b.cycle) for b in bs) == [6, 6]
    assert sorted(b.turn_sum for b in bs) == [-6, 6]
    assert sum(outer for _, outer in empty_regions(RING)) == 1


def test_symmetry_examples():
    tri = oracle_symmetry(TRIANGLE)
    assert (tri.rot2, tri.rot3, tri.rot6) == (False, True, False)
    assert sum(tri.reflections.values()) == 6
    ring = oracle_symmetry(RING)
    assert ring.rot6 and all(ring.reflections.values())


def test_spanning_check():
    star = [frozenset(((0, 0), (1, 0))), frozenset(((0, 0), (0, 1))), frozenset(((0, 0), (-1, 0)))]
    assert oracle_spanning_check(star, [(0, 0), (1, 0), (0, 1), (-1, 0)])
    assert not oracle_spanning_check(star[:2], [(0, 0), (1, 0), (0, 1), (-1, 0)])


@given(st.tuples(st.integers(-20, 20), st.integers(-20, 20)), directions)
def test_reflections_are_involutions_fixing_their_axis(v, d):
    assert reflect_coord(reflect_coord(v, d), d) == GridCoord(*v)
    if d.on_axis:
        from amoebot.grid import neighbor

        assert reflect_coord(neighbor((0, 0), d), d) == neighbor((0, 0), d)
    assert reflect_coord(v, Direction.N) == mirror_coord(v)


@given(st.integers(1, 40), st.integers(0, 10 ** 6), directions)
def test_oracles_are_rotation_covariant(n, seed, d):
    S = random_blob(n, seed, hole_prob=0.1)
    R = [rotate_coord(c) for c in S]
    d2 = rotate(d, 60)
    assert {rotate_coord(c) for c in oracle_maxima(S, S, d)} == oracle_maxima(R, R, d2)
    u = S[seed % len(S)]
    assert {rotate_coord(c) for c in oracle_stripe(S, u, d)} == oracle_stripe(R, rotate_coord(u), d2)
    a, b = oracle_symmetry(S), oracle_symmetry(R)
    assert (a.rot2, a.rot3, a.rot6) == (b.rot2, b.rot3, b.rot6)
    assert all(a.reflections[x] == b.reflections[rotate(x, 60)] for x in Direction)
    rot = lambda c: None if c is None else rotate_coord(c)  # noqa: E731
    assert oracle_skeleton(R, d2).cycle == [tuple(rot(c) for c in o) for o in oracle_skeleton(S, d).cycle]


def test_hexagon_is_fully_symmetric():
    o = oracle_symmetry(hexagon(3))
    assert o.rot6 and all(o.reflections.values())


@given(st.integers(1, 40), st.integers(0, 10 ** 6), directions)
def test_stripe_is_the_axis_through_u(n, seed, d):
    S = random_blob(n, seed)
    u = S[seed % len(S)]
    assert oracle_stripe(S, u, d) == {v for v in S if on_axis(v, Axis(u, d))}
