import pickle

import pytest
from hypothesis import given
from hypothesis import strategies as st

from amoebot.engine import AmoebotWorld, InvalidPinCount
from amoebot.pasc import (BitIndexOutOfRange, ChainRef, LambdaExceedsChain, PascState, block_primitive, ceil_log2,
                          mark_position, pasc_replay, pasc_run, run_pasc_program, twos_complement)
from amoebot.shapes import RING, line


def line_chain(m: int, r: int = 0, pins: int = 2):
    world = AmoebotWorld(line(m), pins_per_edge=pins)
    return world, ChainRef(line(m), r)


def test_examples():
    w, ch = line_chain(1)
    ids = pasc_run(w, ch)
    assert ids.ids == [0] and ids.iterations == 0
    w, ch = line_chain(5)
    ids = pasc_run(w, ch)
    assert ids.ids == [0, 1, 2, 3, 4] and ids.iterations == 3
    w, ch = line_chain(4, 3)
    ids = pasc_run(w, ch)
    assert ids.ids == [-3, -2, -1, 0]
    assert set(ids.bits[2]) == {1}  # all ones reads as -1


def test_replay_examples():
    w, ch = line_chain(5)
    assert pasc_replay(w, ch, 0) == [0, 1, 0, 1, 0]
    assert pasc_replay(w, ch, 2) == [0, 0, 0, 0, 1]
    with pytest.raises(BitIndexOutOfRange):
        pasc_replay(w, ch, ceil_log2(5))


@given(st.integers(1, 64), st.data())
def test_identifiers_are_offsets(m, data):
    r = data.draw(st.integers(0, m - 1))
    w, ch = line_chain(m, r)
    ids = pasc_run(w, ch)
    assert ids.ids == [i - r for i in range(m)]
    assert ids.iterations == max(r, m - 1 - r).bit_length()
    assert ids.rounds == 3 * ids.iterations + 3


def test_ring_chain_with_repeated_amoebot():
    # the ring walked twice around: every amoebot occurs twice
    walk = [(0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1), (1, 0)] * 2
    w = AmoebotWorld(RING, pins_per_edge=4)
    assert pasc_run(w, ChainRef(walk, 0)).ids == list(range(12))


def test_twos_complement():
    assert twos_complement([]) == 0
    assert twos_complement([1, 1, 1]) == -1
    assert twos_complement([0, 1, 0]) == 2
    assert twos_complement([1, 0, 1]) == -3


@pytest.mark.parametrize("m,lam,marks", [(16, 3, [0, 4, 8, 12]), (32, 5, [0, 8, 16, 24]),
                                         (7, 1, list(range(7))), (9, 9, [0])])
def test_block_primitive_examples(m, lam, marks):
    w, ch = line_chain(m)
    res = block_primitive(w, ch, lam)
    assert res.marks == marks
    assert res.rounds > 0


@given(st.integers(2, 80), st.data())
def test_block_primitive_marks_multiples(m, data):
    lam = data.draw(st.integers(1, m))
    w, ch = line_chain(m)
    k = 1 << ceil_log2(lam)
    assert block_primitive(w, ch, lam).marks == list(range(0, m, k))


def test_block_primitive_rejects_long_lambda():
    w, ch = line_chain(4)
    with pytest.raises(LambdaExceedsChain):
        block_primitive(w, ch, 5)


def test_mark_position():
    w, ch = line_chain(40)
    assert mark_position(w, ch, 12) == 12
    assert mark_position(w, ch, 50) is None


@given(st.integers(1, 24), st.data())
def test_program_form_matches_vectorized_run(m, data):
    r = data.draw(st.integers(0, m - 1))
    w, ch = line_chain(m, r)
    ids = pasc_run(w, ch)
    w2 = AmoebotWorld(line(m), state_budget=256)
    assert run_pasc_program(w2, ch) == ids.bits


def test_program_state_is_constant_size():
    assert len(pickle.dumps(PascState(phase=1, active=False, done=False, started=True, bit=1))) < 256
    w = AmoebotWorld(line(3), pins_per_edge=1)
    with pytest.raises(InvalidPinCount):
        run_pasc_program(w, ChainRef(line(3)))
