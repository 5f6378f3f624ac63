from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stonedual.finab import AlgebraError
from stonedual.stone import (
    Clopen,
    LevelChain,
    all_covers,
    enumerate_clopens,
    fibre_partition,
    pullback_clopen,
    same_clopen,
    set_partitions,
    subsets,
    validate_chain,
)

TWO_TO_ONE = LevelChain((1, 2), ((0, 0),))


def bell(n):
    # Bell triangle oracle
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def test_validate_chain():
    assert validate_chain(LevelChain.single(3)) == (True, None)
    assert validate_chain(TWO_TO_ONE) == (True, None)
    assert validate_chain(LevelChain((2, 2, 3), ((0, 1), (0, 0, 1)))) == (True, None)
    assert validate_chain(LevelChain((2, 2, 3), ((0, 0), (0, 1, 1)))) == (False, 0)


def test_chain_shape_errors():
    with pytest.raises(AlgebraError):
        LevelChain(())
    with pytest.raises(AlgebraError):
        LevelChain((1, 2), ((0, 1),))
    with pytest.raises(AlgebraError):
        LevelChain((1, 2), ())


def test_project_and_thread():
    ch = LevelChain((1, 2, 4), ((0, 0), (0, 0, 1, 1)))
    assert ch.thread(3) == (0, 1, 3)
    with pytest.raises(AlgebraError):
        ch.project(0, 0, 1)


def test_pullbacks():
    full = Clopen(0, {0})
    assert pullback_clopen(TWO_TO_ONE, full, 1).points == frozenset({0, 1})
    assert pullback_clopen(TWO_TO_ONE, Clopen(0, set()), 1).points == frozenset()
    assert same_clopen(TWO_TO_ONE, full, Clopen(1, {0, 1}))
    assert not same_clopen(TWO_TO_ONE, full, Clopen(1, {0}))
    with pytest.raises(AlgebraError):
        pullback_clopen(TWO_TO_ONE, Clopen(1, {0}), 0)


def test_fibre_partition():
    ident = LevelChain((3, 3), ((0, 1, 2),))
    assert fibre_partition(ident, 1, 0) == [frozenset({0}), frozenset({1}), frozenset({2})]
    ch = LevelChain((2, 3), ((0, 0, 1),))
    assert fibre_partition(ch, 1, 0) == [frozenset({0, 1}), frozenset({2})]
    with pytest.raises(AlgebraError):
        fibre_partition(LevelChain.single(1), 1, 1)


def test_clopen_enumeration():
    assert len(enumerate_clopens(LevelChain.single(2), 0)) == 4
    assert len(enumerate_clopens(LevelChain.single(0), 0)) == 1
    with pytest.raises(AlgebraError):
        enumerate_clopens(LevelChain.single(17), 0)


def test_clopen_lattice_ops():
    a, b = Clopen(0, {0, 1}), Clopen(0, {1, 2})
    assert (a & b).points == {1} and (a | b).points == {0, 1, 2}
    assert Clopen(0, {1}) <= a
    with pytest.raises(AlgebraError):
        a & Clopen(1, {0})


@pytest.mark.parametrize("n", range(0, 6))
def test_partitions_are_bell(n):
    parts = list(set_partitions(range(n)))
    assert len(parts) == bell(n)
    for p in parts:
        assert sorted(x for blk in p for x in blk) == list(range(n))


@pytest.mark.parametrize("n", range(0, 4))
def test_cover_count(n):
    # every family of distinct subsets, including the empty one
    covers = list(all_covers(range(n)))
    assert len(covers) == 2 ** (2 ** n)
    assert sum(1 for c in covers if len(c.members) == 1) == 2 ** n


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 8))
def test_subsets_count(n):
    subs = list(subsets(range(n)))
    assert len(subs) == 2 ** n
    assert sum(1 for s in subs if len(s) == 2) == comb(n, 2)
