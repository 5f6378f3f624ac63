import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stonedual.finab import AlgebraError, FinAbGroup
from stonedual.ringmod import ModHom, cyclic_ring, module_from_group
from stonedual.samples import random_etale, random_presheaf
from stonedual.sheafside import (
    EtaleSystem,
    PresheafTable,
    disjoint_union_check,
    etale_of_sheaf,
    global_sections,
    is_sheaf,
    lift_functor_sheaf,
    roundtrip_check,
    section_through_points,
    sheaf_condition_check,
    sheaf_of_etale,
)
from stonedual.stone import LevelChain, all_covers, set_partitions, subsets

R2, R6 = cyclic_ring(2), cyclic_ring(6)


def mod(R, *factors):
    return module_from_group(FinAbGroup(factors), R)


def counterexample():
    """Zero on the whole space, Z/2 on each point, every restriction zero."""
    Z, A = mod(R2), mod(R2, 2)
    X = LevelChain.single(2)
    values = {frozenset(): Z, frozenset({0}): A, frozenset({1}): A, frozenset({0, 1}): Z}
    hasse = {}
    for U in subsets(range(2)):
        for x in set(range(2)) - U:
            V = U | {x}
            hasse[(U, V)] = ModHom.zero(values[V], values[U])
    return PresheafTable.from_hasse(X, 0, values, hasse)


def product_sheaf(factors, R=R6):
    E = EtaleSystem(LevelChain.single(len(factors)), (tuple(mod(R, *f) for f in factors),), (), R)
    return E, sheaf_of_etale(E, 0)


# oracles: element-level enumeration, independent of the exactness machinery


def oracle_sheaf_condition(P, members):
    union = frozenset().union(*members)
    top = list(P(union).elements())
    glued = {tuple(P.restriction(U, union)(a) for U in members) for a in top}
    compatible = set()
    for family in itertools.product(*[list(P(U).elements()) for U in members]):
        if all(P.restriction(U & V, U)(s) == P.restriction(U & V, V)(t)
               for (U, s), (V, t) in itertools.combinations(zip(members, family), 2)):
            compatible.add(family)
    injective = len(glued) == len(top)
    return injective and glued == compatible


def oracle_disjoint_union(P):
    for V in subsets(P.points):
        for part in set_partitions(V):
            images = {tuple(P.restriction(B, V)(a) for B in part) for a in P(V).elements()}
            total = 1
            for B in part:
                total *= P(B).order
            if len(images) != P(V).order or len(images) != total:
                return False
    return True


# presheaf tables


def test_counterexample_fails_both():
    P = counterexample()
    ex = sheaf_condition_check(P, [{0}, {1}])
    assert not ex and ex.position == 1
    assert not disjoint_union_check(P)
    assert not is_sheaf(P)
    # the kernel of p - q is all of Z/2 x Z/2 (order 4) while the image of A(X) is 0
    assert not oracle_sheaf_condition(P, [frozenset({0}), frozenset({1})])


def test_product_sheaf_every_cover():
    _, P = product_sheaf([(2,), (3,), (6,)])
    for cover in all_covers(P.points, max_members=3):
        assert sheaf_condition_check(P, cover.members)
    assert disjoint_union_check(P)


def test_empty_cover_and_single_point():
    _, P = product_sheaf([(2,)])
    assert sheaf_condition_check(P, [])
    assert is_sheaf(P)
    assert sheaf_condition_check(counterexample(), [])


def test_table_validation():
    Z, A = mod(R2), mod(R2, 2)
    X = LevelChain.single(1)
    with pytest.raises(AlgebraError):
        PresheafTable(X, 0, {frozenset(): Z}, {})
    with pytest.raises(AlgebraError):
        PresheafTable.from_hasse(X, 0, {frozenset(): Z, frozenset({0}): A}, {})
    with pytest.raises(AlgebraError):
        PresheafTable.from_hasse(LevelChain.single(5), 0, {}, {})


def test_conditions_match_oracles_on_random_tables():
    rng = random.Random(21)
    seen = {True: 0, False: 0}
    for _ in range(40):
        P = random_presheaf(rng)
        du = bool(disjoint_union_check(P))
        assert du == oracle_disjoint_union(P)
        for cover in all_covers(P.points, max_members=3):
            members = list(cover.members)
            assert bool(sheaf_condition_check(P, members)) == oracle_sheaf_condition(P, members)
        seen[du] += 1
    assert seen[True] and seen[False]


# etale systems


def test_sections_of_z2_z3():
    E, P = product_sheaf([(2,), (3,)])
    assert P(frozenset({0, 1})).order == 6
    assert P(frozenset()).order == 1
    assert P(frozenset({1})).group == FinAbGroup((3,))
    assert global_sections(E).value.order == 6


def test_etale_of_product_sheaf():
    E, P = product_sheaf([(2,), (3,)])
    back = etale_of_sheaf(P)
    assert [M.group.factors for M in back.fibres[0]] == [(2,), (3,)]
    with pytest.raises(AlgebraError):
        etale_of_sheaf(counterexample())


def test_chain_pullback_has_identity_transitions():
    A = mod(R2, 2)
    ch = LevelChain((1, 2), ((0, 0),))
    E = EtaleSystem(ch, ((A,), (A, A)), ((ModHom.identity(A), ModHom.identity(A)),), R2)
    # a table on the coarse level pulls back with identity transitions
    back = etale_of_sheaf(sheaf_of_etale(E, 0))
    assert all(phi == ModHom.identity(phi.source) for phi in back.transitions[0])
    # a table on the fine level: stalk over the coarse point is A x A, transitions are the coordinates
    back = etale_of_sheaf(sheaf_of_etale(E, 1))
    assert back.fibres[0][0].order == 4
    assert [phi.hom.matrix.tolist() for phi in back.transitions[0]] == [[[1, 0]], [[0, 1]]]
    assert roundtrip_check(E)
    gs = global_sections(E)
    assert gs.maps[0].hom.matrix.tolist() == [[1], [1]]


def test_section_through_points():
    E, _ = product_sheaf([(2,), (3,), (6,)])
    assert section_through_points(E, 0, {}).values == ((0,), (0,), (0,))
    s = section_through_points(E, 0, {0: (1,), 1: (2,), 2: (5,)})
    assert s.values == ((1,), (2,), (5,))
    s = section_through_points(E, 0, {1: (1,)})
    assert s.values == ((0,), (1,), (0,))
    with pytest.raises(AlgebraError):
        section_through_points(E, 0, {0: (3,)})


def test_roundtrip_random_systems():
    rng = random.Random(8)
    for _ in range(15):
        E = random_etale(rng)
        assert roundtrip_check(E)
        P = sheaf_of_etale(E, E.top)
        assert is_sheaf(P)
        assert roundtrip_check(P)


def test_roundtrip_rejects_non_sheaf():
    with pytest.raises(AlgebraError):
        roundtrip_check(counterexample())


def test_functor_lift_examples():
    R4 = cyclic_ring(12)
    E = EtaleSystem(LevelChain.single(2), ((mod(R4, 4), mod(R4, 3)),), (), R4)
    for tag in ("hom_z:2", "tensor_z:2"):
        lift = lift_functor_sheaf(tag, E)
        assert lift.verdict
        assert [M.order for M in lift.system.fibres[0]] == [2, 1]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 100_000))
def test_product_presheaf_is_sheaf(seed):
    rng = random.Random(seed)
    E = random_etale(rng, levels=1)
    P = sheaf_of_etale(E, 0)
    assert disjoint_union_check(P)
    for cover in all_covers(P.points, max_members=2):
        assert sheaf_condition_check(P, cover.members)
