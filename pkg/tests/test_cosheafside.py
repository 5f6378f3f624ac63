import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stonedual.finab import AbHom, AlgebraError, FinAbGroup, all_homs, compose
from stonedual.ringmod import ModHom, cyclic_ring, module_from_group
from stonedual.cosheafside import (
    CosheafTable,
    ProSheafSystem,
    coetale_of_cosheaf,
    codisjoint_union_check,
    coshf_of_prosheaf,
    cosheaf_condition_check,
    is_cosheaf,
    profinite_direct_sum,
    roundtrip_check_co,
    universal_property_check,
)
from stonedual.dualbridge import dual_table
from stonedual.samples import random_presheaf, random_prosheaf, random_universal_triple
from stonedual.stone import LevelChain, all_covers, set_partitions, subsets

R2, R4, R6 = cyclic_ring(2), cyclic_ring(4), cyclic_ring(6)


def mod(R, *factors):
    return module_from_group(FinAbGroup(factors), R)


def counterexample():
    """Z/4 on the whole space, Z/2 on each point, each point corestricting by doubling."""
    Z, A, B = mod(R4), mod(R4, 2), mod(R4, 4)
    X = LevelChain.single(2)
    values = {frozenset(): Z, frozenset({0}): A, frozenset({1}): A, frozenset({0, 1}): B}
    hasse = {}
    for U in subsets(range(2)):
        for x in set(range(2)) - U:
            V = U | {x}
            if U:
                hasse[(U, V)] = ModHom(A, B, AbHom(A.group, B.group, np.array([[2]])))
            else:
                hasse[(U, V)] = ModHom.zero(values[U], values[V])
    return CosheafTable.from_hasse(X, 0, values, hasse)


def sum_system(factors, R=R6):
    return ProSheafSystem(LevelChain.single(len(factors)), (tuple(mod(R, *f) for f in factors),), (), R)


# oracles: element-level enumeration, independent of the exactness machinery


def closure(G, gens):
    span = {G.zero()}
    frontier = [G.zero()]
    while frontier:
        a = frontier.pop()
        for g in gens:
            b = G.add(a, g)
            if b not in span:
                span.add(b)
                frontier.append(b)
    return span


def oracle_cosheaf_condition(C, members):
    union = frozenset().union(*members)
    top = C(union)
    families = list(itertools.product(*[list(C(U).elements()) for U in members]))

    def total(family):
        out = top.group.zero()
        for U, s in zip(members, family):
            out = top.group.add(out, C.corestriction(U, union)(s))
        return out

    onto = {total(f) for f in families} == set(top.elements())
    kernel = {f for f in families if total(f) == top.group.zero()}
    # differences of corestrictions out of pairwise intersections
    zero = tuple(C(U).group.zero() for U in members)

    class Prod:
        @staticmethod
        def zero():
            return zero

        @staticmethod
        def add(a, b):
            return tuple(C(U).group.add(x, y) for U, x, y in zip(members, a, b))

    gens = []
    for i, j in itertools.combinations(range(len(members)), 2):
        I = members[i] & members[j]
        for a in C(I).elements():
            g = list(zero)
            g[i] = C.corestriction(I, members[i])(a)
            g[j] = C(members[j]).group.neg(C.corestriction(I, members[j])(a))
            gens.append(tuple(g))
    return onto and closure(Prod, gens) == kernel


def oracle_codisjoint_union(C):
    for V in subsets(C.points):
        for part in set_partitions(V):
            sums = set()
            count = 0
            for family in itertools.product(*[list(C(B).elements()) for B in part]):
                out = C(V).group.zero()
                for B, s in zip(part, family):
                    out = C(V).group.add(out, C.corestriction(B, V)(s))
                sums.add(out)
                count += 1
            if len(sums) != C(V).order or count != C(V).order:
                return False
    return True


# cosheaf tables


def test_direct_sum_cosheaf_every_cover():
    C = coshf_of_prosheaf(sum_system([(2,), (3,), (6,)]), 0)
    assert C(frozenset({0, 1, 2})).order == 36
    for cover in all_covers(C.points, max_members=3):
        assert cosheaf_condition_check(C, cover.members)
    assert codisjoint_union_check(C)


def test_counterexample_fails_both():
    C = counterexample()
    ex = cosheaf_condition_check(C, [{0}, {1}])
    assert not ex
    assert not codisjoint_union_check(C)
    assert not is_cosheaf(C)
    assert not oracle_cosheaf_condition(C, [frozenset({0}), frozenset({1})])
    assert not oracle_codisjoint_union(C)


def test_empty_cover():
    C = coshf_of_prosheaf(sum_system([(2,)]), 0)
    assert cosheaf_condition_check(C, [])
    assert cosheaf_condition_check(counterexample(), [])


def test_table_validation():
    Z, A = mod(R2), mod(R2, 2)
    X = LevelChain.single(1)
    with pytest.raises(AlgebraError):
        CosheafTable(X, 0, {frozenset(): Z}, {})
    with pytest.raises(AlgebraError):
        CosheafTable.from_hasse(X, 0, {frozenset(): Z, frozenset({0}): A}, {})


def test_conditions_match_oracles_on_dual_tables():
    rng = random.Random(22)
    seen = {True: 0, False: 0}
    for _ in range(30):
        C = dual_table(random_presheaf(rng))
        du = bool(codisjoint_union_check(C))
        assert du == oracle_codisjoint_union(C)
        for cover in all_covers(C.points, max_members=3):
            members = list(cover.members)
            assert bool(cosheaf_condition_check(C, members)) == oracle_cosheaf_condition(C, members)
        seen[du] += 1
    assert seen[True] and seen[False]


# coetale systems and direct sums


def test_coetale_fibres():
    S = sum_system([(2,), (3,)])
    back = coetale_of_cosheaf(coshf_of_prosheaf(S, 0))
    assert [M.group.factors for M in back.fibres[0]] == [(2,), (3,)]
    with pytest.raises(AlgebraError):
        coetale_of_cosheaf(counterexample())


def test_sum_of_z2_z3_is_z6():
    chain, omega = profinite_direct_sum(sum_system([(2,), (3,)]))
    assert chain.value.group == FinAbGroup((6,))
    assert len(omega.components) == 2
    assert omega(0, (1,)) != chain.value.group.zero()


def test_sum_chain_maps():
    A = mod(R2, 2)
    ch = LevelChain((1, 2), ((0, 0),))
    S = ProSheafSystem(ch, ((A,), (A, A)), ((ModHom.identity(A), ModHom.identity(A)),), R2)
    chain, _ = profinite_direct_sum(S)
    assert [M.order for M in chain.modules] == [2, 4]
    # the fold map
    assert chain.maps[0].hom.matrix.tolist() == [[1, 1]]


# universal property


def oracle_factorizations(S, P, beta):
    chain, omega = profinite_direct_sum(S)
    total = chain.value
    out = []
    for h in all_homs(total.group, P.group):
        if any(compose(h, a) != compose(c, h) for a, c in zip(total.action, P.action)):
            continue
        if all(compose(h, w.hom) == b.hom for w, b in zip(omega.components, beta)):
            out.append(h)
    return out


def test_zero_beta_gives_zero():
    S = sum_system([(2,), (3,)])
    P = mod(R6, 6)
    beta = [ModHom.zero(M, P) for M in S.fibres[0]]
    fac = universal_property_check(S, P, beta)
    assert fac.verdict and fac.solutions == 1
    assert fac.beta_tilde.hom == AbHom.zero(fac.beta_tilde.source.group, P.group)


def test_fold_map():
    A = mod(R2, 2)
    S = sum_system([(2,), (2,)], R2)
    fac = universal_property_check(S, A, [ModHom.identity(A), ModHom.identity(A)])
    assert fac.verdict
    assert fac.beta_tilde.hom.matrix.tolist() == [[1, 1]]
    # Hom(Z/2 x Z/2, Z/2) has 4 elements, one of which restricts to beta
    assert (fac.candidates_checked, fac.solutions) == (4, 1)


def test_universal_property_rejects_bad_input():
    S = sum_system([(2,), (3,)])
    with pytest.raises(AlgebraError):
        universal_property_check(S, mod(R6, 6), [])


def test_universal_property_matches_brute_force():
    rng = random.Random(31)
    for _ in range(25):
        S, P, beta = random_universal_triple(rng, max_p=8, hom_limit=512)
        fac = universal_property_check(S, P, beta)
        sols = oracle_factorizations(S, P, beta)
        assert fac.verdict
        assert sols == [fac.beta_tilde.hom]


# round trips


def test_roundtrip_direct_sum_cosheaf():
    C = coshf_of_prosheaf(sum_system([(2,), (3,), (6,)]), 0)
    assert roundtrip_check_co(C)
    with pytest.raises(AlgebraError):
        roundtrip_check_co(counterexample())


def test_roundtrip_random_systems():
    rng = random.Random(9)
    for _ in range(15):
        S = random_prosheaf(rng)
        assert roundtrip_check_co(S)
        C = coshf_of_prosheaf(S, S.top)
        assert is_cosheaf(C)
        assert roundtrip_check_co(C)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 100_000))
def test_sum_copresheaf_is_cosheaf(seed):
    rng = random.Random(seed)
    S = random_prosheaf(rng, levels=1)
    C = coshf_of_prosheaf(S, 0)
    assert codisjoint_union_check(C)
    for cover in all_covers(C.points, max_members=2):
        assert cosheaf_condition_check(C, cover.members)
