import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stonedual.finab import AbHom, AlgebraError, FinAbGroup, all_homs, compose
from stonedual.ringmod import (
    FinGroup,
    FiniteRing,
    FinModule,
    HomR,
    HomZ,
    ModHom,
    TensorZ,
    coset_gset,
    cyclic_ring,
    dual_module,
    evaluation_mod_hom,
    find_module_isomorphism,
    functor_from_tag,
    group_element,
    group_ring,
    induced_module,
    kernel_module,
    module_direct_sum,
    module_from_group,
    orbit_decomposition,
    permutation_module,
    quotient_module,
    regular_gset,
    regular_module,
    restrict_module,
    submodule,
    swap_side,
    trivial_module,
    verify_module_axioms,
)
from stonedual.finab import pairing
from stonedual.samples import random_mod_hom, random_module, random_ring, sign_module, standard_groups

GROUPS = standard_groups()


# oracles


def brute_subgroups(G):
    out = []
    for k in range(1, G.order + 1):
        for S in itertools.combinations(G.elements(), k):
            S = set(S)
            if G.identity in S and all(G.mul(a, b) in S for a in S for b in S):
                out.append(frozenset(S))
    return out


def linear_homs(M, N):
    return [h for h in all_homs(M.group, N.group) if all(compose(h, a) == compose(b, h) for a, b in zip(M.action, N.action))]


# groups


def test_group_orders_and_commutativity():
    assert {n: G.order for n, G in GROUPS.items()} == {"C2": 2, "C3": 3, "C4": 4, "C2xC2": 4, "S3": 6}
    S3 = GROUPS["S3"]
    assert any(S3.mul(a, b) != S3.mul(b, a) for a in S3.elements() for b in S3.elements())


@pytest.mark.parametrize("name", sorted(GROUPS))
def test_subgroups_match_brute_force(name):
    G = GROUPS[name]
    assert sorted(map(sorted, G.all_subgroups())) == sorted(map(sorted, brute_subgroups(G)))


def test_subgroup_counts():
    # frozen from brute_subgroups
    assert {n: len(G.all_subgroups()) for n, G in GROUPS.items()} == {"C2": 2, "C3": 2, "C4": 3, "C2xC2": 5, "S3": 6}


def test_bad_tables_rejected():
    with pytest.raises(AlgebraError):
        FinGroup(((0, 1), (0, 1)))
    with pytest.raises(AlgebraError):
        FinGroup(())


# rings


def test_group_ring_associative_on_all_elements():
    R = group_ring(2, GROUPS["S3"])
    rng = random.Random(1)
    elems = [R.additive.random_element(rng) for _ in range(12)]
    for a, b, c in itertools.product(elems, repeat=3):
        assert R.mul(R.mul(a, b), c) == R.mul(a, R.mul(b, c))
    g, h = group_element(R, 1), group_element(R, 2)
    assert R.mul(g, h) == group_element(R, GROUPS["S3"].mul(1, 2))
    assert not R.is_commutative()


def test_ring_basics():
    R = cyclic_ring(6)
    assert R.order == 6 and R.characteristic == 6
    assert group_ring(3, GROUPS["C2"]).characteristic == 3
    with pytest.raises(AlgebraError):
        cyclic_ring(1)
    with pytest.raises(AlgebraError, match="unit"):
        FiniteRing(FinAbGroup((2,)), (((1,),),), (0,))


# modules


def test_module_axioms_enforced():
    R = group_ring(2, GROUPS["C2"])
    A = FinAbGroup((2, 2))
    swap = AbHom(A, A, np.array([[0, 1], [1, 0]]))
    FinModule(A, R, (AbHom.identity(A), swap))
    # order 3, so the generator of C2 cannot act by it
    bad = AbHom(A, A, np.array([[0, 1], [1, 1]]))
    with pytest.raises(AlgebraError):
        FinModule(A, R, (AbHom.identity(A), bad))
    with pytest.raises(AlgebraError):
        FinModule(A, R, (swap, swap))


def test_module_action_brute():
    rng = random.Random(2)
    for _ in range(30):
        R = random_ring(rng)
        M = random_module(rng, R)
        assert verify_module_axioms(M)
        elems = list(R.elements())[:8]
        for r, s in itertools.product(elems, repeat=2):
            for m in list(M.elements())[:8]:
                assert M.act_on(R.mul(r, s), m) == M.act_on(r, M.act_on(s, m))


def test_modhom_linearity_checked():
    R = group_ring(2, GROUPS["C2"])
    P = permutation_module(2, regular_gset(GROUPS["C2"]))
    T = trivial_module(2, GROUPS["C2"])
    with pytest.raises(AlgebraError):
        ModHom(T, P, AbHom.from_images(T.group, P.group, [(1, 0)]))
    ModHom(T, P, AbHom.from_images(T.group, P.group, [(1, 1)]))
    assert len(linear_homs(T, P)) == 2


def test_quotient_and_kernel_modules():
    R = cyclic_ring(4)
    M = module_from_group(FinAbGroup((2, 4)), R)
    S, inc = submodule(M, [(0, 2)])
    Q, q, _ = quotient_module(M, inc.hom.matrix)
    assert S.order * Q.order == M.order
    K, kinc = kernel_module(q)
    assert K.order == S.order


def test_direct_sum_injections_projections():
    R = cyclic_ring(6)
    mods = [module_from_group(FinAbGroup((n,)), R) for n in (2, 3, 6)]
    S = module_direct_sum(mods)
    assert S.module.order == 36
    for k, (i, p) in enumerate(zip(S.injections, S.projections)):
        assert compose(p.hom, i.hom) == AbHom.identity(mods[k].group)


# G-sets and permutation modules


def test_coset_and_induced_orders():
    for name, G in GROUPS.items():
        for H in G.all_subgroups():
            Y, cosets = coset_gset(G, H)
            assert Y.size == G.order // len(H)
            assert induced_module(2, G, H).order == 2 ** Y.size


def test_orbit_decomposition_is_iso():
    G = GROUPS["C2xC2"]
    K = G.all_subgroups()[1]
    Y, _ = coset_gset(G, K)
    D = orbit_decomposition(3, Y)
    assert D.witness.is_iso()
    assert len(D.orbits) == 1


def test_restriction_keeps_group():
    G = GROUPS["S3"]
    M = sign_module(3, G, frozenset({0, 3, 4}))
    H, emb = G.subgroup(frozenset({0, 1}))
    res = restrict_module(M, emb, H)
    assert res.group == M.group and res.ring == group_ring(3, H)


def test_swap_side_involution():
    G = GROUPS["S3"]
    M = permutation_module(2, regular_gset(G))
    back = swap_side(swap_side(M))
    assert back.side == M.side and all(a == b for a, b in zip(back.action, M.action))


# duality


def test_dual_module_convention_brute():
    rng = random.Random(4)
    for _ in range(20):
        R = random_ring(rng)
        M = random_module(rng, R)
        D = dual_module(M)
        assert D.order == M.order and D.side != M.side
        for r in list(R.elements())[:6]:
            for chi in D.elements():
                for m in M.elements():
                    assert pairing(M.group, D.act_on(r, chi), m) == pairing(M.group, chi, M.act_on(r, m))
        assert evaluation_mod_hom(M).is_iso()


def test_find_module_isomorphism():
    G = GROUPS["C2"]
    P = permutation_module(2, regular_gset(G))
    R = regular_module(group_ring(2, G))
    assert find_module_isomorphism(P, R) is not None
    T2 = module_from_group(FinAbGroup((2, 2)), group_ring(2, G))
    assert find_module_isomorphism(P, T2) is None


# functors


def test_homz_is_torsion_brute():
    R = cyclic_ring(8)
    for factors in [(2,), (4,), (8,), (2, 4), (2, 8)]:
        M = module_from_group(FinAbGroup(factors), R)
        for n in (2, 4):
            tors = [m for m in M.elements() if M.group.scale(n, m) == M.group.zero()]
            assert HomZ(n).obj(M).order == len(tors)
            nM = {M.group.scale(n, m) for m in M.elements()}
            assert TensorZ(n).obj(M).order == M.order // len(nM)


def test_functor_maps_compose():
    rng = random.Random(6)
    R = cyclic_ring(4)
    for _ in range(15):
        A, B, C = (random_module(rng, R) for _ in range(3))
        f, g = random_mod_hom(rng, A, B), random_mod_hom(rng, B, C)
        for F in (HomZ(2), TensorZ(2)):
            assert F.map(g @ f) == F.map(g) @ F.map(f)
            assert F.map(ModHom.identity(A)) == ModHom.identity(F.obj(A))


def test_homr_counts_linear_maps():
    G = GROUPS["C2"]
    T = trivial_module(2, G)
    P = permutation_module(2, regular_gset(G))
    for M in (T, P, trivial_module(2, G)):
        for source in (T, P):
            assert HomR(source).obj(M).order == len(linear_homs(source, M))


def test_functor_tags():
    assert functor_from_tag("hom_z:3").n == 3
    assert functor_from_tag("tensor_z:2").tag == "tensor_z:2"
    with pytest.raises(AlgebraError):
        functor_from_tag("ext:2")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_random_hom_is_linear(seed):
    rng = random.Random(seed)
    R = random_ring(rng)
    M, N = random_module(rng, R), random_module(rng, R)
    f = random_mod_hom(rng, M, N)
    for r in list(R.elements())[:4]:
        for m in list(M.elements())[:4]:
            assert f(M.act_on(r, m)) == N.act_on(r, f(m))
