"""Seeded instance families used by the test suites and the corpus builder.

Every generator takes a ``random.Random`` so runs are reproducible.
"""

from __future__ import annotations

import itertools
import random

import numpy as np

from .cosheafside import CosheafTable, ProSheafSystem
from .finab import AbHom, FinAbGroup, all_homs, compose, count_homs
from .ringmod import (
    FinGroup,
    FiniteRing,
    FinModule,
    ModHom,
    cyclic_ring,
    group_ring,
    module_from_group,
    permutation_module,
    quotient_module,
    submodule,
    coset_gset,
)
from .sheafside import EtaleSystem, PresheafTable, sheaf_of_etale
from .stone import LevelChain, subsets


def standard_groups() -> dict[str, FinGroup]:
    C2 = FinGroup.cyclic(2)
    return {
        "C2": C2,
        "C3": FinGroup.cyclic(3),
        "C4": FinGroup.cyclic(4),
        "C2xC2": FinGroup.direct_product(C2, C2),
        "S3": FinGroup.symmetric(3),
    }


def sign_module(m: int, G: FinGroup, K) -> FinModule:
    """``Z/m`` with ``g`` acting by ``+1`` on the index-2 subgroup ``K`` and ``-1`` off it."""
    A = FinAbGroup.cyclic(m)
    acts = [AbHom.scalar(A, 1 if g in K else -1) for g in G.elements()]
    return FinModule(A, group_ring(m, G), tuple(acts), name=f"Z/{m}(sign)")


def coefficient_modules(G: FinGroup) -> list[tuple[str, FinModule]]:
    """Coefficient modules of order at most 8 for a small group.

    Trivial ``Z/2, Z/3, Z/4, Z/8``; sign-twisted ``Z/3, Z/4`` for each
    index-2 subgroup; permutation modules ``Z/2[G/K]`` of order at most 8.
    """
    from .ringmod import trivial_module

    out = [(f"Z/{m}", trivial_module(m, G)) for m in (2, 3, 4, 8)]
    subs = G.all_subgroups()
    for K in subs:
        if 2 * len(K) == G.order:
            for m in (3, 4):
                out.append((f"Z/{m}(sign {sorted(K)})", sign_module(m, G, K)))
    for K in subs:
        index = G.order // len(K)
        if 2 <= index <= 3:
            Y, _ = coset_gset(G, K)
            out.append((f"Z/2[G/{sorted(K)}]", permutation_module(2, Y)))
    return out


# --------------------------------------------------------------------------
# Random modules and maps


def random_ring(rng: random.Random) -> FiniteRing:
    """Mostly ``Z/m``; sometimes ``Z/2[C2]`` so that fibres carry a genuine action."""
    if rng.random() < 0.25:
        return group_ring(2, FinGroup.cyclic(2))
    return cyclic_ring(rng.choice((2, 3, 4, 6, 8)))


def _groups_for_exponent(m: int, max_order: int) -> list[FinAbGroup]:
    from .finab import all_groups_of_order_at_most

    return [A for A in all_groups_of_order_at_most(max_order) if m % A.exponent == 0]


def random_module(rng: random.Random, R: FiniteRing, max_order: int = 8) -> FinModule:
    if R.group is None:
        A = rng.choice(_groups_for_exponent(R.modulus, max_order))
        return module_from_group(A, R)
    # Z/2[C2]: (Z/2)^k with an involution
    k = rng.randrange(0, 4)
    while 2**k > max_order:
        k -= 1
    A = FinAbGroup((2,) * k)
    while True:
        T = np.array([[rng.randrange(2) for _ in range(k)] for _ in range(k)], dtype=np.int64).reshape(k, k)
        if ((T @ T) % 2 == np.eye(k, dtype=np.int64)).all():
            break
    return FinModule(A, R, (AbHom.identity(A), AbHom(A, A, T)))


def random_mod_hom(rng: random.Random, M: FinModule, N: FinModule, zero_bias: float = 0.15) -> ModHom:
    """A uniformly chosen R-linear map (exhaustive over the hom set), sometimes zero."""
    if rng.random() < zero_bias:
        return ModHom.zero(M, N)
    linear = [
        h for h in all_homs(M.group, N.group)
        if all(compose(h, a) == compose(b, h) for a, b in zip(M.action, N.action))
    ]
    return ModHom(M, N, rng.choice(linear), check=False)


def random_chain(rng: random.Random, max_points: int = 3, levels: int = 2) -> LevelChain:
    sizes = [rng.randint(1, max_points)]
    projs = []
    for _ in range(levels - 1):
        n = rng.randint(sizes[-1], max_points)
        p = list(range(sizes[-1])) + [rng.randrange(sizes[-1]) for _ in range(n - sizes[-1])]
        rng.shuffle(p)
        sizes.append(n)
        projs.append(tuple(p))
    return LevelChain(tuple(sizes), tuple(projs))


def random_etale(rng: random.Random, R: FiniteRing | None = None, max_points: int = 3, levels: int = 2, max_order: int = 8) -> EtaleSystem:
    R = R or random_ring(rng)
    ch = random_chain(rng, max_points, levels)
    fibres = [tuple(random_module(rng, R, max_order) for _ in ch.points(l)) for l in range(ch.depth)]
    trans = []
    for l in range(ch.depth - 1):
        f = ch.projections[l]
        trans.append(tuple(random_mod_hom(rng, fibres[l][f[x]], fibres[l + 1][x]) for x in ch.points(l + 1)))
    return EtaleSystem(ch, tuple(fibres), tuple(trans), R)


def random_prosheaf(rng: random.Random, R: FiniteRing | None = None, max_points: int = 3, levels: int = 2, max_order: int = 8) -> ProSheafSystem:
    R = R or random_ring(rng)
    ch = random_chain(rng, max_points, levels)
    fibres = [tuple(random_module(rng, R, max_order) for _ in ch.points(l)) for l in range(ch.depth)]
    maps = []
    for l in range(ch.depth - 1):
        f = ch.projections[l]
        maps.append(tuple(random_mod_hom(rng, fibres[l + 1][x], fibres[l][f[x]]) for x in ch.points(l + 1)))
    return ProSheafSystem(ch, tuple(fibres), tuple(maps), R)


# --------------------------------------------------------------------------
# Random presheaf tables


def random_presheaf(rng: random.Random, max_points: int = 3, max_order: int = 8) -> PresheafTable:
    """A product sheaf, a sub-presheaf of one, or a quotient presheaf of one.

    Sub-presheaves are generated by restrictions of random sections, so they
    are separated but may fail to glue; quotients may fail to be separated.
    The value on every subset has order at most ``max_order``.
    """
    R = random_ring(rng)
    n = rng.randint(1, max_points)
    ch = LevelChain.single(n)
    # keep the product over all points within the order bound
    while True:
        fibres = tuple(random_module(rng, R, max_order) for _ in range(n))
        if np.prod([M.order for M in fibres]) <= max_order:
            break
    P = sheaf_of_etale(EtaleSystem(ch, (fibres,), (), R), 0)
    kind = rng.choice(("product", "sub", "quotient"))
    if kind == "product":
        return P
    gens = {U: [P(U).group.random_element(rng) for _ in range(rng.randint(0, 2))] for U in subsets(range(n))}
    sub = {}
    for U in subsets(range(n)):
        elems = [P.restriction(U, W)(g) for W in subsets(range(n)) if U <= W for g in gens[W]]
        sub[U] = submodule(P(U), elems)
    if kind == "sub":
        values = {U: S for U, (S, _) in sub.items()}
        res = {}
        from .finab import lift_through

        for (U, V), r in P.res.items():
            h = lift_through(sub[U][1].hom, compose(r.hom, sub[V][1].hom))
            res[(U, V)] = ModHom(values[V], values[U], h, check=False)
        return PresheafTable(ch, 0, values, res)
    quo = {U: quotient_module(P(U), inc.hom.matrix) for U, (_, inc) in sub.items()}
    values = {U: q[0] for U, q in quo.items()}
    res = {}
    for (U, V), r in P.res.items():
        QV, pV, liftV = quo[V]
        QU, pU, _ = quo[U]
        M = pU.hom.matrix @ (r.hom.matrix @ liftV)
        res[(U, V)] = ModHom(QV, QU, AbHom(QV.group, QU.group, M), check=False)
    return PresheafTable(ch, 0, values, res)


# --------------------------------------------------------------------------
# Universal-property triples


def random_universal_triple(rng: random.Random, max_p: int = 16, hom_limit: int = 4096):
    """``(S, P, beta)`` with ``|P| <= max_p`` and a hom set small enough to search."""
    from .cosheafside import profinite_direct_sum

    while True:
        R = random_ring(rng)
        S = random_prosheaf(rng, R, max_points=3, levels=rng.choice((1, 2)), max_order=4)
        P = random_module(rng, R, max_p)
        total = profinite_direct_sum(S)[0].value
        if count_homs(total.group, P.group) > hom_limit:
            continue
        beta = [random_mod_hom(rng, M, P) for M in S.fibres[S.top]]
        return S, P, beta
