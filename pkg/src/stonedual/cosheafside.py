"""Cosheaves of profinite modules and `sheaves' of profinite modules.

Everything here is the mirror image of :mod:`stonedual.sheafside`: tables
carry corestrictions ``cor[(U, V)]: M(U) -> M(V)``, fibre systems carry maps
from the fibre at ``x`` down to the fibre at ``f(x)``, and products become
direct sums.  At finite scale a finite direct sum is the profinite direct
sum; its universal property is checked explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .finab import AbHom, AlgebraError, Exactness, all_homs, check_exact, compose, count_homs, direct_sum, subgroup
from .ringmod import (
    LEFT,
    FiniteRing,
    FinModule,
    ModHom,
    ModuleSum,
    block_mod_hom,
    compose_mod,
    module_direct_sum,
)
from .sheafside import TABLE_POINT_CAP, _canonical_path_maps, _check_cover, _check_table_shape, _key, _label
from .stone import Clopen, LevelChain, pullback_clopen, set_partitions, subsets
from .verdict import Verdict

EXHAUSTIVE_HOM_LIMIT = 1 << 16


@dataclass(frozen=True, eq=False)
class CosheafTable:
    """``values[U]`` for every subset of one level and ``cor[(U, V)]: values[U] -> values[V]``."""

    chain: LevelChain
    level: int
    values: Mapping[frozenset, FinModule]
    cor: Mapping[tuple[frozenset, frozenset], ModHom]

    def __post_init__(self):
        values = {_key(U): M for U, M in self.values.items()}
        cor = {(_key(U), _key(V)): f for (U, V), f in self.cor.items()}
        for U, M in values.items():
            cor.setdefault((U, U), ModHom.identity(M))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "cor", cor)
        all_sets = _check_table_shape(self.chain, self.level, values, cor, "cosheaf")
        for (U, V), f in cor.items():
            if f.source.group != values[U].group or f.target.group != values[V].group:
                raise AlgebraError(f"cor {_label(U)} <= {_label(V)} has the wrong ends")
        for U in all_sets:
            if cor[(U, U)] != ModHom.identity(values[U]):
                raise AlgebraError(f"cor on {_label(U)} <= {_label(U)} is not the identity")
        for W in all_sets:
            for V in subsets(W):
                for U in subsets(V):
                    if compose_mod(cor[(V, W)], cor[(U, V)]) != cor[(U, W)]:
                        raise AlgebraError(
                            f"corestrictions are not functorial on {_label(U)} <= {_label(V)} <= {_label(W)}"
                        )

    @classmethod
    def from_hasse(cls, chain: LevelChain, level: int, values, hasse) -> "CosheafTable":
        values = {_key(U): M for U, M in values.items()}
        hasse = {(_key(U), _key(V)): f for (U, V), f in hasse.items()}
        n = chain.sizes[level]
        if n > TABLE_POINT_CAP:
            raise AlgebraError(f"cosheaf tables are limited to {TABLE_POINT_CAP} points")
        return cls(chain, level, values, _canonical_path_maps(n, values, hasse, "cosheaf", covariant=True))

    @property
    def points(self) -> range:
        return self.chain.points(self.level)

    @property
    def ring(self) -> FiniteRing:
        return self.values[frozenset()].ring

    @property
    def side(self) -> str:
        return self.values[frozenset()].side

    def __call__(self, U) -> FinModule:
        return self.values[_key(U)]

    def corestriction(self, U, V) -> ModHom:
        return self.cor[(_key(U), _key(V))]


class CosheafSequence(NamedTuple):
    union: frozenset[int]
    members: list[frozenset[int]]
    difference: AbHom
    onto: AbHom


def cosheaf_sequence(C: CosheafTable, cover) -> CosheafSequence:
    """``sum_{i<j} M(U_i & U_j) -> sum M(U_i) -> M(union)``."""
    members = _check_cover(C, cover)
    union = frozenset().union(*members)
    sum_i = direct_sum([C(U).group for U in members])
    pairs = [(i, j) for i in range(len(members)) for j in range(i + 1, len(members))]
    sum_ij = direct_sum([C(members[i] & members[j]).group for i, j in pairs])
    top = C(union).group
    onto = np.zeros((top.rank, sum_i.group.rank), dtype=np.int64)
    for proj, U in zip(sum_i.projections, members):
        onto = onto + C.corestriction(U, union).hom.matrix @ proj.matrix
    diff = np.zeros((sum_i.group.rank, sum_ij.group.rank), dtype=np.int64)
    for proj, (i, j) in zip(sum_ij.projections, pairs):
        I = members[i] & members[j]
        p = sum_i.injections[i].matrix @ C.corestriction(I, members[i]).hom.matrix
        q = sum_i.injections[j].matrix @ C.corestriction(I, members[j]).hom.matrix
        diff = diff + (p - q) @ proj.matrix
    return CosheafSequence(
        union,
        members,
        AbHom(sum_ij.group, sum_i.group, diff),
        AbHom(sum_i.group, top, onto),
    )


def cosheaf_condition_check(C: CosheafTable, cover) -> Exactness:
    """Exactness of ``sum M(U_i & U_j) -> sum M(U_i) -> M(union) -> 0``."""
    seq = cosheaf_sequence(C, cover)
    last = check_exact([seq.difference, seq.onto], 2)
    if not last:
        return last
    return check_exact([seq.difference, seq.onto], 1)


def codisjoint_union_check(C: CosheafTable) -> Verdict:
    """Every partition ``V = V_1 + ... + V_k`` gives a bijection ``sum M(V_i) -> M(V)``."""
    for V in subsets(C.points):
        for part in set_partitions(V):
            if not cosheaf_sequence(C, part).onto.is_iso():
                return Verdict.failed(
                    f"sum over a partition -> M({_label(V)}) is not bijective",
                    witness=[sorted(b) for b in part],
                    union=sorted(V),
                )
    return Verdict.passed()


def is_cosheaf(C: CosheafTable) -> bool:
    return codisjoint_union_check(C).ok


# --------------------------------------------------------------------------
# `Sheaves' of profinite modules


@dataclass(frozen=True, eq=False)
class ProSheafSystem:
    """Fibres ``fibres[l][x]`` and ``maps[l][x]: fibres[l + 1][x] -> fibres[l][f(x)]``."""

    chain: LevelChain
    fibres: tuple[tuple[FinModule, ...], ...]
    maps: tuple[tuple[ModHom, ...], ...]
    ring: FiniteRing
    side: str = LEFT

    def __post_init__(self):
        ch = self.chain
        fibres = tuple(tuple(level) for level in self.fibres)
        maps = tuple(tuple(level) for level in self.maps)
        object.__setattr__(self, "fibres", fibres)
        object.__setattr__(self, "maps", maps)
        if len(fibres) != ch.depth or len(maps) != ch.depth - 1:
            raise AlgebraError("need fibres for every level and maps between consecutive levels")
        for l, level in enumerate(fibres):
            if len(level) != ch.sizes[l]:
                raise AlgebraError(f"level {l} needs {ch.sizes[l]} fibres, got {len(level)}")
            for M in level:
                if M.ring != self.ring or M.side != self.side:
                    raise AlgebraError(f"fibre at level {l} is over a different ring or side")
        for l, level in enumerate(maps):
            if len(level) != ch.sizes[l + 1]:
                raise AlgebraError(f"maps out of level {l + 1} need one map per point")
            for x, psi in enumerate(level):
                y = ch.projections[l][x]
                if psi.source.group != fibres[l + 1][x].group or psi.target.group != fibres[l][y].group:
                    raise AlgebraError(f"map out of level {l + 1} at point {x} has the wrong ends")

    @property
    def top(self) -> int:
        return self.chain.top

    def fibre_map(self, j: int, i: int, x: int) -> ModHom:
        """Composite ``fibres[j][x] -> fibres[i][image of x]`` for ``i <= j``."""
        if i > j:
            raise AlgebraError("fibre maps run from fine to coarse levels")
        if i == j:
            return ModHom.identity(self.fibres[j][x])
        y = self.chain.projections[j - 1][x]
        return compose_mod(self.fibre_map(j - 1, i, y), self.maps[j - 1][x])


def _sum(fibres: Sequence[FinModule], ring, side) -> ModuleSum:
    return module_direct_sum(list(fibres), ring=ring, side=side)


def coshf_of_prosheaf(S: ProSheafSystem, level: int) -> CosheafTable:
    """``M(U) = sum_{x in U} M_x`` with coordinate inclusions as corestrictions."""
    n = S.chain.sizes[level]
    if n > TABLE_POINT_CAP:
        raise AlgebraError(f"cosheaf tables are limited to {TABLE_POINT_CAP} points")
    sums = {U: _sum([S.fibres[level][x] for x in sorted(U)], S.ring, S.side) for U in subsets(range(n))}
    values = {U: s.module for U, s in sums.items()}
    cor = {}
    for V, sV in sums.items():
        pos_V = {x: k for k, x in enumerate(sorted(V))}
        for U in subsets(V):
            blocks = [[None] * len(U) for _ in V]
            for k, x in enumerate(sorted(U)):
                blocks[pos_V[x]][k] = ModHom.identity(S.fibres[level][x])
            cor[(U, V)] = block_mod_hom(sums[U], sV, blocks)
    return CosheafTable(S.chain, level, values, cor)


def coetale_of_cosheaf(C: CosheafTable) -> ProSheafSystem:
    """Stalks ``M({x})`` at the table level, pulled back neighbourhoods below it, constant above it."""
    verdict = codisjoint_union_check(C)
    if not verdict:
        raise AlgebraError(f"not a cosheaf: {verdict.reason} (partition {verdict.witness})")
    ch, top = C.chain, C.level

    def nbhd(l, y):
        return pullback_clopen(ch, Clopen(l, {y}), top).points

    fibres = []
    for l in range(ch.depth):
        if l <= top:
            fibres.append(tuple(C(nbhd(l, y)) for y in ch.points(l)))
        else:
            fibres.append(tuple(C(frozenset({ch.project(x, l, top)})) for x in ch.points(l)))
    maps = []
    for l in range(ch.depth - 1):
        row = []
        for x in ch.points(l + 1):
            y = ch.projections[l][x]
            if l + 1 <= top:
                row.append(C.corestriction(nbhd(l + 1, x), nbhd(l, y)))
            else:
                row.append(ModHom.identity(fibres[l][y]))
        maps.append(tuple(row))
    return ProSheafSystem(ch, tuple(fibres), tuple(maps), C.ring, C.side)


def cosheaf_map_of_level(S: ProSheafSystem, level: int) -> dict[frozenset, ModHom]:
    """The map of cosheaves ``M_{l+1}(f^-1 U) -> M_l(U)`` summing the fibre maps."""
    lo = coshf_of_prosheaf(S, level)
    hi = coshf_of_prosheaf(S, level + 1)
    f = S.chain.projections[level]
    out = {}
    for U in subsets(range(S.chain.sizes[level])):
        pre = frozenset(x for x in range(S.chain.sizes[level + 1]) if f[x] in U)
        src = _sum([S.fibres[level + 1][x] for x in sorted(pre)], S.ring, S.side)
        dst = _sum([S.fibres[level][y] for y in sorted(U)], S.ring, S.side)
        pos = {y: k for k, y in enumerate(sorted(U))}
        blocks = [[None] * len(pre) for _ in U]
        for k, x in enumerate(sorted(pre)):
            blocks[pos[f[x]]][k] = S.maps[level][x]
        h = block_mod_hom(src, dst, blocks)
        out[U] = ModHom(hi(pre), lo(U), h.hom, check=False)
    return out


# --------------------------------------------------------------------------
# Profinite direct sums


@dataclass(frozen=True, eq=False)
class ProChainModule:
    """Modules ``modules[l]`` with maps ``maps[l]: modules[l + 1] -> modules[l]``.

    The limit of a finite chain is its finest term, so ``value`` is the last module.
    """

    modules: tuple[FinModule, ...]
    maps: tuple[ModHom, ...]
    sums: tuple[ModuleSum, ...] = ()

    @property
    def value(self) -> FinModule:
        return self.modules[-1]


class CanonicalMorphism(NamedTuple):
    """``omega[x]: M_x -> sum`` for every point of the top level."""

    target: FinModule
    components: tuple[ModHom, ...]

    def __call__(self, x: int, m):
        return self.components[x](m)


def sum_chain_map(S: ProSheafSystem, level: int, src: ModuleSum | None = None, dst: ModuleSum | None = None) -> ModHom:
    src = src or _sum(S.fibres[level + 1], S.ring, S.side)
    dst = dst or _sum(S.fibres[level], S.ring, S.side)
    f = S.chain.projections[level]
    blocks = [[None] * S.chain.sizes[level + 1] for _ in range(S.chain.sizes[level])]
    for x in range(S.chain.sizes[level + 1]):
        blocks[f[x]][x] = S.maps[level][x]
    return block_mod_hom(src, dst, blocks)


def profinite_direct_sum(S: ProSheafSystem) -> tuple[ProChainModule, CanonicalMorphism]:
    sums = tuple(_sum(S.fibres[l], S.ring, S.side) for l in range(S.chain.depth))
    maps = tuple(sum_chain_map(S, l, sums[l + 1], sums[l]) for l in range(S.chain.depth - 1))
    chain = ProChainModule(tuple(s.module for s in sums), maps, sums)
    omega = CanonicalMorphism(sums[-1].module, sums[-1].injections)
    return chain, omega


class Factorization(NamedTuple):
    verdict: Verdict
    beta_tilde: ModHom | None
    candidates_checked: int
    solutions: int


def universal_property_check(S: ProSheafSystem, P: FinModule, beta: Sequence[ModHom], exhaustive_limit: int = EXHAUSTIVE_HOM_LIMIT) -> Factorization:
    """Factor the fibrewise maps ``beta[x]: M_x -> P`` through the direct sum.

    The candidate ``sum_x beta_x o proj_x`` is checked against ``beta``;
    uniqueness holds because the images of ``omega`` generate the sum, and is
    confirmed by running over every homomorphism from the sum to ``P`` when
    there are at most ``exhaustive_limit`` of them.
    """
    fibres = S.fibres[S.top]
    if len(beta) != len(fibres):
        raise AlgebraError(f"need one map per top-level point ({len(fibres)}), got {len(beta)}")
    for x, (b, M) in enumerate(zip(beta, fibres)):
        if b.source.group != M.group or b.target.group != P.group:
            raise AlgebraError(f"beta at point {x} does not run from the fibre to P")
        ModHom(M, P, b.hom)  # raises unless R-linear
    chain, omega = profinite_direct_sum(S)
    total = chain.sums[-1]
    cols = np.zeros((P.group.rank, total.module.group.rank), dtype=np.int64)
    for b, proj in zip(beta, total.projections):
        cols = cols + b.hom.matrix @ proj.hom.matrix
    bt = ModHom(total.module, P, AbHom(total.module.group, P.group, cols))
    for x, (b, w) in enumerate(zip(beta, omega.components)):
        if compose_mod(bt, w) != ModHom(w.source, P, b.hom, check=False):
            return Factorization(Verdict.failed("candidate does not restrict to beta", witness=x), None, 0, 0)
    gens = [w(e) for w in omega.components for e in w.source.group.basis()]
    span, _ = subgroup(total.module.group, gens)
    if span.order != total.module.order:
        return Factorization(Verdict.failed("the images of omega do not generate the sum"), bt, 0, 0)
    checked = solutions = 0
    if count_homs(total.module.group, P.group) <= exhaustive_limit:
        for h in all_homs(total.module.group, P.group):
            checked += 1
            if all(compose(h, w.hom) == b.hom for w, b in zip(omega.components, beta)):
                if any(compose(h, a) != compose(c, h) for a, c in zip(total.module.action, P.action)):
                    continue
                solutions += 1
                if h != bt.hom:
                    return Factorization(Verdict.failed("a second factorization exists", witness=h.matrix.tolist()), bt, checked, solutions)
        if solutions != 1:
            return Factorization(Verdict.failed(f"{solutions} factorizations found"), bt, checked, solutions)
    return Factorization(Verdict.passed(), bt, checked, solutions)


# --------------------------------------------------------------------------
# Round trips


def cosheaf_comparison(C: CosheafTable) -> tuple[CosheafTable, dict[frozenset, ModHom]]:
    """``J_U: sum_{x in U} M({x}) -> M(U)``, the sum of corestrictions."""
    S = coetale_of_cosheaf(C)
    D = coshf_of_prosheaf(S, C.level)
    J = {}
    for U in subsets(C.points):
        source = _sum([C(frozenset({x})) for x in sorted(U)], C.ring, C.side)
        M = np.zeros((C(U).group.rank, source.module.group.rank), dtype=np.int64)
        for proj, x in zip(source.projections, sorted(U)):
            M = M + C.corestriction(frozenset({x}), U).hom.matrix @ proj.hom.matrix
        J[U] = ModHom(D(U), C(U), AbHom(D(U).group, C(U).group, M))
    return D, J


def roundtrip_check_co(obj) -> Verdict:
    if isinstance(obj, CosheafTable):
        if not is_cosheaf(obj):
            raise AlgebraError("roundtrip needs a cosheaf; the table fails the disjoint-union condition")
        D, J = cosheaf_comparison(obj)
        for U, j in J.items():
            if not j.is_iso():
                return Verdict.failed(f"J on {_label(U)} is not an isomorphism", witness=sorted(U))
        for (U, V), c in obj.cor.items():
            if compose_mod(c, J[U]) != compose_mod(J[V], D.corestriction(U, V)):
                return Verdict.failed(f"square for {_label(U)} <= {_label(V)} does not commute", witness=(sorted(U), sorted(V)))
        return Verdict.passed()
    if isinstance(obj, ProSheafSystem):
        return _roundtrip_prosheaf(obj)
    raise AlgebraError(f"roundtrip_check_co expects a CosheafTable or ProSheafSystem, got {type(obj).__name__}")


def _stalk_isos(S: ProSheafSystem, level: int):
    C = coshf_of_prosheaf(S, level)
    back = coetale_of_cosheaf(C)
    isos = []
    for x in S.chain.points(level):
        stalk = back.fibres[level][x]
        proj = _sum([S.fibres[level][x]], S.ring, S.side).projections[0]
        isos.append(ModHom(stalk, S.fibres[level][x], proj.hom))
    return C, isos


def _roundtrip_prosheaf(S: ProSheafSystem) -> Verdict:
    levels = [l for l in range(S.chain.depth) if S.chain.sizes[l] <= TABLE_POINT_CAP]
    data = {}
    for l in levels:
        C, isos = _stalk_isos(S, l)
        for x, iso in enumerate(isos):
            if not iso.is_iso():
                return Verdict.failed(f"stalk at level {l}, point {x} is not isomorphic to the fibre", witness=(l, x))
        data[l] = (C, isos)
    for l in levels:
        if l + 1 not in data:
            continue
        C_lo, iso_lo = data[l]
        C_hi, iso_hi = data[l + 1]
        F = cosheaf_map_of_level(S, l)
        f = S.chain.projections[l]
        for x in S.chain.points(l + 1):
            y = f[x]
            pre = frozenset(z for z in S.chain.points(l + 1) if f[z] == y)
            via_cosheaf = compose_mod(iso_lo[y], compose_mod(F[frozenset({y})], C_hi.corestriction(frozenset({x}), pre)))
            via_fibre = compose_mod(S.maps[l][x], iso_hi[x])
            if via_cosheaf != via_fibre:
                return Verdict.failed(f"map out of level {l + 1} at point {x} is not natural", witness=(l + 1, x))
    return Verdict.passed(levels=levels)
