"""Sheaves of discrete modules on finite Stone spaces and their étale spaces.

A presheaf is recorded as a full table over the subsets of one level of a
chain; an étale system is a family of fibre modules over every level with
transition maps pushing a fibre at ``f(x)`` to the fibre at ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .finab import AbHom, AlgebraError, Elem, Exactness, FinAbGroup, check_exact, compose, direct_sum
from .ringmod import (
    LEFT,
    FiniteRing,
    FinModule,
    Functor,
    ModHom,
    ModuleSum,
    block_mod_hom,
    compose_mod,
    functor_from_tag,
    module_direct_sum,
)
from .stone import Clopen, LevelChain, pullback_clopen, set_partitions, subsets
from .verdict import Verdict, first_failure

TABLE_POINT_CAP = 4

Subset = frozenset


def _key(U) -> frozenset[int]:
    if isinstance(U, Clopen):
        return U.points
    return frozenset(U)


def _label(U) -> str:
    return "{" + ",".join(map(str, sorted(U))) + "}"


def _check_table_shape(chain: LevelChain, level: int, values: Mapping, maps: Mapping, kind: str):
    chain._check_level(level)
    n = chain.sizes[level]
    if n > TABLE_POINT_CAP:
        raise AlgebraError(f"{kind} tables are limited to {TABLE_POINT_CAP} points, level {level} has {n}")
    all_sets = list(subsets(range(n)))
    missing = [U for U in all_sets if U not in values]
    if missing:
        raise AlgebraError(f"{kind} table has no value on {_label(missing[0])}")
    mods = [values[U] for U in all_sets]
    ring, side = mods[0].ring, mods[0].side
    for M in mods:
        if M.ring != ring or M.side != side:
            raise AlgebraError(f"{kind} values are modules over different rings or sides")
    for U in all_sets:
        for V in all_sets:
            if U <= V and (U, V) not in maps:
                raise AlgebraError(f"{kind} table has no map for the pair {_label(U)} <= {_label(V)}")
    return all_sets


def _canonical_path_maps(n: int, values, hasse, kind: str, covariant: bool):
    """Extend maps given on one-point enlargements ``U <= U + {x}`` to all pairs.

    The path adds points in increasing order; functoriality checks later make
    the choice irrelevant.
    """
    maps = {}
    for V in subsets(range(n)):
        for U in subsets(V):
            if U == V:
                maps[(U, V)] = ModHom.identity(values[U])
                continue
            chain = [U]
            for x in sorted(V - U):
                chain.append(chain[-1] | {x})
            steps = []
            for a, b in zip(chain, chain[1:]):
                if (a, b) not in hasse:
                    raise AlgebraError(f"{kind} table has no map for {_label(a)} <= {_label(b)}")
                steps.append(hasse[(a, b)])
            if covariant:
                f = steps[0]
                for g in steps[1:]:
                    f = compose_mod(g, f)
            else:
                f = steps[-1]
                for g in reversed(steps[:-1]):
                    f = compose_mod(g, f)
            maps[(U, V)] = f
    return maps


@dataclass(frozen=True, eq=False)
class PresheafTable:
    """``values[U]`` for every subset of level ``level`` and ``res[(U, V)]: values[V] -> values[U]``."""

    chain: LevelChain
    level: int
    values: Mapping[frozenset, FinModule]
    res: Mapping[tuple[frozenset, frozenset], ModHom]

    def __post_init__(self):
        values = {_key(U): M for U, M in self.values.items()}
        res = {(_key(U), _key(V)): f for (U, V), f in self.res.items()}
        for U, M in values.items():
            res.setdefault((U, U), ModHom.identity(M))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "res", res)
        all_sets = _check_table_shape(self.chain, self.level, values, res, "presheaf")
        for (U, V), f in res.items():
            if f.source.group != values[V].group:
                raise AlgebraError(f"res {_label(U)} <= {_label(V)} does not start at the value on {_label(V)}")
            if f.target.group != values[U].group:
                raise AlgebraError(f"res {_label(U)} <= {_label(V)} does not land in the value on {_label(U)}")
        for U in all_sets:
            if res[(U, U)] != ModHom.identity(values[U]):
                raise AlgebraError(f"res on {_label(U)} <= {_label(U)} is not the identity")
        for W in all_sets:
            for V in subsets(W):
                for U in subsets(V):
                    if compose_mod(res[(U, V)], res[(V, W)]) != res[(U, W)]:
                        raise AlgebraError(
                            f"restrictions are not functorial on {_label(U)} <= {_label(V)} <= {_label(W)}"
                        )

    @classmethod
    def from_hasse(cls, chain: LevelChain, level: int, values, hasse) -> "PresheafTable":
        """Build from restrictions along one-point enlargements only."""
        values = {_key(U): M for U, M in values.items()}
        hasse = {(_key(U), _key(V)): f for (U, V), f in hasse.items()}
        n = chain.sizes[level]
        if n > TABLE_POINT_CAP:
            raise AlgebraError(f"presheaf tables are limited to {TABLE_POINT_CAP} points")
        return cls(chain, level, values, _canonical_path_maps(n, values, hasse, "presheaf", covariant=False))

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

    def restriction(self, U, V) -> ModHom:
        return self.res[(_key(U), _key(V))]


def _check_cover(P, cover) -> list[frozenset[int]]:
    members = []
    for U in cover:
        if isinstance(U, Clopen) and U.level != P.level:
            raise AlgebraError(f"cover member at level {U.level}, table lives at level {P.level}")
        key = _key(U)
        if not key <= frozenset(P.points):
            raise AlgebraError(f"cover member {_label(key)} is not a subset of level {P.level}")
        members.append(key)
    return members


class SheafSequence(NamedTuple):
    union: frozenset[int]
    members: list[frozenset[int]]
    into: AbHom
    difference: AbHom


def sheaf_sequence(P: PresheafTable, cover) -> SheafSequence:
    """``A(union) -> prod A(U_i) -> prod_{i<j} A(U_i & U_j)`` with the map ``p - q``."""
    members = _check_cover(P, cover)
    union = frozenset().union(*members)
    prod_i = direct_sum([P(U).group for U in members])
    pairs = [(i, j) for i in range(len(members)) for j in range(i + 1, len(members))]
    prod_ij = direct_sum([P(members[i] & members[j]).group for i, j in pairs])
    top = P(union).group
    into = np.zeros((prod_i.group.rank, top.rank), dtype=np.int64)
    for inj, U in zip(prod_i.injections, members):
        into = into + inj.matrix @ P.restriction(U, union).hom.matrix
    diff = np.zeros((prod_ij.group.rank, prod_i.group.rank), dtype=np.int64)
    for inj, (i, j) in zip(prod_ij.injections, pairs):
        I = members[i] & members[j]
        p = P.restriction(I, members[i]).hom.matrix @ prod_i.projections[i].matrix
        q = P.restriction(I, members[j]).hom.matrix @ prod_i.projections[j].matrix
        diff = diff + inj.matrix @ (p - q)
    return SheafSequence(
        union,
        members,
        AbHom(top, prod_i.group, into),
        AbHom(prod_i.group, prod_ij.group, diff),
    )


def sheaf_condition_check(P: PresheafTable, cover) -> Exactness:
    """Exactness of ``0 -> A(union) -> prod A(U_i) -> prod A(U_i & U_j)``.

    Only pairs ``i < j`` appear in the last product: the diagonal terms of the
    full product are always zero and the pair ``(j, i)`` repeats ``(i, j)`` up
    to sign, so the kernel is the same.
    """
    seq = sheaf_sequence(P, cover)
    first = check_exact([seq.into, seq.difference], 0)
    if not first:
        return first
    return check_exact([seq.into, seq.difference], 1)


def disjoint_union_check(P) -> Verdict:
    """Every partition ``V = V_1 + ... + V_k`` gives a bijection ``A(V) -> prod A(V_i)``."""
    for V in subsets(P.points):
        for part in set_partitions(V):
            f = sheaf_sequence(P, part).into
            if not f.is_iso():
                return Verdict.failed(
                    f"A({_label(V)}) -> product over a partition is not bijective",
                    witness=[sorted(b) for b in part],
                    union=sorted(V),
                )
    return Verdict.passed()


def is_sheaf(P: PresheafTable) -> bool:
    return disjoint_union_check(P).ok


# --------------------------------------------------------------------------
# Étale systems


@dataclass(frozen=True, eq=False)
class EtaleSystem:
    """Fibres ``fibres[l][x]`` over each level and ``transitions[l][x]``.

    ``transitions[l][x]`` maps ``fibres[l][f(x)]`` to ``fibres[l + 1][x]``,
    where ``f`` is the projection from level ``l + 1`` to level ``l``.
    """

    chain: LevelChain
    fibres: tuple[tuple[FinModule, ...], ...]
    transitions: tuple[tuple[ModHom, ...], ...]
    ring: FiniteRing
    side: str = LEFT

    def __post_init__(self):
        ch = self.chain
        fibres = tuple(tuple(level) for level in self.fibres)
        trans = tuple(tuple(level) for level in self.transitions)
        object.__setattr__(self, "fibres", fibres)
        object.__setattr__(self, "transitions", trans)
        if len(fibres) != ch.depth or len(trans) != ch.depth - 1:
            raise AlgebraError("need fibres for every level and transitions between consecutive levels")
        for l, level in enumerate(fibres):
            if len(level) != ch.sizes[l]:
                raise AlgebraError(f"level {l} needs {ch.sizes[l]} fibres, got {len(level)}")
            for M in level:
                if M.ring != self.ring or M.side != self.side:
                    raise AlgebraError(f"fibre at level {l} is over a different ring or side")
        for l, level in enumerate(trans):
            if len(level) != ch.sizes[l + 1]:
                raise AlgebraError(f"transitions into level {l + 1} need one map per point")
            for x, phi in enumerate(level):
                y = ch.projections[l][x]
                if phi.source.group != fibres[l][y].group or phi.target.group != fibres[l + 1][x].group:
                    raise AlgebraError(f"transition into level {l + 1} at point {x} has the wrong ends")

    @property
    def top(self) -> int:
        return self.chain.top

    def transition(self, i: int, j: int, x: int) -> ModHom:
        """The composite map from the fibre over the image of ``x`` at level ``i`` to ``fibres[j][x]``."""
        if i > j:
            raise AlgebraError("transitions run from coarse to fine levels")
        if i == j:
            return ModHom.identity(self.fibres[j][x])
        y = self.chain.projections[j - 1][x]
        return compose_mod(self.transitions[j - 1][x], self.transition(i, j - 1, y))

    def restrict_to_level(self, level: int) -> "EtaleSystem":
        return EtaleSystem(LevelChain.single(self.chain.sizes[level]), (self.fibres[level],), (), self.ring, self.side)


def _product(fibres: Sequence[FinModule], ring, side) -> ModuleSum:
    return module_direct_sum(list(fibres), ring=ring, side=side)


def sheaf_of_etale(E: EtaleSystem, level: int) -> PresheafTable:
    """``A(U) = prod_{x in U} A_x`` with coordinate projections as restrictions."""
    n = E.chain.sizes[level]
    if n > TABLE_POINT_CAP:
        raise AlgebraError(f"presheaf tables are limited to {TABLE_POINT_CAP} points")
    sums = {U: _product([E.fibres[level][x] for x in sorted(U)], E.ring, E.side) for U in subsets(range(n))}
    values = {U: s.module for U, s in sums.items()}
    res = {}
    for V, sV in sums.items():
        pos_V = {x: k for k, x in enumerate(sorted(V))}
        for U in subsets(V):
            sU = sums[U]
            blocks = [[None] * len(V) for _ in U]
            for k, x in enumerate(sorted(U)):
                blocks[k][pos_V[x]] = ModHom.identity(E.fibres[level][x])
            res[(U, V)] = block_mod_hom(sV, sU, blocks)
    return PresheafTable(E.chain, level, values, res)


def etale_of_sheaf(P: PresheafTable) -> EtaleSystem:
    """Stalks ``A({x})`` at the table level, pulled back neighbourhoods below it, constant above it."""
    verdict = disjoint_union_check(P)
    if not verdict:
        raise AlgebraError(f"not a sheaf: {verdict.reason} (partition {verdict.witness})")
    ch, top = P.chain, P.level

    def nbhd(l, y):
        return pullback_clopen(ch, Clopen(l, {y}), top).points

    fibres = []
    for l in range(ch.depth):
        if l <= top:
            fibres.append(tuple(P(nbhd(l, y)) for y in ch.points(l)))
        else:
            fibres.append(tuple(P(frozenset({ch.project(x, l, top)})) for x in ch.points(l)))
    trans = []
    for l in range(ch.depth - 1):
        row = []
        for x in ch.points(l + 1):
            y = ch.projections[l][x]
            if l + 1 <= top:
                row.append(P.restriction(nbhd(l + 1, x), nbhd(l, y)))
            else:
                row.append(ModHom.identity(fibres[l][y]))
        trans.append(tuple(row))
    return EtaleSystem(ch, tuple(fibres), tuple(trans), P.ring, P.side)


def sheaf_map_of_transition(E: EtaleSystem, level: int) -> dict[frozenset, ModHom]:
    """The map of sheaves ``A_l(U) -> A_{l+1}(f^-1 U)``, ``s -> (x -> phi_x(s(f x)))``."""
    lo = sheaf_of_etale(E, level)
    hi = sheaf_of_etale(E, level + 1)
    f = E.chain.projections[level]
    out = {}
    for U in subsets(range(E.chain.sizes[level])):
        pre = frozenset(x for x in range(E.chain.sizes[level + 1]) if f[x] in U)
        src = _product([E.fibres[level][y] for y in sorted(U)], E.ring, E.side)
        dst = _product([E.fibres[level + 1][x] for x in sorted(pre)], E.ring, E.side)
        pos = {y: k for k, y in enumerate(sorted(U))}
        blocks = [[None] * len(U) for _ in pre]
        for k, x in enumerate(sorted(pre)):
            blocks[k][pos[f[x]]] = E.transitions[level][x]
        h = block_mod_hom(src, dst, blocks)
        out[U] = ModHom(lo(U), hi(pre), h.hom, check=False)
    return out


def _naturality(P: PresheafTable, Q: PresheafTable, J: Mapping[frozenset, ModHom]) -> Verdict:
    for (U, V), r in P.res.items():
        if compose_mod(Q.restriction(U, V), J[V]) != compose_mod(J[U], r):
            return Verdict.failed(f"square for {_label(U)} <= {_label(V)} does not commute", witness=(sorted(U), sorted(V)))
    return Verdict.passed()


def sheaf_comparison(P: PresheafTable) -> tuple[PresheafTable, dict[frozenset, ModHom]]:
    """``J_U: A(U) -> prod_{x in U} A({x})``, ``a -> (a|_x)``, into the table rebuilt from stalks."""
    E = etale_of_sheaf(P)
    Q = sheaf_of_etale(E, P.level)
    J = {}
    for U in subsets(P.points):
        target = _product([P(frozenset({x})) for x in sorted(U)], P.ring, P.side)
        M = np.zeros((target.module.group.rank, P(U).group.rank), dtype=np.int64)
        for inj, x in zip(target.injections, sorted(U)):
            M = M + inj.hom.matrix @ P.restriction(frozenset({x}), U).hom.matrix
        J[U] = ModHom(P(U), Q(U), AbHom(P(U).group, Q(U).group, M))
    return Q, J


def roundtrip_check(obj) -> Verdict:
    """Both composites of the Étale / Shf pair are isomorphic to the identity.

    For a table: ``J_U`` is an isomorphism for every ``U`` and natural in
    restrictions.  For an étale system: at every level with a table, the
    stalk of the rebuilt sheaf at ``x`` receives ``A_x`` isomorphically, and
    the isomorphisms commute with the transitions between levels.
    """
    if isinstance(obj, PresheafTable):
        if not is_sheaf(obj):
            raise AlgebraError("roundtrip needs a sheaf; the table fails the disjoint-union condition")
        Q, J = sheaf_comparison(obj)
        for U, j in J.items():
            if not j.is_iso():
                return Verdict.failed(f"J on {_label(U)} is not an isomorphism", witness=sorted(U))
        return _naturality(obj, Q, J)
    if isinstance(obj, EtaleSystem):
        return _roundtrip_etale(obj)
    raise AlgebraError(f"roundtrip_check expects a PresheafTable or EtaleSystem, got {type(obj).__name__}")


def _stalk_isos(E: EtaleSystem, level: int):
    P = sheaf_of_etale(E, level)
    back = etale_of_sheaf(P)
    isos = []
    for x in E.chain.points(level):
        stalk = back.fibres[level][x]
        # the stalk is the one-factor product; its injection is the evaluation map
        inj = _product([E.fibres[level][x]], E.ring, E.side).injections[0]
        isos.append(ModHom(E.fibres[level][x], stalk, inj.hom))
    return P, isos


def _roundtrip_etale(E: EtaleSystem) -> Verdict:
    levels = [l for l in range(E.chain.depth) if E.chain.sizes[l] <= TABLE_POINT_CAP]
    data = {}
    for l in levels:
        P, isos = _stalk_isos(E, l)
        for x, iso in enumerate(isos):
            if not iso.is_iso():
                return Verdict.failed(f"stalk at level {l}, point {x} is not isomorphic to the fibre", witness=(l, x))
        data[l] = (P, isos)
    for l in levels:
        if l + 1 not in data:
            continue
        P_lo, iso_lo = data[l]
        P_hi, iso_hi = data[l + 1]
        F = sheaf_map_of_transition(E, l)
        f = E.chain.projections[l]
        for x in E.chain.points(l + 1):
            y = f[x]
            pre = frozenset(z for z in E.chain.points(l + 1) if f[z] == y)
            via_sheaf = compose_mod(P_hi.restriction(frozenset({x}), pre), compose_mod(F[frozenset({y})], iso_lo[y]))
            via_fibre = compose_mod(iso_hi[x], E.transitions[l][x])
            if via_sheaf != via_fibre:
                return Verdict.failed(f"transition into level {l + 1} at point {x} is not natural", witness=(l + 1, x))
    return Verdict.passed(levels=levels)


# --------------------------------------------------------------------------
# Global sections


@dataclass(frozen=True, eq=False)
class DiscreteChainModule:
    """Modules ``modules[l]`` with maps ``maps[l]: modules[l] -> modules[l + 1]``; the value is the last."""

    modules: tuple[FinModule, ...]
    maps: tuple[ModHom, ...]
    sums: tuple[ModuleSum, ...] = field(default=())

    @property
    def value(self) -> FinModule:
        return self.modules[-1]

    def coordinates(self, level: int, s: Elem) -> list[Elem]:
        return self.sums[level].to_blocks(s)

    def element(self, level: int, parts: Sequence[Elem]) -> Elem:
        return self.sums[level].from_blocks(parts)


def sections_at_level(E: EtaleSystem, level: int) -> ModuleSum:
    return _product(E.fibres[level], E.ring, E.side)


def section_chain_map(E: EtaleSystem, level: int, src: ModuleSum | None = None, dst: ModuleSum | None = None) -> ModHom:
    src = src or sections_at_level(E, level)
    dst = dst or sections_at_level(E, level + 1)
    f = E.chain.projections[level]
    blocks = [[None] * E.chain.sizes[level] for _ in range(E.chain.sizes[level + 1])]
    for x in range(E.chain.sizes[level + 1]):
        blocks[x][f[x]] = E.transitions[level][x]
    return block_mod_hom(src, dst, blocks)


def global_sections(E: EtaleSystem) -> DiscreteChainModule:
    sums = tuple(sections_at_level(E, l) for l in range(E.chain.depth))
    maps = tuple(section_chain_map(E, l, sums[l], sums[l + 1]) for l in range(E.chain.depth - 1))
    return DiscreteChainModule(tuple(s.module for s in sums), maps, sums)


class SectionValue(NamedTuple):
    level: int
    values: tuple[Elem, ...]
    element: Elem


def section_through_points(E: EtaleSystem, level: int, assignments) -> SectionValue:
    """A global section through the given points, zero elsewhere."""
    assignments = list(assignments.items()) if isinstance(assignments, Mapping) else list(assignments)
    points = [x for x, _ in assignments]
    if len(set(points)) != len(points):
        raise AlgebraError("section_through_points: duplicate points")
    fibres = E.fibres[level]
    values = [M.group.zero() for M in fibres]
    for x, a in assignments:
        if not 0 <= x < len(fibres):
            raise AlgebraError(f"point {x} is not in level {level}")
        a = tuple(int(v) for v in a)
        if not fibres[x].group.contains(a):
            raise AlgebraError(f"{a} is not an element of the fibre at {x}")
        values[x] = a
    s = sections_at_level(E, level)
    return SectionValue(level, tuple(values), s.from_blocks(values))


# --------------------------------------------------------------------------
# Functor lifting


class FunctorLift(NamedTuple):
    system: EtaleSystem
    comparisons: tuple[ModHom, ...]
    verdict: Verdict


def lift_functor_sheaf(F: Functor | str, E: EtaleSystem) -> FunctorLift:
    """Apply ``F`` fibrewise and compare ``F(prod A_x)`` with ``prod F(A_x)``.

    The comparison at each level is the canonical map with components
    ``F(proj_x)``; it must be an isomorphism commuting with the chain maps.
    """
    if isinstance(F, str):
        F = functor_from_tag(F)
    fibres = tuple(tuple(F.obj(M) for M in level) for level in E.fibres)
    trans = tuple(tuple(F.map(phi) for phi in level) for level in E.transitions)
    sample = F.obj(_zero_like(E))
    lifted = EtaleSystem(E.chain, fibres, trans, sample.ring, sample.side)

    before = global_sections(E)
    after = global_sections(lifted)
    comps = []
    verdict = Verdict.passed()
    for l, (s_before, s_after) in enumerate(zip(before.sums, after.sums)):
        src = F.obj(s_before.module)
        M = np.zeros((s_after.module.group.rank, src.group.rank), dtype=np.int64)
        for inj, proj in zip(s_after.injections, s_before.projections):
            M = M + inj.hom.matrix @ F.map(proj).hom.matrix
        c = ModHom(src, s_after.module, AbHom(src.group, s_after.module.group, M))
        comps.append(c)
        if verdict and not c.is_iso():
            verdict = Verdict.failed(f"canonical map at level {l} is not an isomorphism", witness=l)
    if verdict:
        for l in range(E.chain.depth - 1):
            left = compose_mod(after.maps[l], comps[l])
            right = compose_mod(comps[l + 1], F.map(before.maps[l]))
            if left != right:
                verdict = Verdict.failed(f"canonical maps do not commute with the chain map at level {l}", witness=l)
                break
    return FunctorLift(lifted, tuple(comps), verdict)


def _zero_like(E: EtaleSystem) -> FinModule:
    return module_direct_sum([], ring=E.ring, side=E.side).module


def lift_functor_table(F: Functor, P: PresheafTable) -> PresheafTable:
    """``(FA)(U) = F(A(U))`` with ``F`` applied to the restrictions."""
    values = {U: F.obj(M) for U, M in P.values.items()}
    res = {k: F.map(f) for k, f in P.res.items()}
    res = {k: ModHom(values[k[1]], values[k[0]], f.hom, check=False) for k, f in res.items()}
    return PresheafTable(P.chain, P.level, values, res)
