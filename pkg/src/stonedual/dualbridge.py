"""Pontryagin duality between étale systems and `sheaves' of profinite modules.

The dual of an étale system has the dual fibres and the dual transition maps
running the other way; the dual of a table swaps restrictions for
corestrictions.  The identification of the profinite direct sum of the dual
with the dual of the continuous product is witnessed by an explicit pairing
``<(chi_x), s> = sum_x <chi_x, s(x)>`` whose nondegeneracy is checked.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .cosheafside import (
    CosheafTable,
    ProSheafSystem,
    coetale_of_cosheaf,
    cosheaf_map_of_level,
    coshf_of_prosheaf,
    profinite_direct_sum,
    sum_chain_map,
)
from .finab import AbHom, AlgebraError, compose, dual_hom, evaluation_map, pairing
from .ringmod import (
    FinModule,
    HomZ,
    ModHom,
    ModuleSum,
    TensorZ,
    block_mod_hom,
    compose_mod,
    dual_mod_hom,
    dual_module,
    evaluation_mod_hom,
    module_direct_sum,
)
from .sheafside import (
    TABLE_POINT_CAP,
    EtaleSystem,
    PresheafTable,
    global_sections,
    section_chain_map,
    sections_at_level,
    sheaf_map_of_transition,
    sheaf_of_etale,
)
from .stone import subsets
from .verdict import Verdict

PAIRING_ENUMERATION_LIMIT = 4096
PAIRING_SAMPLE = 2000


def _flip(side: str) -> str:
    return "right" if side == "left" else "left"


def dual_etale_to_prosheaf(E: EtaleSystem) -> ProSheafSystem:
    fibres = tuple(tuple(dual_module(M) for M in level) for level in E.fibres)
    maps = tuple(tuple(dual_mod_hom(phi) for phi in level) for level in E.transitions)
    return ProSheafSystem(E.chain, fibres, maps, E.ring, _flip(E.side))


def dual_prosheaf_to_etale(S: ProSheafSystem) -> EtaleSystem:
    fibres = tuple(tuple(dual_module(M) for M in level) for level in S.fibres)
    trans = tuple(tuple(dual_mod_hom(psi) for psi in level) for level in S.maps)
    return EtaleSystem(S.chain, fibres, trans, S.ring, _flip(S.side))


def dual_table(P: PresheafTable) -> CosheafTable:
    values = {U: dual_module(M) for U, M in P.values.items()}
    cor = {k: dual_mod_hom(f) for k, f in P.res.items()}
    return CosheafTable(P.chain, P.level, values, cor)


def dual_cotable(C: CosheafTable) -> PresheafTable:
    values = {U: dual_module(M) for U, M in C.values.items()}
    res = {k: dual_mod_hom(f) for k, f in C.cor.items()}
    return PresheafTable(C.chain, C.level, values, res)


# --------------------------------------------------------------------------
# Fibres of the dual


def _single(M: FinModule) -> ModuleSum:
    return module_direct_sum([M], ring=M.ring, side=M.side)


def fibre_duality_check(E: EtaleSystem) -> Verdict:
    """Compare the dual `sheaf' built through tables with the fibrewise dual.

    At each level with a table, the stalk of ``CoÉtale(Shf(E)^vee)`` at ``x``
    is ``A({x})^vee``; dualising the inclusion ``A_x -> A({x})`` identifies it
    with ``A_x^vee``.  The identifications must commute with the fibre maps
    of both systems.
    """
    direct = dual_etale_to_prosheaf(E)
    levels = [l for l in range(E.chain.depth) if E.chain.sizes[l] <= TABLE_POINT_CAP]
    isos = {}
    for l in levels:
        table = sheaf_of_etale(E, l)
        routed = coetale_of_cosheaf(dual_table(table))
        row = []
        for x in E.chain.points(l):
            inj = _single(E.fibres[l][x]).injections[0]
            iso = ModHom(routed.fibres[l][x], direct.fibres[l][x], dual_hom(inj.hom))
            if not iso.is_iso():
                return Verdict.failed(f"dual stalk at level {l}, point {x} is not the dual fibre", witness=(l, x))
            row.append(iso)
        isos[l] = (table, row)
    for l in levels:
        if l + 1 not in isos:
            continue
        table_lo, iso_lo = isos[l]
        table_hi, iso_hi = isos[l + 1]
        F = sheaf_map_of_transition(E, l)
        f = E.chain.projections[l]
        for x in E.chain.points(l + 1):
            y = f[x]
            pre = frozenset(z for z in E.chain.points(l + 1) if f[z] == y)
            cor = dual_hom(table_hi.restriction(frozenset({x}), pre).hom)
            routed_map = compose(dual_hom(F[frozenset({y})].hom), cor)
            lhs = compose(direct.maps[l][x].hom, iso_hi[x].hom)
            rhs = compose(iso_lo[y].hom, routed_map)
            if lhs != rhs:
                return Verdict.failed(f"dual fibre map out of level {l + 1} at point {x} is not natural", witness=(l + 1, x))
    return Verdict.passed(levels=levels)


def double_dual_system_check(E: EtaleSystem) -> Verdict:
    """Dualising twice returns ``E`` through the evaluation maps, naturally in the transitions."""
    back = dual_prosheaf_to_etale(dual_etale_to_prosheaf(E))
    evs = []
    for l, level in enumerate(E.fibres):
        row = []
        for x, M in enumerate(level):
            ev = evaluation_mod_hom(M)
            if not ev.is_iso() or ev.target.group != back.fibres[l][x].group:
                return Verdict.failed(f"evaluation at level {l}, point {x} is not an isomorphism", witness=(l, x))
            row.append(ev)
        evs.append(row)
    for l, level in enumerate(E.transitions):
        f = E.chain.projections[l]
        for x, phi in enumerate(level):
            if compose(back.transitions[l][x].hom, evs[l][f[x]].hom) != compose(evs[l + 1][x].hom, phi.hom):
                return Verdict.failed(f"evaluation is not natural at level {l + 1}, point {x}", witness=(l + 1, x))
    return Verdict.passed()


# --------------------------------------------------------------------------
# Sum / product duality


def pairing_hom(dual_parts: ModuleSum, parts: ModuleSum) -> ModHom:
    """``sum_x proj_x^vee o proj_x``: the pairing as a map into the dual of ``parts``."""
    target = dual_module(parts.module)
    M = np.zeros((target.group.rank, dual_parts.module.group.rank), dtype=np.int64)
    for dp, p in zip(dual_parts.projections, parts.projections):
        M = M + dual_hom(p.hom).matrix @ dp.hom.matrix
    return ModHom(dual_parts.module, target, AbHom(dual_parts.module.group, target.group, M), check=False)


@dataclass(frozen=True)
class LevelPairing:
    level: int
    pairing: ModHom
    order_dual_side: int
    order_module_side: int
    nondegenerate_dual_side: bool
    nondegenerate_module_side: bool
    ring_compatible: bool
    formula_agrees: bool
    pairs_checked: int

    @property
    def ok(self) -> bool:
        return (
            self.order_dual_side == self.order_module_side
            and self.nondegenerate_dual_side
            and self.nondegenerate_module_side
            and self.ring_compatible
            and self.formula_agrees
        )


@dataclass(frozen=True)
class DualityWitness:
    levels: tuple[LevelPairing, ...]
    chain_compatible: tuple[bool, ...]
    reason: str = ""

    @property
    def ok(self) -> bool:
        return all(p.ok for p in self.levels) and all(self.chain_compatible)

    def __bool__(self) -> bool:
        return self.ok


def _pairs(dual_parts: ModuleSum, parts: ModuleSum, rng: random.Random):
    D, P = dual_parts.module.group, parts.module.group
    if D.order * P.order <= PAIRING_ENUMERATION_LIMIT:
        return [(d, s) for d in D.elements() for s in P.elements()]
    return [(D.random_element(rng), P.random_element(rng)) for _ in range(PAIRING_SAMPLE)]


def _level_pairing(level: int, dual_parts: ModuleSum, parts: ModuleSum, rng: random.Random) -> LevelPairing:
    pi = pairing_hom(dual_parts, parts)
    P = parts.module
    formula = True
    pairs = _pairs(dual_parts, parts, rng)
    for d, s in pairs:
        direct = sum(
            (pairing(p.target.group, dp(d), p(s)) for dp, p in zip(dual_parts.projections, parts.projections)),
            start=0,
        )
        if (direct - pairing(P.group, pi(d), s)) % 1 != 0:
            formula = False
            break
    # the module side: s -> <-, s> as a map P -> D^vee, built from evaluation
    module_side = compose(dual_hom(pi.hom), evaluation_map(P.group))
    try:
        ModHom(pi.source, pi.target, pi.hom)
        ring_ok = True
    except AlgebraError:
        ring_ok = False
    return LevelPairing(
        level,
        pi,
        dual_parts.module.order,
        P.order,
        pi.hom.is_injective(),
        module_side.is_injective(),
        ring_ok,
        formula,
        len(pairs),
    )


def sum_product_duality_check(E: EtaleSystem, seed: int = 0) -> DualityWitness:
    """Pair the profinite sum of the dual with the continuous product at every level."""
    rng = random.Random(seed)
    dual = dual_etale_to_prosheaf(E)
    sums, _ = profinite_direct_sum(dual)
    products = global_sections(E)
    levels = tuple(_level_pairing(l, sums.sums[l], products.sums[l], rng) for l in range(E.chain.depth))
    compat = []
    for l in range(E.chain.depth - 1):
        lhs = compose(levels[l].pairing.hom, sums.maps[l].hom)
        rhs = compose(dual_hom(products.maps[l].hom), levels[l + 1].pairing.hom)
        compat.append(lhs == rhs)
    reason = ""
    bad = [p.level for p in levels if not p.ok]
    if bad:
        reason = f"pairing fails at level {bad[0]}"
    elif not all(compat):
        reason = f"pairing does not commute with the chain map at level {compat.index(False)}"
    return DualityWitness(levels, tuple(compat), reason)


# --------------------------------------------------------------------------
# The commuting square


class Morphism(NamedTuple):
    """Fibrewise maps between two systems over the same chain."""

    label: str
    source: object
    target: object
    components: tuple[tuple[ModHom, ...], ...]


def _etale_morphism_ok(m: Morphism) -> bool:
    E, F = m.source, m.target
    for l, level in enumerate(E.transitions):
        f = E.chain.projections[l]
        for x, phi in enumerate(level):
            if compose(m.components[l + 1][x].hom, phi.hom) != compose(F.transitions[l][x].hom, m.components[l][f[x]].hom):
                return False
    return True


def _prosheaf_morphism_ok(m: Morphism) -> bool:
    S, T = m.source, m.target
    for l, level in enumerate(S.maps):
        f = S.chain.projections[l]
        for x, psi in enumerate(level):
            if compose(m.components[l][f[x]].hom, psi.hom) != compose(T.maps[l][x].hom, m.components[l + 1][x].hom):
                return False
    return True


def _lift_etale(F, E: EtaleSystem) -> EtaleSystem:
    fibres = tuple(tuple(F.obj(M) for M in level) for level in E.fibres)
    trans = tuple(tuple(F.map(phi) for phi in level) for level in E.transitions)
    return EtaleSystem(E.chain, fibres, trans, E.ring, E.side)


def _lift_prosheaf(F, S: ProSheafSystem) -> ProSheafSystem:
    fibres = tuple(tuple(F.obj(M) for M in level) for level in S.fibres)
    maps = tuple(tuple(F.map(psi) for psi in level) for level in S.maps)
    return ProSheafSystem(S.chain, fibres, maps, S.ring, S.side)


def morphism_library(system, seed: int = 0) -> list[Morphism]:
    """Seeded sample of morphisms out of or into ``system``.

    Multiplication by a random integer, the projection onto ``- (x) Z/n``
    and the inclusion of the ``n``-torsion, with ``n`` drawn from {2, 3}.
    """
    rng = random.Random(seed)
    k = rng.randrange(0, 12)
    n = rng.choice((2, 3))
    is_etale = isinstance(system, EtaleSystem)
    lift = _lift_etale if is_etale else _lift_prosheaf
    out = [Morphism(f"scalar:{k}", system, system, tuple(tuple(ModHom.identity(M).scaled(k) for M in level) for level in system.fibres))]
    T = TensorZ(n)
    out.append(Morphism(f"tensor_z:{n}", system, lift(T, system), tuple(tuple(T.projection(M) for M in level) for level in system.fibres)))
    H = HomZ(n)
    out.append(Morphism(f"hom_z:{n}", lift(H, system), system, tuple(tuple(H.inclusion(M) for M in level) for level in system.fibres)))
    return out


class SquareReport(NamedTuple):
    verdict: Verdict
    witness: ModHom | None
    morphisms: tuple[str, ...]


def _top_parts(system):
    if isinstance(system, EtaleSystem):
        return sections_at_level(system, system.top)
    return module_direct_sum(list(system.fibres[system.top]), ring=system.ring, side=system.side)


def _sum_map(src: ModuleSum, dst: ModuleSum, comps: Sequence[ModHom]) -> ModHom:
    blocks = [[None] * len(comps) for _ in comps]
    for x, c in enumerate(comps):
        blocks[x][x] = c
    return block_mod_hom(src, dst, blocks)


def square_commutes_check(system, seed: int = 0) -> SquareReport:
    """Dualise-then-evaluate against evaluate-then-dualise.

    For an étale system the two corners are the profinite sum of the dual
    `sheaf' and the dual of the global sections; for a `sheaf' they are the
    global sections of the dual étale system and the dual of the profinite
    sum.  The witness is the evaluation pairing at the top level, which must
    be an isomorphism natural in the seeded morphism library.
    """
    if isinstance(system, EtaleSystem):
        dual = dual_etale_to_prosheaf(system)
        dual_parts = profinite_direct_sum(dual)[0].sums[-1]
        evaluated = global_sections(system).value
        if system.chain.sizes[system.top] <= TABLE_POINT_CAP:
            X = frozenset(system.chain.points(system.top))
            via_table = sheaf_of_etale(system, system.top)(X)
            if via_table.group != evaluated.group:
                return SquareReport(Verdict.failed("global sections differ from Shf evaluated at X"), None, ())
        dualize = dual_mod_hom
        morphism_ok = _etale_morphism_ok
    elif isinstance(system, ProSheafSystem):
        dual = dual_prosheaf_to_etale(system)
        dual_parts = global_sections(dual).sums[-1]
        evaluated = profinite_direct_sum(system)[0].value
        if system.chain.sizes[system.top] <= TABLE_POINT_CAP:
            X = frozenset(system.chain.points(system.top))
            via_table = coshf_of_prosheaf(system, system.top)(X)
            if via_table.group != evaluated.group:
                return SquareReport(Verdict.failed("profinite sum differs from CoShf evaluated at X"), None, ())
        dualize = dual_mod_hom
        morphism_ok = _prosheaf_morphism_ok
    else:
        raise AlgebraError(f"square_commutes_check expects an EtaleSystem or ProSheafSystem, got {type(system).__name__}")

    parts = _top_parts(system)
    witness = pairing_hom(dual_parts, parts)
    if witness.target.group != dual_module(evaluated).group or not witness.is_iso():
        return SquareReport(Verdict.failed("the evaluation pairing is not an isomorphism"), witness, ())
    try:
        ModHom(witness.source, witness.target, witness.hom)
    except AlgebraError:
        return SquareReport(Verdict.failed("the evaluation pairing is not R-linear"), witness, ())

    labels = []
    for m in morphism_library(system, seed):
        labels.append(m.label)
        if not morphism_ok(m):
            return SquareReport(Verdict.failed(f"library map {m.label} is not a morphism of systems"), witness, tuple(labels))
        src_parts, dst_parts = _top_parts(m.source), _top_parts(m.target)
        top_maps = m.components[-1]
        on_parts = _sum_map(src_parts, dst_parts, top_maps)
        src_dual = module_direct_sum([dual_module(M) for M in m.source.fibres[-1]], ring=system.ring, side=_flip(system.side))
        dst_dual = module_direct_sum([dual_module(M) for M in m.target.fibres[-1]], ring=system.ring, side=_flip(system.side))
        on_duals = _sum_map(dst_dual, src_dual, [dualize(c) for c in top_maps])
        w_src = pairing_hom(src_dual, src_parts)
        w_dst = pairing_hom(dst_dual, dst_parts)
        lhs = compose(w_src.hom, on_duals.hom)
        rhs = compose(dual_hom(on_parts.hom), w_dst.hom)
        if lhs != rhs:
            return SquareReport(Verdict.failed(f"witness is not natural for {m.label}", witness=m.label), witness, tuple(labels))
    return SquareReport(Verdict.passed(), witness, tuple(labels))
