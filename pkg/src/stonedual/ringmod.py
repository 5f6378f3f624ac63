"""Finite rings, finite modules over them, and the module operations used
throughout: sums, kernels and quotients, permutation and induced modules,
Pontryagin duals and a small family of additive functors.

A ring is stored through its additive group and the products of additive
generators; a module stores one endomorphism of its underlying group per
additive generator of the ring.  Bilinearity means every axiom only needs to
be checked on generators, which is what the constructors do.
"""

from __future__ import annotations

import itertools
from dataclasses import InitVar, dataclass, field
from functools import cached_property, lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .finab import (
    AbHom,
    AlgebraError,
    DirectSum,
    Elem,
    FinAbGroup,
    compose,
    direct_sum,
    dual_group,
    dual_hom,
    kernel,
    image,
    lift_through,
    quotient,
    subgroup,
)

RING_ORDER_CAP = 1 << 20

LEFT = "left"
RIGHT = "right"


# --------------------------------------------------------------------------
# Finite groups


@dataclass(frozen=True)
class FinGroup:
    """A finite group given by its multiplication table on ``0..n-1``."""

    table: tuple[tuple[int, ...], ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        table = tuple(tuple(int(x) for x in row) for row in self.table)
        object.__setattr__(self, "table", table)
        n = len(table)
        if n == 0:
            raise AlgebraError("a group needs at least one element")
        for row in table:
            if len(row) != n or any(not 0 <= x < n for x in row):
                raise AlgebraError("multiplication table is not an n x n table on 0..n-1")
        ident = [e for e in range(n) if all(table[e][x] == x and table[x][e] == x for x in range(n))]
        if not ident:
            raise AlgebraError("multiplication table has no identity")
        e = ident[0]
        inverse = []
        for a in range(n):
            inv = [b for b in range(n) if table[a][b] == e]
            if not inv or table[inv[0]][a] != e:
                raise AlgebraError(f"element {a} has no inverse")
            inverse.append(inv[0])
        for a, b, c in itertools.product(range(n), repeat=3):
            if table[table[a][b]][c] != table[a][table[b][c]]:
                raise AlgebraError(f"multiplication is not associative at {(a, b, c)}")
        object.__setattr__(self, "_identity", e)
        object.__setattr__(self, "_inverse", tuple(inverse))

    @property
    def order(self) -> int:
        return len(self.table)

    @property
    def identity(self) -> int:
        return self._identity

    def inv(self, a: int) -> int:
        return self._inverse[a]

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def elements(self) -> range:
        return range(self.order)

    def is_abelian(self) -> bool:
        return all(self.table[a][b] == self.table[b][a] for a in self.elements() for b in self.elements())

    @classmethod
    def trivial(cls) -> "FinGroup":
        return cls(((0,),), name="1")

    @classmethod
    def cyclic(cls, n: int) -> "FinGroup":
        return cls(tuple(tuple((a + b) % n for b in range(n)) for a in range(n)), name=f"C{n}")

    @classmethod
    def from_permutations(cls, perms: Sequence[Sequence[int]], name: str = "") -> "FinGroup":
        """The group of the listed permutations, which must be closed under composition."""
        perms = [tuple(p) for p in perms]
        index = {p: i for i, p in enumerate(perms)}
        table = []
        for p in perms:
            row = []
            for q in perms:
                pq = tuple(p[q[x]] for x in range(len(q)))
                if pq not in index:
                    raise AlgebraError("permutations are not closed under composition")
                row.append(index[pq])
            table.append(tuple(row))
        return cls(tuple(table), name=name)

    @classmethod
    def symmetric(cls, n: int) -> "FinGroup":
        return cls.from_permutations(sorted(itertools.permutations(range(n))), name=f"S{n}")

    @classmethod
    def direct_product(cls, G: "FinGroup", H: "FinGroup") -> "FinGroup":
        pairs = [(g, h) for g in G.elements() for h in H.elements()]
        index = {p: i for i, p in enumerate(pairs)}
        table = tuple(
            tuple(index[(G.mul(a[0], b[0]), H.mul(a[1], b[1]))] for b in pairs) for a in pairs
        )
        return cls(table, name=f"{G.name}x{H.name}")

    def closure(self, gens) -> frozenset[int]:
        elems = {self.identity}
        frontier = list(elems)
        gens = list(gens)
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    b = self.mul(a, g)
                    if b not in elems:
                        elems.add(b)
                        nxt.append(b)
            frontier = nxt
        return frozenset(elems)

    def is_subgroup(self, subset) -> bool:
        s = set(subset)
        if self.identity not in s:
            return False
        return all(self.mul(a, self.inv(b)) in s for a in s for b in s)

    def all_subgroups(self) -> list[frozenset[int]]:
        found = {frozenset({self.identity})}
        frontier = list(found)
        while frontier:
            nxt = []
            for S in frontier:
                for g in self.elements():
                    if g in S:
                        continue
                    T = self.closure(set(S) | {g})
                    if T not in found:
                        found.add(T)
                        nxt.append(T)
            frontier = nxt
        return sorted(found, key=lambda S: (len(S), sorted(S)))

    def subgroup(self, subset) -> tuple["FinGroup", tuple[int, ...]]:
        """The subgroup on ``subset`` as a group in its own right, plus the embedding."""
        if not self.is_subgroup(subset):
            raise AlgebraError(f"{sorted(subset)} is not a subgroup")
        emb = tuple(sorted(subset))
        pos = {g: i for i, g in enumerate(emb)}
        table = tuple(tuple(pos[self.mul(a, b)] for b in emb) for a in emb)
        return FinGroup(table, name=f"{self.name}[{','.join(map(str, emb))}]"), emb


# --------------------------------------------------------------------------
# Finite rings


@dataclass(frozen=True)
class FiniteRing:
    """A finite ring with one.

    ``mult[i][j]`` is the product of additive generators ``b_i * b_j``.
    Group rings remember their group and coefficient modulus.
    """

    additive: FinAbGroup
    mult: tuple
    one: Elem
    name: str = field(default="", compare=False)
    group: FinGroup | None = None
    modulus: int | None = None

    def __post_init__(self):
        A = self.additive
        t = A.rank
        if A.order > RING_ORDER_CAP:
            raise AlgebraError(f"ring order {A.order} exceeds the cap {RING_ORDER_CAP}")
        if t == 0:
            raise AlgebraError("the zero ring is not allowed")
        mult = tuple(tuple(A.reduce(self.mult[i][j]) for j in range(t)) for i in range(t))
        object.__setattr__(self, "mult", mult)
        object.__setattr__(self, "one", A.reduce(self.one))
        T = np.zeros((t, t, t), dtype=np.int64)
        for i in range(t):
            for j in range(t):
                T[:, i, j] = mult[i][j]
        for i, d in enumerate(A.factors):
            for j in range(t):
                if A.scale(d, mult[i][j]) != A.zero() or A.scale(d, mult[j][i]) != A.zero():
                    raise AlgebraError(f"multiplication is not bilinear on generator {i}")
        object.__setattr__(self, "_tensor", T)
        for i, j, k in itertools.product(range(t), repeat=3):
            lhs = self.mul(mult[i][j], A.basis()[k])
            rhs = self.mul(A.basis()[i], mult[j][k])
            if lhs != rhs:
                raise AlgebraError(f"multiplication is not associative on generators {(i, j, k)}")
        for b in A.basis():
            if self.mul(self.one, b) != b or self.mul(b, self.one) != b:
                raise AlgebraError("the distinguished element is not a two-sided unit")

    @property
    def rank(self) -> int:
        return self.additive.rank

    @property
    def order(self) -> int:
        return self.additive.order

    @property
    def characteristic(self) -> int:
        return self.additive.element_order(self.one)

    def mul(self, r: Elem, s: Elem) -> Elem:
        v = np.einsum("kij,i,j->k", self._tensor, np.array(r, dtype=np.int64), np.array(s, dtype=np.int64))
        return self.additive.reduce(v)

    def elements(self):
        return self.additive.elements()

    def left_mult(self, r: Elem) -> AbHom:
        cols = [self.mul(r, b) for b in self.additive.basis()]
        return AbHom.from_images(self.additive, self.additive, cols)

    def right_mult(self, r: Elem) -> AbHom:
        cols = [self.mul(b, r) for b in self.additive.basis()]
        return AbHom.from_images(self.additive, self.additive, cols)

    def is_commutative(self) -> bool:
        B = self.additive.basis()
        return all(self.mul(a, b) == self.mul(b, a) for a in B for b in B)

    def __str__(self) -> str:
        return self.name or f"ring of order {self.order}"


@lru_cache(maxsize=None)
def cyclic_ring(m: int) -> FiniteRing:
    if m < 2:
        raise AlgebraError(f"cyclic_ring needs m >= 2, got {m}")
    return FiniteRing(FinAbGroup((m,)), (((1,),),), (1,), name=f"Z/{m}", modulus=m)


@lru_cache(maxsize=None)
def group_ring(m: int, G: FinGroup) -> FiniteRing:
    """(Z/m)[G], additively free on the group elements."""
    if m < 2:
        raise AlgebraError(f"group_ring needs m >= 2, got {m}")
    n = G.order
    A = FinAbGroup((m,) * n)

    def e(g):
        return tuple(int(i == g) for i in range(n))

    mult = tuple(tuple(e(G.mul(g, h)) for h in G.elements()) for g in G.elements())
    return FiniteRing(A, mult, e(G.identity), name=f"Z/{m}[{G.name or n}]", group=G, modulus=m)


def group_element(R: FiniteRing, g: int) -> Elem:
    if R.group is None:
        raise AlgebraError(f"{R} is not a group ring")
    return tuple(int(i == g) for i in range(R.rank))


# --------------------------------------------------------------------------
# Modules


@dataclass(frozen=True, eq=False)
class FinModule:
    """A finite module: underlying group plus one action map per ring generator."""

    group: FinAbGroup
    ring: FiniteRing
    action: tuple[AbHom, ...]
    side: str = LEFT
    name: str = field(default="", compare=False)
    check: InitVar[bool] = True

    def __post_init__(self, check: bool):
        object.__setattr__(self, "action", tuple(self.action))
        if self.side not in (LEFT, RIGHT):
            raise AlgebraError(f"side must be 'left' or 'right', got {self.side!r}")
        if check:
            self._verify()

    def _verify(self):
        R, M = self.ring, self.group
        if len(self.action) != R.rank:
            raise AlgebraError(f"need {R.rank} action maps, got {len(self.action)}")
        for i, a in enumerate(self.action):
            if a.source != M or a.target != M:
                raise AlgebraError(f"action map {i} is not an endomorphism of {M}")
            if not a.scaled(R.additive.factors[i]).is_zero():
                raise AlgebraError(f"action is not additive in the ring: generator {i}")
        basis = R.additive.basis()
        for i, j in itertools.product(range(R.rank), repeat=2):
            lhs = self.act(R.mul(basis[i], basis[j]))
            if self.side == LEFT:
                rhs = compose(self.action[i], self.action[j])
            else:
                rhs = compose(self.action[j], self.action[i])
            if lhs != rhs:
                raise AlgebraError(f"action is not associative on generators {(i, j)}")
        if self.act(R.one) != AbHom.identity(M):
            raise AlgebraError("ring unit does not act as the identity")

    def act(self, r: Elem) -> AbHom:
        M = np.zeros((self.group.rank, self.group.rank), dtype=np.int64)
        for c, a in zip(r, self.action):
            if c:
                M = M + c * a.matrix
        return AbHom(self.group, self.group, M)

    def act_on(self, r: Elem, m: Elem) -> Elem:
        return self.act(r)(m)

    @property
    def order(self) -> int:
        return self.group.order

    def elements(self):
        return self.group.elements()

    def same_kind(self, other: "FinModule") -> bool:
        return self.ring == other.ring and self.side == other.side

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"FinModule{label}({self.group} over {self.ring}, {self.side})"


def verify_module_axioms(M: FinModule, exhaustive_limit: int = 4096) -> bool:
    """Element-level check of the module axioms on ring generators.

    Runs over every element of the module when its order is at most
    ``exhaustive_limit``; a spot check of the generator identities otherwise.
    """
    R = M.ring
    basis = R.additive.basis()
    elems = list(M.elements()) if M.order <= exhaustive_limit else M.group.basis()
    for m in elems:
        if M.act_on(R.one, m) != m:
            return False
        for i, j in itertools.product(range(R.rank), repeat=2):
            rs = R.mul(basis[i], basis[j])
            lhs = M.act_on(rs, m)
            if M.side == LEFT:
                rhs = M.act_on(basis[i], M.act_on(basis[j], m))
            else:
                rhs = M.act_on(basis[j], M.act_on(basis[i], m))
            if lhs != rhs:
                return False
    for m, n in itertools.islice(itertools.product(elems, repeat=2), 2000):
        for b in basis:
            if M.act_on(b, M.group.add(m, n)) != M.group.add(M.act_on(b, m), M.act_on(b, n)):
                return False
    return True


@dataclass(frozen=True, eq=False)
class ModHom:
    """An R-linear map; ``hom`` commutes with every generator action."""

    source: FinModule
    target: FinModule
    hom: AbHom
    check: InitVar[bool] = True

    def __post_init__(self, check: bool):
        if check:
            if not self.source.same_kind(self.target):
                raise AlgebraError("ModHom between modules over different rings or sides")
            if self.hom.source != self.source.group or self.hom.target != self.target.group:
                raise AlgebraError("underlying map does not match the module groups")
            for i, (a, b) in enumerate(zip(self.source.action, self.target.action)):
                if compose(self.hom, a) != compose(b, self.hom):
                    raise AlgebraError(f"map does not commute with ring generator {i}")

    @classmethod
    def identity(cls, M: FinModule) -> "ModHom":
        return cls(M, M, AbHom.identity(M.group), check=False)

    @classmethod
    def zero(cls, M: FinModule, N: FinModule) -> "ModHom":
        return cls(M, N, AbHom.zero(M.group, N.group))

    def __call__(self, m: Elem) -> Elem:
        return self.hom(m)

    def __matmul__(self, other: "ModHom") -> "ModHom":
        return compose_mod(self, other)

    def __add__(self, other: "ModHom") -> "ModHom":
        return ModHom(self.source, self.target, self.hom + other.hom, check=False)

    def __sub__(self, other: "ModHom") -> "ModHom":
        return ModHom(self.source, self.target, self.hom - other.hom, check=False)

    def __neg__(self) -> "ModHom":
        return ModHom(self.source, self.target, -self.hom, check=False)

    def scaled(self, n: int) -> "ModHom":
        return ModHom(self.source, self.target, self.hom.scaled(n), check=False)

    def __eq__(self, other) -> bool:
        return isinstance(other, ModHom) and self.hom == other.hom

    __hash__ = None

    def is_iso(self) -> bool:
        return self.hom.is_iso()

    def inverse(self) -> "ModHom":
        return ModHom(self.target, self.source, self.hom.inverse(), check=False)


def compose_mod(g: ModHom, f: ModHom) -> ModHom:
    return ModHom(f.source, g.target, compose(g.hom, f.hom), check=False)


def trivial_module_like(M: FinModule) -> FinModule:
    Z = FinAbGroup.trivial()
    return FinModule(Z, M.ring, tuple(AbHom.identity(Z) for _ in M.action), M.side, check=False)


def zero_module(R: FiniteRing, side: str = LEFT) -> FinModule:
    Z = FinAbGroup.trivial()
    return FinModule(Z, R, tuple(AbHom.identity(Z) for _ in range(R.rank)), side, check=False)


def module_from_group(A: FinAbGroup, R: FiniteRing, side: str = LEFT, name: str = "") -> FinModule:
    """``A`` with each ring generator acting by its integer multiple of one.

    For ``Z/m`` this is the only module structure; for a group ring it is the
    trivial action.
    """
    if R.group is not None:
        acts = tuple(AbHom.identity(A) for _ in range(R.rank))
    else:
        acts = tuple(AbHom.scalar(A, 1).scaled(1) for _ in range(R.rank))
        if R.rank != 1 or R.one != (1,):
            acts = tuple(AbHom.scalar(A, int(c)) for c in _integer_images(R))
    return FinModule(A, R, acts, side, name=name)


def _integer_images(R: FiniteRing) -> list[int]:
    # Each generator must be an integer multiple of one for a scalar action.
    out = []
    one = R.one
    for b in R.additive.basis():
        k = next((k for k in range(R.additive.exponent) if R.additive.scale(k, one) == b), None)
        if k is None:
            raise AlgebraError(f"{R} is not generated by its unit; no scalar action exists")
        out.append(k)
    return out


def group_ring_module(m: int, G: FinGroup, A: FinAbGroup, matrices, side: str = LEFT, name: str = "") -> FinModule:
    """A (Z/m)[G]-module from one matrix per group element."""
    R = group_ring(m, G)
    acts = tuple(AbHom(A, A, mat) for mat in matrices)
    return FinModule(A, R, acts, side, name=name)


def regular_module(R: FiniteRing, side: str = LEFT) -> FinModule:
    acts = tuple((R.left_mult(b) if side == LEFT else R.right_mult(b)) for b in R.additive.basis())
    return FinModule(R.additive, R, acts, side, name=f"{R.name} (regular)")


# --------------------------------------------------------------------------
# Sums, kernels, quotients


class ModuleSum(NamedTuple):
    module: FinModule
    injections: tuple[ModHom, ...]
    projections: tuple[ModHom, ...]
    group_sum: DirectSum

    def from_blocks(self, parts):
        return self.group_sum.from_blocks(parts)

    def to_blocks(self, x):
        return self.group_sum.to_blocks(x)


def module_direct_sum(mods: Sequence[FinModule], ring: FiniteRing | None = None, side: str | None = None) -> ModuleSum:
    """Direct sum of modules over a common ring; ``ring``/``side`` cover the empty sum."""
    if not mods and ring is None:
        raise AlgebraError("empty direct sum needs an explicit ring")
    R = mods[0].ring if mods else ring
    sd = mods[0].side if mods else (side or LEFT)
    for M in mods:
        if M.ring != R or M.side != sd:
            raise AlgebraError("direct sum of modules over different rings or sides")
    ds = direct_sum([M.group for M in mods])
    acts = []
    for i in range(R.rank):
        mat = np.zeros((ds.group.rank, ds.group.rank), dtype=np.int64)
        for M, inj, proj in zip(mods, ds.injections, ds.projections):
            mat = mat + inj.matrix @ (M.action[i].matrix @ proj.matrix)
        acts.append(AbHom(ds.group, ds.group, mat))
    S = FinModule(ds.group, R, tuple(acts), sd, check=False)
    injs = tuple(ModHom(M, S, h, check=False) for M, h in zip(mods, ds.injections))
    projs = tuple(ModHom(S, M, h, check=False) for M, h in zip(mods, ds.projections))
    return ModuleSum(S, injs, projs, ds)


def block_mod_hom(src: ModuleSum, dst: ModuleSum, blocks) -> ModHom:
    """``sum inj_i o blocks[i][j] o proj_j`` between module sums (``None`` is zero)."""
    M = np.zeros((dst.module.group.rank, src.module.group.rank), dtype=np.int64)
    for i, row in enumerate(blocks):
        for j, b in enumerate(row):
            if b is None:
                continue
            h = b.hom if isinstance(b, ModHom) else b
            M = M + dst.injections[i].hom.matrix @ (h.matrix @ src.projections[j].hom.matrix)
    return ModHom(src.module, dst.module, AbHom(src.module.group, dst.module.group, M), check=False)


def submodule_from_inclusion(M: FinModule, inc: AbHom, name: str = "") -> tuple[FinModule, ModHom]:
    """Give the subgroup ``inc: S -> M`` the restricted action; fails if not stable."""
    acts = []
    for i, a in enumerate(M.action):
        try:
            acts.append(lift_through(inc, compose(a, inc)))
        except AlgebraError as exc:
            raise AlgebraError(f"subgroup is not stable under ring generator {i}") from exc
    S = FinModule(inc.source, M.ring, tuple(acts), M.side, name=name, check=False)
    return S, ModHom(S, M, inc, check=False)


def submodule(M: FinModule, gens) -> tuple[FinModule, ModHom]:
    """The submodule generated by ``gens``."""
    gens = list(gens)
    images = [M.action[i](g) for g in gens for i in range(M.ring.rank)]
    _, inc = subgroup(M.group, images + gens)
    return submodule_from_inclusion(M, inc)


def quotient_module(M: FinModule, H: np.ndarray, name: str = "") -> tuple[FinModule, ModHom, np.ndarray]:
    """``M / <columns of H>``; the span must be a submodule."""
    Q, proj, lift = quotient(M.group, H)
    acts = tuple(AbHom(Q, Q, proj.matrix @ (a.matrix @ lift)) for a in M.action)
    QM = FinModule(Q, M.ring, acts, M.side, name=name, check=False)
    pm = ModHom(M, QM, proj, check=False)
    for i, a in enumerate(M.action):
        if compose(pm.hom, a) != compose(acts[i], pm.hom):
            raise AlgebraError("quotient by a subgroup that is not a submodule")
    return QM, pm, lift


def kernel_module(f: ModHom) -> tuple[FinModule, ModHom]:
    _, inc = kernel(f.hom)
    return submodule_from_inclusion(f.source, inc)


def image_module(f: ModHom) -> tuple[FinModule, ModHom]:
    _, inc = image(f.hom)
    return submodule_from_inclusion(f.target, inc)


def cokernel_module(f: ModHom) -> tuple[FinModule, ModHom, np.ndarray]:
    return quotient_module(f.target, f.hom.matrix)


def lift_mod(inc: ModHom, f: ModHom) -> ModHom:
    """Factor ``f`` through the injective ``inc``."""
    return ModHom(f.source, inc.source, lift_through(inc.hom, f.hom), check=False)


# --------------------------------------------------------------------------
# G-sets, permutation and induced modules


@dataclass(frozen=True)
class GSet:
    """A left action of ``group`` on ``0..size-1``; ``perms[g][y] = g.y``."""

    group: FinGroup
    size: int
    perms: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        G = self.group
        perms = tuple(tuple(int(y) for y in p) for p in self.perms)
        object.__setattr__(self, "perms", perms)
        if len(perms) != G.order:
            raise AlgebraError("need one permutation per group element")
        for g, p in enumerate(perms):
            if sorted(p) != list(range(self.size)):
                raise AlgebraError(f"action of element {g} is not a permutation")
        if perms[G.identity] != tuple(range(self.size)):
            raise AlgebraError("identity does not act trivially")
        for g, h in itertools.product(G.elements(), repeat=2):
            gh = G.mul(g, h)
            if any(perms[gh][y] != perms[g][perms[h][y]] for y in range(self.size)):
                raise AlgebraError(f"action is not a homomorphism at {(g, h)}")

    def act(self, g: int, y: int) -> int:
        return self.perms[g][y]

    def orbits(self) -> list[tuple[int, ...]]:
        seen = set()
        out = []
        for y in range(self.size):
            if y in seen:
                continue
            orb = tuple(sorted({self.perms[g][y] for g in self.group.elements()}))
            seen.update(orb)
            out.append(orb)
        return out

    def stabilizer(self, y: int) -> frozenset[int]:
        return frozenset(g for g in self.group.elements() if self.perms[g][y] == y)

    def restrict(self, points: Sequence[int]) -> "GSet":
        """The action on a union of orbits, relabelled in the given order."""
        pos = {y: i for i, y in enumerate(points)}
        perms = tuple(tuple(pos[p[y]] for y in points) for p in self.perms)
        return GSet(self.group, len(points), perms)


def regular_gset(G: FinGroup) -> GSet:
    return GSet(G, G.order, tuple(tuple(G.mul(g, h) for h in G.elements()) for g in G.elements()))


def coset_gset(G: FinGroup, H) -> tuple[GSet, list[frozenset[int]]]:
    """``G`` acting on the left cosets ``gH``, listed by smallest element."""
    H = frozenset(H)
    if not G.is_subgroup(H):
        raise AlgebraError(f"{sorted(H)} is not a subgroup: not closed under multiplication")
    cosets = []
    for g in G.elements():
        c = frozenset(G.mul(g, h) for h in H)
        if c not in cosets:
            cosets.append(c)
    cosets.sort(key=min)
    index = {c: i for i, c in enumerate(cosets)}
    perms = tuple(
        tuple(index[frozenset(G.mul(g, x) for x in c)] for c in cosets) for g in G.elements()
    )
    return GSet(G, len(cosets), perms), cosets


def permutation_module(m: int, Y: GSet, side: str = LEFT) -> FinModule:
    """The free Z/m-module on the points of ``Y`` with G permuting the basis."""
    R = group_ring(m, Y.group)
    A = FinAbGroup((m,) * Y.size) if Y.size else FinAbGroup.trivial()
    acts = []
    for g in Y.group.elements():
        h = g if side == LEFT else Y.group.inv(g)
        mat = np.zeros((Y.size, Y.size), dtype=np.int64)
        for y in range(Y.size):
            mat[Y.perms[h][y], y] = 1
        acts.append(AbHom(A, A, mat))
    return FinModule(A, R, tuple(acts), side, name=f"Z/{m}[Y]")


def induced_module(m: int, G: FinGroup, H) -> FinModule:
    """The permutation module on ``G/H``."""
    Y, _ = coset_gset(G, H)
    M = permutation_module(m, Y)
    return FinModule(M.group, M.ring, M.action, M.side, name=f"Z/{m}[G/H]", check=False)


def trivial_module(m: int, G: FinGroup, side: str = LEFT) -> FinModule:
    A = FinAbGroup.cyclic(m)
    return FinModule(A, group_ring(m, G), tuple(AbHom.identity(A) for _ in G.elements()), side, name=f"Z/{m}")


class OrbitDecomposition(NamedTuple):
    orbits: list[tuple[int, ...]]
    orbit_sets: list[GSet]
    witness: ModHom
    summands: ModuleSum


def orbit_decomposition(m: int, Y: GSet) -> OrbitDecomposition:
    """``Z/m[Y] = sum over orbits of Z/m[orbit]`` with the explicit isomorphism."""
    source = permutation_module(m, Y)
    orbits = Y.orbits()
    sets = [Y.restrict(o) for o in orbits]
    summands = module_direct_sum([permutation_module(m, S) for S in sets], ring=source.ring)
    images = [None] * Y.size
    for k, orb in enumerate(orbits):
        local = summands.injections[k].source.group
        for i, y in enumerate(orb):
            images[y] = summands.injections[k](tuple(int(j == i) for j in range(local.rank)))
    hom = AbHom.from_images(source.group, summands.module.group, images)
    return OrbitDecomposition(orbits, sets, ModHom(source, summands.module, hom), summands)


def restrict_module(M: FinModule, emb: Sequence[int], H: FinGroup) -> FinModule:
    """Restriction of a (Z/m)[G]-module along the subgroup embedding ``emb``."""
    R = M.ring
    if R.group is None:
        raise AlgebraError("restriction needs a group ring")
    RH = group_ring(R.modulus, H)
    acts = tuple(M.action[g] for g in emb)
    return FinModule(M.group, RH, acts, M.side, name=M.name)


def swap_side(M: FinModule) -> FinModule:
    """Turn a right (Z/m)[G]-module into a left one and back via ``g -> g^-1``."""
    G = M.ring.group
    if G is None:
        raise AlgebraError("side swap is only canonical for group rings")
    acts = tuple(M.action[G.inv(g)] for g in G.elements())
    return FinModule(M.group, M.ring, acts, RIGHT if M.side == LEFT else LEFT, name=M.name)


# --------------------------------------------------------------------------
# Duality


def dual_module(M: FinModule) -> FinModule:
    """``M^vee`` with ``<chi . r, m> = <chi, r . m>``; the side flips."""
    acts = tuple(dual_hom(a) for a in M.action)
    side = RIGHT if M.side == LEFT else LEFT
    name = f"{M.name}^vee" if M.name else ""
    return FinModule(dual_group(M.group), M.ring, acts, side, name=name, check=False)


def dual_mod_hom(f: ModHom) -> ModHom:
    return ModHom(dual_module(f.target), dual_module(f.source), dual_hom(f.hom), check=False)


def evaluation_mod_hom(M: FinModule) -> ModHom:
    from .finab import evaluation_map

    return ModHom(M, dual_module(dual_module(M)), evaluation_map(M.group))


def find_module_isomorphism(M: FinModule, N: FinModule, limit: int = 1 << 16) -> ModHom | None:
    """Exhaustive search for an R-linear bijection (small modules only)."""
    from .finab import all_homs, count_homs

    if M.group != N.group or not M.same_kind(N):
        return None
    if count_homs(M.group, N.group) > limit:
        raise AlgebraError("hom space too large for exhaustive search")
    for h in all_homs(M.group, N.group):
        if not h.is_iso():
            continue
        if all(compose(h, a) == compose(b, h) for a, b in zip(M.action, N.action)):
            return ModHom(M, N, h, check=False)
    return None


# --------------------------------------------------------------------------
# Additive functors that commute with direct limits


class Functor:
    tag = ""

    def obj(self, M: FinModule) -> FinModule:
        raise NotImplementedError

    def map(self, f: ModHom) -> ModHom:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"Functor({self.tag})"


class HomZ(Functor):
    """``Hom_Z(Z/n, -)``, realised as the n-torsion ``M[n]``."""

    def __init__(self, n: int):
        if n < 1:
            raise AlgebraError(f"Hom_Z(Z/n, -) needs n >= 1, got {n}")
        self.n = n
        self.tag = f"hom_z:{n}"

    def _torsion(self, M: FinModule):
        return submodule_from_inclusion(M, kernel(AbHom.scalar(M.group, self.n))[1])

    def obj(self, M):
        return self._torsion(M)[0]

    def inclusion(self, M: FinModule) -> ModHom:
        """The natural inclusion ``M[n] -> M``."""
        return self._torsion(M)[1]

    def map(self, f):
        S, inc = self._torsion(f.source)
        T, inc2 = self._torsion(f.target)
        return ModHom(S, T, lift_through(inc2.hom, compose(f.hom, inc.hom)), check=False)


class TensorZ(Functor):
    """``- (x)_Z Z/n``, realised as ``M / nM``."""

    def __init__(self, n: int):
        if n < 1:
            raise AlgebraError(f"- (x) Z/n needs n >= 1, got {n}")
        self.n = n
        self.tag = f"tensor_z:{n}"

    def _quotient(self, M: FinModule):
        return quotient_module(M, self.n * np.eye(M.group.rank, dtype=np.int64))

    def obj(self, M):
        return self._quotient(M)[0]

    def projection(self, M: FinModule) -> ModHom:
        """The natural projection ``M -> M / nM``."""
        return self._quotient(M)[1]

    def map(self, f):
        Q, p, lift = self._quotient(f.source)
        Q2, p2, _ = self._quotient(f.target)
        return ModHom(Q, Q2, AbHom(Q.group, Q2.group, p2.hom.matrix @ (f.hom.matrix @ lift)), check=False)


class HomR(Functor):
    """``Hom_R(P, -)`` for a fixed module ``P``; values are Z/char(R)-modules.

    An R-linear map ``P -> M`` is recorded by the images of the generators of
    ``P``; the j-th image lives in ``M[d_j]``.
    """

    def __init__(self, P: FinModule):
        self.P = P
        self.tag = "hom_r"

    def _parts(self, M: FinModule):
        P = self.P
        if not P.same_kind(M):
            raise AlgebraError("Hom_R(P, -) applied to a module over a different ring or side")
        torsion = [kernel(AbHom.scalar(M.group, d))[1] for d in P.group.factors]
        S = direct_sum([t.source for t in torsion])
        # constraint: phi(b_i p_j) - b_i phi(p_j) for every ring generator i, generator j
        blocks = []
        for a_P, a_M in zip(P.action, M.action):
            for j in range(P.group.rank):
                row = np.zeros((M.group.rank, S.group.rank), dtype=np.int64)
                for l in range(P.group.rank):
                    c = int(a_P.matrix[l, j])
                    if c:
                        row = row + c * (torsion[l].matrix @ S.projections[l].matrix)
                row = row - a_M.matrix @ (torsion[j].matrix @ S.projections[j].matrix)
                blocks.append(row)
        T = direct_sum([M.group] * len(blocks))
        C = np.zeros((T.group.rank, S.group.rank), dtype=np.int64)
        for inj, blk in zip(T.injections, blocks):
            C = C + inj.matrix @ blk
        K, inc = kernel(AbHom(S.group, T.group, C))
        return torsion, S, K, inc

    def obj(self, M):
        _, _, K, _ = self._parts(M)
        R = cyclic_ring(max(self.P.ring.characteristic, 2))
        return module_from_group(K, R, side=LEFT, name=f"Hom_R(P, {M.name})")

    def map(self, f):
        tor1, S1, K1, inc1 = self._parts(f.source)
        tor2, S2, K2, inc2 = self._parts(f.target)
        M = np.zeros((S2.group.rank, S1.group.rank), dtype=np.int64)
        for l, (t1, t2) in enumerate(zip(tor1, tor2)):
            piece = lift_through(t2, compose(f.hom, t1))
            M = M + S2.injections[l].matrix @ (piece.matrix @ S1.projections[l].matrix)
        on_sums = AbHom(S1.group, S2.group, M)
        h = lift_through(inc2, compose(on_sums, inc1))
        return ModHom(self.obj(f.source), self.obj(f.target), h, check=False)

    def evaluate(self, M: FinModule, phi: Elem) -> list[Elem]:
        """Images of the generators of ``P`` under the map recorded by ``phi``."""
        torsion, S, K, inc = self._parts(M)
        s = inc(phi)
        return [t(S.projections[l](s)) for l, t in enumerate(torsion)]


SUPPORTED_FUNCTORS = ("hom_z:<n>", "tensor_z:<n>", "hom_r")


def functor_from_tag(tag: str, P: FinModule | None = None) -> Functor:
    kind, _, arg = tag.partition(":")
    if kind == "hom_z":
        return HomZ(int(arg))
    if kind == "tensor_z":
        return TensorZ(int(arg))
    if kind == "hom_r":
        if P is None:
            raise AlgebraError("hom_r needs the module P")
        return HomR(P)
    raise AlgebraError(f"unsupported functor {tag!r}; supported: {', '.join(SUPPORTED_FUNCTORS)}")


def lift_functor_apply(F: Functor | str, M: FinModule) -> FinModule:
    if isinstance(F, str):
        F = functor_from_tag(F)
    if not isinstance(F, Functor):
        raise AlgebraError(f"unsupported functor {F!r}")
    return F.obj(M)
