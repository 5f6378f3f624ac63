"""Finite abelian groups in invariant-factor form and their homomorphisms.

A group ``Z/d_1 x ... x Z/d_k`` with ``d_1 | ... | d_k`` is stored as the
tuple of its invariant factors; elements are residue tuples.  A homomorphism
``A -> B`` is an integer matrix with one column per generator of ``A``, rows
reduced modulo the factors of ``B``.

Pontryagin duals are realised inside Q/Z: a character of ``A`` is again a
residue tuple ``chi`` and pairs with ``a`` as ``sum(chi_i * a_i / d_i) mod 1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd, prod
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from . import _modlin
from ._modlin import lcm

Elem = tuple[int, ...]


class AlgebraError(ValueError):
    """Raised for ill-formed algebraic data."""


@dataclass(frozen=True)
class FinAbGroup:
    factors: tuple[int, ...] = ()

    def __post_init__(self):
        fs = tuple(int(d) for d in self.factors)
        for i, d in enumerate(fs):
            if d < 2:
                raise AlgebraError(f"invariant factor {i} is {d}; factors must be >= 2")
            if i and d % fs[i - 1]:
                raise AlgebraError(
                    f"invariant factor {i - 1} ({fs[i - 1]}) does not divide factor {i} ({d})"
                )
        object.__setattr__(self, "factors", fs)

    @classmethod
    def trivial(cls) -> "FinAbGroup":
        return cls(())

    @classmethod
    def cyclic(cls, n: int) -> "FinAbGroup":
        if n < 1:
            raise AlgebraError(f"cyclic group order must be positive, got {n}")
        return cls(() if n == 1 else (n,))

    @classmethod
    def from_orders(cls, orders: Iterable[int]) -> "FinAbGroup":
        """The invariant-factor form of a product of cyclic groups."""
        factors, _, _ = _modlin.normalize_cyclic(list(orders))
        return cls(factors)

    @property
    def rank(self) -> int:
        return len(self.factors)

    @property
    def order(self) -> int:
        return prod(self.factors)

    @property
    def exponent(self) -> int:
        return self.factors[-1] if self.factors else 1

    def is_trivial(self) -> bool:
        return not self.factors

    def zero(self) -> Elem:
        return (0,) * self.rank

    def reduce(self, vec: Iterable[int]) -> Elem:
        vec = tuple(int(x) for x in vec)
        if len(vec) != self.rank:
            raise AlgebraError(f"element {vec} has length {len(vec)}, group rank is {self.rank}")
        return tuple(x % d for x, d in zip(vec, self.factors))

    def contains(self, elem) -> bool:
        return len(elem) == self.rank and all(0 <= x < d for x, d in zip(elem, self.factors))

    def elements(self) -> Iterator[Elem]:
        return itertools.product(*(range(d) for d in self.factors))

    def basis(self) -> list[Elem]:
        return [tuple(int(i == j) for j in range(self.rank)) for i in range(self.rank)]

    def add(self, a: Elem, b: Elem) -> Elem:
        return tuple((x + y) % d for x, y, d in zip(a, b, self.factors))

    def neg(self, a: Elem) -> Elem:
        return tuple(-x % d for x, d in zip(a, self.factors))

    def sub(self, a: Elem, b: Elem) -> Elem:
        return tuple((x - y) % d for x, y, d in zip(a, b, self.factors))

    def scale(self, n: int, a: Elem) -> Elem:
        return tuple(n * x % d for x, d in zip(a, self.factors))

    def element_order(self, a: Elem) -> int:
        return lcm(*(d // gcd(x, d) for x, d in zip(a, self.factors)))

    def random_element(self, rng) -> Elem:
        return tuple(int(rng.randrange(d)) for d in self.factors)

    def column(self, a: Elem) -> np.ndarray:
        return np.array(a, dtype=np.int64).reshape(self.rank, 1)

    def reduce_cols(self, X: np.ndarray) -> np.ndarray:
        if self.rank == 0:
            return np.zeros((0, X.shape[1]), dtype=np.int64)
        return X % np.array(self.factors, dtype=np.int64).reshape(-1, 1)

    def __str__(self) -> str:
        return " x ".join(f"Z/{d}" for d in self.factors) if self.factors else "0"


def _diag(factors) -> np.ndarray:
    out = np.zeros((len(factors), len(factors)), dtype=np.int64)
    for i, d in enumerate(factors):
        out[i, i] = d
    return out


def _as_group_matrix(matrix, source: FinAbGroup, target: FinAbGroup) -> np.ndarray:
    M = _modlin.as_matrix(matrix, target.rank, source.rank)
    return target.reduce_cols(M)


@dataclass(frozen=True, eq=False)
class AbHom:
    """A homomorphism of finite abelian groups given by an integer matrix."""

    source: FinAbGroup
    target: FinAbGroup
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        M = _as_group_matrix(self.matrix, self.source, self.target)
        for j, d in enumerate(self.source.factors):
            col = self.target.reduce_cols(M[:, j:j + 1] * d)
            if col.any():
                raise AlgebraError(
                    f"matrix column {j} does not respect the relation {d}*e_{j} = 0 "
                    f"in {self.source} -> {self.target}"
                )
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @classmethod
    def identity(cls, A: FinAbGroup) -> "AbHom":
        return cls(A, A, np.eye(A.rank, dtype=np.int64))

    @classmethod
    def zero(cls, A: FinAbGroup, B: FinAbGroup) -> "AbHom":
        return cls(A, B, np.zeros((B.rank, A.rank), dtype=np.int64))

    @classmethod
    def from_images(cls, A: FinAbGroup, B: FinAbGroup, images: Sequence[Elem]) -> "AbHom":
        """The map sending the j-th generator of ``A`` to ``images[j]``."""
        if len(images) != A.rank:
            raise AlgebraError(f"need {A.rank} generator images, got {len(images)}")
        M = np.array([list(im) for im in images], dtype=np.int64).reshape(A.rank, B.rank).T
        return cls(A, B, M)

    @classmethod
    def scalar(cls, A: FinAbGroup, n: int) -> "AbHom":
        return cls(A, A, n * np.eye(A.rank, dtype=np.int64))

    def __call__(self, a: Elem) -> Elem:
        if len(a) != self.source.rank:
            raise AlgebraError(f"element {a} is not in {self.source}")
        if self.target.rank == 0:
            return ()
        col = self.matrix @ np.array(a, dtype=np.int64).reshape(-1, 1)
        return tuple(int(x) for x in self.target.reduce_cols(col)[:, 0])

    def apply_cols(self, X: np.ndarray) -> np.ndarray:
        X = _modlin.as_cols(X, self.source.rank)
        return self.target.reduce_cols(self.matrix @ X)

    def __matmul__(self, other: "AbHom") -> "AbHom":
        return compose(self, other)

    def _check_parallel(self, other: "AbHom"):
        if self.source != other.source or self.target != other.target:
            raise AlgebraError("homomorphisms have different source or target")

    def __add__(self, other: "AbHom") -> "AbHom":
        self._check_parallel(other)
        return AbHom(self.source, self.target, self.matrix + other.matrix)

    def __sub__(self, other: "AbHom") -> "AbHom":
        self._check_parallel(other)
        return AbHom(self.source, self.target, self.matrix - other.matrix)

    def __neg__(self) -> "AbHom":
        return AbHom(self.source, self.target, -self.matrix)

    def scaled(self, n: int) -> "AbHom":
        return AbHom(self.source, self.target, n * self.matrix)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, AbHom)
            and self.source == other.source
            and self.target == other.target
            and np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self) -> int:
        return hash((self.source, self.target, self.matrix.tobytes()))

    def __repr__(self) -> str:
        return f"AbHom({self.source} -> {self.target}, {self.matrix.tolist()})"

    def is_zero(self) -> bool:
        return not self.matrix.any()

    @cached_property
    def _modulus(self) -> int:
        return lcm(self.source.exponent, self.target.exponent)

    @cached_property
    def _relation_matrix(self) -> np.ndarray:
        # [M | -diag(target factors)] over Z/N; zero columns are dropped.
        N = self._modulus
        cols = [(-d) % N for d in self.target.factors]
        extra = np.zeros((self.target.rank, self.target.rank), dtype=np.int64)
        for i, c in enumerate(cols):
            extra[i, i] = c
        keep = [i for i, c in enumerate(cols) if c]
        return np.concatenate([self.matrix % N, extra[:, keep]], axis=1)

    @cached_property
    def _kernel_gens(self) -> np.ndarray:
        Z = _modlin.kernel_generators(self._relation_matrix, self._modulus)
        return Z[: self.source.rank]

    @cached_property
    def image_order(self) -> int:
        rel = np.concatenate([self.matrix, _diag(self.target.factors)], axis=1) % self.target.exponent
        return self.target.order // _modlin.coker_order(rel, self.target.exponent)

    @property
    def kernel_order(self) -> int:
        return self.source.order // self.image_order

    def is_injective(self) -> bool:
        return self.image_order == self.source.order

    def is_surjective(self) -> bool:
        return self.image_order == self.target.order

    def is_iso(self) -> bool:
        return self.source.order == self.target.order and self.is_injective()

    def preimage_cols(self, Y: np.ndarray):
        """Solve ``f(X) = Y`` column by column; returns ``(X, ok)``."""
        Y = _modlin.as_cols(Y, self.target.rank)
        X, ok = _modlin.solve(self._relation_matrix, Y % self._modulus, self._modulus)
        return self.source.reduce_cols(X[: self.source.rank]), ok

    def preimage(self, b: Elem) -> Elem | None:
        X, ok = self.preimage_cols(self.target.column(b))
        if not ok[0]:
            return None
        return tuple(int(x) for x in X[:, 0])

    def inverse(self) -> "AbHom":
        if not self.is_iso():
            raise AlgebraError("homomorphism is not invertible")
        X, ok = self.preimage_cols(np.eye(self.target.rank, dtype=np.int64))
        return AbHom(self.target, self.source, X)


def compose(g: AbHom, f: AbHom) -> AbHom:
    """``g o f``."""
    if f.target != g.source:
        raise AlgebraError(f"cannot compose: target {f.target} of f is not source {g.source} of g")
    return AbHom(f.source, g.target, g.matrix @ f.matrix)


def lift_through(inclusion: AbHom, f: AbHom) -> AbHom:
    """The map ``g`` with ``inclusion o g == f``; ``f`` must land in the image."""
    if inclusion.target != f.target:
        raise AlgebraError("lift_through: targets differ")
    X, ok = inclusion.preimage_cols(f.matrix)
    if not ok.all():
        j = int(np.flatnonzero(~ok)[0])
        raise AlgebraError(f"generator {j} of the source is not mapped into the image")
    return AbHom(f.source, inclusion.source, X)


# --------------------------------------------------------------------------
# Subgroups, kernels, images, cokernels


def _subgroup_from_cols(A: FinAbGroup, G: np.ndarray):
    G = np.asarray(G, dtype=np.int64)
    if A.rank == 0 or G.size == 0:
        S = FinAbGroup.trivial()
        return S, AbHom.zero(S, A)
    G = A.reduce_cols(_modlin.as_cols(G, A.rank))
    N = A.exponent
    if G.shape[1] == 0:
        S = FinAbGroup.trivial()
        return S, AbHom.zero(S, A)
    rel_in = np.concatenate([G, _diag(A.factors)], axis=1) % N
    Z = _modlin.kernel_generators(rel_in, N)[: G.shape[1]]
    factors, _, L = _modlin.cokernel(Z, N)
    S = FinAbGroup(factors)
    return S, AbHom(S, A, G @ L)


def subgroup(A: FinAbGroup, gens: Iterable[Elem]) -> tuple[FinAbGroup, AbHom]:
    """The subgroup generated by ``gens`` together with its inclusion."""
    gens = list(gens)
    G = np.array(gens, dtype=np.int64).T.reshape(A.rank, len(gens))
    return _subgroup_from_cols(A, G)


def kernel(f: AbHom) -> tuple[FinAbGroup, AbHom]:
    return _subgroup_from_cols(f.source, f._kernel_gens)


def image(f: AbHom) -> tuple[FinAbGroup, AbHom]:
    return _subgroup_from_cols(f.target, f.matrix)


def cokernel(f: AbHom) -> tuple[FinAbGroup, AbHom, AbHom]:
    """``(Q, projection, section)``; the section is additive only on generators."""
    return quotient(f.target, f.matrix)


def quotient(B: FinAbGroup, H: np.ndarray) -> tuple[FinAbGroup, AbHom, np.ndarray]:
    """``B / <columns of H>`` with its projection and a lifting matrix."""
    H = np.asarray(H, dtype=np.int64)
    N = B.exponent
    if B.rank == 0:
        Q = FinAbGroup.trivial()
        return Q, AbHom.zero(B, Q), np.zeros((0, 0), dtype=np.int64)
    H = _modlin.as_cols(H, B.rank)
    rel = np.concatenate([H, _diag(B.factors)], axis=1) % N
    factors, P, L = _modlin.cokernel(rel, N)
    Q = FinAbGroup(factors)
    return Q, AbHom(B, Q, P), B.reduce_cols(L)


class KIO(NamedTuple):
    kernel: FinAbGroup
    kernel_inclusion: AbHom
    image: FinAbGroup
    image_inclusion: AbHom
    cokernel: FinAbGroup
    cokernel_projection: AbHom


def hom_kio(f: AbHom) -> KIO:
    K, k = kernel(f)
    I, i = image(f)
    Q, q, _ = cokernel(f)
    return KIO(K, k, I, i, Q, q)


def quotient_map_through(q: AbHom, lift: np.ndarray, f: AbHom) -> AbHom:
    """Induced map ``Q -> C`` for ``f: B -> C`` vanishing on ``ker q``."""
    return AbHom(q.target, f.target, f.matrix @ lift)


# --------------------------------------------------------------------------
# Direct sums


class DirectSum(NamedTuple):
    group: FinAbGroup
    injections: tuple[AbHom, ...]
    projections: tuple[AbHom, ...]

    def from_blocks(self, parts: Sequence[Elem]) -> Elem:
        out = self.group.zero()
        for inj, x in zip(self.injections, parts):
            out = self.group.add(out, inj(x))
        return out

    def to_blocks(self, x: Elem) -> list[Elem]:
        return [p(x) for p in self.projections]


def direct_sum(groups: Sequence[FinAbGroup]) -> DirectSum:
    orders = [d for A in groups for d in A.factors]
    factors, P, L = _modlin.normalize_cyclic(orders)
    S = FinAbGroup(factors)
    injections = []
    projections = []
    offset = 0
    for A in groups:
        cols = slice(offset, offset + A.rank)
        injections.append(AbHom(A, S, P[:, cols]))
        projections.append(AbHom(S, A, L[cols, :]))
        offset += A.rank
    return DirectSum(S, tuple(injections), tuple(projections))


def block_hom(src: DirectSum, dst: DirectSum, blocks) -> AbHom:
    """Assemble ``sum_{i,j} inj_i o blocks[i][j] o proj_j``.

    ``blocks[i][j]`` maps summand ``j`` of ``src`` to summand ``i`` of ``dst``;
    ``None`` entries are zero.
    """
    M = np.zeros((dst.group.rank, src.group.rank), dtype=np.int64)
    for i, row in enumerate(blocks):
        for j, b in enumerate(row):
            if b is None:
                continue
            M = M + dst.injections[i].matrix @ (b.matrix @ src.projections[j].matrix)
    return AbHom(src.group, dst.group, M)


# --------------------------------------------------------------------------
# Exactness


@dataclass(frozen=True)
class Exactness:
    exact: bool
    position: int
    witness: Elem | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.exact


def check_exact(seq: Sequence[AbHom], position: int) -> Exactness:
    """Exactness of ``seq`` at the group between ``seq[position-1]`` and ``seq[position]``.

    Position 0 is the source of the first map (injectivity) and position
    ``len(seq)`` the target of the last one (surjectivity).  On failure the
    witness is an element of the middle group: either in the image but not
    the kernel, or in the kernel but not the image.
    """
    if not seq:
        raise AlgebraError("check_exact needs at least one map")
    for a, b in zip(seq, seq[1:]):
        if a.target != b.source:
            raise AlgebraError(f"maps are not composable: {a.target} vs {b.source}")
    if not 0 <= position <= len(seq):
        raise AlgebraError(f"position {position} out of range 0..{len(seq)}")
    if position == 0:
        middle = seq[0].source
        f_in = AbHom.zero(FinAbGroup.trivial(), middle)
    else:
        f_in = seq[position - 1]
        middle = f_in.target
    f_out = seq[position] if position < len(seq) else AbHom.zero(middle, FinAbGroup.trivial())

    comp = compose(f_out, f_in)
    if not comp.is_zero():
        j = int(np.flatnonzero(comp.matrix.any(axis=0))[0])
        e = tuple(int(i == j) for i in range(f_in.source.rank))
        return Exactness(False, position, f_in(e), "image not contained in kernel")
    if f_out.kernel_order == f_in.image_order:
        return Exactness(True, position)
    K, k = kernel(f_out)
    for col in k.matrix.T:
        x = tuple(int(v) for v in col)
        if f_in.preimage(x) is None:
            return Exactness(False, position, x, "kernel not contained in image")
    raise AssertionError("kernel larger than image but every kernel generator lies in the image")


def is_exact_everywhere(seq: Sequence[AbHom]) -> bool:
    return all(check_exact(seq, i) for i in range(len(seq) + 1))


# --------------------------------------------------------------------------
# Pontryagin duality


def pairing(A: FinAbGroup, chi: Elem, a: Elem) -> Fraction:
    """``<chi, a> = sum chi_i a_i / d_i`` in Q/Z, as a Fraction in [0, 1)."""
    total = sum((Fraction(c * x, d) for c, x, d in zip(chi, a, A.factors)), Fraction(0))
    return total - (total.numerator // total.denominator)


def dual_group(A: FinAbGroup) -> FinAbGroup:
    return FinAbGroup(A.factors)


def dual_hom(f: AbHom) -> AbHom:
    """``f^vee : B^vee -> A^vee`` with ``<f^vee chi, a> = <chi, f a>``."""
    A, B = f.source, f.target
    M = f.matrix.astype(object)
    N = np.zeros((A.rank, B.rank), dtype=object)
    for j, dj in enumerate(A.factors):
        for i, ei in enumerate(B.factors):
            N[j, i] = (int(M[i, j]) * dj) // ei
    return AbHom(dual_group(B), dual_group(A), N.astype(np.int64))


def evaluation_map(A: FinAbGroup) -> AbHom:
    """``A -> (A^vee)^vee``, read off from the pairing on basis characters."""
    Ad = dual_group(A)
    cols = []
    for a in A.basis():
        psi = []
        for chi, d in zip(Ad.basis(), Ad.factors):
            val = pairing(A, chi, a) * d
            assert val.denominator == 1
            psi.append(int(val))
        cols.append(tuple(psi))
    return AbHom.from_images(A, dual_group(Ad), cols)


def double_dual_check(A: FinAbGroup, exhaustive_limit: int = 64) -> bool:
    ev = evaluation_map(A)
    if A.order <= exhaustive_limit:
        Ad = dual_group(A)
        for a in A.elements():
            psi = ev(a)
            for chi in Ad.elements():
                if pairing(Ad, psi, chi) != pairing(A, chi, a):
                    return False
        seen = {ev(a) for a in A.elements()}
        return len(seen) == A.order
    return ev.is_iso()


# --------------------------------------------------------------------------
# Enumeration helpers for exhaustive checks on small groups


def all_homs(A: FinAbGroup, B: FinAbGroup) -> Iterator[AbHom]:
    """Every homomorphism ``A -> B``; the generator images run over ``B[d_j]``."""
    choices = []
    for d in A.factors:
        choices.append([b for b in B.elements() if B.scale(d, b) == B.zero()])
    for images in itertools.product(*choices):
        yield AbHom.from_images(A, B, images)


def count_homs(A: FinAbGroup, B: FinAbGroup) -> int:
    return prod(prod(gcd(d, e) for e in B.factors) for d in A.factors)


def all_groups_of_order_at_most(n: int) -> list[FinAbGroup]:
    """Every finite abelian group of order ``<= n`` up to isomorphism."""
    out = []

    def extend(acc: list[int], order: int):
        out.append(FinAbGroup(tuple(acc)))
        step = acc[-1] if acc else 1
        d = max(step, 2)
        while order * d <= n:
            if d % step == 0:
                extend(acc + [d], order * d)
            d += step if step > 1 else 1

    extend([], 1)
    return sorted(out, key=lambda G: (G.order, G.factors))


# --------------------------------------------------------------------------
# Smith normal form over the integers


class SNFDecomposition(NamedTuple):
    U: list[list[int]]
    D: list[list[int]]
    V: list[list[int]]

    @property
    def diagonal(self) -> list[int]:
        return [self.D[i][i] for i in range(min(len(self.D), len(self.D[0]) if self.D else 0))]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a - (a // b) * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def smith_normal_form(M: Sequence[Sequence[int]]) -> SNFDecomposition:
    """Exact Smith normal form ``U M V = D`` over the integers.

    ``U`` and ``V`` are unimodular and the nonzero diagonal entries of ``D``
    are positive and form a divisibility chain, zeros last.
    """
    A = [[int(x) for x in row] for row in M]
    m = len(A)
    n = len(A[0]) if m else 0
    if any(len(row) != n for row in A):
        raise AlgebraError("ragged matrix")
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def row_combine(i, j, a, b, c, d):
        # rows (i, j) <- (a*ri + b*rj, c*ri + d*rj), determinant a*d - b*c = +-1
        for mat in (A, U):
            ri, rj = mat[i], mat[j]
            mat[i] = [a * x + b * y for x, y in zip(ri, rj)]
            mat[j] = [c * x + d * y for x, y in zip(ri, rj)]

    def col_combine(i, j, a, b, c, d):
        for mat in (A, V):
            for row in mat:
                x, y = row[i], row[j]
                row[i] = a * x + b * y
                row[j] = c * x + d * y

    t = 0
    while t < min(m, n):
        nz = [(abs(A[i][j]), i, j) for i in range(t, m) for j in range(t, n) if A[i][j]]
        if not nz:
            break
        _, i0, j0 = min(nz)
        if i0 != t:
            row_combine(t, i0, 0, 1, 1, 0)
        if j0 != t:
            col_combine(t, j0, 0, 1, 1, 0)
        while True:
            done = True
            for i in range(t + 1, m):
                if A[i][t] and A[i][t] % A[t][t] == 0:
                    row_combine(t, i, 1, 0, -(A[i][t] // A[t][t]), 1)
                elif A[i][t]:
                    g, x, y = _xgcd(A[t][t], A[i][t])
                    a, b = A[t][t] // g, A[i][t] // g
                    row_combine(t, i, x, y, -b, a)
                    done = False
            for j in range(t + 1, n):
                if A[t][j] and A[t][j] % A[t][t] == 0:
                    col_combine(t, j, 1, 0, -(A[t][j] // A[t][t]), 1)
                elif A[t][j]:
                    g, x, y = _xgcd(A[t][t], A[t][j])
                    a, b = A[t][t] // g, A[t][j] // g
                    col_combine(t, j, x, y, -b, a)
                    done = False
            if done:
                p = A[t][t]
                bad = next(
                    ((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % p),
                    None,
                )
                if bad is None:
                    break
                row_combine(t, bad[0], 1, 1, 0, 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return SNFDecomposition(U, A, V)


def matmul(X, Y, inner: int | None = None, ncols: int | None = None) -> list[list[int]]:
    """Exact integer matrix product of nested lists."""
    inner = len(Y) if inner is None else inner
    ncols = (len(Y[0]) if Y else 0) if ncols is None else ncols
    return [[sum(X[i][k] * Y[k][j] for k in range(inner)) for j in range(ncols)] for i in range(len(X))]


def det(M) -> int:
    """Integer determinant by fraction-free elimination (Bareiss)."""
    A = [list(map(int, row)) for row in M]
    n = len(A)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k]), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]
