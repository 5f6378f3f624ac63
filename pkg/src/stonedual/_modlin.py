"""Linear algebra over Z/N for presentations of finite abelian groups.

Every computation splits N into prime powers p**k and diagonalises over the
local ring Z/p**k, where the entry of least p-adic valuation divides every
other entry.  That makes elimination a single vectorised outer-product update
per pivot and keeps every coefficient below p**k.  Results for the separate
primes are glued back together with the Chinese remainder theorem.

Matrices are ``numpy.int64`` arrays throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd, prod

import numpy as np

_MAX_MODULUS = 1 << 24


def lcm(*values: int) -> int:
    out = 1
    for v in values:
        out = out * v // gcd(out, v)
    return out


@lru_cache(maxsize=None)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorisation of ``n`` as ``((p, k), ...)`` with p ascending."""
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            k = 0
            while n % p == 0:
                n //= p
                k += 1
            out.append((p, k))
        p += 1
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def crt_idempotent(part: int, whole: int) -> int:
    """The residue that is 1 mod ``part`` and 0 mod ``whole // part``.

    ``part`` and ``whole // part`` must be coprime.
    """
    if part == whole:
        return 1 % whole
    rest = whole // part
    return (rest * pow(rest, -1, part)) % whole


def as_cols(X, nrows: int) -> np.ndarray:
    """``X`` as an ``nrows``-row matrix of columns, tolerating empty shapes."""
    X = np.asarray(X, dtype=np.int64)
    if X.ndim == 2 and X.shape[0] == nrows:
        return X
    if nrows == 0:
        ncols = X.shape[1] if X.ndim == 2 else (1 if X.ndim == 1 else 0)
        return np.zeros((0, ncols), dtype=np.int64)
    return X.reshape(nrows, -1)


def as_matrix(rows, nrows: int | None = None, ncols: int | None = None) -> np.ndarray:
    arr = np.array(rows, dtype=np.int64)
    if arr.ndim != 2:
        if arr.size == 0 and nrows is not None and ncols is not None:
            return np.zeros((nrows, ncols), dtype=np.int64)
        raise ValueError(f"expected a 2-d integer matrix, got shape {arr.shape}")
    if nrows is not None and ncols is not None and arr.shape != (nrows, ncols):
        if arr.size == 0 and nrows * ncols == 0:
            return np.zeros((nrows, ncols), dtype=np.int64)
        raise ValueError(f"expected shape {(nrows, ncols)}, got {arr.shape}")
    return arr


@dataclass(frozen=True)
class LocalSNF:
    """``U @ M @ V == diag(p**vals)`` modulo ``p**k``.

    ``vals`` has one entry per diagonal position ``min(rows, cols)``; a value
    of ``k`` stands for a zero pivot.  ``U_inv`` is the inverse of ``U``.
    """

    p: int
    k: int
    U: np.ndarray
    U_inv: np.ndarray
    V: np.ndarray
    vals: tuple[int, ...]

    @property
    def q(self) -> int:
        return self.p**self.k

    def val(self, i: int) -> int:
        return self.vals[i] if i < len(self.vals) else self.k


def _valuations(block: np.ndarray, p: int, k: int) -> np.ndarray:
    v = np.zeros(block.shape, dtype=np.int64)
    pj = 1
    for _ in range(k):
        pj *= p
        v += (block % pj == 0)
    return v


def local_snf(M: np.ndarray, p: int, k: int) -> LocalSNF:
    q = p**k
    if q >= _MAX_MODULUS:
        raise OverflowError(f"modulus {q} too large for the int64 engine")
    A = np.array(M, dtype=np.int64) % q
    r, c = A.shape
    U = np.eye(r, dtype=np.int64)
    U_inv = np.eye(r, dtype=np.int64)
    V = np.eye(c, dtype=np.int64)
    vals: list[int] = []
    n = min(r, c)
    for t in range(n):
        sub = A[t:, t:]
        if not sub.any():
            vals.extend([k] * (n - t))
            break
        val = _valuations(sub, p, k)
        flat = int(np.argmin(val))
        i, j = divmod(flat, sub.shape[1])
        v = int(val[i, j])
        i += t
        j += t
        if i != t:
            A[[t, i]] = A[[i, t]]
            U[[t, i]] = U[[i, t]]
            U_inv[:, [t, i]] = U_inv[:, [i, t]]
        if j != t:
            A[:, [t, j]] = A[:, [j, t]]
            V[:, [t, j]] = V[:, [j, t]]
        pv = p**v
        unit = int(A[t, t]) // pv
        if unit % q != 1:
            unit_inv = pow(unit, -1, q)
            A[t] = (A[t] * unit_inv) % q
            U[t] = (U[t] * unit_inv) % q
            U_inv[:, t] = (U_inv[:, t] * unit) % q
        f = A[t + 1:, t] // pv
        if f.any():
            A[t + 1:] = (A[t + 1:] - np.outer(f, A[t])) % q
            U[t + 1:] = (U[t + 1:] - np.outer(f, U[t])) % q
            U_inv[:, t] = (U_inv[:, t] + U_inv[:, t + 1:] @ f) % q
        g = A[t, t + 1:] // pv
        if g.any():
            A[t, t + 1:] = 0
            V[:, t + 1:] = (V[:, t + 1:] - np.outer(V[:, t], g)) % q
        vals.append(v)
    return LocalSNF(p, k, U, U_inv, V, tuple(vals))


def kernel_generators(M: np.ndarray, N: int) -> np.ndarray:
    """Columns generating ``{z : M z == 0 mod N}`` as a subgroup of (Z/N)^c."""
    r, c = M.shape
    cols = []
    for p, k in factorize(N):
        snf = local_snf(M, p, k)
        q = snf.q
        eps = crt_idempotent(q, N)
        for i in range(c):
            v = snf.val(i)
            if v == 0:
                continue
            col = (snf.V[:, i] * (p ** (k - v))) % q
            cols.append((col * eps) % N)
    if not cols:
        return np.zeros((c, 0), dtype=np.int64)
    return np.stack(cols, axis=1)


def solve(M: np.ndarray, Y: np.ndarray, N: int):
    """Solve ``M X == Y (mod N)`` column by column.

    Returns ``(X, ok)`` where ``ok`` flags the solvable columns; unsolvable
    columns of ``X`` are left at zero.
    """
    r, c = M.shape
    Y = as_cols(Y, r)
    m = Y.shape[1]
    X = np.zeros((c, m), dtype=np.int64)
    ok = np.ones(m, dtype=bool)
    for p, k in factorize(N):
        snf = local_snf(M, p, k)
        q = snf.q
        rhs = (snf.U @ (Y % q)) % q
        W = np.zeros((c, m), dtype=np.int64)
        for i in range(r):
            v = snf.val(i) if i < c else k
            row = rhs[i]
            if v == k:
                ok &= row == 0
                continue
            pv = p**v
            ok &= row % pv == 0
            W[i] = row // pv
        Z = (snf.V @ W) % q
        X = (X + Z * crt_idempotent(q, N)) % N
    X[:, ~ok] = 0
    return X, ok


def cokernel(rel: np.ndarray, N: int):
    """Presentation of ``(Z/N)^r / span(rel)`` in invariant-factor form.

    Returns ``(factors, P, L)``: ``P`` (t x r) sends a vector to its class,
    ``L`` (r x t) sends each invariant-factor generator to a representative.
    """
    r = rel.shape[0]
    comps = []
    for p, k in factorize(N):
        snf = local_snf(rel, p, k)
        eps = crt_idempotent(snf.q, N)
        for i in range(r):
            v = snf.val(i) if i < rel.shape[1] else k
            if v == 0:
                continue
            comps.append((p, v, snf.U[i] % (p**v), (snf.U_inv[:, i] * eps) % N))
    return assemble(comps, r, N)


def coker_order(rel: np.ndarray, N: int) -> int:
    r = rel.shape[0]
    out = 1
    for p, k in factorize(N):
        snf = local_snf(rel, p, k)
        for i in range(r):
            out *= p ** (snf.val(i) if i < rel.shape[1] else k)
    return out


def assemble(comps, r: int, N: int):
    """Glue primary cyclic components into invariant-factor form.

    ``comps`` holds ``(p, v, proj_row, lift_col)`` describing a summand
    Z/p**v.  The j-th largest invariant factor collects the j-th largest
    power of each prime.
    """
    by_prime: dict[int, list] = {}
    for comp in comps:
        by_prime.setdefault(comp[0], []).append(comp)
    for lst in by_prime.values():
        lst.sort(key=lambda c: -c[1])
    t = max((len(lst) for lst in by_prime.values()), default=0)
    factors = []
    P_rows = []
    L_cols = []
    for s in range(t):
        parts = [lst[s] for lst in by_prime.values() if s < len(lst)]
        d = prod(p**v for p, v, _, _ in parts)
        row = np.zeros(r, dtype=np.int64)
        col = np.zeros(r, dtype=np.int64)
        for p, v, pr, lc in parts:
            e = crt_idempotent(p**v, d)
            row = (row + (pr.astype(np.int64) % d) * e) % d
            col = (col + lc) % N
        factors.append(d)
        P_rows.append(row)
        L_cols.append(col)
    factors.reverse()
    P_rows.reverse()
    L_cols.reverse()
    P = np.stack(P_rows) if P_rows else np.zeros((0, r), dtype=np.int64)
    L = np.stack(L_cols, axis=1) if L_cols else np.zeros((r, 0), dtype=np.int64)
    return tuple(factors), P, L


def normalize_cyclic(orders):
    """Invariant-factor form of a direct sum of cyclic groups Z/c_i.

    Same return convention as :func:`cokernel`.  When the nontrivial orders
    already form a divisibility chain the answer is a permutation.
    """
    orders = [int(c) for c in orders]
    r = len(orders)
    keep = sorted((c, i) for i, c in enumerate(orders) if c != 1)
    chain = all(keep[i + 1][0] % keep[i][0] == 0 for i in range(len(keep) - 1))
    if chain:
        t = len(keep)
        P = np.zeros((t, r), dtype=np.int64)
        L = np.zeros((r, t), dtype=np.int64)
        for pos, (_, i) in enumerate(keep):
            P[pos, i] = 1
            L[i, pos] = 1
        return tuple(c for c, _ in keep), P, L
    N = lcm(*orders) if orders else 1
    return cokernel(np.diag(np.array(orders, dtype=np.int64)) % N, N)
