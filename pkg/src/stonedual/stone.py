"""Stone spaces truncated to finite towers of finite sets.

Level 0 is the coarsest quotient and the last level is "the space"; each
projection maps level ``i + 1`` onto level ``i``.  Points of a level are the
integers ``0..size-1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, NamedTuple

from .finab import AlgebraError

CLOPEN_ENUMERATION_CAP = 16


@dataclass(frozen=True)
class LevelChain:
    """Finite sets ``X_0, ..., X_top`` with maps ``projections[i]: X_{i+1} -> X_i``."""

    sizes: tuple[int, ...]
    projections: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        projs = tuple(tuple(int(y) for y in p) for p in self.projections)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "projections", projs)
        if not sizes:
            raise AlgebraError("a level chain needs at least one level")
        if any(s < 0 for s in sizes):
            raise AlgebraError("level sizes must be non-negative")
        if len(projs) != len(sizes) - 1:
            raise AlgebraError(f"{len(sizes)} levels need {len(sizes) - 1} projections, got {len(projs)}")
        for i, p in enumerate(projs):
            if len(p) != sizes[i + 1]:
                raise AlgebraError(f"projection {i} must have one entry per point of level {i + 1}")
            if any(not 0 <= y < sizes[i] for y in p):
                raise AlgebraError(f"projection {i} leaves level {i}")

    @classmethod
    def single(cls, size: int) -> "LevelChain":
        return cls((size,))

    @property
    def depth(self) -> int:
        return len(self.sizes)

    @property
    def top(self) -> int:
        return len(self.sizes) - 1

    def points(self, level: int) -> range:
        self._check_level(level)
        return range(self.sizes[level])

    def _check_level(self, level: int):
        if not 0 <= level < self.depth:
            raise AlgebraError(f"level {level} out of range 0..{self.top}")

    def project(self, x: int, source: int, target: int) -> int:
        """Image of ``x`` in level ``source`` down at level ``target <= source``."""
        self._check_level(source)
        self._check_level(target)
        if target > source:
            raise AlgebraError(f"cannot project from level {source} up to level {target}")
        for i in range(source - 1, target - 1, -1):
            x = self.projections[i][x]
        return x

    def thread(self, x: int) -> tuple[int, ...]:
        """Images of a top-level point at every level, coarsest first."""
        return tuple(self.project(x, self.top, i) for i in range(self.depth))


def validate_chain(chain: LevelChain) -> tuple[bool, int | None]:
    """``(True, None)`` when every projection is onto, else ``(False, i)`` for the first bad one."""
    for i, p in enumerate(chain.projections):
        if set(p) != set(range(chain.sizes[i])):
            return False, i
    return True, None


@dataclass(frozen=True)
class Clopen:
    level: int
    points: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "points", frozenset(int(x) for x in self.points))

    def check_in(self, chain: LevelChain) -> "Clopen":
        chain._check_level(self.level)
        bad = [x for x in self.points if not 0 <= x < chain.sizes[self.level]]
        if bad:
            raise AlgebraError(f"points {sorted(bad)} are not in level {self.level}")
        return self

    def __and__(self, other: "Clopen") -> "Clopen":
        self._same_level(other)
        return Clopen(self.level, self.points & other.points)

    def __or__(self, other: "Clopen") -> "Clopen":
        self._same_level(other)
        return Clopen(self.level, self.points | other.points)

    def _same_level(self, other):
        if self.level != other.level:
            raise AlgebraError("combine clopens after pulling them back to a common level")

    def __le__(self, other: "Clopen") -> bool:
        self._same_level(other)
        return self.points <= other.points


def pullback_clopen(chain: LevelChain, U: Clopen, level: int) -> Clopen:
    U.check_in(chain)
    if level < U.level:
        raise AlgebraError(f"cannot pull a level-{U.level} clopen back to level {level}")
    pts = frozenset(x for x in chain.points(level) if chain.project(x, level, U.level) in U.points)
    return Clopen(level, pts)


def same_clopen(chain: LevelChain, U: Clopen, V: Clopen) -> bool:
    level = max(U.level, V.level)
    return pullback_clopen(chain, U, level) == pullback_clopen(chain, V, level)


def fibre_partition(chain: LevelChain, j: int, i: int) -> list[frozenset[int]]:
    """Blocks of ``X_j`` lying over each point of ``X_i``, indexed by that point."""
    chain._check_level(j)
    chain._check_level(i)
    if not i < j:
        raise AlgebraError(f"fibre partition needs a coarser level i < j, got i={i}, j={j}")
    blocks = [set() for _ in chain.points(i)]
    for x in chain.points(j):
        blocks[chain.project(x, j, i)].add(x)
    return [frozenset(b) for b in blocks]


def enumerate_clopens(chain: LevelChain, level: int) -> list[Clopen]:
    """Every subset of a level, ordered by size then lexicographically."""
    n = chain.sizes[level] if 0 <= level < chain.depth else None
    if n is None:
        raise AlgebraError(f"level {level} out of range")
    if n > CLOPEN_ENUMERATION_CAP:
        raise AlgebraError(f"level {level} has {n} points; enumeration is capped at {CLOPEN_ENUMERATION_CAP}")
    return [Clopen(level, frozenset(c)) for k in range(n + 1) for c in itertools.combinations(range(n), k)]


def subsets(points) -> Iterator[frozenset[int]]:
    pts = sorted(points)
    for k in range(len(pts) + 1):
        for c in itertools.combinations(pts, k):
            yield frozenset(c)


def set_partitions(points) -> Iterator[list[frozenset[int]]]:
    """All partitions of a finite set into non-empty blocks (the empty set has one)."""
    pts = sorted(points)
    if not pts:
        yield []
        return
    first, rest = pts[0], pts[1:]
    for part in set_partitions(rest):
        yield [frozenset({first})] + part
        for i in range(len(part)):
            yield part[:i] + [part[i] | {first}] + part[i + 1:]


class Cover(NamedTuple):
    union: frozenset[int]
    members: tuple[frozenset[int], ...]


def all_covers(points, max_members: int | None = None) -> Iterator[Cover]:
    """Every family of distinct subsets, read as a cover of its union.

    Includes the empty family.  Repeating a member never changes the sheaf
    sequence, so distinct members suffice.
    """
    subs = list(subsets(points))
    top = len(subs) if max_members is None else max_members
    for k in range(top + 1):
        for fam in itertools.combinations(range(len(subs)), k):
            members = tuple(subs[i] for i in fam)
            union = frozenset().union(*members)
            yield Cover(union, members)
