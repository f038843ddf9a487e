"""Partition and standard-tableau combinatorics for symmetric-group charge sectors.

Everything here is exact integer arithmetic; no floating point enters the
combinatorics.  Partitions are immutable value types in canonical form
(weakly decreasing positive parts, zero padding dropped), and tableau bases
are enumerated in last-letter order so that restriction to a subgroup is
block-contiguous downstream.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator


@dataclass(frozen=True)
class Partition:
    """Weakly decreasing positive integers; labels a charge sector."""

    parts: tuple[int, ...]

    def __post_init__(self):
        if not self.parts:
            raise ValueError("empty partition")
        for a, b in zip(self.parts, self.parts[1:]):
            if b > a:
                raise ValueError(f"parts not weakly decreasing: {self.parts}")
        if self.parts[-1] < 1:
            raise ValueError(f"parts must be positive: {self.parts}")

    @classmethod
    def of(cls, parts: Iterable[int]) -> "Partition":
        """Canonicalize: drop trailing zeros, e.g. (n, 0) -> (n,)."""
        kept = tuple(int(p) for p in parts if int(p) != 0)
        return cls(kept)

    @property
    def n(self) -> int:
        return sum(self.parts)

    @property
    def rows(self) -> int:
        return len(self.parts)

    def conjugate(self) -> "Partition":
        return Partition(tuple(sum(1 for p in self.parts if p > j)
                               for j in range(self.parts[0])))

    def removable_corners(self) -> list[tuple[int, int]]:
        """(row, col) of boxes whose removal leaves a partition, 0-indexed."""
        out = []
        for r, p in enumerate(self.parts):
            if r + 1 == len(self.parts) or p > self.parts[r + 1]:
                out.append((r, p - 1))
        return out

    def remove_corner(self, row: int) -> "Partition":
        new = list(self.parts)
        new[row] -= 1
        return Partition.of(new)

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def __str__(self) -> str:
        return "(" + ",".join(str(p) for p in self.parts) + ")"


@dataclass(frozen=True)
class StandardTableau:
    """Standard filling of a partition shape by 1..n, increasing along
    rows and down columns."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = sum(len(r) for r in self.rows)
        seen = sorted(v for r in self.rows for v in r)
        if seen != list(range(1, n + 1)):
            raise ValueError("entries must be exactly 1..n")
        for r in self.rows:
            if any(b <= a for a, b in zip(r, r[1:])):
                raise ValueError("rows must strictly increase")
        for i in range(1, len(self.rows)):
            upper = self.rows[i - 1]
            for j, v in enumerate(self.rows[i]):
                if v <= upper[j]:
                    raise ValueError("columns must strictly increase")

    @property
    def shape(self) -> Partition:
        return Partition(tuple(len(r) for r in self.rows))

    @property
    def n(self) -> int:
        return sum(len(r) for r in self.rows)

    def position(self, value: int) -> tuple[int, int]:
        """(row, col) of the box holding `value`, 0-indexed."""
        for i, row in enumerate(self.rows):
            for j, v in enumerate(row):
                if v == value:
                    return i, j
        raise ValueError(f"{value} not in tableau")

    def __str__(self) -> str:
        return "/".join("".join(f"[{v}]" for v in r) for r in self.rows)


def contents(tableau: StandardTableau) -> tuple[int, ...]:
    """Content vector: entry j-1 is col - row of the box holding j.

    The first entry is always 0 and the j-th Jucys-Murphy element is
    diagonal with exactly these integers on the corresponding basis vector.
    """
    n = tableau.n
    c = [0] * n
    for i, row in enumerate(tableau.rows):
        for j, v in enumerate(row):
            c[v - 1] = j - i
    return tuple(c)


def partitions(n: int, max_rows: int) -> list[Partition]:
    """All partitions of n with at most max_rows rows, reverse-lexicographic."""
    if n < 1 or max_rows < 1:
        raise ValueError("n and max_rows must be >= 1")
    return [Partition(p) for p in _partition_tuples(n, n, max_rows)]


@lru_cache(maxsize=None)
def _partition_tuples(n: int, max_part: int, max_rows: int) -> tuple[tuple[int, ...], ...]:
    if n == 0:
        return ((),)
    if max_rows == 0:
        return ()
    out = []
    for k in range(min(n, max_part), 0, -1):
        for rest in _partition_tuples(n - k, k, max_rows - 1):
            out.append((k,) + rest)
    return tuple(out)


def count_sectors(n: int, d: int) -> int:
    """Number of charge sectors of n qudits; equals floor(n/2)+1 for d=2."""
    return len(partitions(n, d))


def dim_irrep(shape: Partition) -> int:
    """Irrep dimension by the hook-length formula (exact integers)."""
    n = shape.n
    hooks = 1
    for i, rowlen in enumerate(shape.parts):
        for j in range(rowlen):
            arm = rowlen - j - 1
            leg = sum(1 for k in range(i + 1, len(shape.parts)) if shape.parts[k] > j)
            hooks *= arm + leg + 1
    dim, rem = divmod(math.factorial(n), hooks)
    if rem:  # cannot happen for a valid shape; guards corrupted input
        raise ArithmeticError(f"hook product does not divide {n}! for {shape}")
    return dim


@lru_cache(maxsize=None)
def _standard_tableaux_cached(parts: tuple[int, ...]) -> tuple[StandardTableau, ...]:
    if sum(parts) == 1:
        return (StandardTableau(((1,),)),)
    shape = Partition(parts)
    n = shape.n
    out = []
    # Last-letter order: recurse over the corner holding n, lowest row first,
    # so restriction to entries 1..m groups the basis contiguously by shape.
    for row, _col in sorted(shape.removable_corners(), key=lambda rc: -rc[0]):
        sub = shape.remove_corner(row)
        for t in _standard_tableaux_cached(sub.parts):
            new_rows = [list(r) for r in t.rows]
            if row == len(new_rows):
                new_rows.append([])
            new_rows[row].append(n)
            out.append(StandardTableau(tuple(tuple(r) for r in new_rows)))
    return tuple(out)


def standard_tableaux(shape: Partition) -> tuple[StandardTableau, ...]:
    """All standard tableaux of the shape, in last-letter order."""
    return _standard_tableaux_cached(shape.parts)


def multiplicity(shape: Partition, d: int) -> int:
    """Count of semistandard fillings with entries in 1..d.

    Computed by the classical column-shifted product formula; zero whenever
    the shape has more than d rows.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if shape.rows > d:
        return 0
    lam = list(shape.parts) + [0] * (d - shape.rows)
    num = 1
    den = 1
    for i in range(d):
        for j in range(i + 1, d):
            num *= lam[i] - lam[j] + j - i
            den *= j - i
    count, rem = divmod(num, den)
    if rem:
        raise ArithmeticError("non-integer semistandard count")
    return count


def branch_restrict(shape: Partition, m: int) -> dict[Partition, int]:
    """Restriction multiplicities after n - m single-corner removals.

    Returns {partition of m: number of removal chains reaching it}.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > shape.n:
        raise ValueError(f"m={m} exceeds box count {shape.n}")
    level = Counter({shape: 1})
    for _ in range(shape.n - m):
        nxt: Counter = Counter()
        for p, mult in level.items():
            for row, _col in p.removable_corners():
                nxt[p.remove_corner(row)] += mult
        level = nxt
    return dict(level)
