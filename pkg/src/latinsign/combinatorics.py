"""Exact combinatorial primitives: multiindices, permutations, factorial products.

Big integers are plain Python ``int``; exact rationals are
:class:`fractions.Fraction`, which is always reduced with a positive
denominator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "BigRational",
    "MultiIndex",
    "Permutation",
    "factorial",
    "factorial_ratio",
    "multi_factorial",
    "perm_sign",
    "superfactorial",
    "det_bareiss",
]

BigRational = Fraction


@dataclass(frozen=True)
class MultiIndex:
    """An n x n grid of nonnegative exponents.

    ``entries`` is a tuple of row tuples; ``entries[i][j]`` is the exponent
    of the variable in row ``i + 1`` and column ``j + 1``.
    """

    n: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"matrix order must be positive, got {self.n}")
        rows = tuple(tuple(int(a) for a in row) for row in self.entries)
        if len(rows) != self.n or any(len(row) != self.n for row in rows):
            raise ValueError(f"multiindex must be {self.n}x{self.n}")
        if any(a < 0 for row in rows for a in row):
            raise ValueError("multiindex entries must be nonnegative")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> MultiIndex:
        return cls(len(rows), tuple(tuple(r) for r in rows))

    @classmethod
    def from_flat(cls, n: int, flat: Sequence[int]) -> MultiIndex:
        """Build from a row-major exponent vector of length n*n."""
        if len(flat) != n * n:
            raise ValueError(f"expected {n * n} exponents, got {len(flat)}")
        return cls(n, tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(n)))

    @classmethod
    def zeros(cls, n: int) -> MultiIndex:
        return cls(n, ((0,) * n,) * n)

    @classmethod
    def ones(cls, n: int) -> MultiIndex:
        return cls(n, ((1,) * n,) * n)

    @classmethod
    def diagonal(cls, n: int, k: int = 1) -> MultiIndex:
        return cls(n, tuple(tuple(k if i == j else 0 for j in range(n)) for i in range(n)))

    @classmethod
    def antidiagonal(cls, n: int, k: int = 1) -> MultiIndex:
        return cls(n, tuple(tuple(k if i + j == n - 1 else 0 for j in range(n)) for i in range(n)))

    def flat(self) -> tuple[int, ...]:
        return tuple(a for row in self.entries for a in row)

    def total(self) -> int:
        return sum(self.flat())

    def row_sums(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.entries)

    def col_sums(self) -> tuple[int, ...]:
        return tuple(sum(col) for col in zip(*self.entries))

    def is_balanced(self) -> bool:
        """True when every row and column sum equals total / n."""
        t = self.total()
        if t % self.n:
            return False
        k = t // self.n
        return all(s == k for s in self.row_sums()) and all(s == k for s in self.col_sums())

    def permute_rows(self, tau: Permutation) -> MultiIndex:
        """Row ``tau(i)`` of the result is row ``i`` of ``self``."""
        rows: list[tuple[int, ...]] = [()] * self.n
        for i, row in enumerate(self.entries):
            rows[tau.images[i] - 1] = row
        return MultiIndex(self.n, tuple(rows))

    def __str__(self) -> str:
        return ";".join(",".join(str(a) for a in row) for row in self.entries)


@dataclass(frozen=True)
class Permutation:
    """A bijection of {1, ..., n}, stored 1-indexed: ``images[i - 1] = sigma(i)``."""

    images: tuple[int, ...]

    def __post_init__(self) -> None:
        images = tuple(int(x) for x in self.images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise ValueError(f"not a permutation of 1..{len(images)}: {images}")
        object.__setattr__(self, "images", images)

    @property
    def n(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def from_cycle(cls, n: int, cycle: Iterable[int]) -> Permutation:
        images = list(range(1, n + 1))
        cycle = list(cycle)
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            images[a - 1] = b
        return cls(tuple(images))

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __mul__(self, other: Permutation) -> Permutation:
        """Composition: ``(self * other)(i) == self(other(i))``."""
        if self.n != other.n:
            raise ValueError("cannot compose permutations of different degree")
        return Permutation(tuple(self.images[j - 1] for j in other.images))

    def inversions(self) -> int:
        im = self.images
        return sum(1 for i in range(len(im)) for j in range(i + 1, len(im)) if im[i] > im[j])

    def sign(self) -> int:
        return -1 if self.inversions() % 2 else 1

    def matrix(self) -> MultiIndex:
        """The permutation matrix as a multiindex (entry (i, sigma(i)) is 1)."""
        return MultiIndex(
            self.n,
            tuple(tuple(1 if j + 1 == s else 0 for j in range(self.n)) for s in self.images),
        )


def factorial(m: int) -> int:
    if m < 0:
        raise ValueError(f"factorial of negative number {m}")
    return math.factorial(m)


def multi_factorial(alpha: MultiIndex) -> int:
    """Product of the factorials of all entries of ``alpha``."""
    return math.prod(math.factorial(a) for a in alpha.flat())


def superfactorial(start: int, count: int) -> int:
    """start! * (start+1)! * ... * (start+count-1)!"""
    out = 1
    f = math.factorial(start)
    for j in range(count):
        if j:
            f *= start + j
        out *= f
    return out


def factorial_ratio(n: int, k: int) -> int:
    """k! (k+1)! ... (k+n-1)! / (0! 1! ... (n-1)!) as an exact integer.

    This is the dimension-count ratio that normalizes determinant-power
    coefficient identities; the quotient is always an integer.
    """
    if n < 1 or k < 0:
        raise ValueError(f"need n >= 1 and k >= 0, got n={n}, k={k}")
    num = superfactorial(k, n)
    den = superfactorial(0, n)
    q, r = divmod(num, den)
    if r:
        raise ArithmeticError(f"inexact factorial ratio for n={n}, k={k}")
    return q


def perm_sign(sigma: Permutation) -> int:
    return sigma.sign()


def det_bareiss(matrix: Sequence[Sequence[int]]) -> int:
    """Exact integer determinant by fraction-free Gaussian elimination."""
    a = [list(map(int, row)) for row in matrix]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]
