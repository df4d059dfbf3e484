"""Latin squares, their sign, and exact even/odd censuses by enumeration."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .combinatorics import MultiIndex, Permutation
from .detpower import (
    TermBudgetExceeded,
    coefficient,
    coefficient_by_finite_difference,
    det_power,
)

__all__ = [
    "MAX_CENSUS_ORDER",
    "CensusInfeasible",
    "LatinCensus",
    "LatinSquare",
    "PrefixCount",
    "census",
    "census_partials",
    "coefficient_all_ones",
    "global_sign",
    "iter_latin_squares",
    "signed_difference_via_coefficient",
    "square_sign",
    "to_permutation_tuple",
]

MAX_CENSUS_ORDER = 6


class CensusInfeasible(ValueError):
    pass


def global_sign(n: int) -> int:
    """(-1)^(n(n-1)/2)"""
    return -1 if (n * (n - 1) // 2) % 2 else 1


@dataclass(frozen=True)
class LatinSquare:
    cells: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        cells = tuple(tuple(int(x) for x in row) for row in self.cells)
        n = len(cells)
        want = list(range(1, n + 1))
        if n == 0 or any(len(row) != n for row in cells):
            raise ValueError("a Latin square must be a nonempty square grid")
        if any(sorted(row) != want for row in cells):
            raise ValueError("every row must be a permutation of 1..n")
        if any(sorted(col) != want for col in zip(*cells)):
            raise ValueError("every column must be a permutation of 1..n")
        object.__setattr__(self, "cells", cells)

    @property
    def n(self) -> int:
        return len(self.cells)

    def swap_columns(self, a: int, b: int) -> LatinSquare:
        """Swap the 1-indexed columns ``a`` and ``b``."""
        rows = []
        for row in self.cells:
            row = list(row)
            row[a - 1], row[b - 1] = row[b - 1], row[a - 1]
            rows.append(tuple(row))
        return LatinSquare(tuple(rows))


def to_permutation_tuple(sq: LatinSquare) -> tuple[Permutation, ...]:
    """sigma_i maps each row to the column holding symbol i in that row."""
    n = sq.n
    images = [[0] * n for _ in range(n)]
    for r, row in enumerate(sq.cells):
        for c, s in enumerate(row):
            images[s - 1][r] = c + 1
    return tuple(Permutation(tuple(im)) for im in images)


def square_sign(sq: LatinSquare) -> int:
    sign = global_sign(sq.n)
    for sigma in to_permutation_tuple(sq):
        sign *= sigma.sign()
    return sign


def iter_latin_squares(n: int) -> Iterator[LatinSquare]:
    """All Latin squares of order n in row-major, lowest-symbol-first order."""
    if n < 1:
        raise ValueError(f"order must be positive, got {n}")
    full = (1 << n) - 1
    grid = [[0] * n for _ in range(n)]
    rowmask = [0] * n
    colmask = [0] * n

    def fill(p: int) -> Iterator[LatinSquare]:
        if p == n * n:
            yield LatinSquare(tuple(tuple(row) for row in grid))
            return
        r, c = divmod(p, n)
        free = full & ~rowmask[r] & ~colmask[c]
        while free:
            low = free & -free
            free ^= low
            grid[r][c] = low.bit_length()
            rowmask[r] |= low
            colmask[c] |= low
            yield from fill(p + 1)
            rowmask[r] ^= low
            colmask[c] ^= low

    yield from fill(0)


@dataclass(frozen=True)
class LatinCensus:
    n: int
    even: int
    odd: int

    @property
    def total(self) -> int:
        return self.even + self.odd

    @property
    def signed_difference(self) -> int:
        return self.even - self.odd

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "total": str(self.total),
            "even": str(self.even),
            "odd": str(self.odd),
            "signed_difference": str(self.signed_difference),
        }


@dataclass(frozen=True)
class PrefixCount:
    """Counts of squares whose first row is ``first_row`` (1-indexed symbols)."""

    first_row: tuple[int, ...]
    even: int
    odd: int

    def to_json(self) -> dict:
        return {
            "prefix": list(self.first_row),
            "even": str(self.even),
            "odd": str(self.odd),
        }

    @classmethod
    def from_json(cls, obj: dict) -> PrefixCount:
        return cls(tuple(int(x) for x in obj["prefix"]), int(obj["even"]), int(obj["odd"]))


def _check_order(n: int) -> None:
    if n < 1:
        raise CensusInfeasible(f"order must be positive, got {n}")
    if n > MAX_CENSUS_ORDER:
        raise CensusInfeasible(
            f"census of order {n} is refused: exhaustive enumeration is infeasible "
            f"beyond n={MAX_CENSUS_ORDER} (there are about 6.1e13 squares of order 7)"
        )


def census_partials(
    n: int, workers: int | None = None, skip: Iterable[Sequence[int]] = ()
) -> Iterator[PrefixCount]:
    """Yield even/odd counts per first row, in lexicographic order of first rows.

    Each first row is expanded into every compatible second row; those
    two-row prefixes are the independent tasks handed to the compiled
    enumerator. First rows listed in ``skip`` are not recomputed.
    """
    _check_order(n)
    from . import _kernels

    skipped = {tuple(row) for row in skip}
    g = global_sign(n)
    depth = min(2, n - 1)
    for first in itertools.permutations(range(n)):
        label = tuple(s + 1 for s in first)
        if label in skipped:
            continue
        if depth == 0:
            prefixes = np.zeros((1, 0, n), dtype=np.int64)
        elif depth == 1:
            prefixes = np.array([[first]], dtype=np.int64)
        else:
            seconds = [
                sec for sec in itertools.permutations(range(n))
                if all(a != b for a, b in zip(first, sec))
            ]
            prefixes = np.array([[first, sec] for sec in seconds], dtype=np.int64)
        with _kernels.thread_limit(workers):
            counts = _kernels.census_prefixes(n, prefixes, depth, _kernels._POPCOUNT)
        raw_even, raw_odd = (int(v) for v in counts.sum(axis=0))
        if g == 1:
            yield PrefixCount(label, raw_even, raw_odd)
        else:
            yield PrefixCount(label, raw_odd, raw_even)


def census(
    n: int, workers: int | None = None, partials: Iterable[PrefixCount] | None = None
) -> LatinCensus:
    """Exact L(n), L_even(n), L_odd(n) by exhaustive enumeration (n <= 6)."""
    _check_order(n)
    if partials is None:
        partials = census_partials(n, workers)
    seen = set()
    even = odd = 0
    for part in partials:
        if part.first_row in seen:
            raise ValueError(f"duplicate prefix {part.first_row}")
        seen.add(part.first_row)
        even += part.even
        odd += part.odd
    expected = math.factorial(n)
    if len(seen) != expected:
        raise ValueError(f"census of order {n} covers {len(seen)} of {expected} first rows")
    result = LatinCensus(n, even, odd)
    # L(n) = n! (n-1)! * (number of reduced squares)
    if result.total % (math.factorial(n) * math.factorial(n - 1)):
        raise ArithmeticError(f"L({n}) = {result.total} fails the reduced-square divisibility check")
    return result


def coefficient_all_ones(
    n: int, method: str = "auto", term_budget: int | None = None, workers: int | None = None
) -> tuple[int, str]:
    """Coefficient of prod X_ij in det(X)^n and the method that produced it.

    ``method`` is ``"expansion"``, ``"finite-difference"`` or ``"auto"``
    (expansion within the term budget, else finite differences).
    """
    ones = MultiIndex.ones(n)
    if method not in ("auto", "expansion", "finite-difference"):
        raise ValueError(f"unknown method {method!r}")
    if method in ("auto", "expansion"):
        try:
            return coefficient(det_power(n, n, term_budget), ones), "expansion"
        except TermBudgetExceeded:
            if method == "expansion":
                raise
    return coefficient_by_finite_difference(n, n, ones, workers), "finite-difference"


def signed_difference_via_coefficient(
    n: int, method: str = "auto", term_budget: int | None = None, workers: int | None = None
) -> int:
    """L_even(n) - L_odd(n) from the all-ones coefficient of det(X)^n."""
    c, _ = coefficient_all_ones(n, method, term_budget, workers)
    return global_sign(n) * c
