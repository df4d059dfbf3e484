"""Exact expansion of det(X)^k as a sparse polynomial in the n*n entries of X.

Monomials are keyed by their row-major exponent vector packed one byte per
exponent into a Python int (the entry in row 1, column 1 is the most
significant byte), so multiplying monomials is integer addition and integer
order coincides with lexicographic order of the exponent vectors.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .combinatorics import MultiIndex, Permutation, factorial_ratio, multi_factorial

__all__ = [
    "DEFAULT_TERM_BUDGET",
    "IdentityReport",
    "SparsePoly",
    "TermBudgetExceeded",
    "coefficient",
    "coefficient_by_finite_difference",
    "det_poly",
    "det_power",
    "parse_dump",
    "verify_identity",
]

DEFAULT_TERM_BUDGET = 10**7
MAX_FD_SUPPORT = 30
_MAX_EXPONENT = 255


def default_term_budget() -> int:
    return int(os.environ.get("LATINSIGN_TERM_BUDGET", DEFAULT_TERM_BUDGET))


class TermBudgetExceeded(RuntimeError):
    """Raised when an expansion is predicted to exceed the term budget."""

    def __init__(self, n: int, k: int, predicted: int, budget: int):
        self.n, self.k, self.predicted, self.budget = n, k, predicted, budget
        super().__init__(
            f"det(X)^{k} for n={n} is predicted to need up to {predicted} terms "
            f"(budget {budget}); raise the budget or use the finite-difference "
            f"coefficient extractor for 0/1 exponent patterns"
        )


def _pack(n: int, flat: Sequence[int]) -> int:
    key = 0
    for e in flat:
        if e > _MAX_EXPONENT:
            raise ValueError(f"exponent {e} does not fit in one byte")
        key = (key << 8) | e
    return key


def _unpack(n: int, key: int) -> tuple[int, ...]:
    return tuple(key.to_bytes(n * n, "big"))


class SparsePoly:
    """Polynomial in the variables X_ij with exact integer coefficients.

    Zero coefficients are never stored. ``terms`` maps packed monomial keys
    to coefficients and is kept in ascending key order.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: dict[int, int] | None = None):
        self.n = n
        items = sorted((k, c) for k, c in (terms or {}).items() if c)
        self.terms: dict[int, int] = dict(items)

    @classmethod
    def constant(cls, n: int, value: int = 1) -> SparsePoly:
        return cls(n, {0: value})

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __repr__(self) -> str:
        return f"SparsePoly(n={self.n}, terms={len(self.terms)})"

    def key_of(self, alpha: MultiIndex) -> int:
        if alpha.n != self.n:
            raise ValueError(f"multiindex order {alpha.n} != polynomial order {self.n}")
        return _pack(self.n, alpha.flat())

    def key_bytes(self, key: int) -> bytes:
        return key.to_bytes(self.n * self.n, "big")

    def items(self) -> Iterator[tuple[MultiIndex, int]]:
        for key, c in self.terms.items():
            yield MultiIndex.from_flat(self.n, _unpack(self.n, key)), c

    def mul(self, other: SparsePoly, max_line: int | None = None) -> SparsePoly:
        """Product, optionally dropping monomials with a row or column sum above ``max_line``."""
        if other.n != self.n:
            raise ValueError("polynomials over different matrix orders")
        acc: dict[int, int] = {}
        get = acc.get
        right = list(other.terms.items())
        for ka, ca in self.terms.items():
            for kb, cb in right:
                key = ka + kb
                acc[key] = get(key, 0) + ca * cb
        if max_line is not None:
            acc = {k: c for k, c in acc.items() if _max_line(self.n, k) <= max_line}
        return SparsePoly(self.n, acc)

    def evaluate(self, matrix: Sequence[Sequence[int]]) -> int:
        values = [int(x) for row in matrix for x in row]
        total = 0
        for key, c in self.terms.items():
            term = c
            for v, e in zip(values, _unpack(self.n, key)):
                if e:
                    term *= v**e
            total += term
        return total

    def dump(self) -> str:
        """One line per term: ``<coeff> <e11> <e12> ... <enn>``, in key order."""
        lines = []
        for key, c in self.terms.items():
            lines.append(" ".join([str(c), *map(str, _unpack(self.n, key))]))
        return "\n".join(lines) + ("\n" if lines else "")


def _max_line(n: int, key: int) -> int:
    e = _unpack(n, key)
    rows = (sum(e[i * n:(i + 1) * n]) for i in range(n))
    cols = (sum(e[j::n]) for j in range(n))
    return max(itertools.chain(rows, cols))


def parse_dump(text: str) -> SparsePoly:
    terms: dict[int, int] = {}
    n = None
    for line in text.splitlines():
        if not line.strip():
            continue
        coeff, *exps = (int(tok) for tok in line.split())
        size = math.isqrt(len(exps))
        if size * size != len(exps):
            raise ValueError(f"term has {len(exps)} exponents, not a square count")
        if n is None:
            n = size
        elif n != size:
            raise ValueError("inconsistent term widths in dump")
        terms[_pack(n, exps)] = coeff
    if n is None:
        raise ValueError("empty dump carries no matrix order")
    return SparsePoly(n, terms)


def det_poly(n: int) -> SparsePoly:
    """Leibniz expansion of det(X): one signed term per permutation."""
    if n < 1:
        raise ValueError(f"matrix order must be positive, got {n}")
    terms = {}
    for images in itertools.permutations(range(1, n + 1)):
        sigma = Permutation(images)
        terms[_pack(n, sigma.matrix().flat())] = sigma.sign()
    return SparsePoly(n, terms)


def det_power(n: int, k: int, term_budget: int | None = None) -> SparsePoly:
    """Expand det(X)^k by repeated multiplication with det(X).

    Each factor adds exactly one to every row and column sum, so the line
    sum pruning bound k is never hit and is not re-checked here.

    Raises:
        TermBudgetExceeded: if (current terms) * n! exceeds the budget
            before any multiplication step.
    """
    if k < 0:
        raise ValueError(f"power must be nonnegative, got {k}")
    if k > _MAX_EXPONENT:
        raise ValueError(f"power {k} exceeds the one-byte exponent limit")
    budget = default_term_budget() if term_budget is None else term_budget
    d = det_poly(n)
    nfact = math.factorial(n)
    out = SparsePoly.constant(n)
    for _ in range(k):
        predicted = len(out) * nfact
        if predicted > budget:
            raise TermBudgetExceeded(n, k, predicted, budget)
        out = out.mul(d)
    return out


def coefficient(p: SparsePoly, alpha: MultiIndex) -> int:
    if any(a > _MAX_EXPONENT for a in alpha.flat()):
        return 0
    return p.terms.get(p.key_of(alpha), 0)


@dataclass(frozen=True)
class IdentityReport:
    n: int
    k: int
    lhs: int
    rhs: int
    term_count: int

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "lhs": str(self.lhs),
            "rhs": str(self.rhs),
            "term_count": self.term_count,
            "equal": self.equal,
        }


def verify_identity(n: int, k: int, term_budget: int | None = None) -> IdentityReport:
    """Compare sum of c_alpha^2 * alpha! over det(X)^k with factorial_ratio(n, k)."""
    p = det_power(n, k, term_budget)
    lhs = sum(c * c * multi_factorial(alpha) for alpha, c in p.items())
    return IdentityReport(n, k, lhs, factorial_ratio(n, k), len(p))


def _hadamard_bound(row_counts: Sequence[int]) -> int:
    # |det| <= prod of row norms for entries in {-1, 0, 1}
    return math.isqrt(math.prod(row_counts))


def coefficient_by_finite_difference(
    n: int, k: int, alpha: MultiIndex, workers: int | None = None
) -> int:
    """c_alpha of det(X)^k for a 0/1 pattern, without expanding the power.

    Uses the polarization identity: with the support variables set to signs
    eps and all others zero, 2^-m * sum(prod(eps) * det(A_eps)^k) collects
    the monomials odd in every support variable; when |alpha| = k*n that is
    exactly the squarefree monomial X^alpha.
    """
    if alpha.n != n:
        raise ValueError(f"multiindex order {alpha.n} != {n}")
    if k < 0:
        raise ValueError(f"power must be nonnegative, got {k}")
    flat = alpha.flat()
    if any(a > 1 for a in flat):
        raise ValueError("finite-difference extraction needs a 0/1 exponent pattern")
    support = [i for i, a in enumerate(flat) if a]
    m = len(support)
    if m > MAX_FD_SUPPORT:
        raise ValueError(f"support of size {m} exceeds the limit {MAX_FD_SUPPORT}")
    if m != k * n:
        return 0
    from . import _kernels

    rows = np.array([i // n for i in support], dtype=np.int64)
    cols = np.array([i % n for i in support], dtype=np.int64)
    hbound = _hadamard_bound([sum(alpha.entries[i]) for i in range(n)])
    chunks = max(1, min(64, 1 << max(0, m - 10)))
    with _kernels.thread_limit(workers):
        hist = _kernels.signed_det_histogram(n, rows, cols, hbound, chunks)
    total = sum(int(v) * (d - hbound) ** k for d, v in enumerate(hist) if v)
    q, r = divmod(total, 1 << m)
    if r:
        raise ArithmeticError("polarization sum not divisible by 2^m")
    return q
