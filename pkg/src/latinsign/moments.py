"""Monomial integrals over SU(n): exact values, trace moments and Monte Carlo.

The exact value of the Haar integral of prod U_ij^alpha_ij with
|alpha| = k n is c_alpha * alpha! / factorial_ratio(n, k), where c_alpha is
the coefficient of X^alpha in det(X)^k.
"""

from __future__ import annotations

import functools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .combinatorics import MultiIndex, factorial_ratio, multi_factorial
from .detpower import (
    MAX_FD_SUPPORT,
    SparsePoly,
    TermBudgetExceeded,
    coefficient,
    coefficient_by_finite_difference,
    det_power,
    default_term_budget,
)

__all__ = [
    "MomentEstimate",
    "MomentSpec",
    "RectangularPartition",
    "exact_moment",
    "mc_expectation",
    "mc_moment",
    "mc_trace_moment",
    "moment_bound",
    "moment_bound_squared",
    "moment_report",
    "moment_vanishes",
    "rect_dimension",
    "rect_dimension_by_hooks",
    "sample_haar_su",
    "trace_power_moment_exact",
]

BOUND_FRACTION_BITS = 64
DEFAULT_CHUNK = 1 << 16


@dataclass(frozen=True)
class MomentSpec:
    """The monomial prod U_ij^alpha_ij integrated against Haar measure on SU(n)."""

    n: int
    alpha: MultiIndex

    def __post_init__(self) -> None:
        if self.alpha.n != self.n:
            raise ValueError(f"multiindex order {self.alpha.n} != {self.n}")

    @property
    def k(self) -> int | None:
        """|alpha| / n, or None when |alpha| is not a multiple of n."""
        q, r = divmod(self.alpha.total(), self.n)
        return None if r else q


@dataclass(frozen=True)
class RectangularPartition:
    """The partition (l, ..., l) with exactly n parts."""

    n: int
    l: int  # noqa: E741

    def __post_init__(self) -> None:
        if self.n < 1 or self.l < 0:
            raise ValueError(f"need n >= 1 and l >= 0, got n={self.n}, l={self.l}")


@dataclass(frozen=True)
class MomentEstimate:
    mean: complex
    std_error: float
    samples: int

    def within(self, exact: complex, sigmas: float = 4.0) -> bool:
        return abs(self.mean - exact) <= sigmas * self.std_error


def moment_vanishes(spec: MomentSpec) -> bool:
    """True when the integral is forced to zero by the row/column sum rule."""
    return not spec.alpha.is_balanced()


@functools.lru_cache(maxsize=16)
def _expansion(n: int, k: int, budget: int) -> SparsePoly:
    return det_power(n, k, budget)


def _coefficient(n: int, k: int, alpha: MultiIndex, term_budget: int | None,
                 workers: int | None) -> int:
    budget = default_term_budget() if term_budget is None else term_budget
    try:
        return coefficient(_expansion(n, k, budget), alpha)
    except TermBudgetExceeded:
        flat = alpha.flat()
        if max(flat, default=0) <= 1 and sum(flat) <= MAX_FD_SUPPORT:
            return coefficient_by_finite_difference(n, k, alpha, workers)
        raise


def exact_moment(spec: MomentSpec, term_budget: int | None = None,
                 workers: int | None = None) -> Fraction:
    """Exact Haar integral via c_alpha * alpha! / factorial_ratio(n, k).

    Raises:
        ValueError: if |alpha| is not a multiple of n.
        TermBudgetExceeded: if c_alpha is out of reach of both the full
            expansion and the finite-difference extractor.
    """
    k = spec.k
    if k is None:
        raise ValueError(
            f"|alpha| = {spec.alpha.total()} is not a multiple of n = {spec.n}; "
            "the integral vanishes (see moment_vanishes)"
        )
    c = _coefficient(spec.n, k, spec.alpha, term_budget, workers)
    return Fraction(c * multi_factorial(spec.alpha), factorial_ratio(spec.n, k))


def moment_bound_squared(spec: MomentSpec) -> Fraction:
    """alpha! * 0!...(n-1)! / (k!...(k+n-1)!), the square of the moment bound."""
    k = spec.k
    if k is None:
        raise ValueError(f"|alpha| = {spec.alpha.total()} is not a multiple of n = {spec.n}")
    return Fraction(multi_factorial(spec.alpha), factorial_ratio(spec.n, k))


def moment_bound(spec: MomentSpec) -> Fraction:
    """Square root of :func:`moment_bound_squared` in 64-bit fixed point, rounded up."""
    q = moment_bound_squared(spec)
    scale = 1 << (2 * BOUND_FRACTION_BITS)
    scaled = -((-q.numerator * scale) // q.denominator)  # ceil
    root = math.isqrt(scaled)
    if root * root < scaled:
        root += 1
    return Fraction(root, 1 << BOUND_FRACTION_BITS)


def rect_dimension(p: RectangularPartition) -> int:
    """(l n)! 0!...(n-1)! / (l!...(l+n-1)!), the number of standard n x l tableaux."""
    q, r = divmod(math.factorial(p.l * p.n), factorial_ratio(p.n, p.l))
    if r:
        raise ArithmeticError(f"inexact rectangular dimension for n={p.n}, l={p.l}")
    return q


def rect_dimension_by_hooks(p: RectangularPartition) -> int:
    hooks = 1
    for i in range(1, p.n + 1):
        for j in range(1, p.l + 1):
            hooks *= (p.n - i) + (p.l - j) + 1
    q, r = divmod(math.factorial(p.l * p.n), hooks)
    if r:
        raise ArithmeticError(f"inexact hook quotient for n={p.n}, l={p.l}")
    return q


def trace_power_moment_exact(n: int, l: int) -> int:  # noqa: E741
    """Exact Haar integral of tr(U)^(l n) over SU(n)."""
    return rect_dimension(RectangularPartition(n, l))


def sample_haar_su(n: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Haar-random element(s) of SU(n).

    Draws a Haar unitary from the QR factorization of a complex Ginibre
    matrix (with the phases of diag(R) moved into Q) and divides by the
    principal n-th root of its determinant. That last step only fixes the
    center up to an n-th root of unity, which every monomial of degree
    divisible by n ignores.
    """
    shape = (1 if size is None else size, n, n)
    if n == 1:
        out = np.ones(shape, dtype=np.complex128)
        return out[0] if size is None else out
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    bad = np.flatnonzero((np.abs(d) == 0).any(axis=-1))
    if bad.size:
        q[bad] = sample_haar_su(n, rng, bad.size)
        d = d.copy()
        d[bad] = 1.0
    q = q * (d / np.abs(d))[..., None, :]
    root = np.linalg.det(q) ** (1.0 / n)
    q /= root[..., None, None]
    return q[0] if size is None else q


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def _chunk_stats(n, fn, seed, chunk, count):
    u = sample_haar_su(n, _chunk_rng(seed, chunk), count)
    x = np.asarray(fn(u), dtype=np.complex128)
    mean = x.mean()
    m2 = float(np.sum(np.abs(x - mean) ** 2))
    return count, complex(mean), m2


def mc_expectation(
    n: int,
    fn: Callable[[np.ndarray], np.ndarray],
    samples: int,
    seed: int,
    workers: int | None = None,
    chunk_size: int = DEFAULT_CHUNK,
) -> MomentEstimate:
    """Monte Carlo mean of ``fn(U)`` for Haar U in SU(n).

    Samples are drawn in fixed-size chunks; chunk i uses its own Philox
    stream keyed by ``(seed, i)`` and chunk statistics are merged in chunk
    order, so the estimate depends only on (seed, samples, chunk_size).
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    counts = [chunk_size] * (samples // chunk_size)
    if samples % chunk_size:
        counts.append(samples % chunk_size)
    jobs = [(n, fn, seed, i, c) for i, c in enumerate(counts)]
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda job: _chunk_stats(*job), jobs))
    else:
        parts = [_chunk_stats(*job) for job in jobs]

    total, mean, m2 = 0, 0j, 0.0
    for cnt, cmean, cm2 in parts:
        # Chan et al. pairwise merge of mean and sum of squared deviations
        new_total = total + cnt
        delta = cmean - mean
        mean = mean + delta * (cnt / new_total)
        m2 = m2 + cm2 + abs(delta) ** 2 * total * cnt / new_total
        total = new_total
    if total > 1:
        std_error = math.sqrt(m2 / (total - 1)) / math.sqrt(total)
    else:
        std_error = float("inf")
    return MomentEstimate(mean, std_error, total)


def _monomial(alpha: MultiIndex) -> Callable[[np.ndarray], np.ndarray]:
    exps = np.array(alpha.entries, dtype=np.int64)

    def fn(u: np.ndarray) -> np.ndarray:
        return np.prod(u ** exps, axis=(-2, -1))

    return fn


def mc_moment(spec: MomentSpec, samples: int, seed: int, workers: int | None = None,
              chunk_size: int = DEFAULT_CHUNK) -> MomentEstimate:
    return mc_expectation(spec.n, _monomial(spec.alpha), samples, seed, workers, chunk_size)


def mc_trace_moment(n: int, l: int, samples: int, seed: int,  # noqa: E741
                    workers: int | None = None,
                    chunk_size: int = DEFAULT_CHUNK) -> MomentEstimate:
    """Monte Carlo estimate of the Haar integral of tr(U)^(l n)."""
    power = l * n

    def fn(u: np.ndarray) -> np.ndarray:
        return np.trace(u, axis1=-2, axis2=-1) ** power

    return mc_expectation(n, fn, samples, seed, workers, chunk_size)


def moment_report(spec: MomentSpec, samples: int | None = None, seed: int = 0,
                  workers: int | None = None, term_budget: int | None = None) -> dict:
    """JSON-ready report: exact value, bound and optional Monte Carlo estimate."""
    k = spec.k
    if k is None:
        exact, bound = Fraction(0), None
    else:
        exact = exact_moment(spec, term_budget, workers)
        bound = float(moment_bound(spec))
    report = {
        "n": spec.n,
        "alpha": [list(row) for row in spec.alpha.entries],
        "k": k,
        "exact": {"num": str(exact.numerator), "den": str(exact.denominator)},
        "bound": bound,
        "vanishes": moment_vanishes(spec),
    }
    if samples:
        est = mc_moment(spec, samples, seed, workers)
        report["mc"] = {
            "mean_re": est.mean.real,
            "mean_im": est.mean.imag,
            "stderr": est.std_error,
            "samples": est.samples,
            "seed": seed,
        }
    return report
