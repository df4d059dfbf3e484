import math
import random
from fractions import Fraction

import numpy as np
import pytest

from latinsign.combinatorics import MultiIndex, factorial_ratio, multi_factorial
from latinsign.detpower import coefficient, det_power
from latinsign.moments import (
    MomentSpec,
    RectangularPartition,
    exact_moment,
    mc_expectation,
    mc_moment,
    mc_trace_moment,
    moment_bound,
    moment_bound_squared,
    moment_report,
    moment_vanishes,
    rect_dimension,
    rect_dimension_by_hooks,
    sample_haar_su,
    trace_power_moment_exact,
)

SAMPLES = 10**6


def spec(rows):
    return MomentSpec(len(rows), MultiIndex.from_rows(rows))


def count_standard_tableaux(n, l):
    """Count fillings of the n x l rectangle increasing along rows and columns."""
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def count(shape):
        if sum(shape) == 0:
            return 1
        total = 0
        for i, row in enumerate(shape):
            # remove a corner cell from row i
            if row and (i + 1 == len(shape) or shape[i + 1] < row):
                total += count(shape[:i] + (row - 1,) + shape[i + 1:])
        return total

    return count((l,) * n)


def test_exact_moment_examples():
    assert exact_moment(spec([[1, 0], [0, 1]])) == Fraction(1, 2)
    assert exact_moment(spec([[0, 1], [1, 0]])) == Fraction(-1, 2)
    assert exact_moment(spec([[2, 0], [0, 2]])) == Fraction(1, 3)
    ones4 = exact_moment(MomentSpec(4, MultiIndex.ones(4)))
    assert ones4 == Fraction(576, factorial_ratio(4, 4))
    assert ones4 != 0


def test_exact_moment_order_five_uses_finite_differences():
    assert exact_moment(MomentSpec(5, MultiIndex.ones(5))) == 0


def test_exact_moment_rejects_degree_not_multiple_of_n():
    with pytest.raises(ValueError, match="multiple"):
        exact_moment(spec([[1, 0], [0, 0]]))


def test_moment_vanishes_examples():
    assert moment_vanishes(spec([[1, 0], [0, 0]]))
    assert moment_vanishes(spec([[2, 0], [0, 0]]))
    assert not moment_vanishes(spec([[1, 0], [0, 1]]))


def test_rect_dimension_examples():
    assert rect_dimension(RectangularPartition(2, 1)) == 1
    assert rect_dimension(RectangularPartition(2, 2)) == 2
    for l in range(6):
        assert rect_dimension(RectangularPartition(1, l)) == 1


def test_rect_dimension_paths_agree():
    for n in range(1, 7):
        for l in range(0, 7):
            p = RectangularPartition(n, l)
            assert rect_dimension(p) == rect_dimension_by_hooks(p)


def test_rect_dimension_counts_standard_tableaux():
    for n, l in [(2, 2), (2, 3), (3, 2), (3, 3), (2, 5), (4, 3)]:
        assert rect_dimension(RectangularPartition(n, l)) == count_standard_tableaux(n, l)


def test_trace_power_moment_examples():
    assert trace_power_moment_exact(2, 1) == 1
    assert trace_power_moment_exact(3, 1) == 1
    for n in range(1, 6):
        assert trace_power_moment_exact(n, 0) == 1


def test_rectangular_partition_validation():
    with pytest.raises(ValueError):
        RectangularPartition(0, 1)
    with pytest.raises(ValueError):
        RectangularPartition(2, -1)


def test_sample_haar_su_contract():
    rng = np.random.default_rng(11)
    assert np.array_equal(sample_haar_su(1, rng), np.ones((1, 1)))
    for n in range(2, 7):
        batch = sample_haar_su(n, rng, 500)
        gram = np.einsum("bji,bjk->bik", batch.conj(), batch)
        assert np.abs(gram - np.eye(n)).max() <= 1e-12
        assert np.abs(np.linalg.det(batch) - 1).max() <= 1e-12
        single = sample_haar_su(n, rng)
        assert single.shape == (n, n)


def test_mean_of_single_entry_is_zero():
    est = mc_moment(spec([[1, 0], [0, 0]]), SAMPLES, seed=101)
    assert est.samples == SAMPLES
    assert est.within(0)


@pytest.mark.parametrize("rows, seed", [
    ([[1, 0], [0, 1]], 1),
    ([[0, 1], [1, 0]], 2),
    ([[2, 0], [0, 2]], 3),
    ([[1, 0, 0], [0, 1, 0], [0, 0, 1]], 4),
    ([[1, 1], [1, 1]], 5),
])
def test_monte_carlo_matches_exact(rows, seed):
    s = spec(rows)
    est = mc_moment(s, SAMPLES, seed)
    assert est.within(complex(exact_moment(s)))
    assert est.std_error <= 5e-3


@pytest.mark.parametrize("n, l", [(2, 1), (2, 2), (3, 1)])
def test_trace_moment_monte_carlo(n, l):
    est = mc_trace_moment(n, l, SAMPLES, seed=20 + n + l)
    assert est.within(trace_power_moment_exact(n, l))


def test_monte_carlo_is_deterministic():
    s = spec([[1, 0], [0, 1]])
    a = mc_moment(s, 200_000, seed=9)
    b = mc_moment(s, 200_000, seed=9, workers=3)
    assert a == b
    assert mc_moment(s, 200_000, seed=10) != a


def test_haar_invariance_smoke():
    # fixed element of SU(3): a rotation times a diagonal phase of unit determinant
    theta = 0.7
    v = np.array([[math.cos(theta), -math.sin(theta), 0],
                  [math.sin(theta), math.cos(theta), 0],
                  [0, 0, 1]], dtype=complex)
    v = v @ np.diag(np.exp(1j * np.array([0.3, -0.5, 0.2])))
    assert abs(np.linalg.det(v) - 1) < 1e-12
    for make in (lambda u: np.trace(u, axis1=-2, axis2=-1) ** 3,
                 lambda u: np.abs(np.trace(u, axis1=-2, axis2=-1)) ** 2):
        plain = mc_expectation(3, make, 400_000, seed=77)
        shifted = mc_expectation(3, lambda u: make(v @ u), 400_000, seed=78)
        sigma = math.hypot(plain.std_error, shifted.std_error)
        assert abs(plain.mean - shifted.mean) <= 4 * sigma
        assert plain.within(1) and shifted.within(1)


def test_moment_bound_examples():
    b = moment_bound(spec([[1, 0], [0, 1]]))
    assert abs(float(b) - math.sqrt(0.5)) < 1e-15
    assert abs(exact_moment(spec([[1, 0], [0, 1]]))) <= b
    s = spec([[2, 0], [0, 2]])
    assert moment_bound_squared(s) == Fraction(4, 12)
    assert abs(float(moment_bound(s)) - math.sqrt(1 / 3)) < 1e-15
    assert abs(exact_moment(s)) <= moment_bound(s)
    with pytest.raises(ValueError):
        moment_bound(spec([[1, 0], [0, 0]]))


def test_moment_bound_rounds_up_in_fixed_point():
    s = spec([[1, 0], [0, 1]])
    b = moment_bound(s)
    assert b.denominator <= 2**64
    assert b * b >= moment_bound_squared(s)
    assert (b - Fraction(1, 2**64)) ** 2 < moment_bound_squared(s)


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_bound_holds_on_full_support(n, k):
    for alpha, c in det_power(n, k).items():
        s = MomentSpec(n, alpha)
        exact = exact_moment(s)
        assert exact == Fraction(c * multi_factorial(alpha), factorial_ratio(n, k))
        assert exact * exact <= moment_bound_squared(s)
        assert abs(exact) <= moment_bound(s)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_unbalanced_patterns_have_zero_coefficient(n):
    rng = random.Random(300 + n)
    found = 0
    while found < 20:
        k = rng.randint(1, 3)
        flat = [0] * (n * n)
        for _ in range(k * n):
            flat[rng.randrange(n * n)] += 1
        alpha = MultiIndex.from_flat(n, flat)
        if alpha.is_balanced():
            continue
        s = MomentSpec(n, alpha)
        assert moment_vanishes(s)
        assert coefficient(det_power(n, k), alpha) == 0
        assert exact_moment(s) == 0
        found += 1


def test_moment_report_shape():
    r = moment_report(spec([[1, 0], [0, 1]]), samples=1000, seed=5)
    assert r["exact"] == {"num": "1", "den": "2"}
    assert r["k"] == 1
    assert r["mc"]["samples"] == 1000 and r["mc"]["seed"] == 5
    zero = moment_report(spec([[1, 0], [0, 0]]))
    assert zero["exact"] == {"num": "0", "den": "1"} and zero["bound"] is None
