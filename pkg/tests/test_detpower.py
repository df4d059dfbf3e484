import itertools
import random
from collections import Counter

import pytest

from latinsign.combinatorics import MultiIndex, Permutation, det_bareiss, factorial_ratio
from latinsign.detpower import (
    SparsePoly,
    TermBudgetExceeded,
    coefficient,
    coefficient_by_finite_difference,
    det_poly,
    det_power,
    parse_dump,
    verify_identity,
)


def brute_force_det_power(n, k):
    """Expand det(X)^k as a sum over k-tuples of permutations."""
    perms = [Permutation(p) for p in itertools.permutations(range(1, n + 1))]
    acc = Counter()
    for combo in itertools.product(perms, repeat=k):
        exps = [0] * (n * n)
        sign = 1
        for sigma in combo:
            sign *= sigma.sign()
            for i in range(n):
                exps[i * n + sigma.images[i] - 1] += 1
        acc[tuple(exps)] += sign
    return {e: c for e, c in acc.items() if c}


def as_flat_dict(p):
    return {alpha.flat(): c for alpha, c in p.items()}


def test_det_poly_small_orders():
    assert as_flat_dict(det_poly(1)) == {(1,): 1}
    assert as_flat_dict(det_poly(2)) == {(1, 0, 0, 1): 1, (0, 1, 1, 0): -1}
    p3 = det_poly(3)
    assert len(p3) == 6
    assert sorted(p3.terms.values()) == [-1, -1, -1, 1, 1, 1]


def test_det_poly_rejects_zero_order():
    with pytest.raises(ValueError):
        det_poly(0)


def test_det_power_examples():
    assert as_flat_dict(det_power(2, 2)) == {
        (2, 0, 0, 2): 1,
        (1, 1, 1, 1): -2,
        (0, 2, 2, 0): 1,
    }
    for n in (1, 2, 3, 5):
        assert as_flat_dict(det_power(n, 0)) == {(0,) * (n * n): 1}
    assert det_power(3, 1) == det_poly(3)


@pytest.mark.parametrize("n, k", [(1, 3), (2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (4, 2)])
def test_det_power_matches_brute_force(n, k):
    assert as_flat_dict(det_power(n, k)) == brute_force_det_power(n, k)


def test_coefficient_examples():
    assert coefficient(det_power(2, 2), MultiIndex.ones(2)) == -2
    assert coefficient(det_power(2, 1), MultiIndex.diagonal(2)) == 1
    assert coefficient(det_power(3, 2), MultiIndex.from_rows([[2, 0, 0], [0, 2, 0], [0, 1, 1]])) == 0
    with pytest.raises(ValueError):
        coefficient(det_power(2, 1), MultiIndex.ones(3))


@pytest.mark.parametrize("n", range(1, 5))
@pytest.mark.parametrize("k", range(0, 5))
def test_support_has_all_line_sums_k(n, k):
    for alpha, c in det_power(n, k).items():
        assert c != 0
        assert set(alpha.row_sums()) == {k}
        assert set(alpha.col_sums()) == {k}


@pytest.mark.parametrize("n, k", [(2, 1), (2, 2), (2, 3), (2, 4), (2, 5), (2, 6),
                                  (3, 1), (3, 2), (3, 3), (3, 4),
                                  (4, 1), (4, 2), (4, 3), (5, 1), (5, 2)])
def test_identity_holds(n, k):
    report = verify_identity(n, k)
    assert report.equal
    assert report.rhs == factorial_ratio(n, k)


def test_identity_examples():
    assert (verify_identity(2, 1).lhs, verify_identity(2, 1).rhs) == (2, 2)
    assert (verify_identity(2, 2).lhs, verify_identity(2, 2).rhs) == (12, 12)
    for n in range(1, 5):
        r = verify_identity(n, 0)
        assert (r.lhs, r.rhs, r.term_count) == (1, 1, 1)


def test_finite_difference_examples():
    assert coefficient_by_finite_difference(2, 2, MultiIndex.ones(2)) == -2
    assert coefficient_by_finite_difference(2, 1, MultiIndex.diagonal(2)) == 1
    c = coefficient_by_finite_difference(4, 4, MultiIndex.ones(4))
    assert (-1) ** 6 * c == 576


def test_finite_difference_rejects_bad_patterns():
    with pytest.raises(ValueError):
        coefficient_by_finite_difference(2, 2, MultiIndex.from_rows([[2, 0], [0, 2]]))
    with pytest.raises(ValueError):
        coefficient_by_finite_difference(6, 6, MultiIndex.ones(6))


@pytest.mark.parametrize("n", range(1, 5))
@pytest.mark.parametrize("k", range(0, 5))
def test_finite_difference_agrees_with_expansion(n, k):
    p = det_power(n, k)
    size = n * n
    if size <= 9:
        patterns = itertools.product((0, 1), repeat=size)
    else:
        # every pattern of the right degree, plus a sample of the rest
        right = [
            tuple(1 if i in s else 0 for i in range(size))
            for s in map(set, itertools.combinations(range(size), k * n))
        ]
        rng = random.Random(n * 10 + k)
        other = [tuple(rng.randint(0, 1) for _ in range(size)) for _ in range(200)]
        patterns = right + other
    for flat in patterns:
        alpha = MultiIndex.from_flat(n, flat)
        assert coefficient_by_finite_difference(n, k, alpha) == coefficient(p, alpha)


@pytest.mark.parametrize("n", range(2, 5))
def test_row_permutation_multiplies_by_sign_power(n):
    rng = random.Random(n)
    for k in range(1, 4):
        p = det_power(n, k)
        terms = list(p.items())
        for _ in range(20):
            images = list(range(1, n + 1))
            rng.shuffle(images)
            tau = Permutation(tuple(images))
            alpha, c = rng.choice(terms)
            assert coefficient(p, alpha.permute_rows(tau)) == tau.sign() ** k * c


def test_evaluation_matches_bareiss_power():
    rng = random.Random(2024)
    for n in range(1, 5):
        for k in range(0, 4):
            p = det_power(n, k)
            for _ in range(20):
                m = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)]
                assert p.evaluate(m) == det_bareiss(m) ** k


def test_term_budget_refusal_reports_prediction():
    with pytest.raises(TermBudgetExceeded) as info:
        det_power(4, 3, term_budget=100)
    assert info.value.predicted > 100
    assert "finite-difference" in str(info.value)
    with pytest.raises(TermBudgetExceeded):
        verify_identity(5, 5)


def test_term_budget_from_environment(monkeypatch):
    monkeypatch.setenv("LATINSIGN_TERM_BUDGET", "10")
    with pytest.raises(TermBudgetExceeded):
        det_power(3, 2)


def test_dump_format_round_trip():
    p = det_power(2, 2)
    text = p.dump()
    assert text == "1 0 2 2 0\n-2 1 1 1 1\n1 2 0 0 2\n"
    assert parse_dump(text) == p
    q = det_power(3, 3)
    lines = q.dump().splitlines()
    keys = [tuple(map(int, line.split()[1:])) for line in lines]
    assert keys == sorted(keys)
    assert parse_dump(q.dump()) == q


def test_sparse_poly_pruned_multiply():
    d = det_poly(2)
    assert d.mul(d, max_line=1).terms == {}
    assert d.mul(d, max_line=2) == det_power(2, 2)
    assert SparsePoly(2, {0: 0}).terms == {}
