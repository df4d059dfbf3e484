"""Numerical ledgers for the growth of the factorial ratio and of L(n).

Statements of the form f(n) = g(n)(1 + o(1)) have no rate attached, so they
are tabulated and trend-checked rather than compared against a tolerance.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import astuple, dataclass, fields
from typing import Mapping

__all__ = [
    "ASYMPTOTIC_CONSTANT",
    "BoundLedgerRow",
    "asymptotic_residual",
    "bigint_log",
    "corollary_constants",
    "ledger",
    "ledger_csv",
    "log_factorial_ratio",
    "log_factorial_ratio_direct",
    "vlw_log_estimate",
]

MAX_LEDGER_ORDER = 10_000
ASYMPTOTIC_CONSTANT = 1.5 - math.log(4.0)


def _kahan_sum(values) -> float:
    total = 0.0
    comp = 0.0
    for v in values:
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def log_factorial_ratio(n: int) -> float:
    """log(n! (n+1)! ... (2n-1)! / (0! 1! ... (n-1)!)) from the double sum.

    The double sum over a in 1..n and b in a..a+n-1 of log b is regrouped by
    how often each b occurs, which is min(b, n, 2n - b) times.
    """
    if not 1 <= n <= MAX_LEDGER_ORDER:
        raise ValueError(f"n must lie in 1..{MAX_LEDGER_ORDER}, got {n}")
    return _kahan_sum(min(b, n, 2 * n - b) * math.log(b) for b in range(2, 2 * n))


def log_factorial_ratio_direct(n: int) -> float:
    """Same quantity as a difference of log-factorials (lgamma)."""
    if not 1 <= n <= MAX_LEDGER_ORDER:
        raise ValueError(f"n must lie in 1..{MAX_LEDGER_ORDER}, got {n}")
    return math.fsum(math.lgamma(n + j + 1) - math.lgamma(j + 1) for j in range(n))


def bigint_log(x: int) -> float:
    """Natural log of a positive integer of any size."""
    if x <= 0:
        raise ValueError("log of a nonpositive integer")
    shift = max(0, x.bit_length() - 64)
    return math.log(x >> shift) + shift * math.log(2.0)


def asymptotic_residual(n: int) -> float:
    """(log_factorial_ratio(n) - n^2 log n) / n^2 + (3/2 - log 4); tends to 0."""
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    n2 = n * n
    return (log_factorial_ratio(n) - n2 * math.log(n)) / n2 + ASYMPTOTIC_CONSTANT


def vlw_log_estimate(n: int) -> float:
    """Leading-order log L(n): n^2 log n - 2 n^2."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    return n * n * math.log(n) - 2.0 * n * n


@dataclass(frozen=True)
class CorollaryConstants:
    two_e_quarter: float
    four_over_root_e: float

    def formatted(self, digits: int = 10) -> dict[str, str]:
        return {
            "2e^(1/4)": f"{self.two_e_quarter:.{digits - 1}f}",
            "4/sqrt(e)": f"{self.four_over_root_e:.{digits - 1}f}",
        }


def _truncate(x: float, decimals: int) -> str:
    scale = 10**decimals
    return f"{math.floor(x * scale) / scale:.{decimals}f}"


def corollary_constants() -> CorollaryConstants:
    """The exponential bases 2 e^(1/4) and 4 / sqrt(e), checked against 2.56805 and 2.42612."""
    consts = CorollaryConstants(2.0 * math.exp(0.25), 4.0 / math.sqrt(math.e))
    if _truncate(consts.two_e_quarter, 5) != "2.56805":
        raise ArithmeticError(f"2e^(1/4) = {consts.two_e_quarter!r}")
    if _truncate(consts.four_over_root_e, 5) != "2.42612":
        raise ArithmeticError(f"4/sqrt(e) = {consts.four_over_root_e!r}")
    if not consts.four_over_root_e < consts.two_e_quarter:
        raise ArithmeticError("improved base is not smaller")
    return consts


@dataclass(frozen=True)
class BoundLedgerRow:
    n: int
    log_factorial_ratio: float
    main_term: float
    correction: float
    vlw_log_L: float
    ratio_log: float | None

    def __post_init__(self) -> None:
        direct = log_factorial_ratio_direct(self.n)
        scale = max(1.0, abs(direct))
        if abs(direct - self.log_factorial_ratio) > 1e-9 * scale:
            raise ArithmeticError(f"log factorial ratio paths disagree at n={self.n}")


def ledger(n_max: int, signed_differences: Mapping[int, tuple[int, int]] | None = None
           ) -> list[BoundLedgerRow]:
    """Ledger rows for n = 1..n_max.

    ``signed_differences`` maps n to (L_even - L_odd, L(n)); where given and
    the difference is nonzero, ``ratio_log`` is log|diff| - log L(n) / 2.
    """
    signed_differences = signed_differences or {}
    rows = []
    for n in range(1, n_max + 1):
        ratio_log = None
        if n in signed_differences:
            diff, total = signed_differences[n]
            if diff:
                ratio_log = bigint_log(abs(diff)) - 0.5 * bigint_log(total)
        rows.append(BoundLedgerRow(
            n=n,
            log_factorial_ratio=log_factorial_ratio(n),
            main_term=n * n * math.log(n),
            correction=n * n * ASYMPTOTIC_CONSTANT,
            vlw_log_L=vlw_log_estimate(n),
            ratio_log=ratio_log,
        ))
    return rows


def ledger_csv(rows: list[BoundLedgerRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f.name for f in fields(BoundLedgerRow)])
    for row in rows:
        writer.writerow([
            v if isinstance(v, int) else ("" if v is None else f"{v:.12g}")
            for v in astuple(row)
        ])
    return buf.getvalue()
