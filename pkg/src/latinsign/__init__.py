"""Exact determinant-power coefficients, signed Latin-square censuses and
monomial integrals over SU(n)."""

from .combinatorics import (
    BigRational,
    MultiIndex,
    Permutation,
    det_bareiss,
    factorial,
    factorial_ratio,
    multi_factorial,
    perm_sign,
)
from .detpower import (
    IdentityReport,
    SparsePoly,
    TermBudgetExceeded,
    coefficient,
    coefficient_by_finite_difference,
    det_poly,
    det_power,
    verify_identity,
)
from .latin import (
    CensusInfeasible,
    LatinCensus,
    LatinSquare,
    census,
    signed_difference_via_coefficient,
    square_sign,
    to_permutation_tuple,
)
from .moments import (
    MomentEstimate,
    MomentSpec,
    RectangularPartition,
    exact_moment,
    mc_moment,
    mc_trace_moment,
    moment_bound,
    moment_vanishes,
    rect_dimension,
    sample_haar_su,
    trace_power_moment_exact,
)

__version__ = "0.1.0"
