"""Friedman omnibus test and exact sign test.

The chi-square survival function and the binomial tail are implemented here
rather than borrowed, so that the test statistics have no third-party
numerical dependency and the binomial side stays exact (rational).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .aggregate import AggregatedTable, rank_rows
from .errors import DegenerateShape, IncompleteTable, LengthMismatch, OutOfRange

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000
P_VALUE_FLOOR = 1e-300
MAX_EXACT_N = 1024


def _gamma_p_series(a: float, x: float) -> float:
    # lower regularized gamma P(a, x), valid for x < a + 1
    ap = a
    term = total = 1.0 / a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_contfrac(a: float, x: float) -> float:
    # upper regularized gamma Q(a, x) by modified Lentz, valid for x >= a + 1
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma function Q(a, x)."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_p_series(a, x)
    return _gamma_q_contfrac(a, x)


def chi2_sf(x: float, dof: int) -> float:
    """Survival function of the chi-square distribution with ``dof`` degrees of freedom."""
    if x < 0:
        raise ValueError("x must be non-negative")
    if dof < 1:
        raise ValueError("dof must be a positive integer")
    return gamma_q(dof / 2.0, x / 2.0)


def _check_binomial(n: int, a: int) -> None:
    if not 1 <= n <= MAX_EXACT_N:
        raise OutOfRange(f"n must be in [1, {MAX_EXACT_N}], got {n}")
    if not 0 <= a <= n:
        raise OutOfRange(f"a must be in [0, {n}], got {a}")


def binomial_pmf(n: int, k: int) -> Fraction:
    """P(X = k) for X ~ Binomial(n, 1/2), exactly."""
    _check_binomial(n, k)
    return Fraction(math.comb(n, k), 2 ** n)


def binomial_tail(n: int, a: int) -> Fraction:
    """P(X >= a) for X ~ Binomial(n, 1/2), exactly."""
    _check_binomial(n, a)
    return Fraction(sum(math.comb(n, i) for i in range(a, n + 1)), 2 ** n)


def binomial_cdf(n: int, a: int) -> Fraction:
    """P(X <= a) for X ~ Binomial(n, 1/2), exactly."""
    _check_binomial(n, a)
    return Fraction(sum(math.comb(n, i) for i in range(0, a + 1)), 2 ** n)


@dataclass(frozen=True)
class FriedmanReport:
    n_datasets: int
    n_models: int
    avg_ranks: Mapping[str, float]
    chi2: float
    dof: int
    p_value: float
    small_sample: bool = False
    p_clamped: bool = False
    warnings: tuple[str, ...] = field(default=())


def friedman(values, labels: Sequence[str] | None = None) -> FriedmanReport:
    """Friedman test on an ``N x k`` error matrix (rows: datasets, columns: algorithms).

    Lower error is better (rank 1); exact ties receive average ranks.  The
    statistic is the uncorrected form based on average ranks, referred to a
    chi-square distribution with ``k - 1`` degrees of freedom.
    """
    mat = np.asarray(values, dtype=float)
    if mat.ndim != 2:
        raise DegenerateShape(f"expected a 2-d matrix, got shape {mat.shape}")
    n, k = mat.shape
    if n < 2 or k < 2:
        raise DegenerateShape(f"need N >= 2 datasets and k >= 2 algorithms, got {n}x{k}")
    if not np.all(np.isfinite(mat)):
        raise IncompleteTable("matrix contains missing or non-finite cells")
    labels = list(labels) if labels is not None else [str(j) for j in range(k)]
    if len(labels) != k:
        raise LengthMismatch(f"{len(labels)} labels for {k} columns")

    ranks = rank_rows(mat)
    avg = ranks.mean(axis=0)
    sum_sq = math.fsum(r * r for r in avg)
    chi2 = 12.0 * n / (k * (k + 1)) * (sum_sq - k * (k + 1) ** 2 / 4.0)
    chi2 = max(chi2, 0.0)  # cancellation can leave -1e-15 when all ranks are equal
    p = chi2_sf(chi2, k - 1)

    warnings = []
    small = n <= 10 or k <= 5
    if small:
        warnings.append(f"N={n}, k={k}: outside the N > 10, k > 5 region where the "
                        "chi-square approximation is customary")
    clamped = p < P_VALUE_FLOOR
    if clamped:
        p = 0.0
        warnings.append(f"p-value below {P_VALUE_FLOOR:g} reported as 0")
    return FriedmanReport(n, k, {lab: float(r) for lab, r in zip(labels, avg)},
                          float(chi2), k - 1, float(p), small, clamped, tuple(warnings))


def friedman_table(table: AggregatedTable) -> FriedmanReport:
    return friedman(table.matrix(), table.models)


@dataclass(frozen=True)
class SignTestReport:
    """Exact sign test outcome.

    ``p_one_sided`` tests "a is better than b" (P(X >= wins_a)).  The
    two-sided value doubles the smaller tail and is the headline number.
    """

    wins_a: int
    wins_b: int
    ties_raw: int
    n_effective: int
    p_one_sided: float
    p_two_sided: float
    p_one_sided_exact: Fraction
    p_two_sided_exact: Fraction


def sign_test(a: Sequence[float], b: Sequence[float]) -> SignTestReport:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatch(f"paired vectors differ in shape: {a.shape} vs {b.shape}")
    if len(a) == 0:
        raise LengthMismatch("need at least one paired observation")
    strict_a = int(np.sum(a < b))
    strict_b = int(np.sum(b < a))
    ties = len(a) - strict_a - strict_b
    used_ties = ties - (ties % 2)  # an odd tie is discarded
    wins_a = strict_a + used_ties // 2
    wins_b = strict_b + used_ties // 2
    n_eff = wins_a + wins_b

    if n_eff == 0:
        one = two = Fraction(1)
    else:
        one = binomial_tail(n_eff, wins_a)
        lower = binomial_cdf(n_eff, wins_a)
        two = min(Fraction(1), 2 * min(one, lower))
    return SignTestReport(wins_a, wins_b, ties, n_eff,
                          float(one), float(two), one, two)


def sign_test_table(table: AggregatedTable, model_a: str, model_b: str) -> SignTestReport:
    return sign_test(table.column(model_a), table.column(model_b))
