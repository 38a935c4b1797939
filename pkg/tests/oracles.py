"""Slow, obviously-correct reference implementations used only by the tests.

Each oracle avoids the code path it checks: brute-force loops instead of
vectorized offsets, explicit enumeration instead of sampling, quadrature
instead of continued fractions, normal equations instead of QR.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np


def sampen_bruteforce(x, m=2, r=0.2, normalize=True):
    """O(N^2) sample entropy over the first N - m templates, self-matches excluded."""
    z = np.asarray(x, dtype=float)
    if normalize:
        sd = z.std()
        z = (z - z.mean()) / sd if sd > 0 else z - z.mean()
    n = len(z)
    a = b = 0
    for i in range(n - m):
        for j in range(i + 1, n - m):
            if max(abs(z[i + k] - z[j + k]) for k in range(m)) <= r:
                b += 1
                if abs(z[i + m] - z[j + m]) <= r:
                    a += 1
    if a == 0 or b == 0:
        return math.inf
    return math.log(b / a)


def chi2_sf_quad(x, dof, dps=30):
    """Chi-square upper tail by adaptive quadrature of the density."""
    with mpmath.workdps(dps):
        k = mpmath.mpf(dof)
        pdf = lambda t: t ** (k / 2 - 1) * mpmath.e ** (-t / 2) / (2 ** (k / 2) * mpmath.gamma(k / 2))
        return float(mpmath.quad(pdf, [x, x + 50, mpmath.inf]))


def avg_ranks_bruteforce(matrix):
    """Average rank per column; a value's rank is 1 + #smaller + (#equal - 1)/2."""
    mat = np.asarray(matrix, dtype=float)
    n, k = mat.shape
    ranks = np.zeros(k)
    for row in mat:
        for j in range(k):
            less = sum(1 for v in row if v < row[j])
            eq = sum(1 for v in row if v == row[j])
            ranks[j] += 1 + less + (eq - 1) / 2
    return ranks / n


def friedman_chi2_bruteforce(matrix):
    mat = np.asarray(matrix, dtype=float)
    n, k = mat.shape
    r = avg_ranks_bruteforce(mat)
    # equivalent form 12N/(k(k+1)) * sum (R_j - (k+1)/2)^2
    return 12 * n / (k * (k + 1)) * sum((rj - (k + 1) / 2) ** 2 for rj in r)


def binomial_tail_bruteforce(n, a):
    """P(X >= a), X ~ Bin(n, 1/2), by enumerating all 2^n outcomes (small n only)."""
    hits = sum(1 for bits in range(2 ** n) if bin(bits).count("1") >= a)
    return Fraction(hits, 2 ** n)


def _subsets_with_law(size):
    # two-stage law: |S| ~ U{1..size}, then S uniform among subsets of that size
    for k in range(1, size + 1):
        combos = list(itertools.combinations(range(size), k))
        for c in combos:
            yield c, Fraction(1, size) / len(combos)


def exact_win_probabilities(arr):
    """Exact expected win share per model under the two-stage subset law."""
    n_models, M, H = arr.shape
    wins = [Fraction(0)] * n_models
    for ds, pd in _subsets_with_law(M):
        for hs, ph in _subsets_with_law(H):
            scores = [arr[m][np.ix_(ds, hs)].mean() for m in range(n_models)]
            best = min(scores)
            winners = [m for m in range(n_models) if scores[m] == best]
            for m in winners:
                wins[m] += pd * ph / len(winners)
    return [float(w) for w in wins]


def adf_normal_equations(y, lags):
    """ADF coefficients from an explicitly looped design and (X'X)^-1 X'y."""
    y = [float(v) for v in y]
    rows, target = [], []
    for t in range(lags + 1, len(y)):
        dy = y[t] - y[t - 1]
        row = [1.0, y[t - 1]] + [y[t - j] - y[t - j - 1] for j in range(1, lags + 1)]
        rows.append(row)
        target.append(dy)
    X = np.array(rows)
    Y = np.array(target)
    return np.linalg.solve(X.T @ X, X.T @ Y)


def higuchi_reference(x, k_max):
    """Higuchi's curve lengths with explicit index arithmetic."""
    x = list(map(float, x))
    n = len(x)
    logs_k, logs_l = [], []
    for k in range(1, k_max + 1):
        lm = []
        for m in range(1, k + 1):  # 1-based offsets as in the original construction
            steps = (n - m) // k
            total = sum(abs(x[m - 1 + i * k] - x[m - 1 + (i - 1) * k]) for i in range(1, steps + 1))
            lm.append(total * (n - 1) / (steps * k) / k)
        logs_k.append(math.log(k))
        logs_l.append(math.log(sum(lm) / len(lm)))
    kbar = sum(logs_k) / k_max
    lbar = sum(logs_l) / k_max
    slope = sum((a - kbar) * (b - lbar) for a, b in zip(logs_k, logs_l)) / \
        sum((a - kbar) ** 2 for a in logs_k)
    return -slope
