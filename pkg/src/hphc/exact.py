"""Exact rational combinatorics for 1D bridge fluctuations and the negative binomial law.

All probabilities are returned as :class:`fractions.Fraction`, which is always
kept in lowest terms, so two formulas agree iff their results compare equal.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb

ExactProb = Fraction


class SizeBoundError(ValueError):
    """Raised when an exact computation is requested beyond its configured size bound."""


def binomial(n: int, k: int) -> int:
    """C(n, k) for integer n >= 0, zero outside 0 <= k <= n."""
    if n < 0:
        raise ValueError(f"binomial needs n >= 0, got {n}")
    if k < 0 or k > n:
        return 0
    return comb(n, k)


def central_return_1d(n: int) -> ExactProb:
    """P(S(2n) = 0) = C(2n, n) / 4^n for the simple symmetric walk."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    return Fraction(comb(2 * n, n), 4**n)


def _check_r(n: int, r: int, lo: int) -> None:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not lo <= r <= n:
        raise ValueError(f"r must lie in [{lo}, {n}], got r={r}")


def q_ratio(r: int, n: int) -> ExactProb:
    """C(2r, r) C(2n-2r, n-r) / C(2n, n)."""
    if n < 1 or not 0 <= r <= n:
        raise ValueError(f"q_ratio needs 0 <= r <= n and n >= 1, got r={r}, n={n}")
    return Fraction(comb(2 * r, r) * comb(2 * n - 2 * r, n - r), comb(2 * n, n))


def p2n2r_closed(n: int, r: int) -> ExactProb:
    """P(G_{2n} = 2r, S(2n) = 0) from the Sparre Andersen type closed form."""
    _check_r(n, r, 1)
    lead = Fraction(comb(2 * n, n), 2 ** (2 * n + 1) * (n + 1))
    return lead * (1 + Fraction(2 * r - n, n) * q_ratio(r, n))


def p2n2r_sum(n: int, r: int) -> ExactProb:
    """Same probability as :func:`p2n2r_closed`, as a finite sum over first-return pieces."""
    _check_r(n, r, 1)
    total = Fraction(0)
    for j in range(1, r + 1):
        a = Fraction(comb(2 * j - 1, j), 2 * j - 1)
        b = Fraction(comb(2 * n + 1 - 2 * j, n + 1 - j), 2 * n + 1 - 2 * j)
        total += a * b
    return total / 4**n


def p2n_odd(n: int, r: int) -> ExactProb:
    """P(G_{2n} = 2r - 1, S(2n) = 0); equal to the mass at 2r."""
    _check_r(n, r, 1)
    return p2n2r_closed(n, r)


def p2n(n: int, g: int) -> ExactProb:
    """P(G_{2n} = g, S(2n) = 0) for any integer g (zero off the support 1..2n)."""
    if g < 1 or g > 2 * n:
        return Fraction(0)
    return p2n2r_closed(n, (g + 1) // 2)


@lru_cache(maxsize=None)
def p2n_row(n: int) -> tuple[ExactProb, ...]:
    """Row (P(2n, 1), ..., P(2n, 2n)) as a tuple; index g-1 holds P(2n, g)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    row = []
    for r in range(1, n + 1):
        v = p2n2r_closed(n, r)
        row.extend((v, v))
    return tuple(row)


def negbin_pmf(K: int, r: int) -> ExactProb:
    """P(U_K = r) where U_K is a sum of K i.i.d. geometric(1/2) variables on {0, 1, ...}."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if r < 0:
        return Fraction(0)
    return Fraction(comb(K - 1 + r, r), 2 ** (K + r))


def negbin_cdf(K: int, r_max: int) -> ExactProb:
    """P(U_K <= r_max), exact partial sum of :func:`negbin_pmf`."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if r_max < -1:
        raise ValueError(f"r_max must be >= -1, got {r_max}")
    # common denominator 2^(K + r_max)
    num = sum(comb(K - 1 + r, r) << (r_max - r) for r in range(r_max + 1))
    return Fraction(num, 2 ** (K + r_max))


def negbin_interval(K: int, lo: int, hi: int) -> ExactProb:
    """P(lo <= U_K <= hi)."""
    if hi < lo:
        return Fraction(0)
    return negbin_cdf(K, hi) - negbin_cdf(K, max(lo, 0) - 1)


def finite_identity_sum(a: int) -> ExactProb:
    """sum_{r=0}^{a} C(a+r, r) / 2^(a+r); identically 1."""
    if a < 0:
        raise ValueError(f"a must be non-negative, got {a}")
    num = sum(comb(a + r, r) << (a - r) for r in range(a + 1))
    return Fraction(num, 2 ** (2 * a))


def _tail_bound(a: int, R: int) -> Fraction:
    """Rigorous upper bound on sum_{r>R} C(a+r, r)/2^(a+r).

    Consecutive term ratios (a+r+1)/(2(r+1)) decrease in r, so the tail is
    dominated by a geometric series started at term R+1.
    """
    rho = Fraction(a + R + 2, 2 * (R + 2))
    if rho >= 1:
        raise ValueError("truncation point too small for a geometric tail bound")
    first = Fraction(comb(a + R + 1, R + 1), 2 ** (a + R + 1))
    return first / (1 - rho)


def infinite_identity_sum(a: int, tol_bits: int = 64) -> tuple[ExactProb, Fraction, int]:
    """Truncated sum_{r>=0} C(a+r, r)/2^(a+r), whose full value is 2.

    Returns ``(partial, tail_bound, R)``: the exact partial sum up to ``R`` and
    a proven bound on the omitted tail, with ``R`` the first truncation point
    where the bound drops below ``2**-tol_bits``.
    """
    if a < 0:
        raise ValueError(f"a must be non-negative, got {a}")
    tol = Fraction(1, 2**tol_bits)
    partial = Fraction(0)
    for r in range(a + 2):
        partial += Fraction(comb(a + r, r), 2 ** (a + r))
    R = a + 1
    while (bound := _tail_bound(a, R)) >= tol:
        R += 1
        partial += Fraction(comb(a + R, R), 2 ** (a + R))
    return partial, bound, R
