"""Return probability of the HPHC walk to the origin after 2N steps.

The walk returns at time 2N with 2n vertical and 2N - 2n horizontal moves.
The vertical moves form a 1D bridge whose count of non-negative positions G
fixes how many slots the horizontal moves can fall into, giving

    P(C(2N) = 0) = C(2N, N)/4^(2N)
        + sum_{n=1}^{N} sum_{g=1}^{2n} P(2n, g) c(2N-2n) C(2N-2n+g, g)/2^(2N-2n+g)

with c(h) = C(h, h/2)/2^h.  Exact mode evaluates this with integers over the
common denominator 2^(4N); log mode uses log-gamma binomials and a running
log-sum-exp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np
from scipy.special import gammaln, logsumexp

from .exact import SizeBoundError

EXACT_BOUND = 512
LOG_BOUND = 100_000
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class LogProb:
    """Natural log of a probability; ``-inf`` encodes zero."""

    log_value: float

    def __post_init__(self):
        if self.log_value > 1e-12:
            raise ValueError(f"log-probability must be <= 0, got {self.log_value}")

    @property
    def value(self) -> float:
        return math.exp(self.log_value)


@dataclass(frozen=True)
class ReturnProbRecord:
    N: int
    exact: Fraction | None
    approx: LogProb
    scaled: float

    @property
    def value(self) -> float:
        return float(self.exact) if self.exact is not None else self.approx.value


@lru_cache(maxsize=None)
def _count_row(n: int) -> tuple[int, ...]:
    """Number of 2n-step bridges with G = g, for g = 1..2n.

    Integer form of 4^n P(2n, 2r):
    (n C(2n, n) + (2r - n) C(2r, r) C(2n-2r, n-r)) / (2n(n+1)).
    """
    lead = n * comb(2 * n, n)
    den = 2 * n * (n + 1)
    row = []
    for r in range(1, n + 1):
        c, rem = divmod(lead + (2 * r - n) * comb(2 * r, r) * comb(2 * n - 2 * r, n - r), den)
        assert rem == 0
        row.extend((c, c))
    return tuple(row)


def exact_return_prob(N: int, bound: int = EXACT_BOUND) -> Fraction:
    """Exact P(C(2N) = (0, 0)) for the HPHC walk."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if N > bound:
        raise SizeBoundError(f"exact mode is limited to N <= {bound}, got N={N}")
    # each term carries the factor 2^(4N) / (4^n 2^h 2^(h+g)) = 2^(2n-g);
    # g = 2r-1 and g = 2r share the same bridge count
    num = comb(2 * N, N)
    for n in range(1, N + 1):
        h = 2 * (N - n)
        counts = _count_row(n)
        inner = 0
        b = 1  # C(h+g, g), advanced incrementally in g
        for r in range(1, n + 1):
            b_odd = b * (h + 2 * r - 1) // (2 * r - 1)
            b = b_odd * (h + 2 * r) // (2 * r)
            inner += (counts[2 * r - 1] * ((b_odd << 1) + b)) << (2 * n - 2 * r)
        num += comb(h, h // 2) * inner
    return Fraction(num, 1 << (4 * N))


@lru_cache(maxsize=4)
def _log_factorials(m: int) -> np.ndarray:
    return gammaln(np.arange(m + 1, dtype=np.float64) + 1.0)


def _log_p2n2r(lf: np.ndarray, n: int, r: np.ndarray) -> np.ndarray:
    lc_n = lf[2 * n] - 2 * lf[n]
    lq = (lf[2 * r] - 2 * lf[r]) + (lf[2 * n - 2 * r] - 2 * lf[n - r]) - lc_n
    lead = lc_n - (2 * n + 1) * _LN2 - math.log(n + 1)
    return lead + np.log1p((2 * r - n) / n * np.exp(lq))


def _log_nb(lf: np.ndarray, h: int, g: np.ndarray) -> np.ndarray:
    """log C(h+g, g) - (h+g) log 2."""
    return lf[h + g] - lf[h] - lf[g] - (h + g) * _LN2


def log_return_prob(N: int) -> LogProb:
    """ln P(C(2N) = (0, 0)) from the same double sum, in floating point."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if N > LOG_BOUND:
        raise SizeBoundError(f"log mode is limited to N <= {LOG_BOUND}, got N={N}")
    lf = _log_factorials(4 * N + 2)
    acc = lf[2 * N] - 2 * lf[N] - 4 * N * _LN2
    for n in range(1, N + 1):
        h = 2 * (N - n)
        r = np.arange(1, n + 1)
        # P(2n, 2r-1) = P(2n, 2r): pair the odd and even slot counts
        lnb = np.logaddexp(_log_nb(lf, h, 2 * r - 1), _log_nb(lf, h, 2 * r))
        term = lf[h] - 2 * lf[h // 2] - h * _LN2 + logsumexp(_log_p2n2r(lf, n, r) + lnb)
        acc = np.logaddexp(acc, term)
    return LogProb(min(float(acc), 0.0))


def asymptotic_return_prob(N: int) -> float:
    """2 / (pi N)."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    return 2.0 / (math.pi * N)


def return_prob_sequence(M: int, block: int = 512) -> np.ndarray:
    """Floating P(C(2N) = (0, 0)) for every N = 0..M at once.

    Evaluates W[n, m] = sum_r P(2n, 2r) (nb(2m, 2r-1) + nb(2m, 2r)) for all
    n + m <= M by blocked matrix products; every entry is a non-negative
    probability so plain float64 is accurate (underflowed terms are negligible).
    Cost is about M^3/6 flops.
    """
    if M < 0:
        raise ValueError(f"M must be non-negative, got {M}")
    out = np.empty(M + 1)
    out[0] = 1.0
    if M == 0:
        return out
    lf = _log_factorials(4 * M + 2)
    P = np.zeros((M, M))
    for n in range(1, M + 1):
        r = np.arange(1, n + 1)
        P[n - 1, :n] = np.exp(_log_p2n2r(lf, n, r))
    W = np.zeros((M + 1, M + 1))
    for m0 in range(0, M, block):
        m = np.arange(m0, min(M, m0 + block))
        nmax = M - m0
        r = np.arange(1, nmax + 1)[:, None]
        h = 2 * m[None, :]
        T = np.exp(_log_nb(lf, h, 2 * r - 1)) + np.exp(_log_nb(lf, h, 2 * r))
        W[1 : nmax + 1, m] = P[:nmax, :nmax] @ T
    idx = np.arange(M + 1)
    c = np.exp(lf[2 * idx] - 2 * lf[idx] - 2 * idx * _LN2)
    for N in range(1, M + 1):
        n = np.arange(1, N + 1)
        out[N] = c[N] * 2.0 ** (-2 * N) + np.dot(c[N - n], W[n, N - n])
    return out


def scaled_convergence_table(N_list, mode: str = "auto", exact_bound: int = EXACT_BOUND) -> list[ReturnProbRecord]:
    """Records of pi N P(C(2N)=0) / 2 along an ascending grid.

    ``mode`` is ``"exact"`` (exact value required, size errors propagate),
    ``"log"`` (floating only) or ``"auto"`` (exact where N <= 64).
    """
    N_list = [int(N) for N in N_list]
    if not N_list:
        raise ValueError("N_list must be non-empty")
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError("N_list must be strictly ascending")
    if mode not in ("exact", "log", "auto"):
        raise ValueError(f"unknown mode {mode!r}")
    records = []
    for N in N_list:
        exact = None
        if mode == "exact" or (mode == "auto" and N <= min(64, exact_bound)):
            exact = exact_return_prob(N, bound=exact_bound)
        approx = log_return_prob(N)
        value = float(exact) if exact is not None else approx.value
        records.append(ReturnProbRecord(N, exact, approx, math.pi * N * value / 2.0))
    return records


def convergence_summary(records) -> dict:
    """Distances |scaled - 1| along the table and a fitted power-law rate.

    The rate is the slope of log|scaled - 1| against log N; it is an
    empirical description, no rate is known in closed form.
    """
    Ns = np.array([r.N for r in records], dtype=float)
    gaps = np.array([abs(r.scaled - 1.0) for r in records])
    decreasing = bool(np.all(np.diff(gaps) < 0))
    rate = float("nan")
    if len(records) >= 2 and np.all(gaps > 0):
        rate = float(np.polyfit(np.log(Ns), np.log(gaps), 1)[0])
    return {"gaps": gaps.tolist(), "decreasing": decreasing, "rate": rate}
