"""Brute-force ground truth.

Exhaustive enumeration of 1D +-1 paths for the bridge fluctuation laws, and
exact forward dynamic programming over the planar transition kernel.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

from .exact import SizeBoundError
from .profiles import HALF, ORIGIN, LatticeSite, PJProfile

MAX_ENUM_N = 12
MAX_DP_STEPS = 32
MAX_DP_RETURN_N = 16

KINDS = ("G", "K", "M")
_CHUNK_BITS = 16


@dataclass(frozen=True)
class JointFluctuationTable:
    """Path counts of bridges of length 2n, split by a fluctuation statistic.

    ``counts[kind][r]`` is the number of 2n-step paths with S(2n) = 0 whose
    statistic equals r, where

    * G = #{0 <= j < 2n : S(j) >= 0}
    * K = #{0 < j <= 2n-1 : S(j) > 0}
    * M = #{0 < j <= 2n : S(j) <= 0}

    Probabilities are counts / 4^n.
    """

    n: int
    counts: dict[str, tuple[int, ...]]

    def prob(self, kind: str, r: int) -> Fraction:
        row = self.counts[kind]
        if not 0 <= r < len(row):
            return Fraction(0)
        return Fraction(row[r], 4**self.n)

    @property
    def entries(self) -> dict[tuple[str, int], Fraction]:
        return {(kind, r): self.prob(kind, r) for kind in KINDS for r in range(2 * self.n + 1)}

    def total(self, kind: str = "G") -> Fraction:
        return Fraction(sum(self.counts[kind]), 4**self.n)

    def rows(self):
        """(n, kind, r, numerator, denominator) tuples for export."""
        for kind in KINDS:
            for r in range(2 * self.n + 1):
                p = self.prob(kind, r)
                yield self.n, kind, r, p.numerator, p.denominator


def _enumerate_chunk(n: int, start: int, stop: int) -> np.ndarray:
    steps = 2 * n
    masks = np.arange(start, stop, dtype=np.uint32)
    shifts = np.arange(steps, dtype=np.uint32)
    moves = (((masks[:, None] >> shifts) & 1).astype(np.int8) * 2 - 1)
    walk = np.cumsum(moves, axis=1, dtype=np.int8)  # S(1..2n)
    walk = walk[walk[:, -1] == 0]
    inner = walk[:, :-1]  # S(1..2n-1)
    g = 1 + np.count_nonzero(inner >= 0, axis=1)
    k = np.count_nonzero(inner > 0, axis=1)
    m = np.count_nonzero(walk <= 0, axis=1)
    out = np.empty((3, steps + 1), dtype=np.int64)
    for row, stat in enumerate((g, k, m)):
        out[row] = np.bincount(stat, minlength=steps + 1)
    return out


def enumerate_1d_joint(n: int, workers: int = 1) -> JointFluctuationTable:
    """Enumerate all 4^n paths of length 2n and tabulate G, K, M on bridges."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > MAX_ENUM_N:
        raise SizeBoundError(f"enumeration is limited to n <= {MAX_ENUM_N}, got {n}")
    total = 1 << (2 * n)
    chunk = min(total, 1 << _CHUNK_BITS)
    bounds = [(s, min(s + chunk, total)) for s in range(0, total, chunk)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda b: _enumerate_chunk(n, *b), bounds))
    else:
        parts = [_enumerate_chunk(n, *b) for b in bounds]
    acc = np.sum(parts, axis=0)
    counts = {kind: tuple(int(c) for c in acc[i]) for i, kind in enumerate(KINDS)}
    return JointFluctuationTable(n, counts)


@dataclass(frozen=True)
class OccupationVector:
    step: int
    mass: dict[LatticeSite, Fraction]

    def total(self) -> Fraction:
        return sum(self.mass.values(), Fraction(0))

    def __getitem__(self, site) -> Fraction:
        return self.mass.get(LatticeSite(*site), Fraction(0))


def dp_site_distribution(steps: int, profile: PJProfile, start: LatticeSite = ORIGIN) -> OccupationVector:
    """Exact law of the walk position after ``steps`` moves.

    Masses are carried as integers over the common denominator D^t, where D
    clears every transition probability on the rows the walk can reach, so the
    light-cone truncation |dk| + |dj| <= t is exact.
    """
    if not isinstance(profile, PJProfile):
        raise TypeError("profile must be a PJProfile")
    if steps < 0:
        raise ValueError(f"steps must be non-negative, got {steps}")
    if steps > MAX_DP_STEPS:
        raise SizeBoundError(f"exact DP is limited to {MAX_DP_STEPS} steps, got {steps}")
    k0, j0 = start
    rows = range(j0 - steps, j0 + steps + 1)
    D = 1
    for j in rows:
        p = profile.p(j)
        D = lcm(D, p.denominator, (HALF - p).denominator)
    weights = {}
    for j in rows:
        p = profile.p(j)
        weights[j] = (int((HALF - p) * D), int(p * D))

    mass = {(k0, j0): 1}
    for _ in range(steps):
        nxt: dict[tuple[int, int], int] = {}
        for (k, j), m in mass.items():
            wh, wv = weights[j]
            if wh:
                a = m * wh
                nxt[(k + 1, j)] = nxt.get((k + 1, j), 0) + a
                nxt[(k - 1, j)] = nxt.get((k - 1, j), 0) + a
            b = m * wv
            nxt[(k, j + 1)] = nxt.get((k, j + 1), 0) + b
            nxt[(k, j - 1)] = nxt.get((k, j - 1), 0) + b
        mass = nxt
    den = D**steps
    return OccupationVector(steps, {LatticeSite(*s): Fraction(m, den) for s, m in mass.items() if m})


def dp_return_prob(N: int, profile: PJProfile | None = None) -> Fraction:
    """P(C(2N) = (0, 0)) by exact forward DP (HPHC profile by default)."""
    if N < 0:
        raise ValueError(f"N must be non-negative, got {N}")
    if N > MAX_DP_RETURN_N:
        raise SizeBoundError(f"dp_return_prob is limited to N <= {MAX_DP_RETURN_N}, got {N}")
    occ = dp_site_distribution(2 * N, profile or PJProfile.hphc())
    return occ[ORIGIN]
