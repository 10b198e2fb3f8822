"""Local time, Green function and stationarity checks for anisotropic walks."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats
from scipy.special import gamma as gamma_fn

from .exact import SizeBoundError
from .profiles import HALF, ORIGIN, LatticeSite, PJProfile
from .returnprob import EXACT_BOUND, exact_return_prob, return_prob_sequence
from .walk import TrajectoryStream, count_visits, generator, map_replicas, replica_seed, simulate_kernel

BOOT_TAG = 0x424F4F54
GREEN_EXACT_BOUND = 128


@dataclass
class LocalTimeLedger:
    counts: Counter = field(default_factory=Counter)
    steps_taken: int = 0

    def __getitem__(self, site) -> int:
        return self.counts.get(LatticeSite(*site), 0)

    def total(self) -> int:
        return sum(self.counts.values())


def accumulate_local_time(trajectory: TrajectoryStream | Iterable, sites_of_interest: Sequence | None = None) -> LocalTimeLedger:
    """Visits per site over times 0..N.

    With ``sites_of_interest`` only those sites are tracked, which keeps memory
    flat for long runs.  Plain iterables of sites are accepted too.
    """
    if not isinstance(trajectory, TrajectoryStream):
        led = LocalTimeLedger()
        n = -1
        for n, site in enumerate(trajectory):
            site = LatticeSite(*site)
            if sites_of_interest is None or site in sites_of_interest:
                led.counts[site] += 1
        led.steps_taken = max(n, 0)
        return led

    if sites_of_interest is not None:
        sites = [LatticeSite(*s) for s in sites_of_interest]
        snap = count_visits(trajectory, sites)[0]
        return LocalTimeLedger(Counter({s: int(c) for s, c in zip(sites, snap)}), trajectory.steps)

    counts = Counter({trajectory.start: 1})
    for ks, js in trajectory.chunks():
        pairs, mult = np.unique(np.stack([ks, js], axis=1), axis=0, return_counts=True)
        for (k, j), c in zip(pairs.tolist(), mult.tolist()):
            counts[LatticeSite(k, j)] += c
    return LocalTimeLedger(counts, trajectory.steps)


@dataclass(frozen=True)
class GreenRow:
    N: int
    g: float | Fraction
    scaled: float  # g / log N


def _scaled(g, N: int) -> float:
    return float(g) / math.log(N) if N > 1 else math.nan


def green_truncated(N: int, mode: str = "exact", exact_bound: int = GREEN_EXACT_BOUND) -> GreenRow:
    """g(N) = sum_{k=0}^{floor(N/2)} P(C(2k) = 0) for the HPHC walk."""
    return green_table([N], mode, exact_bound)[0]


def green_table(N_list: Sequence[int], mode: str = "auto", exact_bound: int = GREEN_EXACT_BOUND) -> list[GreenRow]:
    """Rows of g(N) and g(N)/log N.

    ``exact`` sums exact return probabilities (bounded by ``exact_bound`` on
    floor(N/2)); ``log`` uses the floating sequence; ``auto`` is exact within
    the bound and floating beyond.
    """
    N_list = [int(N) for N in N_list]
    if any(N < 1 for N in N_list):
        raise ValueError("N must be positive")
    if mode not in ("exact", "log", "auto"):
        raise ValueError(f"unknown mode {mode!r}")
    top = max(N_list) // 2
    if mode == "exact" and top > exact_bound:
        raise SizeBoundError(f"exact Green function is limited to floor(N/2) <= {exact_bound}, got {top}")
    rows = []
    seq = None
    exact_partial = [Fraction(1)]
    for N in N_list:
        M = N // 2
        if mode == "exact" or (mode == "auto" and M <= exact_bound):
            while len(exact_partial) <= M:
                k = len(exact_partial)
                exact_partial.append(exact_partial[-1] + exact_return_prob(k, bound=max(EXACT_BOUND, k)))
            g = exact_partial[M]
        else:
            if seq is None:
                seq = np.cumsum(return_prob_sequence(top))
            g = float(seq[M])
        rows.append(GreenRow(N, g, _scaled(g, N)))
    return rows


@dataclass(frozen=True)
class RatioStats:
    site_a: LatticeSite
    site_b: LatticeSite
    steps: int
    replicas: int
    ratios: np.ndarray  # replicas with a non-zero denominator, in replica order
    mean: float
    ci_lo: float
    ci_hi: float
    zero_denominator_count: int
    degenerate: bool


def _visit_table(sites, steps, replicas, master_seed, checkpoints=None, workers=1, profile=None) -> np.ndarray:
    profile = profile or PJProfile.hphc()

    def one(r):
        stream = simulate_kernel(steps, replica_seed(master_seed, r), profile)
        return count_visits(stream, sites, checkpoints)

    return np.stack(map_replicas(one, replicas, workers))


def _bootstrap_ci(x: np.ndarray, seed, level: float = 0.95, n_resamples: int = 2000) -> tuple[float, float]:
    if len(x) < 2 or np.all(x == x[0]):
        m = float(np.mean(x)) if len(x) else math.nan
        return m, m
    res = stats.bootstrap((x,), np.mean, confidence_level=level, n_resamples=n_resamples,
                          method="percentile", random_state=generator(seed, BOOT_TAG))
    return float(res.confidence_interval.low), float(res.confidence_interval.high)


def ratio_experiment(site_a, site_b, steps: int, replicas: int, master_seed: int, workers: int = 1,
                     profile: PJProfile | None = None) -> RatioStats:
    """Per-replica local-time ratios Xi(a, N) / Xi(b, N) with a bootstrap CI.

    Replicas whose denominator is zero are counted separately and left out of
    the mean; the result is flagged degenerate when they make up at least half.
    """
    a, b = LatticeSite(*site_a), LatticeSite(*site_b)
    for s in (a, b):
        if abs(s.k) + abs(s.j) > steps:
            raise ValueError(f"site {tuple(s)} is out of reach in {steps} steps")
    table = _visit_table([a, b], steps, replicas, master_seed, workers=workers, profile=profile)[:, -1, :]
    num, den = table[:, 0], table[:, 1]
    ok = den > 0
    ratios = num[ok] / den[ok]
    zero = int(np.count_nonzero(~ok))
    mean = float(ratios.mean()) if len(ratios) else math.nan
    lo, hi = _bootstrap_ci(ratios, master_seed)
    return RatioStats(a, b, steps, replicas, ratios, mean, lo, hi, zero, 2 * zero >= replicas)


@dataclass(frozen=True)
class ExponentialLawResult:
    N: int
    replicas: int
    samples: np.ndarray  # pi Xi((0,0), N) / (2 log N)
    ks_distance: float
    low_power: bool


def exponential_law_samples(N: int, replicas: int, master_seed: int, workers: int = 1) -> ExponentialLawResult:
    """Scaled origin local time against the standard exponential law."""
    if math.log(N) <= 1:
        raise ValueError("N must exceed e so that log N > 1")
    visits = _visit_table([ORIGIN], N, replicas, master_seed, workers=workers)[:, -1, 0]
    samples = math.pi * visits / (2.0 * math.log(N))
    ks = float(stats.kstest(samples, "expon").statistic)
    return ExponentialLawResult(N, replicas, samples, ks, replicas < 30)


@dataclass(frozen=True)
class LILDiagnostic:
    grid: np.ndarray
    scaled: np.ndarray  # (replicas, grid): Xi((0,0),N) / (log N logloglog N)
    running_max: np.ndarray

    @property
    def target(self) -> float:
        return 2.0 / math.pi


def lil_diagnostic(N_grid: Sequence[int], replicas: int, master_seed: int, workers: int = 1) -> LILDiagnostic:
    """Running maxima of the LIL-normalised origin local time along a grid.

    Purely descriptive: the limsup constant 2/pi needs astronomically long runs.
    """
    grid = np.array(sorted(int(N) for N in N_grid), dtype=np.int64)
    if len(grid) == 0 or grid[0] < 16:
        raise ValueError("grid points must be >= 16 so that log log log N > 0")
    visits = _visit_table([ORIGIN], int(grid[-1]), replicas, master_seed, grid, workers)[:, :, 0]
    logs = np.log(grid.astype(float))
    norm = logs * np.log(np.log(logs))
    scaled = visits / norm
    return LILDiagnostic(grid, scaled, np.maximum.accumulate(scaled, axis=1))


@dataclass(frozen=True)
class InvariantMeasure:
    mu: Callable[[int, int], Fraction]

    def __call__(self, k: int, j: int) -> Fraction:
        return Fraction(self.mu(k, j))

    @classmethod
    def from_profile(cls, profile: PJProfile) -> InvariantMeasure:
        """mu(k, j) = 1 / p_j."""
        return cls(lambda k, j: 1 / profile.p(j))

    @classmethod
    def constant(cls, c) -> InvariantMeasure:
        c = Fraction(c)
        return cls(lambda k, j: c)


def invariant_residual(profile: PJProfile, mu: InvariantMeasure, radius: int) -> dict[LatticeSite, Fraction]:
    """Exact stationarity defect of ``mu`` at every |k|, |j| <= radius.

    residual(k, j) = mu(k+1, j)(1/2 - p_j) + mu(k-1, j)(1/2 - p_j)
                     + mu(k, j+1) p_{j+1} + mu(k, j-1) p_{j-1} - mu(k, j)
    """
    if not isinstance(profile, PJProfile):
        raise TypeError("profile must be a PJProfile")
    if radius < 0:
        raise ValueError("radius must be non-negative")
    out = {}
    for j in range(-radius, radius + 1):
        h = HALF - profile.p(j)
        up, down = profile.p(j + 1), profile.p(j - 1)
        for k in range(-radius, radius + 1):
            inflow = (mu(k + 1, j) + mu(k - 1, j)) * h + mu(k, j + 1) * up + mu(k, j - 1) * down
            out[LatticeSite(k, j)] = inflow - mu(k, j)
    return out


def comparison_asymptotics(model: str, N: float, p: Sequence | None = None) -> float:
    """Leading-order P(C(2N) = 0) for the reference planar walks.

    ``model`` is ``"hphc"`` (2/(pi N)), ``"simple"`` (1/(pi N)),
    ``"comb"`` (1/(2^(9/2) Gamma(1/4) N^(3/4)), constant as quoted in the
    literature) or ``"periodic"`` with one period of p values:
    1/(4 pi N p_0 sqrt(gamma - 1)), gamma = sum_j 1/p_j / (2L).
    """
    if N <= 0:
        raise ValueError("N must be positive")
    if model == "hphc":
        return 2.0 / (math.pi * N)
    if model == "simple":
        return 1.0 / (math.pi * N)
    if model == "comb":
        return 1.0 / (2**4.5 * gamma_fn(0.25) * N**0.75)
    if model == "periodic":
        if not p:
            raise ValueError("periodic model needs its p values")
        prof = PJProfile.periodic(p)
        g = periodic_gamma(prof)
        if g <= 1:
            raise ValueError("periodic model needs gamma > 1")
        return 1.0 / (4 * math.pi * N * float(prof.p(0)) * math.sqrt(float(g - 1)))
    raise ValueError(f"unknown model {model!r}")


def periodic_gamma(profile: PJProfile) -> Fraction:
    L = profile.period
    if not L:
        raise ValueError("profile is not periodic")
    return sum((1 / p for p in profile.values), Fraction(0)) / (2 * L)


def lil_constant(model: str, p: Sequence | None = None) -> float:
    """limsup Xi((0,0),N) / (log N logloglog N) for the log-recurrent models."""
    if model == "hphc":
        return 2.0 / math.pi
    if model == "simple":
        return 1.0 / math.pi
    if model == "periodic":
        prof = PJProfile.periodic(p)
        return 1.0 / (4 * float(prof.p(0)) * math.pi * math.sqrt(float(periodic_gamma(prof) - 1)))
    raise ValueError(f"no log-scale LIL constant for {model!r}")


def float_return_probs(profile: PJProfile, max_steps: int) -> np.ndarray:
    """P(C(t) = (0,0)) for t = 0..max_steps by floating forward DP on a dense grid."""
    R = max_steps
    size = 2 * R + 1
    rows = np.arange(-R, R + 1)
    p = np.array([float(profile.p(int(j))) for j in rows])[:, None]
    h = 0.5 - p
    grid = np.zeros((size, size))  # [j, k]
    grid[R, R] = 1.0
    out = np.empty(max_steps + 1)
    out[0] = 1.0
    for t in range(1, max_steps + 1):
        nxt = np.zeros_like(grid)
        hm = grid * h
        nxt[:, 1:] += hm[:, :-1]
        nxt[:, :-1] += hm[:, 1:]
        vm = grid * p  # vertical mass leaves with the source row's p_j
        nxt[1:, :] += vm[:-1, :]
        nxt[:-1, :] += vm[1:, :]
        grid = nxt
        out[t] = grid[R, R]
    return out
