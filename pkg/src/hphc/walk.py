"""Monte Carlo simulation of anisotropic planar walks.

Two simulators produce the same chain for the HPHC profile:

* :func:`simulate_kernel` draws each move from the per-row transition law of
  any :class:`~hphc.profiles.PJProfile`;
* :func:`simulate_construction` interlaces two independent 1D walks, taking
  geometric runs of horizontal moves whenever the walk stands on a row j >= 0
  after a vertical move, and only vertical moves while j < 0.

Randomness comes from numpy's PCG64 seeded through ``SeedSequence``.  Stream
split rule: replica ``r`` of an experiment with master seed ``s`` uses
``SeedSequence(s, spawn_key=(r,))``; the construction draws its three
sources (horizontal signs, vertical signs, run lengths) from children
``spawn_key + (0,)``, ``(1,)`` and ``(2,)``.  Batched endpoint runs use
``spawn_key=(BATCH_TAG, b)`` for fixed-size batch ``b``.  Nothing depends on
how replicas are scheduled over workers.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np

from . import _kernels
from .profiles import HALF, ORIGIN, LatticeSite, PJProfile

CHUNK_STEPS = 1 << 16
BATCH_SIZE = 1 << 14
BATCH_TAG = 0x48504843  # keeps batch streams apart from replica streams


def seed_sequence(seed, *key: int) -> np.random.SeedSequence:
    """SeedSequence for ``seed`` extended by ``key`` (no hidden spawn counters)."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + key)
    if int(seed) < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.SeedSequence(int(seed), spawn_key=key)


def generator(seed, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *key)))


def replica_seed(master_seed: int, r: int) -> np.random.SeedSequence:
    return seed_sequence(master_seed, r)


@dataclass(frozen=True)
class _Encoded:
    bits: int
    thr: np.ndarray
    lo: int
    n_tab: int
    period: int


def _dyadic_bits(ps: Sequence[Fraction]) -> int:
    for b in (2, 4, 8, 16, 32):
        if all((p * 2**b).denominator == 1 for p in ps):
            return b
    return 64


def encode_profile(profile: PJProfile) -> _Encoded:
    """Threshold table for the compiled kernel.

    Dyadic profiles are sampled exactly from b random bits per move; other
    rationals use a 53-bit uniform, so their probabilities are rounded to
    the nearest multiple of 2^-53.
    """
    bits = _dyadic_bits(profile.distinct_values())
    eff = 53 if bits == 64 else bits
    scale = 1 << eff

    def row(p: Fraction):
        up = round(p * scale)
        vert = round(2 * p * scale)
        return (up, vert, vert + round((1 - 2 * p) / 2 * scale))

    if profile.kind == "periodic":
        rows = [row(p) for p in profile.values]
        lo, n_tab, period = 0, len(rows), len(rows)
        rows += [rows[0], rows[0]]
    elif profile.kind == "custom" and profile.table:
        keys = [j for j, _ in profile.table]
        lo = min(keys)
        n_tab = max(keys) - lo + 1
        rows = [row(profile.p(lo + i)) for i in range(n_tab)]
        rows += [row(profile.default), row(profile.default)]
        period = 0
    elif profile.kind == "comb":
        lo, n_tab, period = 0, 1, 0
        rows = [row(profile.p(0)), row(HALF), row(HALF)]
    else:  # simple, hphc, custom without table: split at j = 0
        lo, n_tab, period = 0, 0, 0
        rows = [row(profile.p(-1)), row(profile.p(0))]
    return _Encoded(bits, np.array(rows, dtype=np.int64), lo, n_tab, period)


def _n_words(steps: int, bits: int) -> int:
    spw = 64 // bits if bits < 64 else 1
    return -(-steps // spw)


def _refill_bits(buf: np.ndarray, state: np.ndarray, slot: int, need: int, rng: np.random.Generator) -> np.ndarray:
    """Keep at least ``need`` unread bits in ``buf``; state[slot] is the bit cursor."""
    pos = int(state[slot])
    left = 64 * len(buf) - pos
    if left >= need:
        return buf
    fresh = rng.bit_generator.random_raw(-(-(need - left) // 64))
    state[slot] = pos % 64
    return np.concatenate([buf[pos // 64:], fresh])


class TrajectoryStream:
    """Lazy, reproducible trajectory C(0), C(1), ..., C(steps).

    Produced in compiled chunks; identical seed and parameters give an
    identical site sequence.  Iterating yields :class:`LatticeSite` values,
    :meth:`chunks` yields numpy ``(k, j)`` blocks for times 1..steps.
    """

    def __init__(self, steps: int, seed, method: str = "kernel", profile: PJProfile | None = None,
                 start: LatticeSite = ORIGIN):
        if steps < 0:
            raise ValueError(f"steps must be non-negative, got {steps}")
        if method not in ("kernel", "construction"):
            raise ValueError(f"unknown method {method!r}")
        if method == "construction":
            if profile is not None and profile.kind != "hphc":
                raise ValueError("the interlacing construction only defines the HPHC walk")
            if tuple(start) != ORIGIN:
                raise ValueError("the interlacing construction starts at the origin")
        self.steps = steps
        self.seed = seed_sequence(seed)
        self.method = method
        self.profile = profile or PJProfile.hphc()
        self.start = LatticeSite(*start)

    def chunks(self, chunk: int = CHUNK_STEPS) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        if self.method == "kernel":
            yield from self._kernel_chunks(chunk)
        else:
            yield from self._construction_chunks(chunk)

    def _kernel_chunks(self, chunk):
        enc = encode_profile(self.profile)
        spw = 64 // enc.bits if enc.bits < 64 else 1
        chunk = max(spw, chunk - chunk % spw)
        rng = generator(self.seed)
        state = np.array(self.start, dtype=np.int64)
        done = 0
        while done < self.steps:
            n = min(chunk, self.steps - done)
            words = rng.bit_generator.random_raw(_n_words(n, enc.bits))
            ks = np.empty(n, dtype=np.int64)
            js = np.empty(n, dtype=np.int64)
            _kernels.kernel_path(words, enc.bits, n, enc.thr, enc.lo, enc.n_tab, enc.period, state, ks, js)
            done += n
            yield ks, js

    def _construction_chunks(self, chunk):
        g1, g2, gy = (generator(self.seed, i) for i in range(3))
        # state = [k, j, pending, bit cursor S1, bit cursor S2, cursor Y]
        state = np.array([0, 0, -1, 0, 0, 0], dtype=np.int64)
        s1 = np.empty(0, dtype=np.uint64)
        s2 = np.empty(0, dtype=np.uint64)
        unif = np.empty(0)
        done = 0
        while done < self.steps:
            n = min(chunk, self.steps - done)
            # Unused draws carry over, so the path does not depend on the chunk size.
            s1 = _refill_bits(s1, state, 3, n, g1)
            s2 = _refill_bits(s2, state, 4, n, g2)
            left = len(unif) - state[5]
            if left < n:
                unif = np.concatenate([unif[state[5]:], 1.0 - gy.random(n - left)])
                state[5] = 0
            ks = np.empty(n, dtype=np.int64)
            js = np.empty(n, dtype=np.int64)
            _kernels.construction_path(s1, s2, unif, n, state, ks, js)
            done += n
            yield ks, js

    def to_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        ks = [np.array([self.start.k], dtype=np.int64)]
        js = [np.array([self.start.j], dtype=np.int64)]
        for k, j in self.chunks():
            ks.append(k)
            js.append(j)
        return np.concatenate(ks), np.concatenate(js)

    def __iter__(self) -> Iterator[LatticeSite]:
        yield self.start
        for ks, js in self.chunks():
            for k, j in zip(ks.tolist(), js.tolist()):
                yield LatticeSite(k, j)


def simulate_kernel(steps: int, seed, profile: PJProfile, start: LatticeSite = ORIGIN) -> TrajectoryStream:
    """Trajectory driven by the per-row transition law of ``profile``."""
    return TrajectoryStream(steps, seed, "kernel", profile, start)


def simulate_construction(steps: int, seed) -> TrajectoryStream:
    """HPHC trajectory from the two-walk interlacing construction."""
    return TrajectoryStream(steps, seed, "construction")


def sample_geometric(rng: np.random.Generator, size) -> np.ndarray:
    """P(Y = m) = 2^-(m+1), by inverse CDF on one uniform per sample."""
    u = 1.0 - rng.random(size)
    return np.floor(-np.log2(u)).astype(np.int64)


def sample_negbin(K: int, seed, size: int | None = None):
    """Sum of K independent geometric variables (one value, or ``size`` of them)."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    rng = generator(seed)
    n = 1 if size is None else size
    out = sample_geometric(rng, (n, K)).sum(axis=1)
    return int(out[0]) if size is None else out


def count_visits(stream: TrajectoryStream, sites: Sequence[LatticeSite], checkpoints: Sequence[int] | None = None) -> np.ndarray:
    """Visit counts to ``sites`` over times 0..t for each checkpoint t.

    Returns an int64 array of shape (len(checkpoints), len(sites)); the
    default checkpoint is the final time.
    """
    cps = np.array(sorted(checkpoints) if checkpoints is not None else [stream.steps], dtype=np.int64)
    if len(cps) and (cps[0] < 0 or cps[-1] > stream.steps):
        raise ValueError("checkpoints must lie in [0, steps]")
    sk = np.array([s[0] for s in sites], dtype=np.int64)
    sj = np.array([s[1] for s in sites], dtype=np.int64)
    counts = ((sk == stream.start.k) & (sj == stream.start.j)).astype(np.int64)
    snaps = np.zeros((len(cps), len(sk)), dtype=np.int64)
    cp = 0
    while cp < len(cps) and cps[cp] == 0:
        snaps[cp] = counts
        cp += 1
    t0 = 0
    for ks, js in stream.chunks():
        cp = _kernels.count_visits(ks, js, len(ks), t0, sk, sj, counts, cps, snaps, cp)
        t0 += len(ks)
    return snaps


def map_replicas(fn: Callable[[int], object], replicas: int, workers: int = 1) -> list:
    """``[fn(0), ..., fn(replicas-1)]`` in replica order, on a thread pool when workers > 1."""
    if replicas < 1:
        raise ValueError(f"replicas must be >= 1, got {replicas}")
    if workers <= 1:
        return [fn(r) for r in range(replicas)]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, range(replicas)))


def endpoint_distribution(steps: int, replicas: int, master_seed: int, method: str = "kernel",
                          profile: PJProfile | None = None, workers: int = 1) -> Counter:
    """Empirical law of C(steps) over independent replicas from the origin."""
    profile = profile or PJProfile.hphc()
    if method == "construction" and profile.kind != "hphc":
        raise ValueError("the interlacing construction only defines the HPHC walk")
    if method not in ("kernel", "construction"):
        raise ValueError(f"unknown method {method!r}")
    enc = encode_profile(profile)
    n_batches = -(-replicas // BATCH_SIZE)

    def run(b: int):
        n = min(BATCH_SIZE, replicas - b * BATCH_SIZE)
        out_k = np.empty(n, dtype=np.int64)
        out_j = np.empty(n, dtype=np.int64)
        if method == "kernel":
            rng = generator(master_seed, BATCH_TAG, b)
            words = rng.bit_generator.random_raw((n, max(1, _n_words(steps, enc.bits))))
            _kernels.kernel_endpoints(words, enc.bits, steps, enc.thr, enc.lo, enc.n_tab, enc.period, 0, 0, out_k, out_j)
        else:
            g1, g2, gy = (generator(master_seed, BATCH_TAG, b, i) for i in range(3))
            w = max(1, _n_words(steps, 1))
            s1 = g1.bit_generator.random_raw((n, w))
            s2 = g2.bit_generator.random_raw((n, w))
            unif = 1.0 - gy.random((n, steps + 1))
            _kernels.construction_endpoints(s1, s2, unif, steps, out_k, out_j)
        return Counter(zip(out_k.tolist(), out_j.tolist()))

    total: Counter = Counter()
    for part in map_replicas(run, n_batches, workers):
        total.update(part)
    return Counter({LatticeSite(*s): c for s, c in sorted(total.items())})


def horizontal_run_lengths(ks: np.ndarray, js: np.ndarray) -> np.ndarray:
    """Lengths of completed horizontal runs on rows j >= 0.

    A run starts at time 0 or right after a vertical move landing on j >= 0
    and is complete once the next vertical move occurs; the trailing run is
    dropped because the trajectory may have cut it short.
    """
    dk = np.diff(ks)
    vertical = np.flatnonzero(dk == 0)  # move index i means C(i) -> C(i+1)
    runs = []
    prev = -1
    for v in vertical.tolist():
        start_row = js[prev + 1]
        if start_row >= 0:
            runs.append(v - prev - 1)
        prev = v
    return np.array(runs, dtype=np.int64)
