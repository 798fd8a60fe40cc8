"""Long/short block bookkeeping and the block-variance asymptotics.

Index k labels blocks. Block k consists of a long range of floor(sqrt(k))
consecutive indices followed by a short range of floor(k^(1/4)) indices;
the cumulative totals are

    long_total(k)  = sum_{j<=k} floor(j^(1/2))
    short_total(k) = sum_{j<=k} floor(j^(1/4))
    block_total(k) = long_total(k) + short_total(k)

All totals are exact integer arithmetic. ``block_count_for(n)`` inverts
block_total: the largest p with block_total(p) <= n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .periodic import ShapeFunction
from .seeding import derive_rng, parallel_map

__all__ = [
    "BlockSchedule",
    "build_schedule",
    "long_total",
    "short_total",
    "block_total",
    "block_count_for",
    "block_sums",
    "block_variance_ratio",
    "schedule_asymptotics",
]


def _floor_sqrt(j: np.ndarray) -> np.ndarray:
    """Exact floor square root, elementwise (float sqrt plus correction)."""
    s = np.floor(np.sqrt(j.astype(np.float64))).astype(np.int64)
    s = np.where((s + 1) * (s + 1) <= j, s + 1, s)
    s = np.where(s * s > j, s - 1, s)
    return s


def _floor_fourth_root(j: np.ndarray) -> np.ndarray:
    # floor(j^(1/4)) == floor(sqrt(floor(sqrt(j))))
    return _floor_sqrt(_floor_sqrt(j))


def long_total(k: int) -> int:
    if k < 0:
        raise InvalidInputError("need k >= 0")
    return sum(math.isqrt(j) for j in range(1, k + 1))


def short_total(k: int) -> int:
    if k < 0:
        raise InvalidInputError("need k >= 0")
    return sum(math.isqrt(math.isqrt(j)) for j in range(1, k + 1))


def block_total(k: int) -> int:
    return long_total(k) + short_total(k)


@dataclass(frozen=True, eq=False, init=False)
class BlockSchedule:
    """Cumulative totals and per-block ranges for blocks 1..n_blocks.

    Arrays are indexed by k (entry 0 is the empty prefix). Ranges are
    1-based inclusive index pairs into the walk.
    """

    n_blocks: int
    long_lengths: np.ndarray
    short_lengths: np.ndarray
    long_totals: np.ndarray
    short_totals: np.ndarray
    totals: np.ndarray

    def __init__(self, n_blocks: int):
        n_blocks = int(n_blocks)
        if n_blocks < 1:
            raise InvalidInputError("need at least one block")
        j = np.arange(1, n_blocks + 1, dtype=np.int64)
        ls = _floor_sqrt(j)
        ss = _floor_fourth_root(j)
        object.__setattr__(self, "n_blocks", n_blocks)
        object.__setattr__(self, "long_lengths", ls)
        object.__setattr__(self, "short_lengths", ss)
        object.__setattr__(self, "long_totals", np.concatenate([[0], np.cumsum(ls)]))
        object.__setattr__(self, "short_totals", np.concatenate([[0], np.cumsum(ss)]))
        object.__setattr__(
            self, "totals", self.long_totals + self.short_totals
        )

    def long_range(self, k: int) -> tuple:
        start = int(self.totals[k - 1]) + 1
        return start, start + int(self.long_lengths[k - 1]) - 1

    def short_range(self, k: int) -> tuple:
        start = int(self.totals[k - 1]) + int(self.long_lengths[k - 1]) + 1
        return start, int(self.totals[k])

    def segment_starts(self) -> np.ndarray:
        """0-based boundaries of the interleaved long/short segments."""
        starts = np.empty(2 * self.n_blocks, dtype=np.int64)
        starts[0::2] = self.totals[:-1]
        starts[1::2] = self.totals[:-1] + self.long_lengths
        return starts

    def rows(self):
        for k in range(1, self.n_blocks + 1):
            ls, le = self.long_range(k)
            ss, se = self.short_range(k)
            yield (
                k,
                int(self.long_totals[k]),
                int(self.short_totals[k]),
                int(self.totals[k]),
                ls,
                le,
                ss,
                se,
            )


def build_schedule(n_blocks: int) -> BlockSchedule:
    return BlockSchedule(n_blocks)


def block_count_for(n: int) -> int:
    """Largest p with block_total(p) <= n; 0 when n < block_total(1).

    n below the first block total yields an empty schedule by convention.
    """
    n = int(n)
    if n < 2:
        return 0
    # block_total(k) ~ (2/3) k^(3/2), so this upper bound is generous
    k_hi = max(4, int(1.2 * (1.5 * n) ** (2.0 / 3.0)) + 4)
    sched = BlockSchedule(k_hi)
    while sched.totals[-1] <= n:
        k_hi *= 2
        sched = BlockSchedule(k_hi)
    p = int(np.searchsorted(sched.totals, n, side="right")) - 1
    return p


def block_sums(path, f: ShapeFunction, n: int):
    """Per-block long and short sums of f over the phase path.

    Mean-zero f needs no per-term centering. Returns (long_sums,
    short_sums) for blocks 1..block_count_for(n); sums are grouped
    per segment so the tiling identity against a segment-grouped direct
    sum is exact.
    """
    p = block_count_for(n)
    if p == 0:
        return np.empty(0), np.empty(0)
    sched = BlockSchedule(p)
    m_p = int(sched.totals[-1])
    if len(path) < m_p:
        raise InvalidInputError(f"path has {len(path)} phases, schedule needs {m_p}")
    fv = np.asarray(f.evaluate(path.phases[:m_p]))
    sums = np.add.reduceat(fv, sched.segment_starts())
    return sums[0::2], sums[1::2]


@dataclass(frozen=True, eq=False)
class BlockVarianceProfile:
    """Per-block empirical variances with the limiting-variance scale."""

    schedule: BlockSchedule
    long_vars: np.ndarray
    short_vars: np.ndarray
    limiting_variance: float
    reps: int

    @property
    def ratio_long(self) -> float:
        return float(
            np.sum(self.long_vars)
            / (self.limiting_variance * self.schedule.long_totals[-1])
        )

    @property
    def ratio_short(self) -> float:
        return float(
            np.sum(self.short_vars)
            / (self.limiting_variance * self.schedule.short_totals[-1])
        )


def block_variances(
    f: ShapeFunction,
    dist,
    x: float,
    n_blocks: int,
    reps: int,
    seed: int,
    workers: int = 1,
) -> BlockVarianceProfile:
    """Empirical Var of every long and short block sum over replications."""
    from . import variance
    from .gaps import _check_x

    x = _check_x(x)
    reps = int(reps)
    if reps < 100:
        raise InvalidInputError("need reps >= 100")
    try:
        v = variance.closed_form(f, dist, x)
    except Exception:
        v, _ = variance.series(f, dist, x, 64, 4096)
    if v <= 0.0:
        raise InvalidInputError("limiting variance estimate must be positive")

    sched = BlockSchedule(int(n_blocks))
    npath = int(sched.totals[-1])
    starts = sched.segment_starts()
    chunk = 256
    n_chunks = (reps + chunk - 1) // chunk

    def one_chunk(c: int):
        from ._kernels import mod1_walk_rows

        m = min(chunk, reps - c * chunk)
        rng = derive_rng(seed, c)
        g = dist.sample(rng, (m, npath))
        ph = mod1_walk_rows(x * g)
        fv = np.asarray(f.evaluate(ph))
        sums = np.add.reduceat(fv, starts, axis=1)
        return np.sum(sums, axis=0), np.sum(sums * sums, axis=0)

    partials = parallel_map(one_chunk, range(n_chunks), workers)
    s1 = np.zeros(2 * sched.n_blocks)
    s2 = np.zeros(2 * sched.n_blocks)
    for a, b in partials:
        s1 += a
        s2 += b
    var = (s2 - s1 * s1 / reps) / (reps - 1)
    return BlockVarianceProfile(
        schedule=sched,
        long_vars=var[0::2],
        short_vars=var[1::2],
        limiting_variance=v,
        reps=reps,
    )


def block_variance_ratio(
    f: ShapeFunction,
    dist,
    x: float,
    n_blocks: int,
    reps: int,
    seed: int,
    workers: int = 1,
):
    """Block-variance totals against the variance-scale line.

    Returns (sum_k Var(long_k) / (V * long_total(n)),
    sum_k Var(short_k) / (V * short_total(n))); both approach 1 as the
    number of blocks grows. ``n_blocks`` counts blocks, matching the
    index of the cumulative totals.
    """
    prof = block_variances(f, dist, x, n_blocks, reps, seed, workers)
    return prof.ratio_long, prof.ratio_short


@dataclass(frozen=True)
class ScheduleDiagnostics:
    long_ratio: float
    short_ratio: float
    remainder_scaled: float
    n: int
    block_count: int


def schedule_asymptotics(n: int) -> ScheduleDiagnostics:
    """Normalized growth diagnostics of the schedule at index n.

    * long_total(n) / ((2/3) n^(3/2))
    * short_total(n) / ((4/5) n^(5/4))
    * (n - block_total(p)) / n^(1/3) for p = block_count_for(n)
    """
    n = int(n)
    if n < 10:
        raise InvalidInputError("need n >= 10")
    j = np.arange(1, n + 1, dtype=np.int64)
    lt = int(np.sum(_floor_sqrt(j)))
    st = int(np.sum(_floor_fourth_root(j)))
    p = block_count_for(n)
    m_p = BlockSchedule(p).totals[-1] if p >= 1 else 0
    return ScheduleDiagnostics(
        long_ratio=lt / ((2.0 / 3.0) * n**1.5),
        short_ratio=st / ((4.0 / 5.0) * n**1.25),
        remainder_scaled=(n - int(m_p)) / n ** (1.0 / 3.0),
        n=n,
        block_count=p,
    )
