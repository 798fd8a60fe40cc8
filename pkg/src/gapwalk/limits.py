"""Distributional checks on the partial-sum process at desk scale.

The partial sums of f along the walk behave like a Brownian motion run
at the limiting-variance clock. That coupling itself is not observable,
so this module tests its finite-horizon consequences: Gaussian scaling
of S_N, the iterated-logarithm envelope of the running maximum, the
small-deviation (Chung) statistic of the running absolute maximum, the
integral convergence test for upper functions, and boundedness of
normalized fourth moments. Iterated-logarithm convergence is doubly
logarithmic, so acceptance bands come from a Brownian simulation at the
same horizon and checkpoint grid rather than from the limit constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate, stats

from ._kernels import mod1_walk
from .errors import InvalidInputError
from .gaps import GapDistribution, _check_x
from .periodic import ShapeFunction, _readonly, frac
from .seeding import derive_rng, parallel_map

__all__ = [
    "TrajectoryCheckpoints",
    "LimitSeries",
    "TestReport",
    "checkpoint_grid",
    "simulate_trajectory",
    "gaussian_trajectory",
    "lil_statistic",
    "chung_statistic",
    "clt_test",
    "kefp_classify",
    "KefpResult",
    "fourth_moment_ratio",
    "brownian_band_medians",
]

_BLOCK = 1 << 16
KEFP_T0 = 16.0


@dataclass(frozen=True, eq=False, init=False)
class TrajectoryCheckpoints:
    """Partial sums and running |sum| maxima on a geometric checkpoint grid."""

    seed: int
    x: float
    ns: np.ndarray
    partial_sums: np.ndarray
    running_max_abs: np.ndarray

    def __init__(self, seed, x, ns, partial_sums, running_max_abs):
        object.__setattr__(self, "seed", int(seed))
        object.__setattr__(self, "x", float(x))
        object.__setattr__(self, "ns", np.array(ns, dtype=np.int64))
        self.ns.setflags(write=False)
        object.__setattr__(self, "partial_sums", _readonly(partial_sums))
        object.__setattr__(self, "running_max_abs", _readonly(running_max_abs))


@dataclass(frozen=True)
class LimitSeries:
    """A normalized statistic at each checkpoint plus its running extreme."""

    ns: np.ndarray
    values: np.ndarray
    running_extreme: np.ndarray


@dataclass(frozen=True)
class TestReport:
    name: str
    statistic: float
    sample_size: int
    verdict: str  # pass | fail | diagnostic
    p_value: Optional[float] = None
    band: Optional[tuple] = None
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "pValue": self.p_value,
            "band": list(self.band) if self.band is not None else None,
            "sampleSize": self.sample_size,
            "verdict": self.verdict,
            "details": self.details,
        }


def checkpoint_grid(n_max: int, gamma: float) -> np.ndarray:
    """Unique values of floor(gamma^i) up to n_max, always ending at n_max."""
    if not (1.0 < gamma <= 2.0):
        raise InvalidInputError("need checkpoint ratio in (1, 2]")
    ns = set()
    v = 1.0
    while True:
        v *= gamma
        if v > n_max:
            break
        ns.add(int(v))
    ns.add(int(n_max))
    return np.array(sorted(n for n in ns if n >= 1), dtype=np.int64)


def _stream_trajectory(seed, x, n_max, ns, draw_increments, transform):
    """Single pass over the walk, recording sums and maxima at checkpoints.

    ``draw_increments(rng, m)`` yields raw walk increments for one block;
    ``transform`` maps a block of increments to the summand values.
    Memory use is one block regardless of n_max.
    """
    rng = derive_rng(seed)
    psums = np.empty(ns.size)
    rmaxs = np.empty(ns.size)
    total = 0.0
    rmax = 0.0
    t, c = 0.0, 0.0
    pos = 0
    idx = 0
    while pos < n_max:
        m = min(_BLOCK, n_max - pos)
        inc = draw_increments(rng, m)
        vals, t, c = transform(inc, t, c)
        cs = total + np.cumsum(vals)
        pmax = np.maximum.accumulate(np.abs(cs))
        while idx < ns.size and ns[idx] <= pos + m:
            j = int(ns[idx] - pos - 1)
            psums[idx] = cs[j]
            rmaxs[idx] = max(rmax, pmax[j])
            idx += 1
        total = float(cs[-1])
        rmax = max(rmax, float(pmax[-1]))
        pos += m
    return psums, rmaxs


def simulate_trajectory(
    f: ShapeFunction,
    dist: GapDistribution,
    x: float,
    n_max: int,
    gamma: float,
    seed: int,
) -> TrajectoryCheckpoints:
    """Stream the partial sums of f along one seeded walk."""
    x = _check_x(x)
    n_max = int(n_max)
    if n_max < 1000:
        raise InvalidInputError("need n_max >= 1000")
    ns = checkpoint_grid(n_max, gamma)

    def transform(gaps, t, c):
        phases, t, c = mod1_walk(x * gaps, t, c)
        return np.asarray(f.evaluate(phases)), t, c

    psums, rmaxs = _stream_trajectory(
        seed, x, n_max, ns, lambda rng, m: dist.sample(rng, m), transform
    )
    return TrajectoryCheckpoints(seed, x, ns, psums, rmaxs)


def gaussian_trajectory(n_max: int, gamma: float, seed: int) -> TrajectoryCheckpoints:
    """Standard Gaussian random walk on the same checkpoint machinery.

    This is the matched-horizon Brownian comparison path (unit variance
    per step, x recorded as 1).
    """
    n_max = int(n_max)
    if n_max < 1000:
        raise InvalidInputError("need n_max >= 1000")
    ns = checkpoint_grid(n_max, gamma)
    psums, rmaxs = _stream_trajectory(
        seed,
        1.0,
        n_max,
        ns,
        lambda rng, m: rng.standard_normal(m),
        lambda inc, t, c: (inc, t, c),
    )
    return TrajectoryCheckpoints(seed, 1.0, ns, psums, rmaxs)


def lil_statistic(traj: TrajectoryCheckpoints) -> LimitSeries:
    """S_N / sqrt(2 N log log N) at checkpoints N >= 16, with running max."""
    mask = traj.ns >= 16
    if not np.any(mask):
        raise InvalidInputError("no checkpoints with N >= 16")
    nn = traj.ns[mask].astype(float)
    vals = traj.partial_sums[mask] / np.sqrt(2.0 * nn * np.log(np.log(nn)))
    return LimitSeries(traj.ns[mask], vals, np.maximum.accumulate(vals))


def chung_statistic(traj: TrajectoryCheckpoints) -> LimitSeries:
    """sqrt(log log N / N) * max_{M<=N} |S_M| with running min."""
    mask = traj.ns >= 16
    if not np.any(mask):
        raise InvalidInputError("no checkpoints with N >= 16")
    nn = traj.ns[mask].astype(float)
    vals = np.sqrt(np.log(np.log(nn)) / nn) * traj.running_max_abs[mask]
    return LimitSeries(traj.ns[mask], vals, np.minimum.accumulate(vals))


def brownian_band_medians(n_max: int, gamma: float, n_seeds: int, seed: int, workers: int = 1):
    """Median final running extremes of the two statistics for Brownian paths."""
    def one(i):
        traj = gaussian_trajectory(n_max, gamma, _oracle_seed(seed, i))
        return (
            float(lil_statistic(traj).running_extreme[-1]),
            float(chung_statistic(traj).running_extreme[-1]),
        )

    vals = parallel_map(one, range(n_seeds), workers)
    lil_vals = np.array([v[0] for v in vals])
    chung_vals = np.array([v[1] for v in vals])
    return float(np.median(lil_vals)), float(np.median(chung_vals))


def _oracle_seed(master: int, i: int) -> int:
    # distinct master per path; the path itself derives its own stream
    return (int(master) << 20) + i


def clt_test(
    f: ShapeFunction,
    dist: GapDistribution,
    x: float,
    n: int,
    reps: int,
    seed: int,
    workers: int = 1,
    return_samples: bool = False,
):
    """Kolmogorov-Smirnov test of S_N / sqrt(V N) against the normal law.

    V is the limiting variance from the closed form (or the series for
    sampled functions). The verdict is the KS test at level 0.001; the
    sample variance of S_N / sqrt(N) and its agreement with V within
    5 percent are reported in the details (that band is only sharp once
    reps is in the thousands). With ``return_samples`` the normalized
    sums come back alongside the report.
    """
    from . import variance
    from ._kernels import mod1_walk_rows

    x = _check_x(x)
    reps = int(reps)
    if reps < 500:
        raise InvalidInputError("need reps >= 500")
    try:
        v = variance.closed_form(f, dist, x)
    except Exception:
        v, _ = variance.series(f, dist, x, 64, 4096)
    if v <= 0.0:
        raise InvalidInputError("limiting variance must be positive for the CLT test")

    chunk = 256
    n_chunks = (reps + chunk - 1) // chunk

    def one_chunk(c: int):
        m = min(chunk, reps - c * chunk)
        rng = derive_rng(seed, c)
        g = dist.sample(rng, (m, int(n)))
        ph = mod1_walk_rows(x * g)
        return np.asarray(f.evaluate(ph)).sum(axis=1)

    sums = np.concatenate(parallel_map(one_chunk, range(n_chunks), workers))
    z = sums / math.sqrt(v * n)
    ks = stats.kstest(z, "norm")
    sample_var = float(np.var(sums / math.sqrt(n), ddof=1))
    var_ok = abs(sample_var - v) <= 0.05 * v
    verdict = "pass" if ks.pvalue > 0.001 else "fail"
    report = TestReport(
        name="clt",
        statistic=float(ks.statistic),
        p_value=float(ks.pvalue),
        sample_size=reps,
        verdict=verdict,
        details={
            "limitingVariance": v,
            "sampleVariance": sample_var,
            "varianceWithin5pct": bool(var_ok),
            "N": int(n),
        },
    )
    if return_samples:
        return report, z
    return report


@dataclass(frozen=True)
class KefpResult:
    a: float
    t_max: float
    partial_integral: float
    verdict: str  # converges | diverges

    def to_json(self) -> dict:
        return {
            "a": self.a,
            "Tmax": self.t_max,
            "partialIntegral": self.partial_integral,
            "verdict": self.verdict,
        }


def kefp_classify(a: float, t_max: float) -> KefpResult:
    """Integral test for the boundary family phi_a(t) = sqrt(2 LLt + a LLLt).

    The integrand of int (phi/t) exp(-phi^2/2) dt reduces to
    sqrt(2) / (t log t (log log t)^{(a-1)/2}) up to lower-order factors,
    so the integral converges exactly when a > 3. The numeric value on
    [16, Tmax] is reported as supporting evidence; no finite horizon can
    decide convergence.
    """
    a = float(a)
    t_max = float(t_max)
    if t_max < KEFP_T0:
        raise InvalidInputError(f"need Tmax >= {KEFP_T0}")

    def integrand_logt(s):
        # s = log t; ds absorbs the 1/t factor
        ll = np.log(s)
        lll = np.log(ll)
        phi_sq = 2.0 * ll + a * lll
        phi = np.sqrt(np.maximum(phi_sq, 0.0))
        return phi * np.exp(-0.5 * phi_sq)

    value, _ = integrate.quad(
        integrand_logt, math.log(KEFP_T0), math.log(t_max), limit=200
    )
    return KefpResult(
        a=a,
        t_max=t_max,
        partial_integral=float(value),
        verdict="converges" if a > 3.0 else "diverges",
    )


def fourth_moment_ratio(
    f: ShapeFunction,
    dist: GapDistribution,
    x: float,
    weights,
    reps: int,
    seed: int,
    workers: int = 1,
):
    """Monte Carlo E(sum_k a_k Y_k)^4 / (sum_k a_k^2)^2 with Y_k centered
    at the empirical per-index mean. Returns (ratio, standard error)."""
    from ._kernels import mod1_walk_rows

    x = _check_x(x)
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size < 1:
        raise InvalidInputError("weights must be a nonempty vector")
    if np.all(w == 0.0):
        raise InvalidInputError("weights must not all be zero")
    reps = int(reps)
    if reps < 10**4:
        raise InvalidInputError("need reps >= 10^4")

    n = w.size
    chunk = 512
    n_chunks = (reps + chunk - 1) // chunk

    def chunk_f(c: int):
        m = min(chunk, reps - c * chunk)
        rng = derive_rng(seed, c)
        g = dist.sample(rng, (m, n))
        ph = mod1_walk_rows(x * g)
        return np.asarray(f.evaluate(ph))

    def pass_one(c: int):
        return chunk_f(c).sum(axis=0)

    partials = parallel_map(pass_one, range(n_chunks), workers)
    mu = np.zeros(n)
    for pm in partials:
        mu += pm
    mu /= reps

    def pass_two(c: int):
        z = (chunk_f(c) - mu) @ w
        z4 = z**4
        return float(np.sum(z4)), float(np.sum(z4 * z4))

    partials = parallel_map(pass_two, range(n_chunks), workers)
    s4 = 0.0
    s8 = 0.0
    for a_, b_ in partials:
        s4 += a_
        s8 += b_
    denom = float(np.sum(w * w)) ** 2
    mean4 = s4 / reps
    var4 = max(0.0, (s8 / reps - mean4 * mean4) / reps)
    return mean4 / denom, math.sqrt(var4) / denom
