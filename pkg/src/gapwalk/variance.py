"""Limiting variance of the partial sums, by three independent routes.

For a mean-zero periodic f and walk phases (x * S_k) mod 1 the variance
scale of the partial-sum process is

    V = |f|^2 + 2 * sum_{k>=1} E f(U) f(U + x * S_k),  U uniform(0,1).

Routes:

* ``closed_form`` -- for trig polynomials only. The k-th expectation is
  0.5 * sum_j (a_j^2 + b_j^2) Re phi(2 pi j x)^k with phi the gap
  characteristic function, and the geometric series sums to
  0.5 * sum_j (a_j^2 + b_j^2) (1 + 2 Re(phi_j / (1 - phi_j))).
* ``series`` -- grid quadrature of the autocorrelation against the
  mod-1 density of each step, truncated at K with an explicit
  geometric tail bound from the fitted mixing rate.
* ``monte_carlo`` -- direct simulation of the defining expectations.

The closed form is validated against the Monte Carlo route in the test
suite before anything else trusts it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .density import UNDERFLOW_GAP, _step_factor, _validate_grid, initial_masses
from .errors import DegenerateFitError, InvalidInputError, UnsupportedRepresentationError
from .gaps import GapDistribution, _check_x
from .periodic import ShapeFunction, TrigPolynomial, frac
from .seeding import derive_rng, parallel_map

__all__ = [
    "VarianceReport",
    "closed_form",
    "series",
    "monte_carlo",
    "report",
    "choose_truncation",
]

_MC_CHUNK = 1 << 14
_MIN_FIT_STEPS = 30


@dataclass(frozen=True)
class VarianceReport:
    closed_form: Optional[float]
    series_truncated: float
    series_tail_bound: Optional[float]
    monte_carlo: float
    monte_carlo_std_err: float
    truncation_k: int

    def to_json(self) -> dict:
        return {
            "closedForm": self.closed_form,
            "seriesTruncated": self.series_truncated,
            "seriesTailBound": self.series_tail_bound,
            "monteCarlo": self.monte_carlo,
            "monteCarloStdErr": self.monte_carlo_std_err,
            "truncationK": self.truncation_k,
        }


def closed_form(f: ShapeFunction, dist: GapDistribution, x: float) -> float:
    """Exact variance for a trig polynomial via the characteristic function."""
    x = _check_x(x)
    if not isinstance(f, TrigPolynomial):
        raise UnsupportedRepresentationError(
            "closed form needs a trig polynomial; use series or monte_carlo"
        )
    j = np.arange(1, f.degree + 1)
    phi = np.asarray(dist.char_fn(2.0 * np.pi * j * x))
    power = 0.5 * (f.cos_coeffs**2 + f.sin_coeffs**2)
    return float(np.sum(power * (1.0 + 2.0 * (phi / (1.0 - phi)).real)))


def _fit_gaps(steps: np.ndarray, gaps: np.ndarray):
    keep = gaps >= UNDERFLOW_GAP
    if keep.sum() < 2:
        raise DegenerateFitError("all uniformity gaps underflowed")
    slope, intercept = np.polyfit(steps[keep], np.log(gaps[keep]), 1)
    return float(np.exp(intercept)), float(np.exp(slope))


def series(
    f: ShapeFunction,
    dist: GapDistribution,
    x: float,
    truncation_k: int,
    grid_size: int,
):
    """Truncated series value and its geometric tail bound.

    Term k is the grid quadrature of the autocorrelation r against the
    k-step mod-1 density: sum_i r(mid_i) * mass_k[i]. Since r integrates
    to zero, |term_k| <= |f|^2 * sup|p_k - 1|, and the tail beyond K is
    bounded by 2 |f|^2 C w^{K+1} / (1 - w) with (C, w) fitted on the
    observed gaps. Returns (value, tail_bound); the bound is None only
    if the mixing-rate fit degenerates while gaps are still measurable.
    """
    x = _check_x(x)
    g = _validate_grid(grid_size)
    K = int(truncation_k)
    if K < 1:
        raise InvalidInputError("need truncation K >= 1")
    l2 = f.l2_norm_sq()
    mid = (np.arange(g) + 0.5) / g
    r_mid = np.asarray(f.autocorrelation(mid))

    m1 = initial_masses(dist, x, g)
    spectrum = np.fft.rfft(m1)
    step = spectrum * _step_factor(g)
    n_steps = max(K, _MIN_FIT_STEPS)
    terms = np.empty(K)
    gaps = np.empty(n_steps)
    cur = spectrum
    for k in range(1, n_steps + 1):
        masses = m1 if k == 1 else np.fft.irfft(cur, g)
        if k <= K:
            terms[k - 1] = float(r_mid @ masses)
        gaps[k - 1] = np.max(np.abs(masses * g - 1.0))
        cur = cur * step

    value = l2 + 2.0 * float(np.sum(terms))
    steps = np.arange(2, n_steps + 1)
    try:
        C, w = _fit_gaps(steps, gaps[1:])
        tail = 2.0 * l2 * C * w ** (K + 1) / (1.0 - w)
    except DegenerateFitError:
        if np.all(gaps[1:] < UNDERFLOW_GAP):
            # sup|p_2 - 1| <= u bounds every nonzero Fourier coefficient
            # of the one-step law by sqrt(u), so the remaining terms decay
            # by at least sqrt(u) ~ 1e-7 per step.
            tail = 2.0 * l2 * UNDERFLOW_GAP / (1.0 - math.sqrt(UNDERFLOW_GAP))
        else:
            tail = None
    return value, tail


def monte_carlo(
    f: ShapeFunction,
    dist: GapDistribution,
    x: float,
    truncation_k: int,
    reps: int,
    seed: int,
    workers: int = 1,
):
    """Unbiased simulation of the K-truncated variance.

    Each replication draws an independent uniform U and walk prefix,
    and evaluates f(U)^2 + 2 sum_k f(U) f(U + x S_k). Returns
    (estimate, standard error).
    """
    x = _check_x(x)
    K = int(truncation_k)
    reps = int(reps)
    if K < 1:
        raise InvalidInputError("need truncation K >= 1")
    if reps < 1000:
        raise InvalidInputError("need reps >= 1000")

    n_chunks = (reps + _MC_CHUNK - 1) // _MC_CHUNK

    def one_chunk(c: int):
        m = min(_MC_CHUNK, reps - c * _MC_CHUNK)
        rng = derive_rng(seed, c)
        gaps = dist.sample(rng, (m, K))
        u = rng.uniform(0.0, 1.0, size=m)
        psi = frac(x * np.cumsum(gaps, axis=1))
        fu = np.asarray(f.evaluate(u))
        fshift = np.asarray(f.evaluate(frac(u[:, None] + psi)))
        z = fu * fu + 2.0 * fu * fshift.sum(axis=1)
        return float(np.sum(z)), float(np.sum(z * z))

    partials = parallel_map(one_chunk, range(n_chunks), workers)
    s1 = 0.0
    s2 = 0.0
    for a, b in partials:
        s1 += a
        s2 += b
    estimate = s1 / reps
    var = max(0.0, (s2 - s1 * s1 / reps) / (reps - 1))
    return estimate, math.sqrt(var / reps)


def choose_truncation(
    f: ShapeFunction,
    dist: GapDistribution,
    x: float,
    grid_size: int,
    rel_tol: float = 1e-6,
    k_max: int = 4096,
) -> int:
    """Smallest K whose tail bound drops below rel_tol * |f|^2."""
    from .density import decay_fit

    l2 = f.l2_norm_sq()
    if l2 == 0.0:
        return 1
    try:
        fit = decay_fit(dist, x, _MIN_FIT_STEPS, grid_size)
    except DegenerateFitError:
        return 1
    target = rel_tol * l2
    k = 1
    while k < k_max and 2.0 * l2 * fit.C * fit.w ** (k + 1) / (1.0 - fit.w) >= target:
        k += 1
    return k


def report(
    f: ShapeFunction,
    dist: GapDistribution,
    x: float,
    truncation_k: Optional[int],
    grid_size: int,
    reps: int,
    seed: int,
    workers: int = 1,
) -> VarianceReport:
    """All applicable routes in one comparison report."""
    K = choose_truncation(f, dist, x, grid_size) if truncation_k is None else int(truncation_k)
    try:
        cf = closed_form(f, dist, x)
    except UnsupportedRepresentationError:
        cf = None
    value, tail = series(f, dist, x, K, grid_size)
    mc, se = monte_carlo(f, dist, x, K, reps, seed, workers)
    return VarianceReport(
        closed_form=cf,
        series_truncated=value,
        series_tail_bound=tail,
        monte_carlo=mc,
        monte_carlo_std_err=se,
        truncation_k=K,
    )
