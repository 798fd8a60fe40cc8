"""Gap distributions and the phase walk modulo 1.

The walk frequencies are partial sums S_k of i.i.d. positive gaps with a
bounded density on a bounded support; three closed-form families are
provided (uniform, triangular, raised cosine), each with an exact CDF
and characteristic function. The characteristic function is what makes
a fast analytic route to the limiting variance possible.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ._kernels import mod1_walk
from .errors import InvalidInputError
from .periodic import _readonly, frac

__all__ = [
    "UniformGaps",
    "TriangularGaps",
    "RaisedCosineGaps",
    "GapDistribution",
    "WalkPhasePath",
    "gaps_from_json",
    "gaps_to_json",
    "sample_gaps",
    "walk_phases",
    "walk_phases_from_gaps",
]

_WALK_BLOCK = 1 << 16


def _check_support(a: float, b: float) -> None:
    # a == 0 is allowed: the laws are absolutely continuous, so the gaps
    # are still positive almost surely.
    if not (0.0 <= a < b) or not math.isfinite(a) or not math.isfinite(b):
        raise InvalidInputError(f"need 0 <= a < b, got a={a}, b={b}")


@dataclass(frozen=True)
class UniformGaps:
    """Gaps uniform on [a, b]."""

    a: float
    b: float

    def __post_init__(self):
        _check_support(self.a, self.b)

    @property
    def density_bound(self) -> float:
        return 1.0 / (self.b - self.a)

    @property
    def support_bound(self) -> float:
        return self.b

    def mean(self) -> float:
        return 0.5 * (self.a + self.b)

    def cdf(self, y):
        return np.clip((np.asarray(y, dtype=float) - self.a) / (self.b - self.a), 0.0, 1.0)

    def char_fn(self, t):
        t = np.asarray(t, dtype=float)
        mu = 0.5 * (self.a + self.b)
        half_width = 0.5 * (self.b - self.a)
        # (e^{itb} - e^{ita}) / (it(b-a)) rewritten in a cancellation-free form
        out = np.exp(1j * mu * t) * np.sinc(half_width * t / np.pi)
        return complex(out) if out.ndim == 0 else out

    def sample(self, rng: np.random.Generator, size):
        return rng.uniform(self.a, self.b, size=size)


@dataclass(frozen=True)
class TriangularGaps:
    """Triangular law on [a, b] with mode strictly inside."""

    a: float
    c: float
    b: float

    def __post_init__(self):
        _check_support(self.a, self.b)
        if not (self.a < self.c < self.b):
            raise InvalidInputError("triangular mode must satisfy a < c < b")

    @property
    def density_bound(self) -> float:
        return 2.0 / (self.b - self.a)

    @property
    def support_bound(self) -> float:
        return self.b

    def mean(self) -> float:
        return (self.a + self.b + self.c) / 3.0

    def cdf(self, y):
        y = np.asarray(y, dtype=float)
        a, c, b = self.a, self.c, self.b
        yc = np.clip(y, a, b)
        up = (yc - a) ** 2 / ((b - a) * (c - a))
        down = 1.0 - (b - yc) ** 2 / ((b - a) * (b - c))
        return np.where(yc < c, up, down)

    def char_fn(self, t):
        t = np.asarray(t, dtype=float)
        a, c, b = self.a, self.c, self.b
        scale = (b - a) * (c - a) * (b - c)
        with np.errstate(divide="ignore", invalid="ignore"):
            num = (
                (b - c) * np.exp(1j * a * t)
                - (b - a) * np.exp(1j * c * t)
                + (c - a) * np.exp(1j * b * t)
            )
            val = -2.0 * num / (scale * t * t)
        # second-order Taylor where the closed form loses precision
        small = np.abs(t) * (b - a) < 1e-5
        if np.any(small):
            m1 = self.mean()
            m2 = (a * a + b * b + c * c + a * b + a * c + b * c) / 6.0
            taylor = 1.0 + 1j * m1 * t - 0.5 * m2 * t * t
            val = np.where(small, taylor, val)
        return complex(val) if val.ndim == 0 else val

    def sample(self, rng: np.random.Generator, size):
        return rng.triangular(self.a, self.c, self.b, size=size)


@dataclass(frozen=True)
class RaisedCosineGaps:
    """Raised-cosine law on [a, b]: density (1 + cos(pi z)) / (b - a) with
    z = (y - mu)/s, mu = (a+b)/2, s = (b-a)/2."""

    a: float
    b: float

    def __post_init__(self):
        _check_support(self.a, self.b)

    @property
    def density_bound(self) -> float:
        return 2.0 / (self.b - self.a)

    @property
    def support_bound(self) -> float:
        return self.b

    def mean(self) -> float:
        return 0.5 * (self.a + self.b)

    def cdf(self, y):
        y = np.asarray(y, dtype=float)
        s = 0.5 * (self.b - self.a)
        z = np.clip((y - self.mean()) / s, -1.0, 1.0)
        return 0.5 * (1.0 + z + np.sin(np.pi * z) / np.pi)

    def char_fn(self, t):
        t = np.asarray(t, dtype=float)
        s = 0.5 * (self.b - self.a)
        y = np.abs(s * t)
        # g(y) = pi^2 sin(y) / (y (pi^2 - y^2)), removable singularity at y = pi
        near = np.abs(y - np.pi) < 1e-3
        ysafe = np.where(near, 0.0, y)
        g = np.pi**2 * np.sinc(ysafe / np.pi) / (np.pi**2 - ysafe * ysafe)
        h = np.where(near, y - np.pi, 0.0)
        g_near = np.pi**2 * np.sinc(h / np.pi) / ((np.pi + h) * (2.0 * np.pi + h))
        g = np.where(near, g_near, g)
        out = np.exp(1j * self.mean() * t) * g
        return complex(out) if out.ndim == 0 else out

    def sample(self, rng: np.random.Generator, size):
        # rejection from the uniform envelope; acceptance probability 1/2
        n = int(np.prod(size)) if not np.isscalar(size) else int(size)
        out = np.empty(n)
        filled = 0
        while filled < n:
            m = max(64, int(2.2 * (n - filled)))
            y = rng.uniform(self.a, self.b, size=m)
            u = rng.uniform(0.0, 2.0, size=m)
            z = (y - self.mean()) / (0.5 * (self.b - self.a))
            keep = y[u <= 1.0 + np.cos(np.pi * z)]
            take = min(keep.size, n - filled)
            out[filled : filled + take] = keep[:take]
            filled += take
        return out.reshape(size) if not np.isscalar(size) else out


GapDistribution = Union[UniformGaps, TriangularGaps, RaisedCosineGaps]


@dataclass(frozen=True, eq=False, init=False)
class WalkPhasePath:
    """Phases t_k = (x * S_k) mod 1 for one replication, k = 1..N."""

    seed: int
    x: float
    phases: np.ndarray
    raw_sum_checkpoints: Optional[tuple]

    def __init__(self, seed, x, phases, raw_sum_checkpoints=None):
        object.__setattr__(self, "seed", int(seed))
        object.__setattr__(self, "x", float(x))
        object.__setattr__(self, "phases", _readonly(phases))
        object.__setattr__(self, "raw_sum_checkpoints", raw_sum_checkpoints)

    def __len__(self) -> int:
        return self.phases.size


def _check_x(x: float) -> float:
    x = float(x)
    if x == 0.0 or not math.isfinite(x):
        raise InvalidInputError("frequency multiplier x must be nonzero and finite")
    return x


def sample_gaps(dist: GapDistribution, n: int, seed: int) -> np.ndarray:
    """n i.i.d. gaps, deterministic per seed."""
    if n < 1:
        raise InvalidInputError("need n >= 1")
    from .seeding import derive_rng

    return dist.sample(derive_rng(seed), int(n))


def walk_phases_from_gaps(gaps: np.ndarray, x: float) -> np.ndarray:
    """Phases of the compensated mod-1 walk over explicit gap values."""
    x = _check_x(x)
    increments = x * np.ascontiguousarray(gaps, dtype=float)
    phases, _, _ = mod1_walk(increments, 0.0, 0.0)
    return phases


def walk_phases(
    dist: GapDistribution,
    x: float,
    n: int,
    seed: int,
    raw_checkpoint_stride: int = 0,
) -> WalkPhasePath:
    """Generate the phase path t_1..t_n for one seeded replication.

    With ``raw_checkpoint_stride > 0``, the raw sums S_k are recorded at
    every multiple of the stride for cross-checking against the reduced
    phases.
    """
    x = _check_x(x)
    if n < 1:
        raise InvalidInputError("need n >= 1")
    from .seeding import derive_rng

    rng = derive_rng(seed)
    phases = np.empty(n)
    t, c = 0.0, 0.0
    raw = [] if raw_checkpoint_stride > 0 else None
    raw_total = 0.0
    raw_comp = 0.0
    pos = 0
    while pos < n:
        m = min(_WALK_BLOCK, n - pos)
        g = dist.sample(rng, m)
        block, t, c = mod1_walk(x * g, t, c)
        phases[pos : pos + m] = block
        if raw is not None:
            cs = np.cumsum(g)
            first = (pos // raw_checkpoint_stride + 1) * raw_checkpoint_stride
            for k in range(first, pos + m + 1, raw_checkpoint_stride):
                raw.append((k, raw_total + float(cs[k - pos - 1])))
            y = float(cs[-1]) - raw_comp
            s = raw_total + y
            raw_comp = (s - raw_total) - y
            raw_total = s
        pos += m
    return WalkPhasePath(seed, x, phases, tuple(raw) if raw is not None else None)


def gaps_from_json(doc) -> GapDistribution:
    """Parse {"kind": "uniform", "a": ..., "b": ...} and friends."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    if not isinstance(doc, dict) or "kind" not in doc:
        raise InvalidInputError("gap spec must be an object with a 'kind'")
    kind = str(doc["kind"]).replace("_", "-")
    try:
        if kind == "uniform":
            return UniformGaps(float(doc["a"]), float(doc["b"]))
        if kind == "triangular":
            return TriangularGaps(float(doc["a"]), float(doc["c"]), float(doc["b"]))
        if kind == "raised-cosine":
            return RaisedCosineGaps(float(doc["a"]), float(doc["b"]))
    except KeyError as exc:
        raise InvalidInputError(f"gap spec missing field {exc}") from exc
    raise InvalidInputError(f"unknown gap kind {doc['kind']!r}")


def gaps_to_json(dist: GapDistribution) -> dict:
    if isinstance(dist, UniformGaps):
        return {"kind": "uniform", "a": dist.a, "b": dist.b}
    if isinstance(dist, TriangularGaps):
        return {"kind": "triangular", "a": dist.a, "c": dist.c, "b": dist.b}
    return {"kind": "raised-cosine", "a": dist.a, "b": dist.b}
