"""Mean-zero 1-periodic functions and their circular autocorrelation.

Two representations are supported:

* ``TrigPolynomial`` -- finite cosine/sine polynomial with no constant
  term, so the mean over one period is zero by construction and the
  squared L2 norm and autocorrelation have closed forms.
* ``SampledLipschitz`` -- piecewise-linear interpolation of equally
  spaced samples, mean-corrected so the interpolant integrates to zero.
  Norm and autocorrelation are exact integrals of the interpolant, not
  numeric quadrature rules.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "TrigPolynomial",
    "SampledLipschitz",
    "ShapeFunction",
    "mean_zero_project",
    "function_from_json",
    "function_to_json",
]


def frac(t):
    """Floor-based reduction of t into [0, 1).

    Guards against the rounding case where ``t - floor(t)`` lands exactly
    on 1.0 (tiny negative t).
    """
    u = np.asarray(t, dtype=float)
    out = u - np.floor(u)
    out = np.where(out >= 1.0, 0.0, out)
    if np.ndim(t) == 0:
        return float(out)
    return out


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False, init=False)
class TrigPolynomial:
    """f(t) = sum_j a_j cos(2 pi j t) + b_j sin(2 pi j t), j = 1..J."""

    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray

    def __init__(self, cos_coeffs=(), sin_coeffs=()):
        a = np.atleast_1d(np.asarray(cos_coeffs, dtype=float))
        b = np.atleast_1d(np.asarray(sin_coeffs, dtype=float))
        J = max(a.size, b.size)
        a = np.pad(a, (0, J - a.size))
        b = np.pad(b, (0, J - b.size))
        object.__setattr__(self, "cos_coeffs", _readonly(a))
        object.__setattr__(self, "sin_coeffs", _readonly(b))

    @property
    def degree(self) -> int:
        return self.cos_coeffs.size

    def evaluate(self, t):
        u = frac(t)
        j = np.arange(1, self.degree + 1)
        ang = 2.0 * np.pi * np.multiply.outer(np.asarray(u), j)
        val = np.cos(ang) @ self.cos_coeffs + np.sin(ang) @ self.sin_coeffs
        if np.ndim(t) == 0:
            return float(val)
        return val

    def l2_norm_sq(self) -> float:
        return 0.5 * float(np.sum(self.cos_coeffs**2 + self.sin_coeffs**2))

    def autocorrelation(self, t):
        """r(t) = integral over one period of f(u) f(u+t) du."""
        u = frac(t)
        j = np.arange(1, self.degree + 1)
        power = 0.5 * (self.cos_coeffs**2 + self.sin_coeffs**2)
        ang = 2.0 * np.pi * np.multiply.outer(np.asarray(u), j)
        val = np.cos(ang) @ power
        if np.ndim(t) == 0:
            return float(val)
        return val

    def scaled(self, c: float) -> "TrigPolynomial":
        return TrigPolynomial(c * self.cos_coeffs, c * self.sin_coeffs)

    def sampled(self, m: int) -> "SampledLipschitz":
        """Piecewise-linear approximation on m equally spaced points."""
        return mean_zero_project(self.evaluate(np.arange(m) / m))


@dataclass(frozen=True, eq=False, init=False)
class SampledLipschitz:
    """Piecewise-linear periodic interpolant of mean-corrected samples.

    ``values`` are the corrected samples at i/M for i = 0..M-1; the
    interpolant over [0, 1) integrates to exactly zero because the mean
    of a periodic piecewise-linear function equals the sample mean.
    """

    values: np.ndarray
    mean_correction: float

    def __init__(self, values, mean_correction=0.0):
        object.__setattr__(self, "values", _readonly(values))
        object.__setattr__(self, "mean_correction", float(mean_correction))
        if self.values.size < 2:
            raise InvalidInputError("need at least 2 samples")

    @property
    def grid_size(self) -> int:
        return self.values.size

    @property
    def lipschitz_constant(self) -> float:
        wrapped = np.append(self.values, self.values[0])
        return float(np.max(np.abs(np.diff(wrapped))) * self.grid_size)

    def evaluate(self, t):
        u = frac(t)
        m = self.grid_size
        xp = np.arange(m + 1) / m
        fp = np.append(self.values, self.values[0])
        val = np.interp(np.asarray(u), xp, fp)
        if np.ndim(t) == 0:
            return float(val)
        return val

    def l2_norm_sq(self) -> float:
        # exact integral of the squared interpolant: per segment
        # (y0^2 + y0 y1 + y1^2) / (3 M)
        y0 = self.values
        y1 = np.roll(self.values, -1)
        return float(np.sum(y0 * y0 + y0 * y1 + y1 * y1) / (3.0 * self.grid_size))

    def autocorrelation(self, t) -> float:
        """Exact circular cross integral of the interpolant with its shift.

        On the merged breakpoint grid both factors are linear in u, so the
        product is quadratic and Simpson's rule per segment is exact.
        """
        if np.ndim(t) != 0:
            return np.array([self.autocorrelation(ti) for ti in np.asarray(t)])
        s = frac(t)
        m = self.grid_size
        grid = np.arange(m) / m
        pts = np.unique(np.concatenate([grid, frac(grid - s)]))
        left = pts
        right = np.append(pts[1:], 1.0)
        h = right - left
        mid = left + 0.5 * h

        def g(u):
            return self.evaluate(u) * self.evaluate(u + s)

        return float(np.sum(h / 6.0 * (g(left) + 4.0 * g(mid) + g(right))))

    def scaled(self, c: float) -> "SampledLipschitz":
        return SampledLipschitz(c * self.values, c * self.mean_correction)


ShapeFunction = Union[TrigPolynomial, SampledLipschitz]


def mean_zero_project(samples) -> SampledLipschitz:
    """Build the mean-zero piecewise-linear interpolant of the samples."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise InvalidInputError("mean_zero_project needs at least 2 samples")
    correction = float(np.mean(arr))
    return SampledLipschitz(arr - correction, correction)


def function_from_json(doc) -> ShapeFunction:
    """Parse {"type": "trig", "cos": [...], "sin": [...]} or
    {"type": "sampled", "values": [...]}."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    if not isinstance(doc, dict) or "type" not in doc:
        raise InvalidInputError("function spec must be an object with a 'type'")
    kind = doc["type"]
    if kind == "trig":
        return TrigPolynomial(doc.get("cos", ()), doc.get("sin", ()))
    if kind == "sampled":
        return mean_zero_project(doc.get("values", ()))
    raise InvalidInputError(f"unknown function type {kind!r}")


def function_to_json(f: ShapeFunction) -> dict:
    if isinstance(f, TrigPolynomial):
        return {
            "type": "trig",
            "cos": list(map(float, f.cos_coeffs)),
            "sin": list(map(float, f.sin_coeffs)),
        }
    return {
        "type": "sampled",
        "values": list(map(float, f.values + f.mean_correction)),
    }
