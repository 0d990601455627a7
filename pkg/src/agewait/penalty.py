"""Age penalty functions and the per-stage penalty integral.

A penalty function g maps the age to a non-negative, non-decreasing level
of dissatisfaction.  The cost of one update stage is the integral of g
over the sawtooth segment [y, y+z+y'], computed here through the
antiderivative G so that all supported families have closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DomainError

# Absolute tolerance for quadrature of tabulated penalties; two orders
# below the tightest test tolerance.
QUAD_ABS_TOL = 1e-10

_KINDS = ("linear", "power", "exponential", "stairstep", "constant", "custom")


@dataclass(frozen=True)
class PenaltyFunction:
    """One of the supported age-penalty families.

    kind      -- 'linear', 'power', 'exponential', 'stairstep', 'constant'
                 or 'custom'
    alpha     -- shape parameter of power/exponential/stairstep penalties
    k         -- level of the constant penalty
    table     -- ((age, g(age)), ...) knots of a custom penalty, linearly
                 interpolated and held constant beyond the last knot
    """

    kind: str
    alpha: float = 0.0
    k: float = 0.0
    table: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown penalty kind {self.kind!r}")
        if self.alpha < 0:
            raise DomainError("alpha must be non-negative")
        if self.k < 0:
            raise DomainError("constant level must be non-negative")
        if self.kind == "custom":
            if not self.table:
                raise DomainError("custom penalty requires a tabulation")
            xs = [p[0] for p in self.table]
            gs = [p[1] for p in self.table]
            if xs[0] < 0 or min(gs) < 0:
                raise DomainError("tabulated ages and values must be non-negative")
            if any(b <= a for a, b in zip(xs, xs[1:])):
                raise DomainError("tabulated ages must be strictly increasing")
            if any(b < a for a, b in zip(gs, gs[1:])):
                raise DomainError("tabulated penalty must be non-decreasing")

    # -- constructors ----------------------------------------------------

    @classmethod
    def linear(cls) -> "PenaltyFunction":
        return cls("linear")

    @classmethod
    def power(cls, alpha: float) -> "PenaltyFunction":
        return cls("power", alpha=alpha)

    @classmethod
    def exponential(cls, alpha: float) -> "PenaltyFunction":
        return cls("exponential", alpha=alpha)

    @classmethod
    def stairstep(cls, alpha: float) -> "PenaltyFunction":
        return cls("stairstep", alpha=alpha)

    @classmethod
    def constant(cls, k: float) -> "PenaltyFunction":
        return cls("constant", k=k)

    @classmethod
    def custom(cls, points) -> "PenaltyFunction":
        return cls("custom", table=tuple((float(x), float(g)) for x, g in points))

    # -- evaluation ------------------------------------------------------

    @property
    def is_constant(self) -> bool:
        """True when g does not depend on the age at all."""
        if self.kind == "constant":
            return True
        if self.kind in ("exponential", "stairstep") and self.alpha == 0:
            return True
        if self.kind == "power" and self.alpha == 0:
            return True
        if self.kind == "custom":
            gs = [p[1] for p in self.table]
            return max(gs) == min(gs)
        return False

    def __call__(self, delta):
        """Evaluate g(delta); accepts scalars or numpy arrays."""
        arr = np.asarray(delta, dtype=float)
        if np.any(arr < 0):
            raise DomainError("age must be non-negative")
        if self.kind == "linear":
            out = arr
        elif self.kind == "power":
            out = arr**self.alpha
        elif self.kind == "exponential":
            out = np.expm1(self.alpha * arr)
        elif self.kind == "stairstep":
            out = np.floor(self.alpha * arr)
        elif self.kind == "constant":
            out = np.full_like(arr, self.k)
        else:
            xs = np.array([p[0] for p in self.table])
            gs = np.array([p[1] for p in self.table])
            out = np.interp(arr, xs, gs)
        if np.isscalar(delta) or np.ndim(delta) == 0:
            return float(out)
        return out

    def antiderivative(self, x):
        """G(x) = integral of g from 0 to x; accepts scalars or arrays."""
        arr = np.asarray(x, dtype=float)
        if np.any(arr < 0):
            raise DomainError("upper limit must be non-negative")
        if self.kind == "linear":
            out = arr**2 / 2.0
        elif self.kind == "power":
            out = arr ** (self.alpha + 1.0) / (self.alpha + 1.0)
        elif self.kind == "exponential":
            if self.alpha == 0:
                out = np.zeros_like(arr)
            else:
                out = np.expm1(self.alpha * arr) / self.alpha - arr
        elif self.kind == "stairstep":
            if self.alpha == 0:
                out = np.zeros_like(arr)
            else:
                m = np.floor(self.alpha * arr)
                out = m * (m - 1.0) / (2.0 * self.alpha) + m * (arr - m / self.alpha)
        elif self.kind == "constant":
            out = self.k * arr
        else:
            out = self._integrate_custom(arr)
        if np.isscalar(x) or np.ndim(x) == 0:
            return float(out)
        return np.asarray(out, dtype=float)

    def _integrate_custom(self, arr: np.ndarray) -> np.ndarray:
        # g is piecewise linear, so G is piecewise quadratic: accumulate
        # trapezoid areas up to the preceding knot, then close the segment
        xs = np.array([p[0] for p in self.table])
        gs = np.array([p[1] for p in self.table])
        knot_G = np.concatenate(
            ([gs[0] * xs[0]],
             gs[0] * xs[0] + np.cumsum(0.5 * (gs[1:] + gs[:-1]) * np.diff(xs))))
        shape = np.shape(arr)
        arr = np.atleast_1d(arr)
        idx = np.searchsorted(xs, arr, side="right") - 1
        below = idx < 0
        idx = np.clip(idx, 0, len(xs) - 1)
        gx = np.interp(arr, xs, gs)
        out = knot_G[idx] + 0.5 * (arr - xs[idx]) * (gs[idx] + gx)
        return np.where(below, gs[0] * arr, out).reshape(shape)

    def stage_penalty(self, y, z, y_next):
        """Penalty accrued over one stage: integral of g over [y, y+z+y'].

        Accepts scalars or broadcastable arrays.
        """
        ya = np.asarray(y, dtype=float)
        za = np.asarray(z, dtype=float)
        na = np.asarray(y_next, dtype=float)
        if np.any(ya < 0) or np.any(za < 0) or np.any(na < 0):
            raise DomainError("stage arguments must be non-negative")
        out = self.antiderivative(ya + za + na) - self.antiderivative(ya)
        scalars = all(np.ndim(v) == 0 for v in (y, z, y_next))
        return float(out) if scalars else out

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind in ("power", "exponential", "stairstep"):
            d["alpha"] = self.alpha
        elif self.kind == "constant":
            d["k"] = self.k
        elif self.kind == "custom":
            d["table"] = [list(p) for p in self.table]
        return d

    @classmethod
    def from_dict(cls, spec: dict) -> "PenaltyFunction":
        kind = spec.get("kind")
        if kind == "linear":
            return cls.linear()
        if kind == "power":
            return cls.power(float(spec["alpha"]))
        if kind == "exponential":
            return cls.exponential(float(spec["alpha"]))
        if kind == "stairstep":
            return cls.stairstep(float(spec["alpha"]))
        if kind == "constant":
            return cls.constant(float(spec["k"]))
        if kind == "custom":
            return cls.custom(spec["table"])
        raise DomainError(f"unknown penalty kind {kind!r}")


def eval_g(pf: PenaltyFunction, delta):
    """Functional alias for ``pf(delta)``."""
    return pf(delta)


def antiderivative_G(pf: PenaltyFunction, x):
    """Functional alias for ``pf.antiderivative(x)``."""
    return pf.antiderivative(x)


def stage_penalty_q(pf: PenaltyFunction, y, z, y_next):
    """Functional alias for ``pf.stage_penalty(y, z, y_next)``."""
    return pf.stage_penalty(y, z, y_next)


def quadrature_stage_penalty(pf: PenaltyFunction, y: float, z: float,
                             y_next: float) -> float:
    """Independent quadrature of g over [y, y+z+y'], used as a test oracle."""
    hi = y + z + y_next
    if hi == y:
        return 0.0
    if pf.kind == "stairstep" and pf.alpha > 0:
        # break at the discontinuities so quad converges
        lo_m = math.ceil(pf.alpha * y)
        hi_m = math.floor(pf.alpha * hi)
        pts = [m / pf.alpha for m in range(lo_m, hi_m + 1) if y < m / pf.alpha < hi]
    elif pf.kind == "custom":
        pts = [p[0] for p in pf.table if y < p[0] < hi]
    else:
        pts = []
    val, _ = quad(pf, y, hi, points=pts or None, epsabs=QUAD_ABS_TOL, limit=500)
    return val
