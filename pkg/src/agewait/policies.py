"""Deterministic stationary waiting policies z(y) in [0, M].

Each policy maps the just-observed transmission time to a waiting time
before the next update is submitted.  The threshold policy is evaluated
lazily: the wait for a given state is found by right-biased bisection on
the monotone conditional expected penalty rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .penalty import PenaltyFunction
from .ttime import TransmissionModel


class Policy:
    """Base class for waiting rules.  Subclasses are immutable."""

    kind: str = ""

    def z(self, y):
        """Waiting time after a transmission of duration y.

        Accepts scalars or numpy arrays.
        """
        raise NotImplementedError

    def describe(self) -> dict:
        return {"kind": self.kind}


@dataclass(frozen=True)
class ZeroWait(Policy):
    kind: str = field(default="zero_wait", init=False)

    def z(self, y):
        return np.zeros_like(np.asarray(y, dtype=float)) if np.ndim(y) else 0.0


@dataclass(frozen=True)
class ConstantWait(Policy):
    wait: float
    kind: str = field(default="constant_wait", init=False)

    def __post_init__(self):
        if self.wait < 0:
            raise DomainError("wait must be non-negative")

    def z(self, y):
        if np.ndim(y):
            return np.full(np.shape(y), self.wait)
        return self.wait

    def describe(self):
        return {"kind": self.kind, "wait": self.wait}


@dataclass(frozen=True)
class WaterFilling(Policy):
    """z(y) = clamp(beta - y, 0, M): wait up to the water level beta."""

    beta: float
    M: float
    kind: str = field(default="water_filling", init=False)

    def z(self, y):
        out = np.clip(self.beta - np.asarray(y, dtype=float), 0.0, self.M)
        return float(out) if np.ndim(y) == 0 else out

    def describe(self):
        return {"kind": self.kind, "beta": self.beta, "M": self.M}


@dataclass(frozen=True)
class Threshold(Policy):
    """Largest wait keeping E[g(y + z + Y') | Y = y] at or below nu."""

    nu: float
    model: TransmissionModel
    pf: PenaltyFunction
    M: float
    tol: float = 1e-9
    kind: str = field(default="threshold", init=False)

    def z(self, y):
        if np.ndim(y) == 0:
            return self._z_scalar(float(y))
        ys = np.asarray(y, dtype=float)
        uniq, inverse = np.unique(ys, return_inverse=True)
        zs = np.array([self._z_scalar(float(u)) for u in uniq])
        return zs[inverse].reshape(ys.shape)

    def _z_scalar(self, y: float) -> float:
        def rate(zv: float) -> float:
            return self.model.conditional_expect(
                y, lambda yn: self.pf(y + zv + yn))

        if rate(0.0) > self.nu:
            return 0.0
        if rate(self.M) <= self.nu:
            return self.M
        lo, hi = 0.0, self.M  # rate(lo) <= nu < rate(hi)
        while hi - lo > self.tol:
            mid = 0.5 * (lo + hi)
            if rate(mid) <= self.nu:
                lo = mid
            else:
                hi = mid
        return lo

    def describe(self):
        return {"kind": self.kind, "nu": self.nu, "M": self.M}


@dataclass(frozen=True)
class Tabulated(Policy):
    """Piecewise-linear interpolation of sampled (y, z) pairs."""

    ys: tuple[float, ...]
    zs: tuple[float, ...]
    M: float
    kind: str = field(default="tabulated", init=False)

    def __post_init__(self):
        if len(self.ys) != len(self.zs) or not self.ys:
            raise DomainError("tabulation must be nonempty and aligned")
        if any(b <= a for a, b in zip(self.ys, self.ys[1:])):
            raise DomainError("tabulated states must be strictly increasing")
        if any(z < 0 or z > self.M for z in self.zs):
            raise DomainError("waits must lie in [0, M]")

    def z(self, y):
        out = np.interp(np.asarray(y, dtype=float), self.ys, self.zs)
        return float(out) if np.ndim(y) == 0 else out

    def describe(self):
        return {"kind": self.kind, "table": [list(self.ys), list(self.zs)]}


@dataclass(frozen=True)
class EpsilonTrace(Policy):
    """Per-state constant waits, keyed by the observed transmission time.

    Used with trace fixtures; states not listed get a zero wait.
    """

    waits: tuple[tuple[float, float], ...]
    kind: str = field(default="epsilon_trace", init=False)

    def _lookup(self, y: float) -> float:
        for state, wait in self.waits:
            if abs(state - y) <= 1e-12:
                return wait
        return 0.0

    def z(self, y):
        if np.ndim(y) == 0:
            return self._lookup(float(y))
        return np.array([self._lookup(float(v)) for v in np.ravel(y)]).reshape(
            np.shape(y))

    def describe(self):
        return {"kind": self.kind, "waits": [list(w) for w in self.waits]}
