"""Stationary ergodic transmission-time processes.

Every model exposes seeded path sampling plus exact or quadrature-based
stationary and one-step conditional expectations.  Finite-state models
use weighted sums; the exponential model uses Gauss-Laguerre nodes; the
log-normal autoregressive model uses Gauss-Hermite nodes over its
underlying Gaussian state.  Expectation integrands must accept numpy
arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import stats
from scipy.signal import lfilter

from .errors import (
    DomainError,
    UndefinedCorrelationError,
    UnsupportedModelError,
)

DEFAULT_QUADRATURE_NODES = 64


@dataclass(frozen=True)
class Moments:
    mean: float
    second_moment: float
    y_inf: float

    @property
    def variance(self) -> float:
        return self.second_moment - self.mean**2


class TransmissionModel:
    """Base class; subclasses are immutable and safe to share."""

    kind: str = ""

    @property
    def is_iid(self) -> bool:
        raise NotImplementedError

    def sample_path(self, n: int, seed: int) -> np.ndarray:
        """Draw n transmission times, starting from the stationary law."""
        if n < 1:
            raise DomainError("path length must be positive")
        return self._sample(n, np.random.default_rng(seed))

    def _sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def stationary_expect(self, h) -> float:
        """E[h(Y)] under the stationary distribution."""
        raise NotImplementedError

    def conditional_expect(self, y: float, h) -> float:
        """E[h(Y') | Y = y] for the next transmission time Y'."""
        raise NotImplementedError

    def moments_and_support(self) -> Moments:
        """Stationary mean, second moment and essential infimum."""
        raise NotImplementedError

    def lag1_correlation(self) -> float:
        """Correlation between consecutive transmission times."""
        raise NotImplementedError

    def support_grid(self, n: int) -> np.ndarray:
        """Representative support points, used for policy tabulation."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantTime(TransmissionModel):
    value: float
    kind: str = field(default="constant", init=False)

    def __post_init__(self):
        if self.value <= 0:
            raise DomainError("constant transmission time must be positive")

    @property
    def is_iid(self) -> bool:
        return True

    def _sample(self, n, rng):
        return np.full(n, self.value)

    def stationary_expect(self, h):
        return float(np.asarray(h(np.array([self.value])))[0])

    def conditional_expect(self, y, h):
        return self.stationary_expect(h)

    def moments_and_support(self):
        return Moments(self.value, self.value**2, self.value)

    def lag1_correlation(self):
        raise UndefinedCorrelationError("constant process has zero variance")

    def support_grid(self, n):
        return np.array([self.value])

    def to_dict(self):
        return {"kind": "constant", "params": {"value": self.value}}


@dataclass(frozen=True)
class FiniteIID(TransmissionModel):
    values: tuple[float, ...]
    probabilities: tuple[float, ...]
    kind: str = field(default="finite_iid", init=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        p = np.asarray(self.probabilities, dtype=float)
        if len(v) != len(p) or len(v) == 0:
            raise DomainError("values and probabilities must match and be nonempty")
        if np.any(v < 0):
            raise DomainError("transmission times must be non-negative")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise DomainError("probabilities must be non-negative and sum to 1")
        if float(v @ p) <= 0:
            raise DomainError("stationary mean must be positive")

    @property
    def is_iid(self) -> bool:
        return True

    @cached_property
    def _v(self):
        return np.asarray(self.values, dtype=float)

    @cached_property
    def _p(self):
        return np.asarray(self.probabilities, dtype=float)

    def _sample(self, n, rng):
        return rng.choice(self._v, size=n, p=self._p)

    def stationary_expect(self, h):
        return float(np.asarray(h(self._v)) @ self._p)

    def conditional_expect(self, y, h):
        return self.stationary_expect(h)

    def moments_and_support(self):
        mean = float(self._v @ self._p)
        m2 = float(self._v**2 @ self._p)
        y_inf = float(self._v[self._p > 0].min())
        return Moments(mean, m2, y_inf)

    def lag1_correlation(self):
        return 0.0

    def support_grid(self, n):
        return np.sort(self._v)

    def to_dict(self):
        return {"kind": "finite_iid",
                "params": {"values": list(self.values),
                           "probabilities": list(self.probabilities)}}


@dataclass(frozen=True)
class FiniteMarkov(TransmissionModel):
    values: tuple[float, ...]
    transition: tuple[tuple[float, ...], ...]
    kind: str = field(default="finite_markov", init=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        P = np.asarray(self.transition, dtype=float)
        if P.shape != (len(v), len(v)):
            raise DomainError("transition matrix shape must match values")
        if np.any(v < 0):
            raise DomainError("transmission times must be non-negative")
        if np.any(P < 0) or np.any(np.abs(P.sum(axis=1) - 1.0) > 1e-12):
            raise DomainError("transition rows must be distributions")
        if not _irreducible(P):
            raise DomainError("chain must be irreducible")
        pi = self.stationary
        if float(v @ pi) <= 0:
            raise DomainError("stationary mean must be positive")
        if np.max(np.abs(pi @ P - pi)) > 1e-12:
            raise DomainError("stationary distribution failed to converge")

    @property
    def is_iid(self) -> bool:
        P = self._P
        return bool(np.all(np.abs(P - self.stationary[None, :]) < 1e-14))

    @cached_property
    def _v(self):
        return np.asarray(self.values, dtype=float)

    @cached_property
    def _P(self):
        return np.asarray(self.transition, dtype=float)

    @cached_property
    def stationary(self) -> np.ndarray:
        P = np.asarray(self.transition, dtype=float)
        k = P.shape[0]
        A = np.vstack([P.T - np.eye(k), np.ones((1, k))])
        b = np.zeros(k + 1)
        b[-1] = 1.0
        pi, *_ = np.linalg.lstsq(A, b, rcond=None)
        return np.clip(pi, 0.0, None) / np.clip(pi, 0.0, None).sum()

    def _state_index(self, y: float) -> int:
        idx = np.flatnonzero(np.abs(self._v - y) <= 1e-12)
        if idx.size == 0:
            raise DomainError(f"{y} is not a state of the chain")
        return int(idx[0])

    def _sample(self, n, rng):
        pi = self.stationary
        cum = np.cumsum(self._P, axis=1)
        states = np.empty(n, dtype=np.intp)
        states[0] = rng.choice(len(pi), p=pi)
        u = rng.random(n - 1)
        for i in range(1, n):
            states[i] = np.searchsorted(cum[states[i - 1]], u[i - 1], side="right")
        return self._v[states]

    def stationary_expect(self, h):
        return float(np.asarray(h(self._v)) @ self.stationary)

    def conditional_expect(self, y, h):
        row = self._P[self._state_index(y)]
        return float(np.asarray(h(self._v)) @ row)

    def moments_and_support(self):
        pi = self.stationary
        mean = float(self._v @ pi)
        m2 = float(self._v**2 @ pi)
        y_inf = float(self._v[pi > 1e-15].min())
        return Moments(mean, m2, y_inf)

    def lag1_correlation(self):
        pi = self.stationary
        mean = float(self._v @ pi)
        var = float(self._v**2 @ pi) - mean**2
        if var <= 1e-15:
            raise UndefinedCorrelationError("zero-variance chain")
        cross = float(pi @ (self._v * (self._P @ self._v)))
        return (cross - mean**2) / var

    def support_grid(self, n):
        return np.sort(self._v)

    def to_dict(self):
        return {"kind": "finite_markov",
                "params": {"values": list(self.values),
                           "transition": [list(r) for r in self.transition]}}


def two_state_chain(p: float, values=(0.0, 2.0)) -> FiniteMarkov:
    """Symmetric two-state chain; p is the self-transition probability.

    The stationary law is uniform and the lag-1 correlation is 2p - 1.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError("p must lie in [0, 1]")
    if p == 1.0:
        raise DomainError("p = 1 gives a reducible chain")
    return FiniteMarkov(tuple(float(v) for v in values),
                        ((p, 1.0 - p), (1.0 - p, p)))


@dataclass(frozen=True)
class ExponentialIID(TransmissionModel):
    rate: float
    quadrature_nodes: int = DEFAULT_QUADRATURE_NODES
    kind: str = field(default="exponential_iid", init=False)

    def __post_init__(self):
        if self.rate <= 0:
            raise DomainError("rate must be positive")
        if self.quadrature_nodes < 1:
            raise DomainError("quadrature_nodes must be positive")

    @property
    def is_iid(self) -> bool:
        return True

    @cached_property
    def _nodes(self):
        t, w = np.polynomial.laguerre.laggauss(self.quadrature_nodes)
        return t / self.rate, w

    def _sample(self, n, rng):
        return rng.exponential(1.0 / self.rate, size=n)

    def stationary_expect(self, h):
        ys, w = self._nodes
        return float(np.asarray(h(ys)) @ w)

    def conditional_expect(self, y, h):
        return self.stationary_expect(h)

    def moments_and_support(self):
        return Moments(1.0 / self.rate, 2.0 / self.rate**2, 0.0)

    def lag1_correlation(self):
        return 0.0

    def support_grid(self, n):
        u = (np.arange(n) + 0.5) / n
        return stats.expon.ppf(u, scale=1.0 / self.rate)

    def to_dict(self):
        return {"kind": "exponential_iid", "params": {"rate": self.rate},
                "quadrature_nodes": self.quadrature_nodes}


@dataclass(frozen=True)
class LogNormalAR1(TransmissionModel):
    """Y = exp(sigma * X - sigma^2 / 2) with X a stationary Gaussian AR(1).

    Normalized so that E[Y] = 1.  eta is the AR coefficient; eta = 0
    gives i.i.d. log-normal times.
    """

    sigma: float
    eta: float = 0.0
    quadrature_nodes: int = DEFAULT_QUADRATURE_NODES
    kind: str = field(default="lognormal_ar1", init=False)

    def __post_init__(self):
        if self.sigma <= 0:
            raise DomainError("sigma must be positive")
        if not -1.0 < self.eta < 1.0:
            raise DomainError("eta must lie in (-1, 1)")
        if self.quadrature_nodes < 1:
            raise DomainError("quadrature_nodes must be positive")

    @property
    def is_iid(self) -> bool:
        return self.eta == 0.0

    @cached_property
    def _hermite(self):
        t, w = np.polynomial.hermite.hermgauss(self.quadrature_nodes)
        return t, w / math.sqrt(math.pi)

    def _y_of_x(self, x):
        return np.exp(self.sigma * x - self.sigma**2 / 2.0)

    def _x_of_y(self, y: float) -> float:
        if y <= 0:
            raise DomainError("log-normal support is (0, inf)")
        return (math.log(y) + self.sigma**2 / 2.0) / self.sigma

    def _sample(self, n, rng):
        x0 = rng.standard_normal()
        innov = math.sqrt(1.0 - self.eta**2) * rng.standard_normal(n - 1)
        drive = np.concatenate(([x0], innov))
        x = lfilter([1.0], [1.0, -self.eta], drive)
        return self._y_of_x(x)

    def stationary_expect(self, h):
        t, w = self._hermite
        return float(np.asarray(h(self._y_of_x(math.sqrt(2.0) * t))) @ w)

    def conditional_expect(self, y, h):
        x = self._x_of_y(y)
        t, w = self._hermite
        xp = self.eta * x + math.sqrt(1.0 - self.eta**2) * math.sqrt(2.0) * t
        return float(np.asarray(h(self._y_of_x(xp))) @ w)

    def moments_and_support(self):
        return Moments(1.0, math.exp(self.sigma**2), 0.0)

    def lag1_correlation(self):
        # General form; at sigma = 1 it reduces to (e^eta - 1)/(e - 1).
        s2 = self.sigma**2
        return float(np.expm1(self.eta * s2) / np.expm1(s2))

    def support_grid(self, n):
        u = (np.arange(n) + 0.5) / n
        return self._y_of_x(stats.norm.ppf(u))

    def to_dict(self):
        return {"kind": "lognormal_ar1",
                "params": {"sigma": self.sigma, "eta": self.eta},
                "quadrature_nodes": self.quadrature_nodes}


def lognormal_eta_for_correlation(rho: float, sigma: float = 1.0) -> float:
    """Invert the lag-1 correlation of the log-normal AR(1) model."""
    s2 = sigma**2
    arg = 1.0 + rho * math.expm1(s2)
    if arg <= 0:
        raise DomainError(f"correlation {rho} unreachable at sigma={sigma}")
    eta = math.log(arg) / s2
    if not -1.0 < eta < 1.0:
        raise DomainError(f"correlation {rho} needs |eta| >= 1 at sigma={sigma}")
    return eta


@dataclass(frozen=True)
class Trace(TransmissionModel):
    """A fixed sequence of transmission times, cycled.

    Intended for simulator fixtures only; it is not stationary-ergodic in
    general, so expectation-based operations reject it.
    """

    sequence: tuple[float, ...]
    kind: str = field(default="trace", init=False)

    def __post_init__(self):
        if not self.sequence:
            raise DomainError("trace must be nonempty")
        if any(v < 0 for v in self.sequence):
            raise DomainError("transmission times must be non-negative")

    @property
    def is_iid(self) -> bool:
        return False

    def _sample(self, n, rng):
        reps = -(-n // len(self.sequence))
        return np.tile(np.asarray(self.sequence, dtype=float), reps)[:n]

    def stationary_expect(self, h):
        raise UnsupportedModelError("trace models have no stationary law")

    def conditional_expect(self, y, h):
        raise UnsupportedModelError("trace models have no stationary law")

    def moments_and_support(self):
        raise UnsupportedModelError("trace models have no stationary law")

    def lag1_correlation(self):
        raise UnsupportedModelError("trace models have no stationary law")

    def support_grid(self, n):
        return np.unique(np.asarray(self.sequence, dtype=float))

    def to_dict(self):
        return {"kind": "trace", "params": {"sequence": list(self.sequence)}}


def _irreducible(P: np.ndarray) -> bool:
    reach = P > 0
    k = P.shape[0]
    for _ in range(k):
        reach = reach | (reach @ reach)
    return bool(np.all(reach | np.eye(k, dtype=bool)))


def model_from_dict(spec: dict) -> TransmissionModel:
    kind = spec.get("kind")
    params = spec.get("params", {})
    nodes = int(spec.get("quadrature_nodes", DEFAULT_QUADRATURE_NODES))
    if kind == "constant":
        return ConstantTime(float(params["value"]))
    if kind == "finite_iid":
        return FiniteIID(tuple(float(v) for v in params["values"]),
                         tuple(float(p) for p in params["probabilities"]))
    if kind == "finite_markov":
        if "p" in params:
            return two_state_chain(float(params["p"]),
                                   tuple(params.get("values", (0.0, 2.0))))
        return FiniteMarkov(tuple(float(v) for v in params["values"]),
                            tuple(tuple(float(x) for x in row)
                                  for row in params["transition"]))
    if kind == "exponential_iid":
        return ExponentialIID(float(params["rate"]), quadrature_nodes=nodes)
    if kind == "lognormal_ar1":
        return LogNormalAR1(float(params["sigma"]),
                            float(params.get("eta", 0.0)),
                            quadrature_nodes=nodes)
    if kind == "trace":
        return Trace(tuple(float(v) for v in params["sequence"]))
    raise DomainError(f"unknown model kind {kind!r}")
