"""Optimal waiting-policy solvers.

Two routes are provided: a two-layer bisection over the ratio objective
that handles any non-decreasing penalty and Markov-correlated
transmission times, and a direct water-filling bisection for the linear
penalty with i.i.d. times.  Both return the achieved average penalty per
unit time together with the policy and its dual state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateModelError,
    DomainError,
    InfeasibleError,
    UnboundedPenaltyError,
)
from .penalty import PenaltyFunction
from .policies import (
    ConstantWait,
    Policy,
    Threshold,
    WaterFilling,
    ZeroWait,
)
from .ttime import TransmissionModel

_MAX_DOUBLINGS = 200


@dataclass(frozen=True)
class SolverConfig:
    """Bounds and tolerances shared by the solvers.

    M         -- maximum waiting time
    f_max     -- maximum long-run average update frequency (math.inf allowed)
    eps_outer -- bisection tolerance on the objective value / water level
    eps_inner -- bisection tolerance on the dual multiplier and waits
    y_grid    -- number of support points for tabulated policy export
    """

    M: float = 10.0
    f_max: float = math.inf
    eps_outer: float = 1e-8
    eps_inner: float = 1e-8
    y_grid: int = 256

    def __post_init__(self):
        if self.M <= 0:
            raise DomainError("M must be positive")
        if self.f_max <= 0:
            raise DomainError("f_max must be positive")
        if self.M <= 1.0 / self.f_max:
            raise DomainError("need M > 1/f_max for feasibility")
        if self.eps_outer <= 0 or self.eps_inner <= 0:
            raise DomainError("tolerances must be positive")
        if self.y_grid < 1:
            raise DomainError("y_grid must be positive")

    @property
    def min_interval(self) -> float:
        """Lower bound 1/f_max on the mean inter-update interval."""
        return 0.0 if math.isinf(self.f_max) else 1.0 / self.f_max


@dataclass(frozen=True)
class SolveResult:
    policy: Policy
    g_opt: float
    dual: dict
    constraint_active: bool
    iterations: dict = field(default_factory=dict)

    def policy_table(self, model: TransmissionModel, n: int) -> list[list[float]]:
        ys = model.support_grid(n)
        zs = np.atleast_1d(self.policy.z(ys))
        return [[float(y), float(z)] for y, z in zip(ys, zs)]

    def to_dict(self, model: TransmissionModel | None = None,
                y_grid: int = 256) -> dict:
        d = {
            "g_opt": self.g_opt,
            "policy": self.policy.describe(),
            "dual": self.dual,
            "constraint_active": self.constraint_active,
            "iterations": self.iterations,
        }
        if model is not None:
            d["table"] = self.policy_table(model, y_grid)
        return d


def mean_interval(policy: Policy, model: TransmissionModel) -> float:
    """E[Y + z(Y)] under the stationary law."""
    return model.stationary_expect(
        lambda ys: np.asarray(ys, dtype=float) + np.atleast_1d(policy.z(ys)))


def expected_stage_penalty(policy: Policy, model: TransmissionModel,
                           pf: PenaltyFunction) -> float:
    """E[q(Y, z(Y), Y')], conditioning the inner expectation on Y."""

    def per_state(ys):
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        out = np.empty(ys.shape)
        for i, y in enumerate(ys):
            zy = float(policy.z(float(y)))
            out[i] = model.conditional_expect(
                float(y), lambda yn: pf.stage_penalty(float(y), zy, yn))
        return out

    return model.stationary_expect(per_state)


def objective_eval(policy: Policy, model: TransmissionModel,
                   pf: PenaltyFunction) -> float:
    """Average penalty per unit time: E[q(Y, z(Y), Y')] / E[Y + z(Y)]."""
    den = mean_interval(policy, model)
    if den <= 0:
        raise DegenerateModelError("mean inter-update interval is zero")
    return expected_stage_penalty(policy, model, pf) / den


def z_nu(y: float, nu: float, model: TransmissionModel, pf: PenaltyFunction,
         M: float, tol: float = 1e-9) -> float:
    """Largest z in [0, M] with E[g(y + z + Y') | Y = y] <= nu."""
    return Threshold(nu, model, pf, M, tol=tol).z(float(y))


def f_of_c(c: float, config: SolverConfig, model: TransmissionModel,
           pf: PenaltyFunction) -> tuple[float, float, Policy]:
    """Inner Lagrangian value at dual parameter c.

    Returns (f(c), zeta, policy) where zeta is the multiplier enforcing
    the update-frequency constraint and the policy attains the minimum of
    E[q] - c E[Y + z(Y)] over feasible waiting rules.
    """
    if c < 0:
        raise DomainError("c must be non-negative")
    tol = config.eps_inner / 10.0

    def threshold(nu: float) -> Policy:
        return Threshold(nu, model, pf, config.M, tol=tol)

    zeta = 0.0
    policy = threshold(zeta + c)
    target = config.min_interval
    if mean_interval(policy, model) < target:
        zeta_u = 1.0
        for _ in range(_MAX_DOUBLINGS):
            if mean_interval(threshold(zeta_u + c), model) >= target:
                break
            zeta_u *= 2.0
        else:
            raise InfeasibleError("frequency constraint unattainable")
        zeta_l = 0.0
        while zeta_u - zeta_l > config.eps_inner:
            mid = 0.5 * (zeta_l + zeta_u)
            if mean_interval(threshold(mid + c), model) >= target:
                zeta_u = mid
            else:
                zeta_l = mid
        zeta = zeta_u  # feasible side of the bracket
        policy = threshold(zeta + c)
    f_val = expected_stage_penalty(policy, model, pf) \
        - c * mean_interval(policy, model)
    return f_val, zeta, policy


def _feasible_reference(config: SolverConfig,
                        model: TransmissionModel) -> Policy:
    mean = model.moments_and_support().mean
    if mean >= config.min_interval:
        return ZeroWait()
    wait = config.min_interval - mean
    if wait > config.M:
        raise InfeasibleError("frequency constraint unattainable within M")
    return ConstantWait(wait)


def solve_general(config: SolverConfig, model: TransmissionModel,
                  pf: PenaltyFunction) -> SolveResult:
    """Two-layer bisection for arbitrary non-decreasing penalties.

    The outer bisection searches the dual parameter c for the root of
    f(c); the optimum average penalty satisfies g_opt <= c exactly when
    f(c) <= 0.
    """
    bound = expected_stage_penalty(ConstantWait(config.M), model, pf)
    if not math.isfinite(bound):
        raise UnboundedPenaltyError(
            "expected stage penalty diverges at the maximum wait")

    reference = _feasible_reference(config, model)
    u = objective_eval(reference, model, pf)
    if u <= 0.0:
        # zero penalty everywhere: every feasible policy is optimal
        return SolveResult(reference, 0.0, {"c": 0.0, "zeta": 0.0},
                           constraint_active=isinstance(reference, ConstantWait))
    for _ in range(_MAX_DOUBLINGS):
        f_u, _, _ = f_of_c(u, config, model, pf)
        if f_u <= 0:
            break
        u *= 2.0
    else:
        raise InfeasibleError("failed to bracket the optimal objective")

    l = 0.0
    outer_iters = 0
    while u - l > config.eps_outer:
        c = 0.5 * (l + u)
        f_c, _, _ = f_of_c(c, config, model, pf)
        if f_c <= 0:
            u = c
        else:
            l = c
        outer_iters += 1

    _, zeta, policy = f_of_c(u, config, model, pf)
    interval = mean_interval(policy, model)
    active = (zeta > 0) or (
        not math.isinf(config.f_max)
        and abs(interval - config.min_interval) <= 10 * config.eps_inner)
    return SolveResult(policy, u, {"c": u, "zeta": zeta},
                       constraint_active=active,
                       iterations={"outer": outer_iters})


def _water_filling_stats(beta: float, config: SolverConfig,
                         model: TransmissionModel) -> tuple[float, float]:
    """Mean and second moment of Y + z(Y) under the level-beta policy."""

    def clamped(ys):
        return np.clip(np.asarray(ys, dtype=float), beta,
                       np.asarray(ys, dtype=float) + config.M)

    m1 = model.stationary_expect(lambda ys: clamped(ys))
    m2 = model.stationary_expect(lambda ys: clamped(ys) ** 2)
    return m1, m2


def solve_water_filling(config: SolverConfig, model: TransmissionModel,
                        pf: PenaltyFunction) -> SolveResult:
    """Water-filling solver for the linear penalty with i.i.d. times.

    Bisects the water level beta on the sign of
    E[Y + z(Y)] - max(1/f_max, E[(Y + z(Y))^2] / (2 beta)).
    """
    if pf.kind != "linear":
        raise DomainError("water-filling requires the linear penalty")
    if not model.is_iid:
        raise DomainError("water-filling requires i.i.d. transmission times")
    moments = model.moments_and_support()
    if moments.mean <= 0:
        raise DegenerateModelError("requires E[Y] > 0")

    def overshoot(beta: float) -> float:
        m1, m2 = _water_filling_stats(beta, config, model)
        return m1 - max(config.min_interval, m2 / (2.0 * beta))

    u = moments.mean + config.M
    for _ in range(_MAX_DOUBLINGS):
        if overshoot(u) >= 0:
            break
        u *= 2.0
    else:
        raise InfeasibleError("failed to bracket the water level")
    l = 0.0
    iters = 0
    while u - l > config.eps_outer:
        beta = 0.5 * (l + u)
        if overshoot(beta) >= 0:
            u = beta
        else:
            l = beta
        iters += 1
    beta = u

    m1, m2 = _water_filling_stats(beta, config, model)
    g_opt = m2 / (2.0 * m1) + moments.mean
    active = config.min_interval >= m2 / (2.0 * beta) - config.eps_outer \
        and not math.isinf(config.f_max)
    return SolveResult(WaterFilling(beta, config.M), g_opt, {"beta": beta},
                       constraint_active=active, iterations={"outer": iters})


@dataclass(frozen=True)
class ZeroWaitVerdict:
    verdict: str  # 'optimal', 'not_optimal' or 'unknown'
    reason: str
    details: dict = field(default_factory=dict)


def zero_wait_optimal(model: TransmissionModel, pf: PenaltyFunction,
                      config: SolverConfig) -> ZeroWaitVerdict:
    """Decide whether never waiting minimizes the average penalty.

    Exact for the linear penalty with i.i.d. times (second-moment
    criterion); otherwise only sufficient conditions are checked and the
    verdict may be 'unknown'.
    """
    moments = model.moments_and_support()
    if moments.mean < config.min_interval:
        raise InfeasibleError("zero-wait violates the frequency constraint")

    if pf.kind == "linear" and model.is_iid:
        lhs = moments.second_moment
        rhs = 2.0 * moments.y_inf * moments.mean
        details = {"second_moment": lhs, "threshold": rhs,
                   "y_inf": moments.y_inf, "mean": moments.mean}
        if lhs <= rhs:
            return ZeroWaitVerdict("optimal", "second_moment_criterion", details)
        return ZeroWaitVerdict("not_optimal", "second_moment_criterion", details)

    try:
        rho = model.lag1_correlation()
    except Exception:
        rho = None
    if rho is not None and abs(rho + 1.0) <= 1e-12:
        return ZeroWaitVerdict("optimal", "perfect_negative_correlation",
                               {"rho": rho})
    if moments.variance <= 1e-15:
        return ZeroWaitVerdict("optimal", "constant_transmission_times",
                               {"mean": moments.mean})
    if pf.is_constant:
        return ZeroWaitVerdict("optimal", "constant_penalty", {})
    return ZeroWaitVerdict("unknown", "no_sufficient_condition_holds",
                           {"rho": rho})


def reference_policy(kind: str, config: SolverConfig,
                     model: TransmissionModel) -> Policy:
    """Build one of the comparison policies: zero, constant or minimum wait."""
    moments = model.moments_and_support()
    if kind == "zero_wait":
        return ZeroWait()
    if kind == "constant_wait":
        return ConstantWait(max(0.0, config.min_interval - moments.mean))
    if kind == "minimum_wait":
        if not model.is_iid:
            raise DomainError("minimum-wait requires i.i.d. transmission times")
        target = config.min_interval - moments.mean
        if target <= 0:
            return ZeroWait()
        if target > config.M:
            raise InfeasibleError("frequency constraint unattainable within M")

        def mean_wait(beta: float) -> float:
            return model.stationary_expect(
                lambda ys: np.clip(beta - np.asarray(ys, dtype=float),
                                   0.0, config.M))

        u = moments.mean + config.M
        for _ in range(_MAX_DOUBLINGS):
            if mean_wait(u) >= target:
                break
            u *= 2.0
        else:
            raise InfeasibleError("failed to bracket the minimum-wait level")
        l = 0.0
        while u - l > config.eps_inner:
            beta = 0.5 * (l + u)
            if mean_wait(beta) >= target:
                u = beta
            else:
                l = beta
        return WaterFilling(u, config.M)
    raise DomainError(f"unknown reference policy kind {kind!r}")


def solve_optimal(config: SolverConfig, model: TransmissionModel,
                  pf: PenaltyFunction) -> SolveResult:
    """Dispatch to the water-filling solver when it applies."""
    if pf.kind == "linear" and model.is_iid:
        return solve_water_filling(config, model, pf)
    return solve_general(config, model, pf)
