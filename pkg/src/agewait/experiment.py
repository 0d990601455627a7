"""Config-driven experiment runner.

An experiment compares the optimal policy against reference policies
while sweeping one axis (frequency bound, correlation, log-normal scale,
or penalty shape), writing one CSV row per (sweep value, policy) with
analytic and, optionally, simulated averages.
"""

from __future__ import annotations

import csv
import math
import zlib
from dataclasses import dataclass, replace

import numpy as np

from .errors import AgeWaitError, ConfigError, InfeasibleError
from .penalty import PenaltyFunction
from .simulator import estimate
from .solver import (
    SolverConfig,
    objective_eval,
    reference_policy,
    solve_optimal,
    zero_wait_optimal,
)
from .ttime import (
    ConstantTime,
    FiniteMarkov,
    LogNormalAR1,
    TransmissionModel,
    lognormal_eta_for_correlation,
    model_from_dict,
    two_state_chain,
)

POLICY_KINDS = ("optimal", "zero_wait", "constant_wait", "minimum_wait")
SWEEP_VARIABLES = ("inv_f_max", "rho", "sigma", "alpha")

CSV_COLUMNS = ("value", "policy", "analytic", "simulated_mean",
               "simulated_stderr", "constraint_active", "error")


@dataclass(frozen=True)
class SimulationBlock:
    n_stages: int
    replications: int
    seed: int


@dataclass(frozen=True)
class ExperimentConfig:
    model: TransmissionModel
    penalty: PenaltyFunction
    solver: SolverConfig
    policies: tuple[str, ...] = POLICY_KINDS
    sweep_variable: str | None = None
    sweep_values: tuple[float, ...] = ()
    simulation: SimulationBlock | None = None
    output: str | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if "model" not in raw:
            raise ConfigError("model", "missing")
        if "penalty" not in raw:
            raise ConfigError("penalty", "missing")
        try:
            model = model_from_dict(raw["model"])
        except (AgeWaitError, KeyError, TypeError) as exc:
            raise ConfigError("model", str(exc)) from exc
        try:
            penalty = PenaltyFunction.from_dict(raw["penalty"])
        except (AgeWaitError, KeyError, TypeError) as exc:
            raise ConfigError("penalty", str(exc)) from exc

        s = dict(raw.get("solver", {}))
        f_max = s.get("f_max", math.inf)
        if f_max in (None, "inf", "infinity"):
            f_max = math.inf
        try:
            solver = SolverConfig(
                M=float(s.get("M", 10.0)),
                f_max=float(f_max),
                eps_outer=float(s.get("eps_outer", 1e-8)),
                eps_inner=float(s.get("eps_inner", 1e-8)),
                y_grid=int(s.get("y_grid", 256)),
            )
        except AgeWaitError as exc:
            raise ConfigError("solver", str(exc)) from exc

        policies = tuple(raw.get("policies", list(POLICY_KINDS)))
        for p in policies:
            if p not in POLICY_KINDS:
                raise ConfigError("policies", f"unknown policy {p!r}")

        sweep_variable = None
        sweep_values: tuple[float, ...] = ()
        if "sweep" in raw:
            sw = raw["sweep"]
            sweep_variable = sw.get("variable")
            if sweep_variable not in SWEEP_VARIABLES:
                raise ConfigError("sweep.variable",
                                  f"must be one of {SWEEP_VARIABLES}")
            try:
                sweep_values = tuple(float(v) for v in sw["values"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError("sweep.values", str(exc)) from exc
            _validate_sweep_values(sweep_variable, sweep_values)

        simulation = None
        if "simulation" in raw and raw["simulation"] is not None:
            sim = raw["simulation"]
            try:
                simulation = SimulationBlock(
                    n_stages=int(sim["n_stages"]),
                    replications=int(sim["replications"]),
                    seed=int(sim.get("seed", 0)),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError("simulation", str(exc)) from exc
            if simulation.n_stages < 1 or simulation.replications < 2:
                raise ConfigError("simulation",
                                  "need n_stages >= 1 and replications >= 2")

        return cls(model=model, penalty=penalty, solver=solver,
                   policies=policies, sweep_variable=sweep_variable,
                   sweep_values=sweep_values, simulation=simulation,
                   output=raw.get("output"))


def _validate_sweep_values(variable: str, values) -> None:
    for v in values:
        if variable == "inv_f_max" and v <= 0:
            raise ConfigError("sweep.values", "1/f_max must be positive")
        if variable == "rho" and not -1.0 <= v < 1.0:
            raise ConfigError("sweep.values", "rho must lie in [-1, 1)")
        if variable == "sigma" and v < 0:
            raise ConfigError("sweep.values", "sigma must be non-negative")
        if variable == "alpha" and v < 0:
            raise ConfigError("sweep.values", "alpha must be non-negative")


def _apply_sweep_value(config: ExperimentConfig, value: float
                       ) -> tuple[TransmissionModel, PenaltyFunction, SolverConfig]:
    model, penalty, solver = config.model, config.penalty, config.solver
    variable = config.sweep_variable
    if variable == "inv_f_max":
        solver = replace(solver, f_max=1.0 / value)
    elif variable == "rho":
        if isinstance(model, FiniteMarkov):
            if len(model.values) != 2:
                raise ConfigError("sweep", "rho sweep needs a two-state chain")
            model = two_state_chain((1.0 + value) / 2.0, model.values)
        elif isinstance(model, LogNormalAR1):
            eta = lognormal_eta_for_correlation(value, model.sigma)
            model = replace(model, eta=eta)
        else:
            raise ConfigError("sweep", "rho sweep needs a correlated model kind")
    elif variable == "sigma":
        if not isinstance(model, (LogNormalAR1, ConstantTime)):
            raise ConfigError("sweep", "sigma sweep needs a log-normal model")
        if value == 0.0:
            # degenerate limit of the normalized log-normal family
            model = ConstantTime(1.0)
        else:
            base = model if isinstance(model, LogNormalAR1) else LogNormalAR1(1.0)
            model = replace(base, sigma=value)
    elif variable == "alpha":
        if penalty.kind not in ("power", "exponential", "stairstep"):
            raise ConfigError("sweep", "alpha sweep needs a shaped penalty")
        penalty = replace(penalty, alpha=value)
    return model, penalty, solver


@dataclass
class ExperimentRow:
    value: float
    policy: str
    analytic: float | None = None
    simulated_mean: float | None = None
    simulated_stderr: float | None = None
    constraint_active: bool | None = None
    error: str | None = None

    def as_csv(self) -> list[str]:
        def fmt(x):
            if x is None:
                return ""
            if isinstance(x, bool):
                return str(x).lower()
            if isinstance(x, float):
                return repr(x)
            return str(x)
        return [fmt(self.value), self.policy, fmt(self.analytic),
                fmt(self.simulated_mean), fmt(self.simulated_stderr),
                fmt(self.constraint_active), fmt(self.error)]


def run_experiment(config: ExperimentConfig,
                   seed_override: int | None = None) -> list[ExperimentRow]:
    """Solve and optionally simulate every (sweep value, policy) pair."""
    if config.sweep_variable is None:
        raise ConfigError("sweep", "missing")
    rows: list[ExperimentRow] = []
    for value in config.sweep_values:
        rows.extend(_run_point(config, value, seed_override))
    return rows


def _run_point(config: ExperimentConfig, value: float,
               seed_override: int | None) -> list[ExperimentRow]:
    try:
        model, penalty, solver = _apply_sweep_value(config, value)
    except ConfigError:
        raise
    rows = []
    for kind in config.policies:
        row = ExperimentRow(value=value, policy=kind)
        try:
            if kind == "optimal":
                result = solve_optimal(solver, model, penalty)
                policy = result.policy
                row.analytic = result.g_opt
                row.constraint_active = result.constraint_active
            else:
                policy = reference_policy(kind, solver, model)
                row.analytic = objective_eval(policy, model, penalty)
            if config.simulation is not None:
                sim = config.simulation
                seed = sim.seed if seed_override is None else seed_override
                rep_seed = _derived_seed(seed, value, kind)
                est = estimate(policy, model, penalty, sim.n_stages,
                               sim.replications, rep_seed)
                row.simulated_mean = est.mean_ratio
                row.simulated_stderr = est.stderr
        except AgeWaitError as exc:
            row.error = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


def _derived_seed(seed: int, value: float, policy: str) -> int:
    key = zlib.crc32(f"{value!r}:{policy}".encode())
    ss = np.random.SeedSequence([seed, key])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def write_rows_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for row in rows:
            w.writerow(row.as_csv())


def check_zero_wait(config: ExperimentConfig) -> dict:
    """Report whether never waiting is optimal for the configured setup."""
    verdict = zero_wait_optimal(config.model, config.penalty, config.solver)
    report = {
        "verdict": verdict.verdict,
        "reason": verdict.reason,
        "details": verdict.details,
        "model": config.model.to_dict(),
        "penalty": config.penalty.to_dict(),
    }
    return report
