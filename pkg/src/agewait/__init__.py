"""Optimal waiting policies for minimizing age-of-information penalties."""

from .errors import (
    AgeWaitError,
    ConfigError,
    DegenerateModelError,
    DomainError,
    InfeasibleError,
    UnboundedPenaltyError,
    UndefinedCorrelationError,
    UnsupportedModelError,
)
from .penalty import PenaltyFunction, antiderivative_G, eval_g, stage_penalty_q
from .policies import (
    ConstantWait,
    EpsilonTrace,
    Policy,
    Tabulated,
    Threshold,
    WaterFilling,
    ZeroWait,
)
from .simulator import (
    SamplePath,
    SimEstimate,
    age_trajectory,
    estimate,
    simulate,
)
from .solver import (
    SolveResult,
    SolverConfig,
    ZeroWaitVerdict,
    f_of_c,
    mean_interval,
    objective_eval,
    reference_policy,
    solve_general,
    solve_optimal,
    solve_water_filling,
    z_nu,
    zero_wait_optimal,
)
from .ttime import (
    ConstantTime,
    ExponentialIID,
    FiniteIID,
    FiniteMarkov,
    LogNormalAR1,
    Trace,
    TransmissionModel,
    lognormal_eta_for_correlation,
    two_state_chain,
)

__version__ = "0.1.0"
