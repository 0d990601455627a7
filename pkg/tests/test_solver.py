import math

import numpy as np
import pytest
from scipy.optimize import brentq

from agewait import (
    ConstantTime,
    ConstantWait,
    DomainError,
    ExponentialIID,
    FiniteIID,
    InfeasibleError,
    PenaltyFunction,
    SolverConfig,
    Tabulated,
    Threshold,
    WaterFilling,
    ZeroWait,
    f_of_c,
    mean_interval,
    objective_eval,
    reference_policy,
    solve_general,
    solve_optimal,
    solve_water_filling,
    two_state_chain,
    z_nu,
    zero_wait_optimal,
)
from agewait.solver import expected_stage_penalty

LINEAR = PenaltyFunction.linear()
TWO_POINT = FiniteIID((0.0, 2.0), (0.5, 0.5))
FREE = SolverConfig(M=10.0)


def grid_search_two_state(model, pf, step=0.005, z_max=5.0):
    """Brute-force the best (z(0), z(2)) pair on a dense grid."""
    pi = np.asarray(model.stationary)
    P = np.asarray(model.transition)
    values = np.asarray(model.values)
    zs = np.arange(0.0, z_max + step, step)
    z0, z2 = np.meshgrid(zs, zs, indexing="ij")
    num = np.zeros_like(z0)
    den = pi[0] * (values[0] + z0) + pi[1] * (values[1] + z2)
    for i, (y, zg) in enumerate(((values[0], z0), (values[1], z2))):
        for j, yn in enumerate(values):
            q = pf.antiderivative(y + zg + yn) - pf.antiderivative(y)
            num += pi[i] * P[i, j] * q
    obj = num / den
    best = np.unravel_index(np.argmin(obj), obj.shape)
    return obj[best], (z0[best], z2[best])


class TestObjective:
    def test_zero_wait_two_point(self):
        assert mean_interval(ZeroWait(), TWO_POINT) == pytest.approx(1.0)
        assert expected_stage_penalty(ZeroWait(), TWO_POINT, LINEAR) == \
            pytest.approx(2.0)
        assert objective_eval(ZeroWait(), TWO_POINT, LINEAR) == pytest.approx(2.0)

    def test_constant_wait_constant_time(self):
        # deterministic case: average age is (3c + w) / 2
        for c, w in ((1.0, 0.0), (1.0, 0.5), (2.0, 1.0)):
            got = objective_eval(ConstantWait(w), ConstantTime(c), LINEAR)
            assert got == pytest.approx((3.0 * c + w) / 2.0)

    def test_z_nu_linear_closed_form(self):
        model = ExponentialIID(1.0)
        assert z_nu(0.3, 2.5, model, LINEAR, M=10.0) == pytest.approx(1.2, abs=1e-6)
        assert z_nu(4.0, 2.5, model, LINEAR, M=10.0) == 0.0


class TestDualFunction:
    def test_sign_brackets_optimum(self):
        # optimum for the uniform {0, 2} model is 2 sqrt(2) - 1
        f_hi, _, _ = f_of_c(2.0, FREE, TWO_POINT, LINEAR)
        f_lo, _, _ = f_of_c(1.5, FREE, TWO_POINT, LINEAR)
        assert f_hi <= 0.0
        assert f_lo > 0.0

    def test_nonincreasing_in_c(self):
        vals = [f_of_c(c, FREE, TWO_POINT, LINEAR)[0]
                for c in (0.5, 1.0, 2.0, 4.0)]
        assert all(a >= b - 1e-9 for a, b in zip(vals, vals[1:]))

    def test_zeta_activates_under_frequency_cap(self):
        config = SolverConfig(M=10.0, f_max=0.25)
        _, zeta, policy = f_of_c(1.0, config, ConstantTime(1.0), LINEAR)
        assert zeta > 0.0
        assert mean_interval(policy, ConstantTime(1.0)) >= 4.0 - 1e-6

    def test_negative_c_rejected(self):
        with pytest.raises(DomainError):
            f_of_c(-0.1, FREE, TWO_POINT, LINEAR)


class TestWaterFillingSolver:
    def test_two_point_closed_form(self):
        res = solve_water_filling(FREE, TWO_POINT, LINEAR)
        assert res.dual["beta"] == pytest.approx(2.0 * math.sqrt(2.0) - 2.0,
                                                 abs=1e-6)
        assert res.g_opt == pytest.approx(2.0 * math.sqrt(2.0) - 1.0, abs=1e-6)
        assert not res.constraint_active

    def test_matches_grid_search(self):
        res = solve_water_filling(FREE, TWO_POINT, LINEAR)
        best, _ = grid_search_two_state(two_state_chain(0.5), LINEAR)
        assert res.g_opt == pytest.approx(best, abs=1e-4)

    def test_general_solver_agrees(self):
        wf = solve_water_filling(FREE, TWO_POINT, LINEAR)
        gen = solve_general(FREE, TWO_POINT, LINEAR)
        assert gen.g_opt == pytest.approx(wf.g_opt, abs=1e-6)
        ys = np.array([0.0, 2.0])
        np.testing.assert_allclose(gen.policy.z(ys), wf.policy.z(ys),
                                   atol=1e-4)

    def test_exponential_matches_fixed_point(self):
        # for unit-rate exponential times the level solves beta^2 = 2 e^-beta
        res = solve_water_filling(FREE, ExponentialIID(1.0), LINEAR)
        beta = brentq(lambda b: b * b - 2.0 * math.exp(-b), 0.1, 2.0,
                      xtol=1e-12)
        # quadrature of the clamped integrand limits accuracy to ~1e-4
        assert res.dual["beta"] == pytest.approx(beta, abs=1e-3)
        m1 = beta + math.exp(-beta)
        m2 = beta * beta + math.exp(-beta) * (2.0 * beta + 2.0)
        assert res.g_opt == pytest.approx(m2 / (2.0 * m1) + 1.0, abs=1e-3)

    def test_constrained_deterministic(self):
        config = SolverConfig(M=10.0, f_max=0.5)
        res = solve_water_filling(config, ConstantTime(1.0), LINEAR)
        assert res.policy.z(1.0) == pytest.approx(1.0, abs=1e-6)
        assert res.g_opt == pytest.approx(2.0, abs=1e-6)
        assert res.constraint_active

    def test_unconstrained_deterministic_is_zero_wait(self):
        res = solve_water_filling(FREE, ConstantTime(1.0), LINEAR)
        assert res.policy.z(1.0) == pytest.approx(0.0, abs=1e-6)
        assert res.g_opt == pytest.approx(1.5, abs=1e-6)

    def test_requires_linear_iid(self):
        with pytest.raises(DomainError):
            solve_water_filling(FREE, TWO_POINT, PenaltyFunction.power(2.0))
        with pytest.raises(DomainError):
            solve_water_filling(FREE, two_state_chain(0.7), LINEAR)


class TestGeneralSolver:
    def test_markov_matches_grid_search(self):
        model = two_state_chain(0.7)
        res = solve_general(FREE, model, LINEAR)
        best, _ = grid_search_two_state(model, LINEAR)
        assert res.g_opt <= best + 1e-6
        assert res.g_opt == pytest.approx(best, abs=1e-4)
        f_val, _, _ = f_of_c(res.g_opt, FREE, model, LINEAR)
        assert abs(f_val) < 1e-6

    def test_markov_power_matches_grid_search(self):
        model = two_state_chain(0.3)
        pf = PenaltyFunction.power(2.0)
        res = solve_general(FREE, model, pf)
        best, _ = grid_search_two_state(model, pf)
        assert res.g_opt == pytest.approx(best, abs=1e-3)

    def test_never_beats_any_tabulated_policy(self):
        res = solve_water_filling(FREE, TWO_POINT, LINEAR)
        rng = np.random.default_rng(17)
        for _ in range(100):
            knots = np.sort(rng.uniform(0.0, 2.5, size=4))
            knots += np.arange(4) * 1e-6  # keep strictly increasing
            pol = Tabulated(tuple(knots), tuple(rng.uniform(0.0, 10.0, size=4)),
                            M=10.0)
            assert objective_eval(pol, TWO_POINT, LINEAR) >= res.g_opt - 1e-6

    def test_constant_penalty_flat_objective(self):
        pf = PenaltyFunction.constant(3.0)
        assert objective_eval(ZeroWait(), TWO_POINT, pf) == pytest.approx(3.0)
        assert objective_eval(ConstantWait(0.7), TWO_POINT, pf) == \
            pytest.approx(3.0)
        res = solve_optimal(FREE, TWO_POINT, pf)
        assert res.g_opt == pytest.approx(3.0, abs=1e-6)

    def test_frequency_cap_respected(self):
        config = SolverConfig(M=10.0, f_max=0.25)
        res = solve_general(config, TWO_POINT, LINEAR)
        assert mean_interval(res.policy, TWO_POINT) >= 4.0 - 1e-6
        assert res.constraint_active

    def test_dispatch(self):
        assert isinstance(solve_optimal(FREE, TWO_POINT, LINEAR).policy,
                          WaterFilling)
        res = solve_optimal(FREE, TWO_POINT, PenaltyFunction.power(2.0))
        assert isinstance(res.policy, Threshold)

    def test_result_table(self):
        res = solve_optimal(FREE, TWO_POINT, LINEAR)
        table = res.policy_table(TWO_POINT, 2)
        assert [row[0] for row in table] == [0.0, 2.0]
        d = res.to_dict(TWO_POINT, 2)
        assert d["g_opt"] == res.g_opt
        assert len(d["table"]) == 2


class TestZeroWaitVerdict:
    def test_linear_iid_criterion(self):
        assert zero_wait_optimal(ConstantTime(1.0), LINEAR, FREE).verdict == \
            "optimal"
        assert zero_wait_optimal(FiniteIID((1.0, 2.0), (0.5, 0.5)), LINEAR,
                                 FREE).verdict == "optimal"
        assert zero_wait_optimal(ExponentialIID(1.0), LINEAR, FREE).verdict == \
            "not_optimal"
        assert zero_wait_optimal(TWO_POINT, LINEAR, FREE).verdict == \
            "not_optimal"

    def test_sufficient_conditions(self):
        pf = PenaltyFunction.power(2.0)
        v = zero_wait_optimal(two_state_chain(0.0), pf, FREE)
        assert (v.verdict, v.reason) == ("optimal",
                                         "perfect_negative_correlation")
        v = zero_wait_optimal(ConstantTime(2.0), pf, FREE)
        assert (v.verdict, v.reason) == ("optimal",
                                         "constant_transmission_times")
        v = zero_wait_optimal(two_state_chain(0.7),
                              PenaltyFunction.constant(1.0), FREE)
        assert (v.verdict, v.reason) == ("optimal", "constant_penalty")

    def test_unknown_when_nothing_applies(self):
        v = zero_wait_optimal(two_state_chain(0.7), PenaltyFunction.power(2.0),
                              FREE)
        assert v.verdict == "unknown"

    def test_infeasible_zero_wait(self):
        with pytest.raises(InfeasibleError):
            zero_wait_optimal(ConstantTime(1.0), LINEAR,
                              SolverConfig(M=10.0, f_max=0.25))


class TestReferencePolicies:
    def test_constant_wait_fills_interval(self):
        config = SolverConfig(M=10.0, f_max=0.5)
        pol = reference_policy("constant_wait", config, ConstantTime(1.0))
        assert isinstance(pol, ConstantWait)
        assert pol.wait == pytest.approx(1.0)

    def test_constant_wait_clamps_at_zero(self):
        pol = reference_policy("constant_wait", FREE, ConstantTime(1.0))
        assert pol.wait == 0.0

    def test_minimum_wait_level(self):
        config = SolverConfig(M=10.0, f_max=2.0 / 3.0)
        pol = reference_policy("minimum_wait", config, TWO_POINT)
        assert isinstance(pol, WaterFilling)
        assert pol.beta == pytest.approx(1.0, abs=1e-6)
        assert mean_interval(pol, TWO_POINT) == pytest.approx(1.5, abs=1e-6)

    def test_minimum_wait_degenerates_to_zero(self):
        pol = reference_policy("minimum_wait", FREE, TWO_POINT)
        assert isinstance(pol, ZeroWait)

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            reference_policy("bogus", FREE, TWO_POINT)


class TestConfigValidation:
    def test_rejects_bad_bounds(self):
        with pytest.raises(DomainError):
            SolverConfig(M=-1.0)
        with pytest.raises(DomainError):
            SolverConfig(M=1.0, f_max=0.5)
        with pytest.raises(DomainError):
            SolverConfig(M=10.0, eps_outer=0.0)

    def test_min_interval(self):
        assert FREE.min_interval == 0.0
        assert SolverConfig(M=10.0, f_max=0.5).min_interval == 2.0
