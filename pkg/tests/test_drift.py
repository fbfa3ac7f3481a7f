import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from malacert.drift import (
    SUP_U_EXP,
    chi2_tail_log_bound,
    convexity_at_infinity_probe,
    convexity_at_infinity_radius,
    hessian_perturbation_check,
    log_V,
    log_W,
    mala_beta_drift_constants,
    mala_drift_check,
    mala_drift_constants,
    quadratic_growth_constants,
    quadratic_growth_constants_beta,
    quadratic_growth_probe,
    ula_beta_drift_constants,
    ula_drift_check_exact,
    ula_drift_constants,
    ula_V_moment_exact,
)
from malacert.errors import DomainError
from malacert.kernels import NoiseStream
from malacert.potential import AssumptionParams, BetaParams

from conftest import assert_rel


class TestLyapunovLogs:
    def test_log_v_examples(self):
        assert log_V(1 / 16, np.zeros(2)) == 0.0
        assert_rel(log_V(1 / 16, np.array([4.0, 0.0])), 1.0)
        # the benchmark ball radius: finite in log domain though exp overflows
        k_m = 148.66967925002672
        assert_rel(log_V(0.0625, np.array([k_m])), 0.0625 * k_m * k_m, 1e-14)

    def test_log_w_examples(self):
        eta = 1 / 32
        assert_rel(log_W(eta, np.zeros(3)), eta)
        assert_rel(log_W(eta, np.array([3.0, 4.0])), eta * math.sqrt(26.0))
        big = log_W(eta, np.array([1e8]))
        assert_rel(big, eta * 1e8, 1e-10)

    def test_positive_eta_required(self):
        with pytest.raises(DomainError):
            log_V(0.0, np.zeros(1))
        with pytest.raises(DomainError):
            log_W(-1.0, np.zeros(1))


class TestUlaMomentExact:
    def test_closed_form_examples(self, gaussian1):
        got = ula_V_moment_exact(np.array([0.0]), 0.25, 1 / 16, gaussian1)
        assert_rel(got, -0.5 * math.log(15.0 / 16.0), 1e-14)
        got2 = ula_V_moment_exact(np.array([2.0]), 0.25, 1 / 16, gaussian1)
        assert_rel(got2, -0.5 * math.log(15.0 / 16.0) + 0.15, 1e-14)

    def test_identity_kernel_limit(self, bump1):
        x = np.array([1.7])
        eta = 0.05
        got = ula_V_moment_exact(x, 1e-12, eta, bump1)
        assert_rel(got, eta * float(x @ x), 1e-6)

    def test_domain(self, gaussian1):
        with pytest.raises(DomainError):
            ula_V_moment_exact(np.zeros(1), 4.0, 1 / 16, gaussian1)

    @pytest.mark.parametrize("kind", ["gaussian", "bump"])
    def test_monte_carlo_agrees(self, kind, gaussian1, bump1):
        spec = gaussian1 if kind == "gaussian" else bump1
        stream = NoiseStream(21, 0)
        rng = np.random.Generator(np.random.Philox(key=np.array([21, 1], dtype=np.uint64)))
        n = 200_000
        for _ in range(4):
            x = rng.uniform(-3, 3, spec.d)
            eta = 0.0625
            gamma = float(rng.uniform(0.01, 0.9)) / (4 * eta) * 0.5
            zs = stream.normal((n, spec.d))
            ys = (
                x[None, :]
                - gamma * np.asarray(spec.gradient(x))[None, :]
                + math.sqrt(2 * gamma) * zs
            )
            log_vals = eta * (ys * ys).sum(axis=1)
            hi = log_vals.max()
            w = np.exp(log_vals - hi)
            log_mc = hi + math.log(w.mean())
            se = w.std(ddof=1) / (w.mean() * math.sqrt(n))
            exact = ula_V_moment_exact(x, gamma, eta, spec)
            assert abs(log_mc - exact) <= 5.0 * se


class TestUlaDriftConstants:
    def test_gaussian_radius(self):
        p = AssumptionParams(L=1.0, m=1.0, K=0.0, M=0.0)
        out = ula_drift_constants(p, 0.25, d=1)
        assert out["K_U"] == 4.0
        assert math.isfinite(out["log_b_U"])

    def test_dimension_scaling(self):
        p = AssumptionParams(L=1.0, m=1.0, K=0.0, M=0.0)
        assert ula_drift_constants(p, 0.25, d=16)["K_U"] >= 16.0

    def test_range(self):
        p = AssumptionParams(L=1.0, m=1.0, K=0.0, M=0.0)
        with pytest.raises(DomainError):
            ula_drift_constants(p, 0.3, d=1)

    def test_exact_inequality_on_grid(self, gaussian1, bump1):
        for spec in (gaussian1, bump1):
            res = ula_drift_check_exact(spec, spec.assumptions, n_x=200, n_gamma=20)
            assert res.passed, (spec.name, res.worst_margin)

    def test_exact_inequality_needs_offset(self, gaussian1):
        # non-vacuity: dropping the inside-ball offset breaks the bound at 0
        eta = 1 / 16
        lhs = ula_V_moment_exact(np.zeros(1), 0.25, eta, gaussian1)
        rhs_without_offset = 0.0  # log of exp(-eta*m*gamma*0/4) * V(0)
        assert lhs > rhs_without_offset


class TestMalaDriftConstants:
    def test_gaussian_benchmark_chain(self):
        p = AssumptionParams(L=1.0, m=1.0, K=0.0, M=0.0)
        dc = mala_drift_constants(p, d=1)
        assert dc.Gamma_half == 0.25
        assert_rel(dc.C2_half, 39.25, 1e-14)
        assert_rel(dc.b_half, 39.25 + 128.0 / math.e, 1e-14)
        assert_rel(dc.K_M, 148.66967925002672, 1e-13)
        assert_rel(dc.Gamma, 2.8955773118595042e-3, 1e-12)
        assert_rel(dc.varpi, dc.b_half, 1e-12)

    def test_sup_u_exp_against_grid_search(self):
        u = np.linspace(1.0, 2000.0, 2_000_001)
        grid_max = float(np.max(u * np.exp(-u / 128.0)))
        assert_rel(SUP_U_EXP, grid_max, 1e-8)
        assert SUP_U_EXP >= grid_max

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.2, 1.0), st.floats(1.0, 3.0), st.floats(0.0, 2.0), st.floats(0.1, 1.0))
    def test_gamma_within_half_range(self, m_frac, L, K, upsilon):
        m = m_frac * L
        p = AssumptionParams(L=L, m=m, K=K, M=1.0)
        dc = mala_drift_constants(p, d=2, upsilon=upsilon)
        assert dc.Gamma <= dc.Gamma_half
        assert dc.K_M >= max(16.0, 2 * K, dc.K_U, dc.K_tilde)
        assert_rel(dc.varpi, dc.eta_bar * m * dc.K_M**2 / 16.0, 1e-12)

    def test_varpi_grows_as_curvature_shrinks(self):
        # weaker declared curvature inflates the drift constants, so the
        # per-stepsize contraction exponent varpi never decreases as m drops
        varpis = []
        for m in (1.0, 0.8, 0.6, 0.4, 0.2):
            p = AssumptionParams(L=1.0, m=m, K=0.0, M=0.0)
            varpis.append(mala_drift_constants(p, d=1).varpi)
        assert all(b >= a for a, b in zip(varpis, varpis[1:]))

    def test_gamma_bar_validation(self):
        p = AssumptionParams(L=1.0, m=1.0, K=0.0, M=0.0)
        dc = mala_drift_constants(p, d=1)
        with pytest.raises(DomainError):
            mala_drift_constants(p, d=1, gamma_bar=dc.Gamma * 2)

    def test_requires_M(self):
        p = AssumptionParams(L=1.0, m=1.0, K=0.0)
        from malacert.errors import AssumptionError

        with pytest.raises(AssumptionError):
            mala_drift_constants(p, d=1)


class TestMalaDriftCheck:
    def test_gaussian_inside_and_outside(self, gaussian1):
        p = gaussian1.assumptions
        dc = mala_drift_constants(p, d=1)
        grid = np.array([[0.0], [100.0], [1.5 * dc.K_M]])
        rep = mala_drift_check(gaussian1, dc, dc.Gamma / 2, grid, n_mc=4000, seed=2)
        assert rep.passed, rep.table()

    def test_reproducible(self, gaussian1):
        p = gaussian1.assumptions
        dc = mala_drift_constants(p, d=1)
        grid = np.array([[50.0]])
        a = mala_drift_check(gaussian1, dc, dc.Gamma / 2, grid, n_mc=2000, seed=7)
        b = mala_drift_check(gaussian1, dc, dc.Gamma / 2, grid, n_mc=2000, seed=7)
        assert a.checks[0].worst_margin == b.checks[0].worst_margin

    def test_falsified_offset_fails(self, gaussian1):
        # dropping the inside-ball offset breaks the bound at the origin,
        # where the kernel strictly expands the Lyapunov function
        import dataclasses

        p = gaussian1.assumptions
        dc = mala_drift_constants(p, d=1)
        bad = dataclasses.replace(dc, log_b_M=-math.inf)
        grid = np.array([[0.0]])
        rep = mala_drift_check(gaussian1, bad, dc.Gamma / 2, grid, n_mc=4000, seed=2)
        assert not rep.passed


class TestChi2Tail:
    def test_arithmetic_example(self):
        assert_rel(chi2_tail_log_bound(1 / 32, 0.01, 16.0, 1), -200.0)

    def test_radius_precondition(self):
        with pytest.raises(DomainError):
            chi2_tail_log_bound(1 / 32, 0.01, 0.01, 1)

    def test_bound_blows_down_as_gamma_shrinks(self):
        b1 = chi2_tail_log_bound(1 / 32, 0.01, 16.0, 1)
        b2 = chi2_tail_log_bound(1 / 32, 0.001, 16.0, 1)
        assert b2 < b1 < 0

    def test_monte_carlo_domination(self):
        # parameters put the bound near exp(-4); the true tail is exp(-8)
        c, d = 1 / 32, 2
        gamma = 0.05
        norm_x = math.sqrt(16.0 * gamma / c)
        log_bound = chi2_tail_log_bound(c, gamma, norm_x, d)
        assert_rel(log_bound, -4.0, 1e-12)
        z = NoiseStream(33, 0).normal((200_000, d))
        radius = math.sqrt(c / gamma) * norm_x
        p_hat = float(np.mean((z * z).sum(axis=1) >= radius * radius))
        se = math.sqrt(p_hat * (1 - p_hat) / 200_000)
        assert p_hat - 5 * se <= math.exp(log_bound)


class TestGrowthLemmas:
    def test_quadratic_growth_examples(self):
        p0 = AssumptionParams(L=1.0, m=1.0, K=0.0, M=0.0)
        out = quadratic_growth_constants(p0)
        assert out == {"K_tilde": 0.0, "C_tilde": 0.0}
        p1 = AssumptionParams(L=2.0, m=1.0, K=1.0, M=0.0)
        out = quadratic_growth_constants(p1)
        assert_rel(out["K_tilde"], 6.0)
        assert_rel(out["C_tilde"], 72.0)

    def test_quadratic_growth_probe_gaussian(self, gaussian1):
        res = quadratic_growth_probe(gaussian1, gaussian1.assumptions, n=10_000, seed=1)
        assert res.passed

    def test_convexity_radius_examples(self):
        p0 = AssumptionParams(L=1.0, m=1.0, K=0.0, M=0.0)
        assert convexity_at_infinity_radius(p0) == {"m_prime": 0.5, "radius": 0.0}
        p1 = AssumptionParams(L=4.0, m=1.0, K=1.0, M=0.0)
        out = convexity_at_infinity_radius(p1)
        assert_rel(out["radius"], 33.0)

    def test_convexity_probe_bump(self, bump1):
        res = convexity_at_infinity_probe(bump1, bump1.assumptions, n=10_000, seed=1)
        assert res.passed

    def test_beta_growth_constants(self):
        p = BetaParams(beta=0.5, m_beta=0.5, L_beta=1.0, K_beta=1.0)
        out = quadratic_growth_constants_beta(p, L=1.0)
        base = 4.0 * 1.0 * (1 + 1.0 / 0.5)
        assert_rel(out["K_tilde_beta"], base**2)  # exponent 1/(1-beta) = 2
        up = 2.0 * 1.0 * 1.0 / 1.0
        assert_rel(out["K_bar_beta"], up ** (1 / (1 - 0.375)))

    def test_segment_norm_bound(self):
        # z = 0: (1 - gamma L) >= 1/2 directly
        assert hessian_perturbation_check(0.25, 5.0, 0.0, 1.0)
        # boundary: gamma = 1/(4L), ||z|| at the cone edge: (3/4 - 1/4) = 1/2
        gamma = 0.25
        norm_x = 3.0
        norm_z = norm_x / (4.0 * math.sqrt(2.0 * gamma))
        assert hessian_perturbation_check(gamma, norm_x, norm_z, 1.0)
        rng = np.random.Generator(np.random.Philox(key=np.array([40, 0], dtype=np.uint64)))
        for _ in range(50):
            L = rng.uniform(0.5, 3.0)
            g = rng.uniform(0.01, 1.0) / (4 * L)
            nx = rng.uniform(0.1, 10.0)
            nz = rng.uniform(0.0, 1.0) * nx / (4 * math.sqrt(2 * g))
            assert hessian_perturbation_check(g, nx, nz, L)

    def test_segment_norm_domain(self):
        with pytest.raises(DomainError):
            hessian_perturbation_check(0.5, 1.0, 0.0, 1.0)  # gamma > 1/(4L)
        with pytest.raises(DomainError):
            hessian_perturbation_check(0.25, 1.0, 100.0, 1.0)  # z outside cone


class TestBetaChains:
    def test_beta_zero_structural_degeneration(self):
        p = BetaParams(beta=0.0, m_beta=1.0, L_beta=1.0, K_beta=0.0)
        dc = mala_beta_drift_constants(p, L=1.0, M=0.0, d=1)
        assert dc.eta_beta == 1.0 / 32.0
        assert dc.Gamma_beta <= dc.Gamma_half_beta
        # with beta = 0 the radius power 1/(1-beta) collapses to 1
        assert_rel(
            dc.varpi_beta, dc.eta_beta * 1.0 * dc.K_tilde_ray / 128.0, 1e-12
        )
        for field in (dc.log_b_beta, dc.log_b_M_beta):
            assert math.isfinite(field)

    def test_gamma_beta_nonincreasing_in_d(self, beta_tail2):
        p = beta_tail2.beta_params
        gammas = [
            mala_beta_drift_constants(p, 1.0, 0.5, d).Gamma_beta for d in (1, 2, 4, 8)
        ]
        assert all(b <= a for a, b in zip(gammas, gammas[1:]))

    def test_ula_beta_constants_finite(self, beta_tail2):
        p = beta_tail2.beta_params
        cap = p.m_beta / (32.0 * p.L_beta**2)
        out = ula_beta_drift_constants(p, 1.0, cap, d=2)
        assert out["K_ray_beta"] >= 1.0
        assert math.isfinite(out["log_b_beta"])
        with pytest.raises(DomainError):
            ula_beta_drift_constants(p, 1.0, cap * 1.01, d=2)
