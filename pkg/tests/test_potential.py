import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from malacert.errors import (
    AssumptionError,
    DegenerateShellError,
    InvalidParamError,
    NonFiniteError,
    UnknownKindError,
)
from malacert.potential import (
    AssumptionParams,
    BetaParams,
    PotentialSpec,
    builtin,
    estimate_beta_params,
    evaluate,
    probe_assumptions,
)

from conftest import assert_rel


def test_evaluate_gaussian_d1_origin(gaussian1):
    out = evaluate(gaussian1, np.array([0.0]))
    assert out.U == 0.0
    assert out.grad[0] == 0.0
    assert out.hess[0, 0] == 1.0


def test_evaluate_gaussian_d2(gaussian2):
    out = evaluate(gaussian2, np.array([3.0, 4.0]))
    assert out.U == 12.5
    np.testing.assert_array_equal(out.grad, [3.0, 4.0])
    np.testing.assert_array_equal(out.hess, np.eye(2))


def test_evaluate_bump_hand_derivative():
    # U(x) = x^2/2 + a cos(w x): U(0) = a, U'(0) = 0, U''(0) = 1 - a w^2
    spec = builtin("bump", 1, {"a": 0.1, "w": 1.0})
    out = evaluate(spec, np.array([0.0]))
    assert_rel(out.U, 0.1)
    assert out.grad[0] == 0.0
    assert_rel(out.hess[0, 0], 0.9)


@pytest.mark.parametrize(
    "kind,params",
    [
        ("gaussian", None),
        ("anisotropic_gaussian", {"scales": [0.5, 2.0, 1.0]}),
        ("bump", {"a": 0.3, "w": 1.0}),
        ("beta_tail", {"beta": 0.5}),
    ],
)
def test_gradient_vanishes_at_origin(kind, params):
    d = 3 if kind != "bump" else 1
    spec = builtin(kind, d, params)
    g0 = np.asarray(spec.gradient(np.zeros(spec.d)))
    assert np.linalg.norm(g0) <= 1e-10


@pytest.mark.parametrize(
    "kind,params,d",
    [
        ("gaussian", None, 2),
        ("anisotropic_gaussian", {"scales": [0.5, 3.0]}, 2),
        ("bump", {"a": 0.3, "w": 1.0}, 1),
        ("beta_tail", {"beta": 0.5}, 2),
    ],
)
def test_finite_difference_hessian_matches_analytic(kind, params, d):
    spec = builtin(kind, d, params)
    fd_spec = PotentialSpec(
        d=d, value=spec.value, gradient=spec.gradient, hessian=None, name="fd"
    )
    rng = np.random.Generator(np.random.Philox(key=np.array([5, 0], dtype=np.uint64)))
    for _ in range(100):
        x = rng.uniform(-1, 1, d)
        x *= 10.0 * rng.random() / max(np.linalg.norm(x), 1e-12)
        h_true = spec.hess_at(x)
        h_fd = fd_spec.hess_at(x)
        scale = max(np.abs(h_true).max(), 1.0)
        assert np.abs(h_fd - h_true).max() <= 1e-5 * scale


def test_gaussian_declared_params(gaussian1):
    p = gaussian1.assumptions
    assert (p.L, p.m, p.K, p.M) == (1.0, 1.0, 0.0, 0.0)


def test_bump_declared_params_formula():
    spec = builtin("bump", 1, {"a": 0.5, "w": 2.0})
    p = spec.assumptions
    assert_rel(p.L, 3.0)  # 1 + 0.5 * 4
    assert_rel(p.M, 4.0)  # 0.5 * 8
    assert p.empirical  # convexity broken: exclusion radius only probed
    assert p.m == 0.9
    assert p.K > 0
    assert "not certified" in p.note


def test_convex_bump_exact_params():
    spec = builtin("bump", 1, {"a": 0.3, "w": 1.0})
    p = spec.assumptions
    assert (p.L, p.m, p.K, p.M) == (1.3, 0.7, 0.0, 0.3)
    assert not p.empirical


@pytest.mark.parametrize(
    "kind,params,d",
    [
        ("gaussian", None, 1),
        ("gaussian", None, 3),
        ("anisotropic_gaussian", {"scales": [0.5, 2.0]}, 2),
        ("bump", {"a": 0.3, "w": 1.0}, 1),
    ],
)
def test_probe_passes_for_exactly_declared_builtins(kind, params, d):
    spec = builtin(kind, d, params)
    report = probe_assumptions(spec, spec.assumptions, n=10_000, radius=100.0, seed=3)
    assert report.passed, report.table()


def test_probe_fails_with_witness_on_wrong_L(gaussian1):
    wrong = AssumptionParams(L=0.5, m=0.5, K=0.0, M=0.0)
    report = probe_assumptions(gaussian1, wrong, n=1000, radius=10.0, seed=3)
    assert not report.passed
    fail = report.failures()[0]
    assert fail.witness is not None and "x" in fail.witness


def test_probe_beta_tail_self_consistent(beta_tail2):
    report = probe_assumptions(
        beta_tail2, beta_tail2.beta_params, n=10_000, radius=100.0, seed=3
    )
    assert report.passed, report.table()


def test_probe_degenerate_shell():
    spec = builtin("gaussian", 1)
    params = AssumptionParams(L=1.0, m=1.0, K=5.0, M=0.0)
    with pytest.raises(DegenerateShellError):
        probe_assumptions(spec, params, n=10, radius=4.0, seed=0)


def test_unknown_kind():
    with pytest.raises(UnknownKindError):
        builtin("cauchy", 1)


def test_invalid_params():
    with pytest.raises(InvalidParamError):
        builtin("gaussian", 0)
    with pytest.raises(InvalidParamError):
        builtin("beta_tail", 1, {"beta": 1.0})
    with pytest.raises(InvalidParamError):
        builtin("anisotropic_gaussian", 2, {"scales": [1.0, -1.0]})


def test_assumption_params_invariants():
    with pytest.raises(AssumptionError):
        AssumptionParams(L=1.0, m=2.0)  # m > L
    with pytest.raises(AssumptionError):
        AssumptionParams(L=1.0, m=0.0)
    with pytest.raises(AssumptionError):
        BetaParams(beta=1.0, m_beta=1.0, L_beta=1.0)
    with pytest.raises(AssumptionError):
        BetaParams(beta=0.5, m_beta=1.0, L_beta=0.5)


def test_nonzero_gradient_at_origin_rejected():
    with pytest.raises(AssumptionError):
        PotentialSpec(
            d=1,
            value=lambda x: float(np.sum(x)),
            gradient=lambda x: np.ones_like(x),
        )


def test_evaluate_nonfinite():
    spec = builtin("gaussian", 1)
    bad = PotentialSpec(
        d=1,
        value=lambda x: float("inf") if abs(float(x[0])) > 1 else float(x[0] ** 2 / 2),
        gradient=spec.gradient,
        hessian=spec.hessian,
        name="bad",
    )
    with pytest.raises(NonFiniteError):
        evaluate(bad, np.array([2.0]))


def test_estimate_beta_params_deterministic():
    a = estimate_beta_params(0.5, 2)
    b = estimate_beta_params(0.5, 2)
    assert (a.m_beta, a.L_beta, a.K_beta) == (b.m_beta, b.L_beta, b.K_beta)
    assert a.empirical
    assert 0 < a.m_beta <= a.L_beta


def test_beta_tail_hessian_radial_eigenvalues(beta_tail2):
    # transverse eigenvalue (1+s)^(-beta/2) at ||x|| = 10, to be dominated by
    # L_beta/(1 + ||x||^(3 beta/4)) and to dominate m_beta/(1 + ||x||^beta)
    x = np.array([10.0, 0.0])
    h = beta_tail2.hess_at(x)
    eigs = np.linalg.eigvalsh(h)
    p = beta_tail2.beta_params
    r = 10.0
    assert eigs.min() >= p.m_beta / (1 + r**p.beta) - 1e-12
    assert eigs.max() <= p.L_beta / (1 + r ** (0.75 * p.beta)) + 1e-12


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(-20, 20), min_size=2, max_size=2),
)
def test_gaussian_evaluate_closed_form(xs):
    spec = builtin("gaussian", 2)
    x = np.asarray(xs)
    out = evaluate(spec, x)
    assert_rel(out.U, 0.5 * float(x @ x), 1e-12, "U")
    np.testing.assert_allclose(out.grad, x)
