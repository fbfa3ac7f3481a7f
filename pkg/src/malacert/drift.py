"""Lyapunov drift: exact ULA moments and explicit drift-constant chains.

Everything that can overflow (the b-type offsets contain factors like
exp(eta * K^2) with eta * K^2 in the thousands) is carried in log domain;
radii, rates and stepsize caps stay linear.  The chains are deterministic
pure functions: same inputs give bit-identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError
from .potential import AssumptionParams, BetaParams, PotentialSpec
from .ratio import (
    c1_bound,
    c2_beta_bound,
    c2_beta_max_gamma,
    c2_bound,
    c2_max_gamma,
    tau_values_batch,
)
from .reporting import FAIL, PASS, CheckResult, VerificationReport

# sup over u >= 1 of u * exp(-u / 2^7), attained at u = 2^7.
SUP_U_EXP = 128.0 / math.e

_SQRT3 = math.sqrt(3.0)


def log_V(eta: float, x) -> float:
    """Log of the squared-exponential Lyapunov function: eta * ||x||^2."""
    if eta <= 0:
        raise DomainError("eta must be positive")
    x = np.asarray(x, dtype=float)
    out = eta * np.sum(x * x, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def log_W(eta_beta: float, x) -> float:
    """Log of the sub-quadratic Lyapunov function: eta * sqrt(1 + ||x||^2)."""
    if eta_beta <= 0:
        raise DomainError("eta_beta must be positive")
    x = np.asarray(x, dtype=float)
    out = eta_beta * np.sqrt(1.0 + np.sum(x * x, axis=-1))
    return float(out) if np.ndim(out) == 0 else out


def ula_V_moment_exact(x, gamma: float, eta: float, spec: PotentialSpec) -> float:
    """Exact log of the ULA one-step expectation of the squared-exponential
    Lyapunov function; the Gaussian integral over the innovation is closed
    form for any potential."""
    if gamma <= 0 or eta <= 0:
        raise DomainError("gamma and eta must be positive")
    a = 4.0 * eta * gamma
    if a >= 1.0:
        raise DomainError(f"need 4*eta*gamma < 1, got {a:g}")
    x = np.asarray(x, dtype=float)
    mu = x - gamma * np.asarray(spec.gradient(x))
    d = x.shape[-1]
    out = -0.5 * d * np.log1p(-a) + eta / (1.0 - a) * np.sum(mu * mu, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# growth and perturbation constants (appendix-level facts)
# ---------------------------------------------------------------------------


def quadratic_growth_constants(params: AssumptionParams) -> dict:
    """Radius beyond which <grad U(x), x> >= (m/2)||x||^2, and its defect cap."""
    k_tilde = 2.0 * params.K * (1.0 + params.L / params.m)
    return {"K_tilde": k_tilde, "C_tilde": params.L * k_tilde**2}


def quadratic_growth_constants_beta(params: BetaParams, L: float) -> dict:
    """Sub-quadratic analogues, with the extra radius where the gradient norm
    upper bound 2 L_beta ||x|| / (1 + ||x||^(3 beta/4)) kicks in."""
    beta = params.beta
    base = 4.0 * params.K_beta * (1.0 + L / params.m_beta)
    k_tilde = max(base, base ** (1.0 / (1.0 - beta))) if base > 0 else 0.0
    up = 2.0 * L * params.K_beta / params.L_beta
    k_bar = max(up, up ** (1.0 / (1.0 - 0.75 * beta))) if up > 0 else 0.0
    return {
        "K_tilde_beta": k_tilde,
        "C_tilde_beta": L * k_tilde**2,
        "K_bar_beta": k_bar,
    }


def convexity_at_infinity_radius(params: AssumptionParams) -> dict:
    """Radius outside which gradient increments are (m/2)-coercive."""
    return {
        "m_prime": 0.5 * params.m,
        "radius": params.K + 8.0 * params.K * params.L / params.m,
    }


def hessian_perturbation_check(
    gamma: float, norm_x: float, norm_z: float, L: float, t_grid=None, tol: float = 1e-12
) -> bool:
    """Worst-case line-segment norm bound ||x_t|| >= ||x||/2 along the proposal.

    Checks the triangle-inequality lower bound (1 - t*gamma*L)||x|| -
    t*sqrt(2 gamma)||z|| over the segment, which covers every potential with
    gradient Lipschitz constant L.
    """
    if not 0.0 < gamma <= 1.0 / (4.0 * L):
        raise DomainError("need gamma in (0, 1/(4L)]")
    if norm_z > norm_x / (4.0 * np.sqrt(2.0 * gamma)) * (1 + 1e-12):
        raise DomainError("need ||z|| <= ||x|| / (4 sqrt(2 gamma))")
    t = np.linspace(0.0, 1.0, 101) if t_grid is None else np.asarray(t_grid)
    lower = (1.0 - t * gamma * L) * norm_x - t * np.sqrt(2.0 * gamma) * norm_z
    return bool(np.min(lower) >= 0.5 * norm_x - tol)


def chi2_tail_log_bound(
    c: float, gamma: float, norm_x: float, d: int, gamma_bar: float | None = None
) -> float:
    """Log of the Gaussian-norm tail bound: P(||Z|| >= sqrt(c/gamma)*||x||)
    <= exp(-c*||x||^2/(4*gamma)) once ||x|| clears the stated radius."""
    gb = gamma if gamma_bar is None else gamma_bar
    if c <= 0 or gamma <= 0 or gamma > gb:
        raise DomainError("need c > 0 and 0 < gamma <= gamma_bar")
    if norm_x < math.sqrt(8.0 * gb * d / c):
        raise DomainError(
            f"need ||x|| >= sqrt(8*gamma_bar*d/c) = {math.sqrt(8.0 * gb * d / c):g}"
        )
    return -c * norm_x**2 / (4.0 * gamma)


# ---------------------------------------------------------------------------
# quadratic-tail drift chain
# ---------------------------------------------------------------------------


def ula_drift_constants(params: AssumptionParams, gamma_bar: float, d: int) -> dict:
    """ULA drift offset for the squared-exponential Lyapunov function.

    Valid for stepsize bounds up to m/(4 L^2); the offset is returned in log
    domain together with the radius of the ball where it applies.
    """
    L, m = params.L, params.m
    if not 0.0 < gamma_bar <= m / (4.0 * L**2):
        raise DomainError(f"need gamma_bar in (0, m/(4 L^2)] = (0, {m / (4 * L**2):g}]")
    eta = m / 16.0
    k_tilde = quadratic_growth_constants(params)["K_tilde"]
    k_u = max(k_tilde, 4.0 * math.sqrt(d / m))
    growth = m / 4.0 + (1.0 + 16.0 * eta * gamma_bar) * (
        4.0 * eta + 2.0 * L + gamma_bar * L**2
    )
    prefactor = eta * growth * k_u**2 + 4.0 * eta * d
    exponent = gamma_bar * eta * growth * k_u**2 + 4.0 * eta * gamma_bar * d
    return {"K_U": k_u, "log_b_U": math.log(prefactor) + exponent, "eta_bar": eta}


@dataclass
class DriftConstants:
    """Explicit MALA drift inequality constants for the quadratic-tail regime.

    gamma_bar is the stepsize bound at which the gamma-dependent offsets were
    evaluated; the drift inequality holds for every stepsize up to it.
    """

    eta_bar: float
    K_U: float
    log_b_U: float
    Gamma_half: float
    Gamma: float
    K_M: float
    varpi: float
    log_b_M: float
    b_half: float
    K_tilde: float
    C2_half: float
    C1: float
    gamma_bar: float
    d: int

    def to_dict(self) -> dict:
        return asdict(self)


def mala_drift_constants(
    params: AssumptionParams,
    d: int,
    upsilon: float = 1.0,
    gamma_bar: float | None = None,
) -> DriftConstants:
    """Full constant chain of the MALA drift inequality
    (kernel applied to V) <= (1 - varpi*gamma) V + b*gamma inside a ball.

    upsilon <= 1 is the free cap on the preliminary stepsize range.  When
    gamma_bar is omitted, all gamma-dependent offsets are evaluated at the
    final certified stepsize radius Gamma.
    """
    if not 0.0 < upsilon <= 1.0:
        raise DomainError("upsilon must lie in (0, 1]")
    L, m, K = params.L, params.m, params.K
    M = params.require_M()
    eta = m / 16.0
    k_tilde = quadratic_growth_constants(params)["K_tilde"]

    gamma_half = min(upsilon, c2_max_gamma(L, m), 1.0 / d)
    c2_half = c2_bound(gamma_half, L, m)
    b_half = c2_half * d + SUP_U_EXP
    k_u = max(k_tilde, 4.0 * math.sqrt(d / m))
    k_half = max(16.0, 2.0 * K, k_u, k_tilde)
    k_m = max(k_half, 4.0 * math.sqrt(b_half) / math.sqrt(m * eta))
    gamma_cap = min(gamma_half, c2_max_gamma(L, m), 1.0 / d, 4.0 / (m * eta * k_m**2))
    varpi = eta * m * k_m**2 / 16.0

    if gamma_bar is None:
        gamma_bar = gamma_cap
    if not 0.0 < gamma_bar <= gamma_cap:
        raise DomainError(
            f"gamma_bar={gamma_bar:g} outside the certified drift range (0, {gamma_cap:g}]"
        )

    ula = ula_drift_constants(params, gamma_bar, d)
    c1 = c1_bound(gamma_bar, L, M)
    remainder = c1 * math.sqrt(gamma_bar) * (d + _SQRT3 * d**2 + k_m**2)
    log_b_m = _logsumexp(
        [
            ula["log_b_U"],
            math.log(varpi) + eta * k_m**2,
            math.log(remainder) if remainder > 0 else -math.inf,
        ]
    )
    return DriftConstants(
        eta_bar=eta,
        K_U=k_u,
        log_b_U=ula["log_b_U"],
        Gamma_half=gamma_half,
        Gamma=gamma_cap,
        K_M=k_m,
        varpi=varpi,
        log_b_M=log_b_m,
        b_half=b_half,
        K_tilde=k_tilde,
        C2_half=c2_half,
        C1=c1,
        gamma_bar=gamma_bar,
        d=d,
    )


# ---------------------------------------------------------------------------
# sub-quadratic-tail drift chain
# ---------------------------------------------------------------------------


def ula_beta_drift_constants(
    params: BetaParams, L: float, gamma_bar: float, d: int
) -> dict:
    """ULA drift offset for the sub-quadratic Lyapunov function (log domain)."""
    m_b, L_b, beta = params.m_beta, params.L_beta, params.beta
    cap = m_b / (32.0 * L_b**2)
    if not 0.0 < gamma_bar <= cap:
        raise DomainError(f"need gamma_bar in (0, m_beta/(2^5 L_beta^2)] = (0, {cap:g}]")
    eta = m_b / 32.0
    growth = quadratic_growth_constants_beta(params, L)
    k_ray = max(
        1.0,
        growth["K_bar_beta"],
        growth["K_tilde_beta"],
        (32.0 * d / m_b) ** (1.0 / (2.0 - beta)),
    )
    a = eta * (L * (1.0 + L / 2.0) * k_ray**2 + d + eta)
    prefactor = a + m_b * eta * math.sqrt(1.0 + k_ray**2) / (16.0 * (1.0 + k_ray**beta))
    return {
        "K_ray_beta": k_ray,
        "log_b_beta": math.log(prefactor) + gamma_bar * a,
        "eta_beta": eta,
    }


@dataclass
class BetaDriftConstants:
    """MALA drift constants for the sub-quadratic-tail regime (log-domain b's)."""

    eta_beta: float
    K_beta_ray: float
    log_b_beta: float
    Gamma_half_beta: float
    Gamma_beta: float
    K_tilde_ray: float
    varpi_beta: float
    log_b_M_beta: float
    b_half_beta: float
    C2_beta_half: float
    C1: float
    gamma_bar: float
    d: int
    beta: float

    def to_dict(self) -> dict:
        return asdict(self)


def mala_beta_drift_constants(
    params: BetaParams,
    L: float,
    M: float,
    d: int,
    upsilon_beta: float = 1.0,
    gamma_bar: float | None = None,
) -> BetaDriftConstants:
    """Constant chain of the MALA drift inequality for sub-quadratic tails."""
    if not 0.0 < upsilon_beta <= 1.0:
        raise DomainError("upsilon_beta must lie in (0, 1]")
    m_b, L_b, K_b, beta = params.m_beta, params.L_beta, params.K_beta, params.beta
    eta = m_b / 32.0

    # The extra 1/(4L) cap keeps the far-field envelope admissible.
    gamma_half = min(
        upsilon_beta, m_b**3 / (32.0 * L_b**4), 1.0 / (8.0 * d),
        c2_beta_max_gamma(L, L_b, m_b),
    )
    c2_half = c2_beta_bound(gamma_half, L, L_b, m_b)
    b_half = c2_half * d + SUP_U_EXP

    growth = quadratic_growth_constants_beta(params, L)
    ula = ula_beta_drift_constants(params, L, min(gamma_half, m_b / (32.0 * L_b**2)), d)
    k_ray = ula["K_ray_beta"]
    k_half = max(
        1.0, 2.0 * K_b, k_ray, 2.0 * growth["K_tilde_beta"], growth["K_bar_beta"]
    )
    k_tilde_ray = max(k_half, (128.0 * b_half / (eta * m_b)) ** (1.0 / (1.0 - beta)))
    gamma_cap = min(gamma_half, 32.0 / (m_b * eta * k_tilde_ray ** (1.0 - beta)))
    varpi = eta * m_b * k_tilde_ray ** (1.0 - beta) / 128.0

    if gamma_bar is None:
        gamma_bar = gamma_cap
    if not 0.0 < gamma_bar <= gamma_cap:
        raise DomainError(
            f"gamma_bar={gamma_bar:g} outside the certified drift range (0, {gamma_cap:g}]"
        )

    ula_at = ula_beta_drift_constants(params, L, gamma_bar, d)
    c1 = c1_bound(gamma_bar, L, M)
    remainder = c1 * math.sqrt(gamma_bar) * (d + _SQRT3 * d**2 + k_tilde_ray**2)
    log_b_m = _logsumexp(
        [
            ula_at["log_b_beta"],
            math.log(varpi) + eta * math.sqrt(1.0 + k_tilde_ray**2),
            math.log(remainder) if remainder > 0 else -math.inf,
        ]
    )
    return BetaDriftConstants(
        eta_beta=eta,
        K_beta_ray=k_ray,
        log_b_beta=ula_at["log_b_beta"],
        Gamma_half_beta=gamma_half,
        Gamma_beta=gamma_cap,
        K_tilde_ray=k_tilde_ray,
        varpi_beta=varpi,
        log_b_M_beta=log_b_m,
        b_half_beta=b_half,
        C2_beta_half=c2_half,
        C1=c1,
        gamma_bar=gamma_bar,
        d=d,
        beta=beta,
    )


# ---------------------------------------------------------------------------
# Monte Carlo drift checks
# ---------------------------------------------------------------------------


def _logsumexp(values) -> float:
    arr = np.asarray(values, dtype=float)
    arr = arr[arr > -np.inf]
    if arr.size == 0:
        return -math.inf
    hi = float(np.max(arr))
    return hi + math.log(np.sum(np.exp(arr - hi)))


def _log_mean_exp_with_se(log_terms: np.ndarray) -> tuple[float, float]:
    """Log of the sample mean of exp(log_terms) and the delta-method standard
    error of that log-mean."""
    n = log_terms.size
    log_m1 = _logsumexp(log_terms) - math.log(n)
    log_m2 = _logsumexp(2.0 * log_terms) - math.log(n)
    ratio = math.exp(min(log_m2 - 2.0 * log_m1, 700.0))
    se = math.sqrt(max(ratio - 1.0, 0.0) / n)
    return log_m1, se


def _accept_reject_log_weights(spec, xs, zs, gamma, log_extra_accept):
    """Per-sample log of p*exp(extra) + (1-p) with p the acceptance probability."""
    n = xs.shape[0]
    taus = tau_values_batch(xs, zs, np.full(n, gamma), spec, order=16)
    mt = np.maximum(0.0, taus)
    log_p = -mt
    with np.errstate(divide="ignore"):
        log_q = np.where(mt > 0, np.log(-np.expm1(-mt)), -np.inf)
    return np.logaddexp(log_p + log_extra_accept, log_q)


def mala_drift_check(
    spec: PotentialSpec,
    constants: DriftConstants,
    gamma: float,
    x_grid,
    n_mc: int = 10_000,
    seed: int = 0,
    n_se: float = 5.0,
) -> VerificationReport:
    """Monte Carlo check of the MALA drift inequality at the given states.

    The left side is the kernel applied to the squared-exponential Lyapunov
    function, estimated by log-mean-exp over proposals (acceptance and
    rejection branches combined in log space, relative to V(x)); it must not
    exceed the drift bound by more than n_se standard errors.
    """
    if not 0.0 < gamma <= constants.Gamma:
        raise DomainError(f"gamma must lie in (0, {constants.Gamma:g}]")
    eta = constants.eta_bar
    report = VerificationReport()
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 3], dtype=np.uint64)))
    for idx, x in enumerate(np.atleast_2d(np.asarray(x_grid, dtype=float))):
        zs = rng.standard_normal((n_mc, spec.d))
        xs = np.broadcast_to(x, (n_mc, spec.d))
        aux = -gamma * np.asarray(spec.gradient(xs)) + math.sqrt(2.0 * gamma) * zs
        delta = 2.0 * (xs * aux).sum(axis=1) + (aux * aux).sum(axis=1)
        log_terms = _accept_reject_log_weights(spec, xs, zs, gamma, eta * delta)
        lhs_rel, se = _log_mean_exp_with_se(log_terms)

        norm_x = float(np.linalg.norm(x))
        rhs_rel = math.log1p(-constants.varpi * gamma)
        if norm_x <= constants.K_M:
            rhs_rel = np.logaddexp(
                rhs_rel, constants.log_b_M + math.log(gamma) - eta * norm_x**2
            )
        margin = float(rhs_rel + n_se * se - lhs_rel)
        report.add(
            CheckResult(
                name=f"mala_drift/{spec.name}/x{idx}",
                status=PASS if margin >= 0 else FAIL,
                worst_margin=margin,
                witness=None if margin >= 0 else {
                    "x": x.tolist(), "lhs_rel": lhs_rel, "rhs_rel": float(rhs_rel),
                    "se": se, "gamma": gamma,
                },
                n_samples=n_mc,
                seed=seed,
            )
        )
    return report


def mala_beta_drift_check(
    spec: PotentialSpec,
    constants: BetaDriftConstants,
    gamma: float,
    x_grid,
    n_mc: int = 10_000,
    seed: int = 0,
    n_se: float = 5.0,
) -> VerificationReport:
    """Monte Carlo drift check for the sub-quadratic Lyapunov function."""
    if not 0.0 < gamma <= constants.Gamma_beta:
        raise DomainError(f"gamma must lie in (0, {constants.Gamma_beta:g}]")
    eta = constants.eta_beta
    report = VerificationReport()
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 4], dtype=np.uint64)))
    for idx, x in enumerate(np.atleast_2d(np.asarray(x_grid, dtype=float))):
        zs = rng.standard_normal((n_mc, spec.d))
        xs = np.broadcast_to(x, (n_mc, spec.d))
        aux = -gamma * np.asarray(spec.gradient(xs)) + math.sqrt(2.0 * gamma) * zs
        sq_x = float(x @ x)
        sq_y = sq_x + 2.0 * (xs * aux).sum(axis=1) + (aux * aux).sum(axis=1)
        # sqrt(1+||y||^2) - sqrt(1+||x||^2) via the stable difference quotient
        delta = (sq_y - sq_x) / (np.sqrt(1.0 + sq_y) + math.sqrt(1.0 + sq_x))
        log_terms = _accept_reject_log_weights(spec, xs, zs, gamma, eta * delta)
        lhs_rel, se = _log_mean_exp_with_se(log_terms)

        norm_x = math.sqrt(sq_x)
        rhs_rel = math.log1p(-constants.varpi_beta * gamma)
        if norm_x <= constants.K_tilde_ray:
            rhs_rel = np.logaddexp(
                rhs_rel,
                constants.log_b_M_beta + math.log(gamma) - eta * math.sqrt(1.0 + sq_x),
            )
        margin = float(rhs_rel + n_se * se - lhs_rel)
        report.add(
            CheckResult(
                name=f"mala_beta_drift/{spec.name}/x{idx}",
                status=PASS if margin >= 0 else FAIL,
                worst_margin=margin,
                witness=None if margin >= 0 else {
                    "x": x.tolist(), "lhs_rel": lhs_rel, "rhs_rel": float(rhs_rel),
                    "se": se, "gamma": gamma,
                },
                n_samples=n_mc,
                seed=seed,
            )
        )
    return report


def ula_drift_check_exact(
    spec: PotentialSpec,
    params: AssumptionParams,
    n_x: int = 200,
    n_gamma: int = 20,
    x_max_factor: float = 2.5,
    seed: int = 0,
    tol: float = 1e-12,
) -> CheckResult:
    """Exact (no Monte Carlo) check of the ULA drift inequality on a grid.

    Compares the closed-form one-step moment against the drift bound with the
    offset evaluated at the largest admissible stepsize bound.
    """
    L, m = params.L, params.m
    gamma_bar = m / (4.0 * L**2)
    consts = ula_drift_constants(params, gamma_bar, spec.d)
    eta, k_u, log_b_u = consts["eta_bar"], consts["K_U"], consts["log_b_U"]
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 5], dtype=np.uint64)))
    dirs = rng.standard_normal((n_x, spec.d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = np.linspace(0.0, x_max_factor * max(k_u, 1.0), n_x)
    xs = dirs * radii[:, None]
    gammas = gamma_bar * np.arange(1, n_gamma + 1) / n_gamma

    worst = math.inf
    witness = None
    for gamma in gammas:
        lhs = ula_V_moment_exact(xs, float(gamma), eta, spec)
        inside = radii <= k_u
        rhs = -eta * m * gamma * radii**2 / 4.0 + eta * radii**2
        rhs = np.where(
            inside, np.logaddexp(rhs, log_b_u + math.log(gamma)), rhs
        )
        margin = rhs - lhs
        i = int(np.argmin(margin))
        if margin[i] < worst:
            worst = float(margin[i])
            witness = {"x": xs[i].tolist(), "gamma": float(gamma)}
    ok = worst >= -tol
    return CheckResult(
        name=f"ula_drift_exact/{spec.name}",
        status=PASS if ok else FAIL,
        worst_margin=worst,
        witness=None if ok else witness,
        n_samples=n_x * n_gamma,
        seed=seed,
    )


def quadratic_growth_probe(
    spec: PotentialSpec,
    params: AssumptionParams,
    n: int = 10_000,
    span: float = 20.0,
    seed: int = 0,
    tol: float = 1e-9,
) -> CheckResult:
    """Sampled check that <grad U(x), x> >= (m/2)||x||^2 outside the growth radius."""
    k_tilde = quadratic_growth_constants(params)["K_tilde"]
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 6], dtype=np.uint64)))
    dirs = rng.standard_normal((n, spec.d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = k_tilde + 1e-9 + span * rng.random(n)
    xs = dirs * radii[:, None]
    gx = np.asarray(spec.gradient(xs))
    margin = (gx * xs).sum(axis=1) - 0.5 * params.m * radii**2
    i = int(np.argmin(margin))
    ok = margin[i] >= -tol
    return CheckResult(
        name=f"quadratic_growth/{spec.name}",
        status=PASS if ok else FAIL,
        worst_margin=float(margin[i]),
        witness=None if ok else {"x": xs[i].tolist()},
        n_samples=n,
        seed=seed,
    )


def convexity_at_infinity_probe(
    spec: PotentialSpec,
    params: AssumptionParams,
    n: int = 10_000,
    span: float = 20.0,
    seed: int = 0,
    tol: float = 1e-9,
) -> CheckResult:
    """Sampled check of gradient coercivity on pairs outside the certified radius."""
    info = convexity_at_infinity_radius(params)
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 7], dtype=np.uint64)))
    dirs = rng.standard_normal((2, n, spec.d))
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    r_out = info["radius"] + 1e-9 + span * rng.random(n)
    r_any = span * rng.random(n)
    xs = dirs[0] * r_out[:, None]
    ys = dirs[1] * r_any[:, None]
    gx = np.asarray(spec.gradient(xs))
    gy = np.asarray(spec.gradient(ys))
    diff = xs - ys
    margin = ((gx - gy) * diff).sum(axis=1) - info["m_prime"] * (diff * diff).sum(axis=1)
    i = int(np.argmin(margin))
    ok = margin[i] >= -tol
    return CheckResult(
        name=f"convexity_at_infinity/{spec.name}",
        status=PASS if ok else FAIL,
        worst_margin=float(margin[i]),
        witness=None if ok else {"x": xs[i].tolist(), "y": ys[i].tolist()},
        n_samples=n,
        seed=seed,
    )
