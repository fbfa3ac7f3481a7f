"""End-to-end geometric-ergodicity certificates for MALA.

A certificate packages the drift and minorization constants into a per-block
contraction rate and an evaluable upper bound on the V-weighted distance to
stationarity.  The chain of constants is deliberately conservative: offsets
like the drift constant b contain exp(eta*K^2) factors with exponents in the
thousands, the small-set overlap epsilon underflows linear floats, and the
certified stepsize radius can fall below the representable range.  All such
quantities are therefore carried in log domain; linear fields that underflow
are clamped at RADIUS_FLOOR (stepsize radii, reported with exact logs in the
provenance) or at -RADIUS_FLOOR (the per-block log-rate log_rho, whose exact
magnitude is provenance field log_neg_log_rho).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .drift import (
    BetaDriftConstants,
    DriftConstants,
    log_V,
    log_W,
    mala_beta_drift_constants,
    mala_drift_constants,
)
from .errors import AssumptionError, DomainError
from .minorization import (
    RADIUS_FLOOR,
    log_epsilon_of_K,
    log_gamma_hat_K,
    log_gamma_tilde_K,
    minorization_constants,
)
from .potential import AssumptionParams, BetaParams

_LOG2 = math.log(2.0)
_LOG_FLOOR = math.log(RADIUS_FLOOR)


@dataclass
class Upsilons:
    """Free caps (each <= 1) on the preliminary stepsize ranges."""

    upsilon: float = 1.0
    upsilon_tilde: float = 1.0
    upsilon_beta: float = 1.0
    upsilon_hat: float = 1.0

    @classmethod
    def from_dict(cls, data: dict | None) -> "Upsilons":
        return cls(**(data or {}))


@dataclass
class Certificate:
    """Evaluable convergence certificate.

    gamma_bar is the maximal certified stepsize (clamped at RADIUS_FLOOR when
    the exact value underflows; provenance carries log_gamma_bar).  log_rho is
    the log of the per-block rate, one block being ceil(1/gamma) kernel steps.
    """

    regime: str                 # "A3" or "A4beta"
    eta: float
    gamma_bar: float
    log_lambda: float
    log_M: float
    K_gamma_bar: float
    log_epsilon: float
    log_rho: float
    log_C: float
    log_A_bar: float
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: dict) -> "Certificate":
        return cls(**data)


def _log1m_exp(log_x: float) -> float:
    """log(1 - exp(log_x)) for log_x < 0."""
    if log_x >= 0.0:
        raise DomainError("need log_x < 0")
    if log_x > -_LOG2:
        return math.log(-math.expm1(log_x))
    return math.log1p(-math.exp(log_x))


def _neg_log1m_half_eps(log_eps: float) -> float:
    """log of -log(1 - eps/2), stable for astronomically small eps.

    Below eps = 1e-12 the series -log(1-t) = t + t^2/2 + ... truncates after
    its first term well inside one ulp.
    """
    if log_eps > math.log(1e-12):
        eps = math.exp(log_eps)
        return math.log(-math.log1p(-0.5 * eps))
    return log_eps - _LOG2


def _rate_terms(varpi: float, log_b_m: float, log_eps: float, gamma_bar: float):
    """Shared tail of both certificate pipelines; returns a dict of log fields."""
    log_lambda = -varpi
    # log(1 - lambda), exact even when lambda underflows
    log_one_minus_lambda = _log1m_exp(log_lambda) if log_lambda < 0 else -math.inf
    log_M = max(
        math.log(4.0) + log_b_m + math.log1p(gamma_bar) - log_one_minus_lambda, 0.0
    )
    lam = math.exp(log_lambda)
    log_lambda_bar = math.log1p(lam) - _LOG2          # lambda_bar = (1+lambda)/2
    neg_log_lambda_bar = _LOG2 - math.log1p(lam)
    log_b_bar = np.logaddexp(log_lambda + log_b_m, log_M)

    log_neg_l1me = _neg_log1m_half_eps(log_eps)       # log(-log(1-eps/2))
    neg_l1me = math.exp(log_neg_l1me) if log_neg_l1me > _LOG_FLOOR else 0.0

    log_num = log_neg_l1me + math.log(neg_log_lambda_bar)
    den_mag = neg_l1me + neg_log_lambda_bar + log_b_bar
    log_neg_log_rho = log_num - math.log(den_mag)
    neg_log_rho = math.exp(log_neg_log_rho) if log_neg_log_rho > _LOG_FLOOR else 0.0
    log_rho = -max(neg_log_rho, RADIUS_FLOOR)

    log_one_minus_lambda_bar = log_one_minus_lambda - _LOG2
    log_C = (
        neg_log_rho
        + math.log1p(lam)
        + np.logaddexp(0.0, log_b_bar + neg_l1me - log_one_minus_lambda_bar)
    )
    return {
        "log_lambda": log_lambda,
        "log_M": log_M,
        "log_lambda_bar": log_lambda_bar,
        "log_b_bar": float(log_b_bar),
        "log_neg_log_rho": log_neg_log_rho,
        "log_rho": log_rho,
        "log_C": float(log_C),
    }


def certify(
    params: AssumptionParams,
    d: int,
    upsilons: Upsilons | dict | None = None,
    gamma_bar: float | None = None,
    n_grid_A: int = 32,
) -> Certificate:
    """Assemble the quadratic-tail certificate.

    Pipeline: drift chain -> per-block contraction lambda -> level set of the
    Lyapunov function -> small-set radius at the drift-range stepsize cap ->
    certified stepsize gamma_bar -> per-block rate and prefactor.  Fails if a
    requested gamma_bar exceeds the certified maximum.
    """
    if params.M is None:
        raise AssumptionError("certify requires the third-derivative bound M")
    ups = upsilons if isinstance(upsilons, Upsilons) else Upsilons.from_dict(upsilons)

    drift_cap = mala_drift_constants(params, d, ups.upsilon)  # evaluated at Gamma
    cap = drift_cap.Gamma
    eta = drift_cap.eta_bar

    gamma_eval = cap if gamma_bar is None else gamma_bar
    drift = (
        drift_cap
        if gamma_eval == cap
        else mala_drift_constants(params, d, ups.upsilon, gamma_bar=gamma_eval)
    )

    terms = _rate_terms_for_K(params, d, drift, drift_cap, ups, gamma_eval)

    if gamma_bar is not None and gamma_bar > terms["gamma_bar_cert"] * (1 + 1e-12):
        raise DomainError(
            f"requested gamma_bar={gamma_bar:g} exceeds the certified maximum "
            f"stepsize {terms['gamma_bar_cert']:g} (log {terms['log_gamma_bar']:.6g})"
        )

    log_A_at = drift.log_b_M - math.log(drift.varpi)
    log_A_inf = log_A_at
    for g in np.geomspace(cap * 1e-8, cap, n_grid_A):
        dg = mala_drift_constants(params, d, ups.upsilon, gamma_bar=float(g))
        log_A_inf = min(log_A_inf, dg.log_b_M - math.log(dg.varpi))

    provenance = {
        "drift": drift.to_dict(),
        "minorization": terms["minor"].to_dict(),
        "Gamma": cap,
        "K_Gamma": terms["K_Gamma"],
        "gamma_bar_eval": gamma_eval,
        "log_gamma_bar": terms["log_gamma_bar"],
        "log_b_bar": terms["log_b_bar"],
        "log_lambda_bar": terms["log_lambda_bar"],
        "log_neg_log_rho": terms["log_neg_log_rho"],
        "log_A_at_gamma_bar": log_A_at,
        "upsilons": asdict(ups),
    }
    return Certificate(
        regime="A3",
        eta=eta,
        gamma_bar=terms["gamma_bar_cert"],
        log_lambda=terms["log_lambda"],
        log_M=terms["log_M"],
        K_gamma_bar=terms["K_gamma_bar"],
        log_epsilon=terms["log_epsilon"],
        log_rho=terms["log_rho"],
        log_C=terms["log_C"],
        log_A_bar=log_A_inf,
        provenance=provenance,
    )


def _rate_terms_for_K(params, d, drift, drift_cap, ups, gamma_eval):
    """Level-set radii, small-set constants and rate terms for the A3 pipeline."""
    eta = drift.eta_bar

    def level_radius(dc):
        log_lambda = -dc.varpi
        log_m = max(
            math.log(4.0)
            + dc.log_b_M
            + math.log1p(dc.gamma_bar)
            - _log1m_exp(log_lambda),
            0.0,
        )
        return math.sqrt(log_m / eta), log_m

    k_eval, _ = level_radius(drift)
    k_cap, _ = level_radius(drift_cap)

    minor = minorization_constants(k_cap, params, d, ups.upsilon_tilde, ups.upsilon_hat)
    log_gamma_bar = min(math.log(drift_cap.Gamma), minor.log_Gamma_tilde_K)
    gamma_bar_cert = max(
        math.exp(log_gamma_bar) if log_gamma_bar > _LOG_FLOOR else 0.0, RADIUS_FLOOR
    )

    log_eps = log_epsilon_of_K(k_eval, params.L)
    rate = _rate_terms(drift.varpi, drift.log_b_M, log_eps, gamma_eval)
    rate.update(
        K_gamma_bar=k_eval,
        K_Gamma=k_cap,
        log_epsilon=log_eps,
        minor=minor,
        log_gamma_bar=log_gamma_bar,
        gamma_bar_cert=gamma_bar_cert,
    )
    return rate


def certify_beta(
    params_beta: BetaParams,
    L: float,
    M: float,
    d: int,
    upsilons: Upsilons | dict | None = None,
    gamma_bar: float | None = None,
    n_grid_A: int = 32,
) -> Certificate:
    """Assemble the sub-quadratic-tail certificate (same pipeline, lighter
    Lyapunov function and smoothness-only coupling route)."""
    if M is None:
        raise AssumptionError("certify_beta requires the third-derivative bound M")
    ups = upsilons if isinstance(upsilons, Upsilons) else Upsilons.from_dict(upsilons)

    drift_cap = mala_beta_drift_constants(params_beta, L, M, d, ups.upsilon_beta)
    cap = drift_cap.Gamma_beta
    eta = drift_cap.eta_beta

    gamma_eval = cap if gamma_bar is None else gamma_bar
    drift = (
        drift_cap
        if gamma_eval == cap
        else mala_beta_drift_constants(
            params_beta, L, M, d, ups.upsilon_beta, gamma_bar=gamma_eval
        )
    )

    def level_radius(dc):
        log_lambda = -dc.varpi_beta
        log_m = max(
            math.log(4.0)
            + dc.log_b_M_beta
            + math.log1p(dc.gamma_bar)
            - _log1m_exp(log_lambda),
            0.0,
        )
        return math.sqrt(log_m / eta), log_m

    k_eval, _ = level_radius(drift)
    k_cap, _ = level_radius(drift_cap)

    # The smoothness-only coupling route needs (L, M) but no curvature floor.
    shim = AssumptionParams(L=L, m=L, M=M)
    log_gh = log_gamma_hat_K(k_cap, shim, d, ups.upsilon_hat)
    log_gamma_bar = min(math.log(cap), log_gh)
    gamma_bar_cert = max(
        math.exp(log_gamma_bar) if log_gamma_bar > _LOG_FLOOR else 0.0, RADIUS_FLOOR
    )

    log_eps = log_epsilon_of_K(k_eval, L)
    rate = _rate_terms(drift.varpi_beta, drift.log_b_M_beta, log_eps, gamma_eval)

    if gamma_bar is not None and gamma_bar > gamma_bar_cert * (1 + 1e-12):
        raise DomainError(
            f"requested gamma_bar={gamma_bar:g} exceeds the certified maximum "
            f"stepsize {gamma_bar_cert:g} (log {log_gamma_bar:.6g})"
        )

    log_A_at = drift.log_b_M_beta - math.log(drift.varpi_beta)
    log_A_inf = log_A_at
    for g in np.geomspace(cap * 1e-8, cap, n_grid_A):
        dg = mala_beta_drift_constants(
            params_beta, L, M, d, ups.upsilon_beta, gamma_bar=float(g)
        )
        log_A_inf = min(log_A_inf, dg.log_b_M_beta - math.log(dg.varpi_beta))

    provenance = {
        "drift": drift.to_dict(),
        "Gamma_beta": cap,
        "K_Gamma": k_cap,
        "gamma_bar_eval": gamma_eval,
        "log_gamma_bar": log_gamma_bar,
        "log_Gamma_hat_K": log_gh,
        "log_b_bar": rate["log_b_bar"],
        "log_lambda_bar": rate["log_lambda_bar"],
        "log_neg_log_rho": rate["log_neg_log_rho"],
        "log_A_at_gamma_bar": log_A_at,
        "upsilons": asdict(ups),
        "L": L,
        "M": M,
    }
    return Certificate(
        regime="A4beta",
        eta=eta,
        gamma_bar=gamma_bar_cert,
        log_lambda=rate["log_lambda"],
        log_M=rate["log_M"],
        K_gamma_bar=k_eval,
        log_epsilon=log_eps,
        log_rho=rate["log_rho"],
        log_C=rate["log_C"],
        log_A_bar=log_A_inf,
        provenance=provenance,
    )


def bound_at(cert: Certificate, x, k: int, gamma: float, strict: bool = True) -> float:
    """Log of the certified bound on the V-weighted distance after k kernel steps.

    The certificate is stated per block of ceil(1/gamma) steps; incomplete
    blocks are floored (conservative).  With strict=True the stepsize must not
    exceed the certified maximum; strict=False evaluates the same formula for
    larger stepsizes as an uncertified diagnostic.
    """
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    if strict and gamma > cert.gamma_bar * (1 + 1e-12):
        raise DomainError(
            f"gamma={gamma:g} exceeds the certified maximum stepsize {cert.gamma_bar:g}"
        )
    if k < 0:
        raise DomainError("k must be nonnegative")
    block = math.ceil(1.0 / gamma)
    n_blocks = k // block
    x = np.asarray(x, dtype=float)
    log_v = log_V(cert.eta, x) if cert.regime == "A3" else log_W(cert.eta, x)
    return float(
        cert.log_C + n_blocks * cert.log_rho + np.logaddexp(log_v, cert.log_A_bar)
    )
