"""Small-set overlap constants and stepsize radii for the minorization step.

The overlap epsilon(K) of chains started inside a ball of radius K decays
like a Gaussian tail in K, so for certificate-scale radii it underflows any
linear representation; the log form is first-class here.  Stepsize radii
derived from it are clamped at a strictly positive floor so they stay
representable, with the exact log value reported alongside.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import special

from .errors import DomainError
from .potential import AssumptionParams
from .ratio import c1_bound

# Linear-domain floor for certified stepsize radii (see README).
RADIUS_FLOOR = 1e-300
_TAIL_SWITCH = 8.0
_SQRT3 = math.sqrt(3.0)


def _epsilon_argument(K: float, L: float) -> float:
    if K < 0:
        raise DomainError("K must be nonnegative")
    if L <= 0:
        raise DomainError("L must be positive")
    return math.sqrt((1.0 + 1.0 / L) * 3.0 * L) * K


def log_epsilon_of_K(K: float, L: float) -> float:
    """Log of the small-set overlap constant 2*Phi(-sqrt(3(L+1))*K).

    Complementary-error-function based in the body; past the switch point the
    scaled form keeps full relative accuracy arbitrarily deep in the tail.
    """
    t = _epsilon_argument(K, L)
    if t <= _TAIL_SWITCH:
        return math.log(special.erfc(t / math.sqrt(2.0)))
    return float(np.log(special.erfcx(t / math.sqrt(2.0)))) - 0.5 * t * t


def epsilon_of_K(K: float, L: float) -> float:
    """Small-set overlap constant in linear domain (0 when it underflows)."""
    t = _epsilon_argument(K, L)
    if t <= _TAIL_SWITCH:
        return float(special.erfc(t / math.sqrt(2.0)))
    return math.exp(log_epsilon_of_K(K, L))


def tilde_b_ula(gamma_bar: float, params: AssumptionParams, d: int) -> float:
    """Offset of the ULA second-moment drift (E||Y1||^2 <= (1-m*gamma/2)||x||^2 + gamma*b)."""
    L, m, K = params.L, params.m, params.K
    if not 0.0 < gamma_bar <= m / (4.0 * L**2):
        raise DomainError(f"need gamma_bar in (0, m/(4 L^2)] = (0, {m / (4 * L**2):g}]")
    k_tilde = 2.0 * K * (1.0 + L / m)
    radius = max(k_tilde, 2.0 * math.sqrt(2.0 * d / m))
    return 2.0 * d + radius**2 * (gamma_bar * L**2 + 2.0 * L + m / 2.0)


def tv_diff_one_step_bound(
    x, gamma: float, gamma_bar: float, params: AssumptionParams
) -> float:
    """Upper bound on the one-step total-variation distance between the
    adjusted and unadjusted kernels started at x (total-mass convention, <= 2)."""
    if not 0.0 < gamma <= gamma_bar:
        raise DomainError("need 0 < gamma <= gamma_bar")
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    c1 = c1_bound(gamma_bar, params.L, params.require_M())
    val = c1 * gamma**1.5 * (d + _SQRT3 * d**2 + float(x @ x))
    return min(2.0, val)


def tv_diff_horizon_bound(
    x, gamma: float, gamma_bar: float, params: AssumptionParams
) -> float:
    """Same comparison after one block of ceil(1/gamma) steps."""
    L, m = params.L, params.m
    if not 0.0 < gamma <= gamma_bar:
        raise DomainError("need 0 < gamma <= gamma_bar")
    if gamma_bar > m / (4.0 * L**2):
        raise DomainError(f"need gamma_bar <= m/(4 L^2) = {m / (4 * L**2):g}")
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    c1 = c1_bound(gamma_bar, L, params.require_M())
    b_tilde = tilde_b_ula(gamma_bar, params, d)
    val = c1 * math.sqrt(gamma) * (d + _SQRT3 * d**2 + float(x @ x) + 2.0 * b_tilde / m)
    return min(2.0, val)


def L_gamma_bar(gamma_bar: float, L: float) -> float:
    """Per-step second-moment growth exponent under smoothness alone."""
    if gamma_bar <= 0:
        raise DomainError("gamma_bar must be positive")
    return 2.0 * L + gamma_bar * L**2


def moment_growth_bound(x, k: int, gamma: float, gamma_bar: float, L: float) -> float:
    """k-step ULA second-moment upper bound without any curvature assumption."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    if not 0.0 < gamma <= gamma_bar:
        raise DomainError("need 0 < gamma <= gamma_bar")
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    lg = L_gamma_bar(gamma_bar, L)
    if k == 0:
        return float(x @ x)
    return math.exp(k * gamma * lg) * float(x @ x) + 2.0 * gamma * d * k * math.exp(
        (k - 1) * gamma * lg
    )


# ---------------------------------------------------------------------------
# certified stepsize radii
# ---------------------------------------------------------------------------


def _clamp_from_log(log_val: float) -> float:
    val = math.exp(log_val) if log_val > math.log(RADIUS_FLOOR) else 0.0
    return max(val, RADIUS_FLOOR)


def log_gamma_tilde_K(
    K: float, params: AssumptionParams, d: int, upsilon_tilde: float = 1.0
) -> float:
    """Log of the stepsize radius below which chains from the K-ball couple
    with at least half the unadjusted overlap (quadratic-tail route)."""
    if K < 0:
        raise DomainError("K must be nonnegative")
    if not 0.0 < upsilon_tilde:
        raise DomainError("upsilon_tilde must be positive")
    L, m = params.L, params.m
    g_half = min(upsilon_tilde, m / (4.0 * L**2))
    c1 = c1_bound(g_half, L, params.require_M())
    b_tilde = tilde_b_ula(g_half, params, d)
    denom = 2.0 * c1 * (d + _SQRT3 * d**2 + K**2 + 2.0 * b_tilde / m)
    cand = 2.0 * (log_epsilon_of_K(K, L) - math.log(denom))
    return min(math.log(g_half), cand)


def gamma_tilde_K(
    K: float, params: AssumptionParams, d: int, upsilon_tilde: float = 1.0
) -> float:
    return _clamp_from_log(log_gamma_tilde_K(K, params, d, upsilon_tilde))


def log_gamma_hat_K(
    K: float, params: AssumptionParams, d: int, upsilon_hat: float = 1.0
) -> float:
    """Log of the stepsize radius for the smoothness-only coupling route used
    by the sub-quadratic-tail certificate."""
    if K < 0:
        raise DomainError("K must be nonnegative")
    if not 0.0 < upsilon_hat:
        raise DomainError("upsilon_hat must be positive")
    L = params.L
    g_half = min(upsilon_hat, 1.0 / L)
    c1 = c1_bound(g_half, L, params.require_M())
    growth = math.exp(L_gamma_bar(g_half, L))
    denom = 2.0 * c1 * (d + _SQRT3 * d**2 + growth * (K**2 + 2.0 * d))
    cand = 2.0 * (log_epsilon_of_K(K, L) - math.log(denom))
    return min(math.log(g_half), cand)


def gamma_hat_K(
    K: float, params: AssumptionParams, d: int, upsilon_hat: float = 1.0
) -> float:
    return _clamp_from_log(log_gamma_hat_K(K, params, d, upsilon_hat))


@dataclass
class MinorizationConstants:
    """Small-set constants entering a certificate, evaluated at one radius K."""

    K: float
    epsilon_K: float
    log_epsilon_K: float
    b_tilde_U: float
    Gamma_tilde_half: float
    Gamma_tilde_K: float
    log_Gamma_tilde_K: float
    L_gamma_bar: float
    Gamma_hat_half: float
    Gamma_hat_K: float
    log_Gamma_hat_K: float

    def to_dict(self) -> dict:
        return asdict(self)


def minorization_constants(
    K: float,
    params: AssumptionParams,
    d: int,
    upsilon_tilde: float = 1.0,
    upsilon_hat: float = 1.0,
) -> MinorizationConstants:
    L, m = params.L, params.m
    g_tilde_half = min(upsilon_tilde, m / (4.0 * L**2))
    g_hat_half = min(upsilon_hat, 1.0 / L)
    log_gt = log_gamma_tilde_K(K, params, d, upsilon_tilde)
    log_gh = log_gamma_hat_K(K, params, d, upsilon_hat)
    return MinorizationConstants(
        K=K,
        epsilon_K=epsilon_of_K(K, L),
        log_epsilon_K=log_epsilon_of_K(K, L),
        b_tilde_U=tilde_b_ula(g_tilde_half, params, d),
        Gamma_tilde_half=g_tilde_half,
        Gamma_tilde_K=_clamp_from_log(log_gt),
        log_Gamma_tilde_K=log_gt,
        L_gamma_bar=L_gamma_bar(g_hat_half, L),
        Gamma_hat_half=g_hat_half,
        Gamma_hat_K=_clamp_from_log(log_gh),
        log_Gamma_hat_K=log_gh,
    )
