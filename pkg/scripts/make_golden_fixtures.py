#!/usr/bin/env python3
"""Regenerate the golden constant fixtures with arbitrary-precision arithmetic.

This script re-derives every certificate constant independently of the
package's float64 implementation (only the probed beta-tail inputs and the
stepsize grid for the infimum are shared, as exact float inputs).  Output:
tests/fixtures/golden.json, floats at 17 significant digits.

Usage: python3 scripts/make_golden_fixtures.py
"""

import json
import math
import sys
from pathlib import Path

import numpy as np
import mpmath as mp

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from malacert.potential import estimate_beta_params, estimate_beta_tail_third_bound

mp.mp.dps = 60

ONE = mp.mpf(1)
SUP_U_EXP = mp.mpf(128) / mp.e
SQRT3 = mp.sqrt(3)
LOG2 = mp.log(2)
RADIUS_FLOOR = 1e-300


def f(x) -> float:
    return float(x)


def log_eps(K, L):
    t = mp.sqrt(3 * (L + 1)) * K
    return mp.log(mp.erfc(t / mp.sqrt(2)))


def c1(gbar, L, M):
    poly = max(ONE, mp.sqrt(gbar), gbar * L, (gbar * L ** mp.mpf("4/3")) ** mp.mpf("1.5"))
    return 2 * max(mp.sqrt(2) * M, mp.sqrt(gbar) * M * L, 2 * L**2 * poly)


def c2(gbar, L, m):
    eps = (m**3 / 16) / (mp.sqrt(2) * L**2 + 2 ** mp.mpf("-1.5") * mp.sqrt(gbar) * L**3)
    return (
        2 * L
        + mp.sqrt(2) * L**2 / eps
        + gbar * L**2 / 2
        + 2 ** mp.mpf("-1.5") * gbar ** mp.mpf("1.5") * L**3 / eps
    )


def c2_beta(gbar, L, L_b, m_b):
    eps = (m_b**3 / 16) / (
        2 ** mp.mpf("1.5") * L_b**2 + 2 ** mp.mpf("-0.5") * mp.sqrt(gbar) * L_b**3
    )
    return (
        2 * L
        + 2 ** mp.mpf("1.5") * L_b**2 / eps
        + gbar * L**2 / 2
        + 2 ** mp.mpf("-0.5") * gbar ** mp.mpf("1.5") * L_b**3 / eps
    )


def rate_tail(varpi, b_m, leps, gbar):
    """Shared tail: per-block rate and prefactor from (varpi, b_M, eps, gbar)."""
    lam = mp.e**-varpi
    log_m = max(mp.log(4 * b_m * (1 + gbar) / (1 - lam)), mp.mpf(0))
    lam_bar = lam + (1 - lam) / 2
    b_bar = lam * b_m + mp.e**log_m
    eps = mp.e**leps
    log_1m_he = mp.log1p(-eps / 2)
    log_rho = (log_1m_he * mp.log(lam_bar)) / (
        log_1m_he + mp.log(lam_bar) - mp.log(b_bar)
    )
    log_c = (
        -log_rho
        + mp.log(1 + lam)
        + mp.log(1 + b_bar / ((1 - eps / 2) * (1 - lam_bar)))
    )
    return {
        "log_lambda": f(-varpi),
        "log_M": f(log_m),
        "log_b_bar": f(mp.log(b_bar)),
        "log_lambda_bar": f(mp.log(lam_bar)),
        "log_neg_log_rho": f(mp.log(-log_rho)),
        "log_rho": -max(f(mp.e ** mp.log(-log_rho)), RADIUS_FLOOR),
        "log_C": f(log_c),
    }


def clamp_from_log(lv: float) -> float:
    v = math.exp(lv) if lv > math.log(RADIUS_FLOOR) else 0.0
    return max(v, RADIUS_FLOOR)


# ---------------------------------------------------------------------------
# quadratic-tail benchmark: standard gaussian, d = 1
# ---------------------------------------------------------------------------


def gaussian_fixture():
    L = m = ONE
    M = mp.mpf(0)
    K = mp.mpf(0)
    d = 1
    eta = m / 16
    k_tilde = 2 * K * (1 + L / m)
    k_u = max(k_tilde, 4 * mp.sqrt(mp.mpf(d) / m))
    gamma_half = min(ONE, m**3 / (4 * L**4), ONE / d)
    c2_half = c2(gamma_half, L, m)
    b_half = c2_half * d + SUP_U_EXP
    k_half = max(mp.mpf(16), 2 * K, k_u, k_tilde)
    k_m = max(k_half, 4 * mp.sqrt(b_half) / mp.sqrt(m * eta))
    gamma_cap = min(gamma_half, m**3 / (4 * L**4), ONE / d, 4 / (m * eta * k_m**2))
    varpi = eta * m * k_m**2 / 16

    def b_u(gbar):
        growth = m / 4 + (1 + 16 * eta * gbar) * (4 * eta + 2 * L + gbar * L**2)
        return (eta * growth * k_u**2 + 4 * eta * d) * mp.e ** (
            gbar * eta * growth * k_u**2 + 4 * eta * gbar * d
        )

    def b_m_of(gbar):
        return (
            b_u(gbar)
            + varpi * mp.e ** (eta * k_m**2)
            + c1(gbar, L, M) * mp.sqrt(gbar) * (d + SQRT3 * d**2 + k_m**2)
        )

    gbar = gamma_cap
    b_m = b_m_of(gbar)
    lam = mp.e**-varpi
    log_m_level = max(mp.log(4 * b_m * (1 + gbar) / (1 - lam)), mp.mpf(0))
    k_gamma = mp.sqrt(log_m_level / eta)
    leps = log_eps(k_gamma, L)

    # small-set stepsize radius at the level-set radius
    g_tilde_half = min(ONE, m / (4 * L**2))
    b_tilde = 2 * d + max(k_tilde, 2 * mp.sqrt(2 * d / m)) ** 2 * (
        g_tilde_half * L**2 + 2 * L + m / 2
    )
    denom = 2 * c1(g_tilde_half, L, M) * (d + SQRT3 * d**2 + k_gamma**2 + 2 * b_tilde / m)
    log_gamma_tilde = min(mp.log(g_tilde_half), 2 * (leps - mp.log(denom)))
    log_gamma_bar = min(mp.log(gamma_cap), log_gamma_tilde)

    tail = rate_tail(varpi, b_m, leps, gbar)

    # infimum of the stationary-mass bound over the package's stepsize grid
    grid = np.geomspace(float(gamma_cap) * 1e-8, float(gamma_cap), 32)
    log_a_values = [mp.log(b_m_of(mp.mpf(float(g))) / varpi) for g in grid]
    log_a_at = mp.log(b_m / varpi)
    log_a_inf = min([log_a_at] + log_a_values)

    bound_at_10_blocks = f(
        mp.mpf(tail["log_C"])
        + 10 * mp.mpf(tail["log_rho"])
        + mp.log(1 + mp.e**log_a_inf)
    )

    # standalone stepsize-radius examples at K = 4
    leps4 = log_eps(mp.mpf(4), L)
    denom4 = 2 * c1(g_tilde_half, L, M) * (d + SQRT3 * d**2 + 16 + 2 * b_tilde / m)
    log_gt4 = min(mp.log(g_tilde_half), 2 * (leps4 - mp.log(denom4)))
    g_hat_half = min(ONE, 1 / L)
    lg = 2 * L + g_hat_half * L**2
    denom4h = 2 * c1(g_hat_half, L, M) * (d + SQRT3 * d**2 + mp.e**lg * (16 + 2 * d))
    log_gh4 = min(mp.log(g_hat_half), 2 * (leps4 - mp.log(denom4h)))

    return {
        "inputs": {"L": 1.0, "m": 1.0, "K": 0.0, "M": 0.0, "d": d, "upsilon": 1.0},
        "constants": {
            "eta_bar": f(eta),
            "K_tilde": f(k_tilde),
            "K_U": f(k_u),
            "Gamma_half": f(gamma_half),
            "C2_half": f(c2_half),
            "b_half": f(b_half),
            "K_M": f(k_m),
            "Gamma": f(gamma_cap),
            "varpi": f(varpi),
            "log_b_U": f(mp.log(b_u(gbar))),
            "C1": f(c1(gbar, L, M)),
            "log_b_M": f(mp.log(b_m)),
            "K_gamma_bar": f(k_gamma),
            "log_epsilon": f(leps),
            "b_tilde_U": f(b_tilde),
            "log_Gamma_tilde_K": f(log_gamma_tilde),
            "log_gamma_bar": f(log_gamma_bar),
            "gamma_bar": clamp_from_log(f(log_gamma_bar)),
            "log_A_at_gamma_bar": f(log_a_at),
            "log_A_bar": f(log_a_inf),
            "bound_at_x0_10_blocks": bound_at_10_blocks,
            **tail,
        },
        "minorization_examples": {
            "K": 4.0,
            "epsilon_K4": f(mp.e**leps4),
            "log_epsilon_K4": f(leps4),
            "log_Gamma_tilde_K4": f(log_gt4),
            "Gamma_tilde_K4": clamp_from_log(f(log_gt4)),
            "log_Gamma_hat_K4": f(log_gh4),
            "Gamma_hat_K4": clamp_from_log(f(log_gh4)),
        },
    }


# ---------------------------------------------------------------------------
# sub-quadratic benchmark: beta-tail potential, beta = 0.5, d = 2
# ---------------------------------------------------------------------------


def beta_fixture():
    beta_f = 0.5
    d = 2
    probed = estimate_beta_params(beta_f, d)
    M_f = estimate_beta_tail_third_bound(beta_f)
    L = ONE
    M = mp.mpf(M_f)
    beta = mp.mpf(beta_f)
    m_b = mp.mpf(probed.m_beta)
    L_b = mp.mpf(probed.L_beta)
    K_b = mp.mpf(probed.K_beta)

    eta = m_b / 32
    base = 4 * K_b * (1 + L / m_b)
    k_tilde_b = max(base, base ** (1 / (1 - beta))) if base > 0 else mp.mpf(0)
    up = 2 * L * K_b / L_b
    k_bar_b = max(up, up ** (1 / (1 - mp.mpf(3) / 4 * beta))) if up > 0 else mp.mpf(0)
    k_ray = max(ONE, k_bar_b, k_tilde_b, (32 * d / m_b) ** (1 / (2 - beta)))

    gamma_half = min(
        ONE,
        m_b**3 / (32 * L_b**4),
        ONE / (8 * d),
        min(1 / (4 * L), m_b**3 / (16 * L_b**4)),
    )
    c2_half = c2_beta(gamma_half, L, L_b, m_b)
    b_half = c2_half * d + SUP_U_EXP
    k_half = max(ONE, 2 * K_b, k_ray, 2 * k_tilde_b, k_bar_b)
    k_tilde_ray = max(k_half, (128 * b_half / (eta * m_b)) ** (1 / (1 - beta)))
    gamma_cap = min(gamma_half, 32 / (m_b * eta * k_tilde_ray ** (1 - beta)))
    varpi = eta * m_b * k_tilde_ray ** (1 - beta) / 128

    def b_beta_of(gbar):
        a = eta * (L * (1 + L / 2) * k_ray**2 + d + eta)
        pref = a + m_b * eta * mp.sqrt(1 + k_ray**2) / (16 * (1 + k_ray**beta))
        return pref * mp.e ** (gbar * a)

    def b_m_of(gbar):
        return (
            b_beta_of(gbar)
            + varpi * mp.e ** (eta * mp.sqrt(1 + k_tilde_ray**2))
            + c1(gbar, L, M) * mp.sqrt(gbar) * (d + SQRT3 * d**2 + k_tilde_ray**2)
        )

    gbar = gamma_cap
    b_m = b_m_of(gbar)
    lam = mp.e**-varpi
    log_m_level = max(mp.log(4 * b_m * (1 + gbar) / (1 - lam)), mp.mpf(0))
    k_gamma = mp.sqrt(log_m_level / eta)
    leps = log_eps(k_gamma, L)

    g_hat_half = min(ONE, 1 / L)
    lg = 2 * L + g_hat_half * L**2
    denom = 2 * c1(g_hat_half, L, M) * (
        d + SQRT3 * d**2 + mp.e**lg * (k_gamma**2 + 2 * d)
    )
    log_gamma_hat = min(mp.log(g_hat_half), 2 * (leps - mp.log(denom)))
    log_gamma_bar = min(mp.log(gamma_cap), log_gamma_hat)

    tail = rate_tail(varpi, b_m, leps, gbar)

    grid = np.geomspace(float(gamma_cap) * 1e-8, float(gamma_cap), 32)
    log_a_values = [mp.log(b_m_of(mp.mpf(float(g))) / varpi) for g in grid]
    log_a_at = mp.log(b_m / varpi)
    log_a_inf = min([log_a_at] + log_a_values)

    bound_at_10_blocks = f(
        mp.mpf(tail["log_C"])
        + 10 * mp.mpf(tail["log_rho"])
        + mp.log(mp.e**eta + mp.e**log_a_inf)  # started at the origin, log W = eta
    )

    return {
        "inputs": {
            "beta": beta_f,
            "m_beta": probed.m_beta,
            "L_beta": probed.L_beta,
            "K_beta": probed.K_beta,
            "L": 1.0,
            "M": M_f,
            "d": d,
            "upsilon_beta": 1.0,
        },
        "constants": {
            "eta_beta": f(eta),
            "K_tilde_beta": f(k_tilde_b),
            "K_bar_beta": f(k_bar_b),
            "K_beta_ray": f(k_ray),
            "Gamma_half_beta": f(gamma_half),
            "C2_beta_half": f(c2_half),
            "b_half_beta": f(b_half),
            "K_tilde_ray": f(k_tilde_ray),
            "Gamma_beta": f(gamma_cap),
            "varpi_beta": f(varpi),
            "log_b_beta": f(mp.log(b_beta_of(gbar))),
            "C1": f(c1(gbar, L, M)),
            "log_b_M_beta": f(mp.log(b_m)),
            "K_gamma_bar": f(k_gamma),
            "log_epsilon": f(leps),
            "log_Gamma_hat_K": f(log_gamma_hat),
            "log_gamma_bar": f(log_gamma_bar),
            "gamma_bar": clamp_from_log(f(log_gamma_bar)),
            "log_A_at_gamma_bar": f(log_a_at),
            "log_A_bar": f(log_a_inf),
            "bound_at_x0_10_blocks": bound_at_10_blocks,
            **tail,
        },
    }


def main():
    out = {
        "format": "malacert-golden-v1",
        "gaussian_d1": gaussian_fixture(),
        "beta_tail_b05_d2": beta_fixture(),
    }
    path = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "golden.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(out, fh, indent=2)
        fh.write("\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
