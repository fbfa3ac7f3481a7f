"""Acceptance-exponent decomposition and explicit envelope constants.

The exponent tau of the MALA acceptance probability min(1, exp(-tau)) splits
into five line-integral coefficients against half-integer powers of the
stepsize.  The decomposition is evaluated with Gauss-Legendre quadrature and
cross-checked against the direct route; the envelope constants bound |tau| by
gamma^(3/2) times a polynomial in ||x||, ||z|| (everywhere) and tau itself by
a gamma * ||z||^2 multiple (far field), which is what the drift and
minorization chains consume.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import AssumptionError, DomainError, NonFiniteError
from .kernels import tau_direct
from .potential import AssumptionParams, PotentialSpec
from .reporting import FAIL, PASS, CheckResult, VerificationReport

_SQRT2 = float(np.sqrt(2.0))


@dataclass
class TauTerms:
    """Coefficients of the stepsize expansion of the acceptance exponent.

    value recombines them exactly as
    gamma*a2 + gamma^1.5*a3 + gamma^2*a4 + gamma^2.5*a5 + gamma^3*a6.
    """

    a2: float
    a3: float
    a4: float
    a5: float
    a6: float
    gamma: float
    quadrature_order: int

    @property
    def value(self) -> float:
        g = self.gamma
        return (
            g * self.a2
            + g**1.5 * self.a3
            + g**2 * self.a4
            + g**2.5 * self.a5
            + g**3 * self.a6
        )


def _unit_nodes(order: int):
    nodes, weights = leggauss(order)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def tau_terms_batch(xs, zs, gammas, spec: PotentialSpec, order: int = 16):
    """Vectorized expansion coefficients; returns (a2, a3, a4, a5, a6) arrays."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    zs = np.atleast_2d(np.asarray(zs, dtype=float))
    gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
    if order < 2:
        raise DomainError("quadrature order must be at least 2")
    if np.any(gammas <= 0):
        raise DomainError("gamma must be positive")
    n, d = xs.shape
    t_nodes, w_nodes = _unit_nodes(order)

    gx = np.asarray(spec.gradient(xs))
    delta = -gammas[:, None] * gx + np.sqrt(2.0 * gammas)[:, None] * zs

    s2 = np.zeros(n)
    s3 = np.zeros(n)
    s4 = np.zeros(n)
    i_z = np.zeros((n, d))
    i_g = np.zeros((n, d))
    for t, w in zip(t_nodes, w_nodes):
        xt = xs + t * delta
        hess = spec.hess_at(xt)
        hz = np.einsum("nij,nj->ni", hess, zs)
        hg = np.einsum("nij,nj->ni", hess, gx)
        s2 += w * (0.5 - t) * np.einsum("ni,ni->n", zs, hz)
        s3 += w * (t - 0.25) * np.einsum("ni,ni->n", zs, hg)
        s4 += w * t * np.einsum("ni,ni->n", gx, hg)
        i_z += w * hz
        i_g += w * hg

    a2 = 2.0 * s2
    a3 = 2.0**1.5 * s3
    a4 = -s4 + 0.5 * np.einsum("ni,ni->n", i_z, i_z)
    a5 = -np.einsum("ni,ni->n", i_g, i_z) / _SQRT2
    a6 = 0.25 * np.einsum("ni,ni->n", i_g, i_g)
    for arr in (a2, a3, a4, a5, a6):
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("tau decomposition overflowed")
    return a2, a3, a4, a5, a6


def tau_values_batch(xs, zs, gammas, spec: PotentialSpec, order: int = 16):
    a2, a3, a4, a5, a6 = tau_terms_batch(xs, zs, gammas, spec, order)
    g = np.atleast_1d(np.asarray(gammas, dtype=float))
    return g * a2 + g**1.5 * a3 + g**2 * a4 + g**2.5 * a5 + g**3 * a6


def tau_decomposed(x, z, gamma: float, spec: PotentialSpec, order: int = 16) -> TauTerms:
    """Expansion of the acceptance exponent at a single (x, z, gamma)."""
    a2, a3, a4, a5, a6 = tau_terms_batch(
        np.asarray(x)[None, :], np.asarray(z)[None, :], np.array([gamma]), spec, order
    )
    return TauTerms(
        a2=float(a2[0]), a3=float(a3[0]), a4=float(a4[0]),
        a5=float(a5[0]), a6=float(a6[0]), gamma=float(gamma), quadrature_order=order,
    )


def tau_decomposed_adaptive(
    x, z, gamma: float, spec: PotentialSpec,
    order: int = 16, tol: float = 1e-10, max_doublings: int = 4,
) -> tuple[TauTerms, bool]:
    """Double the quadrature order until the recombined value stabilizes.

    Returns the highest-order terms and whether the stopping rule |change|
    <= tol was met.
    """
    terms = tau_decomposed(x, z, gamma, spec, order)
    for _ in range(max_doublings):
        order *= 2
        refined = tau_decomposed(x, z, gamma, spec, order)
        if abs(refined.value - terms.value) <= tol:
            return refined, True
        terms = refined
    return terms, False


# ---------------------------------------------------------------------------
# envelope constants
# ---------------------------------------------------------------------------


def c1_bound(gamma_bar: float, L: float, M: float) -> float:
    """Coefficient of the gamma^(3/2) envelope on |tau| (valid for all x, z)."""
    if gamma_bar <= 0:
        raise DomainError("gamma_bar must be positive")
    if L < 0 or M < 0:
        raise DomainError("L and M must be nonnegative")
    poly = max(1.0, gamma_bar**0.5, gamma_bar * L, (gamma_bar * L ** (4.0 / 3.0)) ** 1.5)
    return 2.0 * max(_SQRT2 * M, gamma_bar**0.5 * M * L, 2.0 * L**2 * poly)


def c2_max_gamma(L: float, m: float) -> float:
    return m**3 / (4.0 * L**4)


def c2_bound(gamma_bar: float, L: float, m: float) -> float:
    """Coefficient of the far-field one-sided bound tau <= C2 * gamma * ||z||^2."""
    if not 0.0 < gamma_bar <= c2_max_gamma(L, m):
        raise DomainError(
            f"gamma_bar={gamma_bar:g} outside (0, m^3/(4 L^4)] = (0, {c2_max_gamma(L, m):g}]"
        )
    eps = (m**3 / 16.0) / (_SQRT2 * L**2 + 2.0**-1.5 * gamma_bar**0.5 * L**3)
    return (
        2.0 * L
        + _SQRT2 * L**2 / eps
        + 0.5 * gamma_bar * L**2
        + 2.0**-1.5 * gamma_bar**1.5 * L**3 / eps
    )


def c2_beta_max_gamma(L: float, L_beta: float, m_beta: float) -> float:
    return min(1.0 / (4.0 * L), m_beta**3 / (16.0 * L_beta**4))


def c2_beta_bound(gamma_bar: float, L: float, L_beta: float, m_beta: float) -> float:
    """Sub-quadratic-tail variant of the far-field acceptance bound coefficient."""
    cap = c2_beta_max_gamma(L, L_beta, m_beta)
    if not 0.0 < gamma_bar <= cap:
        raise DomainError(f"gamma_bar={gamma_bar:g} outside (0, {cap:g}]")
    eps = (m_beta**3 / 16.0) / (
        2.0**1.5 * L_beta**2 + 2.0**-0.5 * gamma_bar**0.5 * L_beta**3
    )
    return (
        2.0 * L
        + 2.0**1.5 * L_beta**2 / eps
        + 0.5 * gamma_bar * L**2
        + 2.0**-0.5 * gamma_bar**1.5 * L_beta**3 / eps
    )


# ---------------------------------------------------------------------------
# sampled verification of the envelopes
# ---------------------------------------------------------------------------


def _batched_tau_direct(spec, xs, zs, gammas):
    if spec.vectorized:
        gx = np.asarray(spec.gradient(xs))
        ys = xs - gammas[:, None] * gx + np.sqrt(2 * gammas)[:, None] * zs
        gy = np.asarray(spec.gradient(ys))
        w = zs - np.sqrt(gammas / 2.0)[:, None] * (gx + gy)
        return (
            np.asarray(spec.value(ys))
            - np.asarray(spec.value(xs))
            + 0.5 * (np.sum(w * w, axis=-1) - np.sum(zs * zs, axis=-1))
        )
    return np.array(
        [tau_direct(x, z, g, spec) for x, z, g in zip(xs, zs, gammas)]
    )


def check_tau_bounds(
    spec: PotentialSpec,
    params: AssumptionParams,
    gamma_bar: float,
    n: int = 100_000,
    seed: int = 0,
    tol: float = 1e-9,
) -> VerificationReport:
    """Sample the admissible regions of both envelopes and report worst slack.

    The two-sided envelope is sampled over unrestricted (x, z) and stepsizes
    up to gamma_bar; the one-sided far-field envelope restricts to
    ||x|| >= max(2K, K_tilde) and ||z|| <= ||x|| / (4 sqrt(2 gamma)) with
    gamma_bar capped by its admissible range.
    """
    report = VerificationReport()
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 2], dtype=np.uint64)))
    d = spec.d

    M = params.require_M()
    c1 = c1_bound(gamma_bar, params.L, M)
    xs = 3.0 * rng.standard_normal((n, d))
    zs = rng.standard_normal((n, d))
    gammas = gamma_bar * rng.random(n)
    gammas = np.maximum(gammas, 1e-12)
    taus = _batched_tau_direct(spec, xs, zs, gammas)
    z2 = np.sum(zs * zs, axis=1)
    bound = c1 * gammas**1.5 * (z2 + z2**2 + np.sum(xs * xs, axis=1))
    margin = bound - np.abs(taus)
    i = int(np.argmin(margin))
    ok = margin[i] >= -tol
    report.add(
        CheckResult(
            name=f"tau_two_sided_envelope/{spec.name}",
            status=PASS if ok else FAIL,
            worst_margin=float(margin[i]),
            witness=None if ok else {
                "x": xs[i].tolist(), "z": zs[i].tolist(), "gamma": float(gammas[i]),
                "tau": float(taus[i]), "bound": float(bound[i]),
            },
            n_samples=n,
            seed=seed,
        )
    )

    gbar2 = min(gamma_bar, c2_max_gamma(params.L, params.m))
    c2 = c2_bound(gbar2, params.L, params.m)
    k_tilde = 2.0 * params.K * (1.0 + params.L / params.m)
    r0 = max(2.0 * params.K, k_tilde, 1e-3)
    radii = r0 + 10.0 * rng.random(n)
    dirs = rng.standard_normal((n, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    xs = dirs * radii[:, None]
    gammas = gbar2 * rng.random(n)
    gammas = np.maximum(gammas, 1e-12)
    caps = radii / (4.0 * np.sqrt(2.0 * gammas))
    zdirs = rng.standard_normal((n, d))
    zdirs /= np.linalg.norm(zdirs, axis=1, keepdims=True)
    zs = zdirs * (caps * rng.random(n))[:, None]
    taus = _batched_tau_direct(spec, xs, zs, gammas)
    bound = c2 * gammas * np.sum(zs * zs, axis=1)
    margin = bound - taus
    i = int(np.argmin(margin))
    ok = margin[i] >= -tol
    report.add(
        CheckResult(
            name=f"tau_far_field_envelope/{spec.name}",
            status=PASS if ok else FAIL,
            worst_margin=float(margin[i]),
            witness=None if ok else {
                "x": xs[i].tolist(), "z": zs[i].tolist(), "gamma": float(gammas[i]),
                "tau": float(taus[i]), "bound": float(bound[i]),
            },
            n_samples=n,
            seed=seed,
        )
    )
    return report
