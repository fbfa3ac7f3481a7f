"""Potentials, their declared regularity/curvature constants, and probing.

A potential is the negative log-density of the sampling target.  Everything
downstream (acceptance-ratio bounds, drift constants, certificates) is a pure
function of the constants declared here, so the module also ships a sampling
probe that falsifies wrong declarations with an explicit witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import (
    AssumptionError,
    DegenerateShellError,
    InvalidParamError,
    NonFiniteError,
    UnknownKindError,
)
from .reporting import FAIL, PASS, CheckResult, VerificationReport

# Central-difference step scale for the fallback Hessian.
_FD_STEP = float(np.finfo(float).eps) ** (1.0 / 3.0)
_GRAD_AT_ZERO_TOL = 1e-10


@dataclass
class AssumptionParams:
    """Smoothness and tail-curvature constants for the quadratic-tail regime.

    L bounds the Hessian operator norm everywhere, M (optional) the third
    derivative, and the Hessian quadratic form is at least m outside the
    centered ball of radius K.
    """

    L: float
    m: float
    K: float = 0.0
    M: float | None = None
    empirical: bool = False
    note: str = ""

    def __post_init__(self):
        if self.L <= 0:
            raise AssumptionError("L must be positive")
        if self.m <= 0:
            raise AssumptionError("m must be positive")
        if self.m > self.L * (1 + 1e-12):
            raise AssumptionError(f"m={self.m} exceeds L={self.L}")
        if self.K < 0:
            raise AssumptionError("K must be nonnegative")
        if self.M is not None and self.M < 0:
            raise AssumptionError("M must be nonnegative when given")

    def require_M(self) -> float:
        if self.M is None:
            raise AssumptionError(
                "third-derivative bound M is required for quantitative certificates"
            )
        return self.M


@dataclass
class BetaParams:
    """Constants for the sub-quadratic tail regime with decay exponent beta.

    Outside the ball of radius K_beta the Hessian quadratic form lies between
    m_beta/(1+||x||^beta) and L_beta/(1+||x||^(3*beta/4)).
    """

    beta: float
    m_beta: float
    L_beta: float
    K_beta: float = 0.0
    empirical: bool = False
    note: str = ""

    def __post_init__(self):
        if not 0.0 <= self.beta < 1.0:
            raise AssumptionError("beta must lie in [0, 1)")
        if self.m_beta <= 0:
            raise AssumptionError("m_beta must be positive")
        if self.L_beta < self.m_beta:
            raise AssumptionError("L_beta must be at least m_beta")
        if self.K_beta < 0:
            raise AssumptionError("K_beta must be nonnegative")


class PotentialEval(NamedTuple):
    U: float
    grad: np.ndarray
    hess: np.ndarray


@dataclass
class PotentialSpec:
    """A differentiable potential with callbacks and declared constants.

    Callbacks must be pure.  For builtins they broadcast over leading axes:
    value maps (..., d) -> (...), gradient (..., d) -> (..., d) and hessian
    (..., d) -> (..., d, d); `vectorized` records that capability.  When no
    Hessian callback is supplied a symmetrized central-difference fallback
    with step cbrt(eps) * (1 + ||x||) is used.
    """

    d: int
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "potential"
    assumptions: AssumptionParams | None = None
    beta_params: BetaParams | None = None
    lipschitz_grad: float | None = None
    third_deriv_bound: float | None = None
    vectorized: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.d < 1:
            raise InvalidParamError("dimension must be a positive integer")
        g0 = np.asarray(self.gradient(np.zeros(self.d)), dtype=float)
        if g0.shape != (self.d,):
            raise InvalidParamError(
                f"gradient at 0 has shape {g0.shape}, expected ({self.d},)"
            )
        if not np.all(np.isfinite(g0)) or float(np.linalg.norm(g0)) > _GRAD_AT_ZERO_TOL:
            raise AssumptionError(
                f"gradient at the origin must vanish; got norm {np.linalg.norm(g0):.3e}"
            )
        if self.lipschitz_grad is None and self.assumptions is not None:
            self.lipschitz_grad = self.assumptions.L
        if self.third_deriv_bound is None and self.assumptions is not None:
            self.third_deriv_bound = self.assumptions.M

    def hess_at(self, x: np.ndarray) -> np.ndarray:
        """Hessian at x: analytic callback, or finite differences of the gradient."""
        x = np.asarray(x, dtype=float)
        if self.hessian is not None:
            return np.asarray(self.hessian(x), dtype=float)
        if x.ndim == 1:
            return self._fd_hessian(x)
        flat = x.reshape(-1, self.d)
        out = np.stack([self._fd_hessian(row) for row in flat])
        return out.reshape(x.shape[:-1] + (self.d, self.d))

    def _fd_hessian(self, x: np.ndarray) -> np.ndarray:
        h = _FD_STEP * (1.0 + float(np.linalg.norm(x)))
        d = self.d
        hess = np.empty((d, d))
        for j in range(d):
            e = np.zeros(d)
            e[j] = h
            hess[:, j] = (
                np.asarray(self.gradient(x + e)) - np.asarray(self.gradient(x - e))
            ) / (2.0 * h)
        return 0.5 * (hess + hess.T)


def evaluate(spec: PotentialSpec, x) -> PotentialEval:
    """Evaluate potential, gradient and Hessian at one point, checking finiteness."""
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.d,):
        raise InvalidParamError(f"x has shape {x.shape}, expected ({spec.d},)")
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("x has non-finite components")
    u = float(spec.value(x))
    g = np.asarray(spec.gradient(x), dtype=float)
    h = spec.hess_at(x)
    if not (math.isfinite(u) and np.all(np.isfinite(g)) and np.all(np.isfinite(h))):
        raise NonFiniteError(f"potential '{spec.name}' is ill-posed at x={x!r}")
    return PotentialEval(u, g, 0.5 * (h + h.T))


# ---------------------------------------------------------------------------
# builtins
# ---------------------------------------------------------------------------


def _gaussian(d: int) -> PotentialSpec:
    eye = np.eye(d)

    def value(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * np.sum(x * x, axis=-1)

    def gradient(x):
        return np.asarray(x, dtype=float)

    def hessian(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(eye, x.shape[:-1] + (d, d)).copy()

    params = AssumptionParams(L=1.0, m=1.0, K=0.0, M=0.0)
    return PotentialSpec(
        d=d, value=value, gradient=gradient, hessian=hessian,
        name=f"gaussian(d={d})", assumptions=params, vectorized=True,
    )


def _anisotropic_gaussian(d: int, scales) -> PotentialSpec:
    lam = np.asarray(scales, dtype=float)
    if lam.shape != (d,):
        raise InvalidParamError(f"scales must have length {d}")
    if np.any(lam <= 0):
        raise InvalidParamError("scales must be positive")
    hess_mat = np.diag(lam)

    def value(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * np.sum(lam * x * x, axis=-1)

    def gradient(x):
        return lam * np.asarray(x, dtype=float)

    def hessian(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(hess_mat, x.shape[:-1] + (d, d)).copy()

    params = AssumptionParams(L=float(lam.max()), m=float(lam.min()), K=0.0, M=0.0)
    return PotentialSpec(
        d=d, value=value, gradient=gradient, hessian=hessian,
        name=f"anisotropic_gaussian(d={d})", assumptions=params, vectorized=True,
        meta={"scales": lam.tolist()},
    )


def _bump(d: int, a: float, w: float, search_radius: float = 50.0) -> PotentialSpec:
    """Quadratic well with a cosine ripple of amplitude a and frequency w."""
    if a < 0 or w <= 0:
        raise InvalidParamError("bump requires a >= 0 and w > 0")

    def value(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * np.sum(x * x, axis=-1) + a * np.sum(np.cos(w * x), axis=-1)

    def gradient(x):
        x = np.asarray(x, dtype=float)
        return x - a * w * np.sin(w * x)

    def hessian(x):
        x = np.asarray(x, dtype=float)
        diag = 1.0 - a * w * w * np.cos(w * x)
        out = np.zeros(x.shape[:-1] + (d, d))
        idx = np.arange(d)
        out[..., idx, idx] = diag
        return out

    L = 1.0 + a * w * w
    M = a * w**3
    ripple = a * w * w
    if ripple < 1.0:
        params = AssumptionParams(L=L, m=1.0 - ripple, K=0.0, M=M)
    else:
        # The ripple kills convexity on recurring bands at every radius, so no
        # exclusion ball is exact.  Record the last curvature violation inside
        # the declared search window and flag the result as uncertified.
        m_target = 0.9
        grid = np.linspace(0.0, search_radius, 200_001)
        bad = grid[1.0 - ripple * np.cos(w * grid) < m_target]
        k_probe = float(bad.max()) if bad.size else 0.0
        params = AssumptionParams(
            L=L, m=m_target, K=k_probe, M=M, empirical=True,
            note=(
                "curvature dips below m on bands recurring at every radius; "
                f"K is the last violation found within |x| <= {search_radius:g} "
                "and the declaration is not certified"
            ),
        )
    return PotentialSpec(
        d=d, value=value, gradient=gradient, hessian=hessian,
        name=f"bump(d={d},a={a:g},w={w:g})", assumptions=params, vectorized=True,
        meta={"a": a, "w": w},
    )


def _beta_tail_parts(beta: float):
    p = 0.5 * (2.0 - beta)

    def value(x):
        x = np.asarray(x, dtype=float)
        s = np.sum(x * x, axis=-1)
        return (1.0 + s) ** p / (2.0 - beta)

    def gradient(x):
        x = np.asarray(x, dtype=float)
        s = np.sum(x * x, axis=-1)
        return (1.0 + s)[..., None] ** (-beta / 2.0) * x

    def hessian(x):
        x = np.asarray(x, dtype=float)
        d = x.shape[-1]
        s = np.sum(x * x, axis=-1)
        f = (1.0 + s) ** (-beta / 2.0)
        g = beta * (1.0 + s) ** (-beta / 2.0 - 1.0)
        out = np.zeros(x.shape[:-1] + (d, d))
        idx = np.arange(d)
        out[..., idx, idx] = f[..., None]
        out -= g[..., None, None] * (x[..., :, None] * x[..., None, :])
        return out

    return value, gradient, hessian


def _beta_tail_radial_eigs(beta: float, r: np.ndarray):
    """Eigenvalues of the beta-tail Hessian at radius r: (radial, transverse)."""
    s = r * r
    transverse = (1.0 + s) ** (-beta / 2.0)
    radial = transverse * (1.0 - beta * s / (1.0 + s))
    return radial, transverse


def estimate_beta_params(
    beta: float,
    d: int,
    k_beta: float = 1.0,
    radius: float = 100.0,
    n_grid: int = 20_001,
    safety: float = 1e-3,
) -> BetaParams:
    """Estimate the sub-quadratic tail constants of the beta-tail potential.

    The Hessian is radial, so a dense radial grid over [k_beta, radius] gives
    deterministic, reproducible constants.  They hold on the probed window
    only (the true lower ratio keeps decreasing slowly beyond it), hence the
    empirical flag.
    """
    r = np.linspace(k_beta, radius, n_grid)
    radial, transverse = _beta_tail_radial_eigs(beta, r)
    lam_min = radial if d == 1 else np.minimum(radial, transverse)
    lam_max = radial if d == 1 else np.maximum(radial, transverse)
    m_beta = (1.0 - safety) * float(np.min(lam_min * (1.0 + r**beta)))
    L_beta = (1.0 + safety) * float(np.max(lam_max * (1.0 + r ** (0.75 * beta))))
    return BetaParams(
        beta=beta, m_beta=m_beta, L_beta=L_beta, K_beta=k_beta, empirical=True,
        note=f"radial grid probe on [{k_beta:g}, {radius:g}], n={n_grid}",
    )


def estimate_beta_tail_third_bound(
    beta: float, r_max: float = 100.0, n_r: int = 400, n_dirs: int = 4000,
    seed: int = 20260810, safety: float = 0.02,
) -> float:
    """Probe the operator norm of the beta-tail third-derivative tensor.

    Uses the closed-form trilinear form evaluated on the radial direction and
    on seeded random in-plane direction triples; upper bound is empirical.
    """
    r = np.geomspace(1e-2, r_max, n_r)
    s = r * r
    g = beta * (1.0 + s) ** (-beta / 2.0 - 1.0)
    h = beta * (beta + 2.0) * (1.0 + s) ** (-beta / 2.0 - 2.0)
    aligned = np.abs(-3.0 * g * r + h * r**3)
    best = float(aligned.max())
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 0], dtype=np.uint64)))
    theta = rng.uniform(0.0, np.pi, size=(n_dirs, 3))
    c = np.cos(theta)  # components along x/||x||
    sn = np.sin(theta)
    c23 = c[:, 1] * c[:, 2] + sn[:, 1] * sn[:, 2]
    c13 = c[:, 0] * c[:, 2] + sn[:, 0] * sn[:, 2]
    c12 = c[:, 0] * c[:, 1] + sn[:, 0] * sn[:, 1]
    lin = c[:, 0] * c23 + c[:, 1] * c13 + c[:, 2] * c12
    cube = c[:, 0] * c[:, 1] * c[:, 2]
    vals = np.abs(
        -np.outer(g * r, lin) + np.outer(h * r**3, cube)
    )
    best = max(best, float(vals.max()))
    return (1.0 + safety) * best


def _beta_tail(d: int, beta: float, radius: float = 100.0) -> PotentialSpec:
    if not 0.0 <= beta < 1.0:
        raise InvalidParamError("beta_tail requires beta in [0, 1)")
    value, gradient, hessian = _beta_tail_parts(beta)
    params = estimate_beta_params(beta, d, radius=radius)
    # Hessian eigenvalues never exceed 1 (attained at the origin).
    return PotentialSpec(
        d=d, value=value, gradient=gradient, hessian=hessian,
        name=f"beta_tail(d={d},beta={beta:g})", beta_params=params,
        lipschitz_grad=1.0,
        third_deriv_bound=estimate_beta_tail_third_bound(beta, r_max=radius),
        vectorized=True, meta={"beta": beta, "probe_radius": radius},
    )


_BUILTIN_KINDS = ("gaussian", "anisotropic_gaussian", "bump", "beta_tail")


def builtin(kind: str, d: int, params: dict | None = None) -> PotentialSpec:
    """Construct a benchmark potential with declared assumption constants."""
    params = dict(params or {})
    if d < 1:
        raise InvalidParamError("dimension must be a positive integer")
    if kind == "gaussian":
        return _gaussian(d)
    if kind == "anisotropic_gaussian":
        if "scales" in params:
            scales = params["scales"]
        else:
            kappa = float(params.get("kappa", 4.0))
            scales = np.geomspace(1.0, kappa, d)
        return _anisotropic_gaussian(d, scales)
    if kind == "bump":
        return _bump(
            d,
            a=float(params.get("a", 0.1)),
            w=float(params.get("w", 1.0)),
            search_radius=float(params.get("search_radius", 50.0)),
        )
    if kind == "beta_tail":
        return _beta_tail(
            d,
            beta=float(params.get("beta", 0.5)),
            radius=float(params.get("radius", 100.0)),
        )
    raise UnknownKindError(
        f"unknown potential kind {kind!r}; expected one of {_BUILTIN_KINDS}"
    )


# ---------------------------------------------------------------------------
# probing
# ---------------------------------------------------------------------------


def _shell_samples(rng, d: int, inner: float, outer: float, n: int) -> np.ndarray:
    """Uniform (in volume) samples from the shell inner < ||x|| <= outer."""
    dirs = rng.standard_normal((n, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    u = rng.random(n)
    radii = (inner**d + u * (outer**d - inner**d)) ** (1.0 / d)
    return dirs * radii[:, None]


def probe_assumptions(
    spec: PotentialSpec,
    params: AssumptionParams | BetaParams,
    n: int = 10_000,
    radius: float = 100.0,
    seed: int = 0,
    tol: float = 1e-8,
) -> VerificationReport:
    """Sample the declared curvature bounds on a shell and report violations.

    Draws n points uniformly in the shell outside the declared exclusion ball
    and n unit directions; checks the directional quadratic form against the
    declared lower bound and the Hessian operator norm against the upper one.
    """
    if n < 1:
        raise InvalidParamError("n must be at least 1")
    inner = params.K if isinstance(params, AssumptionParams) else params.K_beta
    if radius <= inner:
        raise DegenerateShellError(
            f"radius {radius:g} does not exceed the exclusion ball {inner:g}"
        )
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 1], dtype=np.uint64)))
    xs = _shell_samples(rng, spec.d, inner, radius, n)
    ys = rng.standard_normal((n, spec.d))
    ys /= np.linalg.norm(ys, axis=1, keepdims=True)

    hess = spec.hess_at(xs) if spec.vectorized else np.stack(
        [spec.hess_at(x) for x in xs]
    )
    quad = np.einsum("ni,nij,nj->n", ys, hess, ys)
    opnorm = np.max(np.abs(np.linalg.eigvalsh(hess)), axis=-1)
    norms = np.linalg.norm(xs, axis=1)

    report = VerificationReport()
    if isinstance(params, AssumptionParams):
        lower_margin = quad - params.m
        upper_margin = params.L - opnorm
        lo_name, up_name = "curvature_lower", "hessian_norm_upper"
    else:
        lower_margin = quad * (1.0 + norms**params.beta) - params.m_beta
        upper_margin = params.L_beta - opnorm * (1.0 + norms ** (0.75 * params.beta))
        lo_name, up_name = "beta_curvature_lower", "beta_hessian_upper"

    for name, margin in ((lo_name, lower_margin), (up_name, upper_margin)):
        i = int(np.argmin(margin))
        worst = float(margin[i])
        ok = worst >= -tol
        report.add(
            CheckResult(
                name=f"probe/{spec.name}/{name}",
                status=PASS if ok else FAIL,
                worst_margin=worst,
                witness=None if ok else {
                    "x": xs[i].tolist(),
                    "y": ys[i].tolist(),
                    "quad_form": float(quad[i]),
                    "hess_opnorm": float(opnorm[i]),
                },
                n_samples=n,
                seed=seed,
            )
        )
    return report
