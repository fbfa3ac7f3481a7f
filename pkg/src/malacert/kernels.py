"""ULA proposals, the MALA accept/reject kernel, and seeded chain simulation.

Randomness comes from counter-based Philox streams keyed by (seed, stream_id):
identical keys reproduce identical variates bit-for-bit on one platform, and
distinct stream ids give statistically independent streams, so parallel chains
stay reproducible.  Normal variates use the Box-Muller pair transform on top
of the stream's uniforms (an implementation constant; see README).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidParamError, NonFiniteError
from .potential import PotentialSpec

_TWO_PI = 2.0 * np.pi


@dataclass
class NoiseStream:
    """Splittable, counter-based random stream.

    `counter` counts consumed uniforms.  normal() consumes two uniforms per
    pair and discards the spare half for odd counts (no caching across calls),
    which keeps replay exactly reproducible.
    """

    seed: int
    stream_id: int = 0
    counter: int = 0

    def __post_init__(self):
        key = np.array([self.seed % 2**64, self.stream_id % 2**64], dtype=np.uint64)
        self._rng = np.random.Generator(np.random.Philox(key=key))
        if self.counter:
            self._rng.random(self.counter)  # replay position

    def child(self, stream_id: int) -> "NoiseStream":
        return NoiseStream(self.seed, stream_id)

    def uniform(self, shape=()) -> np.ndarray | float:
        out = self._rng.random(shape)
        self.counter += int(np.size(out))
        return out

    def normal(self, shape=()) -> np.ndarray | float:
        n = int(np.prod(shape)) if shape else 1
        npairs = (n + 1) // 2
        u = self._rng.random((2, npairs))
        self.counter += 2 * npairs
        r = np.sqrt(-2.0 * np.log1p(-u[0]))
        ang = _TWO_PI * u[1]
        z = np.concatenate([r * np.cos(ang), r * np.sin(ang)])[:n]
        return z.reshape(shape) if shape else float(z[0])


@dataclass
class ChainState:
    x: np.ndarray
    step_index: int = 0
    accepted_count: int = 0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if not 0 <= self.accepted_count <= self.step_index:
            raise InvalidParamError("accepted_count must lie in [0, step_index]")


def ula_step(x, spec: PotentialSpec, gamma: float, z) -> np.ndarray:
    """One Euler step of the overdamped Langevin dynamics: x - g*grad + sqrt(2g)*z."""
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    x = np.asarray(x, dtype=float)
    y = x - gamma * np.asarray(spec.gradient(x)) + np.sqrt(2.0 * gamma) * np.asarray(z)
    if not np.all(np.isfinite(y)):
        raise NonFiniteError("ULA step overflowed")
    return y


def proposal_log_density(x, y, gamma: float, spec: PotentialSpec) -> float:
    """Log density of the Langevin proposal started at x, evaluated at y."""
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = x.shape[-1]
    resid = y - x + gamma * np.asarray(spec.gradient(x))
    out = -0.5 * d * np.log(4.0 * np.pi * gamma) - np.sum(resid * resid, axis=-1) / (
        4.0 * gamma
    )
    return float(out) if out.ndim == 0 else out


def tau_direct(x, z, gamma: float, spec: PotentialSpec):
    """Acceptance exponent: the MALA acceptance probability is min(1, exp(-tau)).

    Computed from the potential difference plus the half-square correction,
    which is algebraically the negated log Metropolis ratio for the Langevin
    proposal y = x - gamma*grad U(x) + sqrt(2*gamma)*z.
    """
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    gx = np.asarray(spec.gradient(x))
    y = x - gamma * gx + np.sqrt(2.0 * gamma) * z
    gy = np.asarray(spec.gradient(y))
    w = z - np.sqrt(gamma / 2.0) * (gx + gy)
    tau = (
        np.asarray(spec.value(y))
        - np.asarray(spec.value(x))
        + 0.5 * (np.sum(w * w, axis=-1) - np.sum(z * z, axis=-1))
    )
    if not np.all(np.isfinite(tau)):
        raise NonFiniteError("acceptance exponent overflowed")
    return float(tau) if np.ndim(tau) == 0 else tau


def accept_from_log_u(log_u, tau):
    """Acceptance test in log space: accept iff log(u) <= -max(0, tau)."""
    return log_u <= -np.maximum(0.0, tau)


def mala_step(state: ChainState, spec: PotentialSpec, gamma: float, z, u: float):
    """One MALA transition given the normal draw z and the uniform u.

    Returns (state, accepted, tau); the proposal is taken iff
    u <= min(1, exp(-tau)), evaluated in log space to stay robust when tau is
    far from zero.
    """
    z = np.asarray(z, dtype=float)
    tau = tau_direct(state.x, z, gamma, spec)
    with np.errstate(divide="ignore"):
        log_u = np.log(u) if u > 0 else -np.inf
    accepted = bool(accept_from_log_u(log_u, tau))
    if accepted:
        y = state.x - gamma * np.asarray(spec.gradient(state.x)) + np.sqrt(2.0 * gamma) * z
        new = ChainState(y, state.step_index + 1, state.accepted_count + 1)
    else:
        new = ChainState(state.x, state.step_index + 1, state.accepted_count)
    return new, accepted, float(tau)


@dataclass
class Trajectory:
    """Thinned positions plus running summaries of one seeded chain."""

    kernel: str
    gamma: float
    steps: np.ndarray            # retained step indices
    positions: np.ndarray        # (n_retained, d)
    accepted: np.ndarray | None  # 0/1 per retained step, None for ULA
    acceptance_rate: float | None
    mean: np.ndarray             # running mean per coordinate over all steps
    second_moment: np.ndarray    # running second moment per coordinate
    mean_log_v: float | None = None
    n_steps: int = 0
    seed: int | None = None
    stream_id: int | None = None
    failed_at: int | None = None

    def write_csv(self, path) -> None:
        d = self.positions.shape[1]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "accepted"] + [f"x_{i}" for i in range(d)])
            for i, k in enumerate(self.steps):
                acc = "" if self.accepted is None else int(self.accepted[i])
                writer.writerow(
                    [int(k), acc] + [f"{v:.17g}" for v in self.positions[i]]
                )


def run_chain(
    kernel: str,
    spec: PotentialSpec,
    x0,
    gamma: float,
    n_steps: int,
    stream: NoiseStream,
    thin: int = 1,
    log_v_eta: float | None = None,
) -> Trajectory:
    """Run a seeded ULA or MALA chain; deterministic given (seed, stream_id)."""
    if kernel not in ("ula", "mala"):
        raise InvalidParamError(f"kernel must be 'ula' or 'mala', got {kernel!r}")
    if n_steps < 1:
        raise InvalidParamError("n_steps must be at least 1")
    if thin < 1:
        raise InvalidParamError("thin must be at least 1")
    if gamma <= 0:
        raise DomainError("gamma must be positive")

    x = np.array(x0, dtype=float)
    d = spec.d
    if x.shape != (d,):
        raise InvalidParamError(f"x0 has shape {x.shape}, expected ({d},)")

    sqrt2g = np.sqrt(2.0 * gamma)
    half_gamma = np.sqrt(gamma / 2.0)
    retained_steps, retained_x, retained_acc = [], [], []
    sum_x = np.zeros(d)
    sum_x2 = np.zeros(d)
    sum_log_v = 0.0
    accepted_count = 0

    grad = spec.gradient
    value = spec.value
    # cache U and grad at the current state; MALA reuses the proposal's values
    u_x = float(value(x))
    g_x = np.asarray(grad(x), dtype=float)
    # noise drawn in blocks, normals before uniforms within each block
    block = 4096
    k = 0
    while k < n_steps:
        span = min(block, n_steps - k)
        z_blk = stream.normal((span, d))
        u_blk = stream.uniform(span) if kernel == "mala" else None
        for i in range(span):
            k += 1
            z = z_blk[i]
            if kernel == "mala":
                y = x - gamma * g_x + sqrt2g * z
                g_y = np.asarray(grad(y), dtype=float)
                u_y = float(value(y))
                w = z - half_gamma * (g_x + g_y)
                tau = u_y - u_x + 0.5 * (float(w @ w) - float(z @ z))
                if not math.isfinite(tau):
                    raise NonFiniteError("chain diverged", step_index=k)
                u = u_blk[i]
                accept = True if u <= 0.0 else math.log(u) <= -max(0.0, tau)
                if accept:
                    x, u_x, g_x = y, u_y, g_y
                    accepted_count += 1
                    acc = 1
                else:
                    acc = 0
            else:
                x = x - gamma * g_x + sqrt2g * z
                g_x = np.asarray(grad(x), dtype=float)
                acc = None
            sq = float(x @ x)
            if not math.isfinite(sq):
                raise NonFiniteError("chain diverged", step_index=k)
            sum_x += x
            sum_x2 += x * x
            if log_v_eta is not None:
                sum_log_v += log_v_eta * sq
            if k % thin == 0:
                retained_steps.append(k)
                retained_x.append(x.copy())
                if kernel == "mala":
                    retained_acc.append(acc)
    mean = sum_x / n_steps
    second = sum_x2 / n_steps

    return Trajectory(
        kernel=kernel,
        gamma=gamma,
        steps=np.asarray(retained_steps, dtype=int),
        positions=np.asarray(retained_x),
        accepted=np.asarray(retained_acc, dtype=int) if kernel == "mala" else None,
        acceptance_rate=accepted_count / n_steps if kernel == "mala" else None,
        mean=mean,
        second_moment=second,
        mean_log_v=sum_log_v / n_steps if log_v_eta is not None else None,
        n_steps=n_steps,
        seed=stream.seed,
        stream_id=stream.stream_id,
    )
