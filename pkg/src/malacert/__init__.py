"""Langevin samplers with fully explicit geometric-ergodicity certificates."""

from .certificate import Certificate, Upsilons, bound_at, certify, certify_beta
from .drift import (
    BetaDriftConstants,
    DriftConstants,
    log_V,
    log_W,
    mala_beta_drift_constants,
    mala_drift_constants,
    ula_V_moment_exact,
)
from .kernels import (
    ChainState,
    NoiseStream,
    Trajectory,
    mala_step,
    proposal_log_density,
    run_chain,
    tau_direct,
    ula_step,
)
from .minorization import (
    MinorizationConstants,
    epsilon_of_K,
    gamma_hat_K,
    gamma_tilde_K,
    log_epsilon_of_K,
)
from .potential import (
    AssumptionParams,
    BetaParams,
    PotentialSpec,
    builtin,
    evaluate,
    probe_assumptions,
)
from .ratio import TauTerms, c1_bound, c2_beta_bound, c2_bound, tau_decomposed
from .reporting import CheckResult, VerificationReport
from .verify import VerifyOptions, estimate_rate, verify_all, verify_reversibility_1d

__version__ = "0.1.0"
