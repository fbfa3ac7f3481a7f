"""Command-line front end: certify, sample, verify, tau.

Configuration is a single JSON file; every run is seeded explicitly (there is
no entropy default) so artifacts are reproducible byte-for-byte.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .certificate import Upsilons, certify, certify_beta
from .errors import (
    AssumptionError,
    ConfigError,
    DomainError,
    MalacertError,
    NonFiniteError,
)
from .kernels import NoiseStream, run_chain, tau_direct
from .potential import AssumptionParams, BetaParams, PotentialSpec, builtin
from .ratio import tau_decomposed
from .verify import VerifyOptions, verify_all

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NONFINITE = 3


@dataclass
class RunConfig:
    """Parsed run configuration; exactly one assumption block must be present."""

    potential: dict
    seed: int
    gamma: float
    assumptions: dict | None = None
    beta: dict | None = None
    gamma_bar: float | None = None
    n_steps: int = 10_000
    n_chains: int = 1
    thin: int = 1
    kernel: str = "mala"
    x0: list | float = 0.0
    z: list | None = None
    stream_id: int = 0
    upsilons: dict = field(default_factory=dict)
    suites: list | None = None
    output: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.assumptions is None) == (self.beta is None):
            raise ConfigError(
                "exactly one of the 'assumptions' and 'beta' blocks must be present"
            )
        if self.gamma <= 0:
            raise ConfigError("gamma must be positive")
        if not isinstance(self.seed, int):
            raise ConfigError("seed must be an integer (reproducibility first)")
        if self.kernel not in ("ula", "mala"):
            raise ConfigError("kernel must be 'ula' or 'mala'")
        kind = self.potential.get("kind")
        if kind == "declared":
            raise ConfigError("external gradient tables are not supported")
        if "kind" not in self.potential or "d" not in self.potential:
            raise ConfigError("potential block needs 'kind' and 'd'")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "seed" not in data:
            raise ConfigError("config must declare a seed")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path: str) -> "RunConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)

    def make_spec(self) -> PotentialSpec:
        return builtin(
            self.potential["kind"], int(self.potential["d"]),
            self.potential.get("params"),
        )

    def make_params(self):
        if self.assumptions is not None:
            return AssumptionParams(**self.assumptions)
        core = {
            k: v for k, v in self.beta.items() if k in
            ("beta", "m_beta", "L_beta", "K_beta", "empirical", "note")
        }
        return BetaParams(**core)

    def x0_vector(self, d: int) -> np.ndarray:
        if np.isscalar(self.x0):
            return np.full(d, float(self.x0))
        x0 = np.asarray(self.x0, dtype=float)
        if x0.shape != (d,):
            raise ConfigError(f"x0 has length {x0.size}, expected {d}")
        return x0


def _dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def cmd_certify(config: RunConfig, out_dir: str) -> int:
    d = int(config.potential["d"])
    ups = Upsilons.from_dict(config.upsilons)
    try:
        if config.assumptions is not None:
            params = AssumptionParams(**config.assumptions)
            cert = certify(params, d, ups, gamma_bar=config.gamma_bar)
        else:
            beta_block = dict(config.beta)
            L = beta_block.pop("L", None)
            M = beta_block.pop("M", None)
            if L is None or M is None:
                raise AssumptionError(
                    "beta block needs smoothness constants L and M for certification"
                )
            params = BetaParams(**beta_block)
            cert = certify_beta(params, L, M, d, ups, gamma_bar=config.gamma_bar)
    except (DomainError, AssumptionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    path = config.output.get("certificate", f"{out_dir}/certificate.json")
    _dump_json(cert.to_dict(), path)
    print(
        f"certificate written to {path}\n"
        f"  regime        {cert.regime}\n"
        f"  gamma_bar     {cert.gamma_bar:.6g} (log {cert.provenance['log_gamma_bar']:.6g})\n"
        f"  K_gamma_bar   {cert.K_gamma_bar:.6g}\n"
        f"  log rho/block {cert.log_rho:.6g} (log magnitude "
        f"{cert.provenance['log_neg_log_rho']:.6g})"
    )
    return EXIT_OK


def cmd_sample(config: RunConfig, out_dir: str) -> int:
    spec = config.make_spec()
    stream = NoiseStream(config.seed, config.stream_id)
    t0 = time.perf_counter()
    try:
        traj = run_chain(
            config.kernel, spec, config.x0_vector(spec.d), config.gamma,
            config.n_steps, stream, thin=config.thin,
        )
    except NonFiniteError as exc:
        print(f"error: non-finite state at step {exc.step_index}", file=sys.stderr)
        return EXIT_NONFINITE
    runtime = time.perf_counter() - t0
    csv_path = config.output.get("trajectory", f"{out_dir}/trajectory.csv")
    traj.write_csv(csv_path)
    summary = {
        "kernel": traj.kernel,
        "gamma": traj.gamma,
        "n_steps": traj.n_steps,
        "acceptance_rate": traj.acceptance_rate,
        "mean": traj.mean.tolist(),
        "second_moment": traj.second_moment.tolist(),
        "runtime_seconds": runtime,
        "seed": config.seed,
        "stream_id": config.stream_id,
    }
    summary_path = config.output.get("summary", f"{out_dir}/summary.json")
    _dump_json(summary, summary_path)
    print(f"trajectory written to {csv_path}; summary to {summary_path}")
    return EXIT_OK


def cmd_verify(config: RunConfig, out_dir: str, suites, threads: int) -> int:
    spec = config.make_spec()
    params = config.make_params()
    opts = VerifyOptions(
        suites=suites if suites else config.suites,
        seed=config.seed,
        threads=threads,
        gamma=config.gamma,
    )
    report = verify_all(spec, params, opts)
    path = config.output.get("report", f"{out_dir}/report.json")
    _dump_json(report.to_dict(), path)
    print(report.table())
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_tau(config: RunConfig, out_dir: str) -> int:
    spec = config.make_spec()
    x = config.x0_vector(spec.d)
    if config.z is not None:
        z = np.asarray(config.z, dtype=float)
        if z.shape != (spec.d,):
            print(f"error: z has length {z.size}, expected {spec.d}", file=sys.stderr)
            return EXIT_CONFIG
    else:
        z = np.asarray(NoiseStream(config.seed, config.stream_id).normal((spec.d,)))
    direct = tau_direct(x, z, config.gamma, spec)
    terms = tau_decomposed(x, z, config.gamma, spec)
    record = {
        "x": x.tolist(),
        "z": z.tolist(),
        "gamma": config.gamma,
        "tau_direct": direct,
        "tau_terms": {
            "a2": terms.a2, "a3": terms.a3, "a4": terms.a4,
            "a5": terms.a5, "a6": terms.a6,
            "quadrature_order": terms.quadrature_order,
            "value": terms.value,
        },
        "abs_diff": abs(direct - terms.value),
    }
    print(json.dumps(record, indent=2))
    if "tau" in config.output:
        _dump_json(record, config.output["tau"])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="malacert",
        description="Langevin samplers with explicit geometric-ergodicity certificates",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("certify", "compute a convergence certificate"),
        ("sample", "run a seeded chain and write the trajectory"),
        ("verify", "run numerical verification suites"),
        ("tau", "print the acceptance exponent by both routes"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the JSON run config")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        if name == "verify":
            p.add_argument(
                "--suite", action="append", default=None,
                help="restrict to the named suite (repeatable)",
            )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig.from_json(args.config)
        if args.seed is not None:
            data = config.to_dict()
            data["seed"] = args.seed
            config = RunConfig.from_dict(data)
    except (ConfigError, AssumptionError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "certify":
            return cmd_certify(config, args.out)
        if args.command == "sample":
            return cmd_sample(config, args.out)
        if args.command == "verify":
            return cmd_verify(config, args.out, args.suite, args.threads)
        if args.command == "tau":
            return cmd_tau(config, args.out)
    except MalacertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
