"""Command-line entry point.

Exit codes: 0 success (or guaranteed exact / oracle pass), 1 not guaranteed
exact or oracle failure, 2 invalid configuration, 3 negative eigenvalue
under the strict policy. Failures print one ``improper-sim: error=...`` line
on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from improper_sim import __version__
from improper_sim.covariance import CovarianceSpec, FgnParams, fgn_normalizer, improper_fgn_spec
from improper_sim.embedding import NegativeEigenvalueError, NegEigPolicy
from improper_sim.exactness import exactness_report
from improper_sim.io import read_spec_csv, spectrum_to_csv, write_batch, write_manifest
from improper_sim.sampler import CirculantSampler
from improper_sim.validation import (
    ORACLE_MAX_N,
    SweepTable,
    exact_output_covariance,
    min_eigenvalue_sweep,
    rms_experiment,
    rms_to_csv,
)


OUTDIR_ENV = "IMPROPER_SIM_OUTDIR"

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NEG_EIG = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    model: str = "fgn"
    hurst: float = 0.75
    amp_a: str = "auto"
    amp_b: str = "ratio:0.5"
    path: Optional[str] = None
    n: Optional[int] = None
    m: Optional[int] = None
    reps: int = 1
    seed: int = 0
    policy: NegEigPolicy = field(default_factory=NegEigPolicy)
    out: Optional[str] = None
    format: str = "csv"
    threads: int = 1
    max_lag: Optional[int] = None
    hurst_values: Optional[list[float]] = None
    n_values: Optional[list[int]] = None
    tol: float = 1e-10

    def __post_init__(self) -> None:
        if self.model not in ("fgn", "csv"):
            raise ConfigError(f"unknown model {self.model!r}")
        if self.model == "csv" and not self.path:
            raise ConfigError("--model csv needs --path")
        if self.model == "csv" and self.policy.mode == "oversample":
            raise ConfigError("oversample policy is unavailable for csv models; supply more lags or use clip")
        if self.format not in ("csv", "binary"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.reps < 1 or self.threads < 1:
            raise ConfigError("--reps and --threads must be positive")

    def fgn_params(self, H: Optional[float] = None) -> FgnParams:
        H = self.hurst if H is None else H
        try:
            V = fgn_normalizer(H)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        A = _parse_amp(self.amp_a, "auto", lambda: 1.0 / math.sqrt(V))
        if self.amp_b.startswith("ratio:"):
            B = math.sqrt(float(self.amp_b[6:])) * A
        else:
            B = float(self.amp_b)
        try:
            return FgnParams(H, A, B)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def spec(self) -> CovarianceSpec:
        if self.model == "csv":
            try:
                spec = read_spec_csv(self.path)
            except (OSError, ValueError) as exc:
                raise ConfigError(str(exc)) from None
            if self.n is not None:
                if self.n > spec.n:
                    raise ConfigError(f"csv spec carries lags up to {spec.n}, asked for n={self.n}")
                spec = spec.truncate(self.n)
            return spec
        if self.n is None or self.n < 1:
            raise ConfigError("-n is required for fgn models")
        return improper_fgn_spec(self.fgn_params(), self.n)

    def describe(self) -> dict:
        d = {
            "command": self.command,
            "model": self.model,
            "n": self.n,
            "m": self.m,
            "seed": self.seed,
            "policy": {"mode": self.policy.mode, "max_doublings": self.policy.max_doublings},
            "version": __version__,
        }
        if self.model == "fgn":
            p = self.fgn_params()
            d["fgn"] = {"H": p.H, "A": p.A, "B": p.B, "amp_a": self.amp_a, "amp_b": self.amp_b}
        else:
            d["path"] = str(self.path)
        return d


def _parse_amp(text: str, keyword: str, default) -> float:
    return default() if text == keyword else float(text)


def _out_path(cfg: RunConfig, default_name: str) -> Path:
    if cfg.out:
        return Path(cfg.out)
    return Path(os.environ.get(OUTDIR_ENV, ".")) / default_name


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def cmd_simulate(cfg: RunConfig) -> int:
    spec = cfg.spec()
    sampler = CirculantSampler(spec, cfg.m, cfg.policy)
    Z = sampler.batch(cfg.reps, cfg.seed, cfg.threads)
    out = _out_path(cfg, "simulate." + ("csv" if cfg.format == "csv" else "bin"))
    out.parent.mkdir(parents=True, exist_ok=True)
    write_batch(Z, out, cfg.format)
    info = cfg.describe()
    info.update(
        n=sampler.n,
        m=sampler.m,
        reps=cfg.reps,
        runs=CirculantSampler.runs_needed(cfg.reps),
        format=cfg.format,
        output=out.name,
        inexact=sampler.inexact,
        clipped_count=sampler.spectrum.clipped_count,
        min_eig=sampler.spectrum.min_eig,
        notes=list(sampler.spectrum.notes),
    )
    write_manifest(out.with_name(out.name + ".json"), info)
    return EXIT_OK


def cmd_check(cfg: RunConfig) -> int:
    spec = cfg.spec()
    max_lag = cfg.max_lag
    if max_lag is None and spec.extend is not None:
        max_lag = 4 * spec.n
    report = exactness_report(spec, max_lag)
    text = report.to_json(indent=2)
    if cfg.out:
        Path(cfg.out).write_text(text + "\n")
    print(text)
    if report.guaranteed_exact:
        return EXIT_OK
    _fail("not_guaranteed", "; ".join(report.failures()))
    return EXIT_FAIL


def cmd_eigs(cfg: RunConfig) -> int:
    H_values = cfg.hurst_values or [cfg.hurst]
    n_values = cfg.n_values or ([cfg.n] if cfg.n else [2**p for p in range(4, 13)])
    table = SweepTable()
    for H in H_values:
        # 'auto'/'ratio:q' amplitudes depend on H
        p = cfg.fgn_params(H)
        table.rows += min_eigenvalue_sweep([H], n_values, p.A, p.B).rows
    text = table.to_csv()
    _emit(cfg, text)
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig) -> int:
    sampler = CirculantSampler(cfg.spec(), cfg.m, cfg.policy)
    _emit(cfg, spectrum_to_csv(sampler.spectrum))
    return EXIT_OK


def cmd_rms(cfg: RunConfig) -> int:
    p = cfg.fgn_params()
    n_values = cfg.n_values or list(range(10, 1001, 10))
    results = rms_experiment(p.H, p.A, p.B, n_values, cfg.reps, cfg.seed, cfg.policy, cfg.threads)
    out = _emit(cfg, rms_to_csv(results))
    if out is not None:
        info = cfg.describe()
        info.update(n_values=n_values, replicates=cfg.reps, output=out.name)
        write_manifest(out.with_name(out.name + ".json"), info)
    return EXIT_OK


def cmd_oracle_check(cfg: RunConfig) -> int:
    spec = cfg.spec()
    if spec.n > ORACLE_MAX_N:
        raise ConfigError(f"oracle-check is limited to n <= {ORACLE_MAX_N}")
    oc = exact_output_covariance(spec, cfg.m, cfg.policy)
    err = oc.discrepancy()
    result = {"n": spec.n, "max_abs_error": err, "tol": cfg.tol, "inexact": oc.inexact, "pass": err < cfg.tol}
    print(json.dumps(result))
    if err < cfg.tol:
        return EXIT_OK
    _fail("oracle_mismatch", f"max_abs_error={err:.3e} tol={cfg.tol:g}")
    return EXIT_FAIL


COMMANDS = {
    "simulate": cmd_simulate,
    "check": cmd_check,
    "eigs": cmd_eigs,
    "spectrum": cmd_spectrum,
    "rms": cmd_rms,
    "oracle-check": cmd_oracle_check,
}


def _emit(cfg: RunConfig, text: str) -> Optional[Path]:
    if cfg.out is None and OUTDIR_ENV not in os.environ:
        sys.stdout.write(text)
        return None
    out = _out_path(cfg, f"{cfg.command}.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    return out


def _fail(kind: str, detail: str) -> None:
    print(f"improper-sim: error={kind} detail={detail}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="improper-sim",
        description="Exact circulant-embedding simulation of improper complex Gaussian processes.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", choices=["fgn", "csv"], default="fgn")
    common.add_argument("--path", help="covariance CSV (tau,re_s,im_s,re_r,im_r) for --model csv")
    common.add_argument("--hurst", type=float, default=0.75)
    common.add_argument("--amp-a", default="auto", help="'auto' (unit variance) or a number")
    common.add_argument("--amp-b", default="ratio:0.5", help="'ratio:q' (B^2 = q A^2) or a number")
    common.add_argument("-n", type=int, default=None, help="sequence length / maximum lag")
    common.add_argument("-m", type=int, default=None, help="embedding half-length (default n)")
    common.add_argument("--policy", choices=["strict", "clip", "oversample"], default="strict")
    common.add_argument("--max-doublings", type=int, default=4)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help=f"output file (default under ${OUTDIR_ENV} or stdout)")
    common.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("simulate", parents=[common], help="simulate replicate sequences")
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--format", choices=["csv", "binary"], default="csv")

    p = sub.add_parser("check", parents=[common], help="exactness conditions report (JSON)")
    p.add_argument("--max-lag", type=int, default=None, help="lags to check (fgn default 4n)")

    p = sub.add_parser("eigs", parents=[common], help="minimum-eigenvalue sweep over H and n")
    p.add_argument("--hurst-values", type=_floats, default=None)
    p.add_argument("--n-values", type=_ints, default=None)

    sub.add_parser("spectrum", parents=[common], help="export the circulant eigenvalues as CSV")

    p = sub.add_parser("rms", parents=[common], help="RMS of replicate-averaged covariance estimates")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--n-values", type=_ints, default=None)

    p = sub.add_parser("oracle-check", parents=[common], help="exact output-covariance check")
    p.add_argument("--tol", type=float, default=1e-10)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    try:
        policy = NegEigPolicy(args.policy, args.max_doublings)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(
        command=args.command,
        model=args.model,
        hurst=args.hurst,
        amp_a=args.amp_a,
        amp_b=args.amp_b,
        path=args.path,
        n=args.n,
        m=args.m,
        reps=getattr(args, "reps", 1),
        seed=args.seed,
        policy=policy,
        out=args.out,
        format=getattr(args, "format", "csv"),
        threads=args.threads,
        max_lag=getattr(args, "max_lag", None),
        hurst_values=getattr(args, "hurst_values", None),
        n_values=getattr(args, "n_values", None),
        tol=getattr(args, "tol", 1e-10),
    )


def run(cfg: RunConfig) -> int:
    try:
        return COMMANDS[cfg.command](cfg)
    except NegativeEigenvalueError as exc:
        _fail("negative_eigenvalue", f"min_eig={exc.min_eig:.6g} k={exc.index + 1} m={exc.m}")
        return EXIT_NEG_EIG
    except ValueError as exc:
        _fail("invalid_config", str(exc))
        return EXIT_CONFIG


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        _fail("invalid_config", str(exc))
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
