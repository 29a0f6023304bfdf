"""Estimators, reference samplers and the experiments that certify the simulator."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from improper_sim.covariance import (
    CovarianceSpec,
    FgnParams,
    complex_to_bivariate,
    improper_fgn_spec,
)
from improper_sim.embedding import NegEigPolicy, build_first_rows, eigen_spectrum
from improper_sim.sampler import CirculantSampler, SeedLike, _as_rng

ORACLE_MAX_N = 64


# --- estimators -------------------------------------------------------------


def _lagged_sums(z: np.ndarray, max_lag: int, conjugate: bool) -> np.ndarray:
    """``sum_t z(t+tau) * conj?(z(t))`` for tau = 0..max_lag along the last axis."""
    n = z.shape[-1]
    if not 0 <= max_lag < n:
        raise ValueError(f"max_lag must lie in [0, {n - 1}], got {max_lag}")
    size = 2 * n
    fz = np.fft.fft(z, size)
    other = np.fft.fft(np.conj(z) if not conjugate else z, size)
    return np.fft.ifft(fz * np.conj(other))[..., : max_lag + 1]


def estimate_autocovariance(z, max_lag: int) -> np.ndarray:
    """Unbiased ``s_hat(tau) = sum_t z(t+tau) conj(z(t)) / (n - tau)``.

    ``z`` may be a single sequence or an array of replicates (last axis is time).
    """
    z = np.asarray(z, dtype=complex)
    n = z.shape[-1]
    return _lagged_sums(z, max_lag, conjugate=True) / (n - np.arange(max_lag + 1))


def estimate_complementary(z, max_lag: int) -> np.ndarray:
    """Unbiased ``r_hat(tau) = sum_t z(t+tau) z(t) / (n - tau)``."""
    z = np.asarray(z, dtype=complex)
    n = z.shape[-1]
    return _lagged_sums(z, max_lag, conjugate=False) / (n - np.arange(max_lag + 1))


def rms_metric(theory, estimate) -> float:
    theory = np.asarray(theory)
    estimate = np.asarray(estimate)
    if theory.shape != estimate.shape:
        raise ValueError(f"length mismatch: {theory.shape} vs {estimate.shape}")
    return float(np.sqrt(np.mean(np.abs(estimate - theory) ** 2)))


# --- Cholesky reference sampler ---------------------------------------------


class CholeskyOracle:
    """Dense O(n^2)-per-draw sampler of the stacked ``(x, y)`` vector.

    When the factorization fails, up to ``max_jitter`` (relative to the
    largest variance) is added to the diagonal; the amount used is kept in
    ``jitter``.
    """

    def __init__(self, spec: CovarianceSpec, n: Optional[int] = None, max_jitter: float = 1e-10):
        n = spec.n if n is None else n
        self.n = n
        self.cov = complex_to_bivariate(spec).full_covariance(n)
        self.jitter = 0.0
        scale = float(np.max(np.diag(self.cov)))
        for jitter in (0.0, 1e-14, 1e-12, max_jitter):
            try:
                self.factor = np.linalg.cholesky(self.cov + jitter * scale * np.eye(2 * n))
            except np.linalg.LinAlgError:
                continue
            self.jitter = jitter
            break
        else:
            raise ValueError(f"covariance of the {2 * n} stacked components is not positive definite")

    def simulate(self, rng: SeedLike = None, size: Optional[int] = None) -> np.ndarray:
        rng = _as_rng(rng)
        shape = (1 if size is None else size, 2 * self.n)
        v = rng.standard_normal(shape) @ self.factor.T
        z = v[:, : self.n] + 1j * v[:, self.n :]
        return z[0] if size is None else z


def cholesky_oracle_simulate(
    spec: CovarianceSpec, n: Optional[int] = None, rng: SeedLike = None, size: Optional[int] = None
) -> np.ndarray:
    return CholeskyOracle(spec, n).simulate(rng, size)


# --- deterministic output covariance ----------------------------------------


@dataclass(frozen=True)
class OutputCovariance:
    """Covariances of the stacked ``(x, y)`` parts of z1 and z2 and their cross block."""

    z1: np.ndarray
    z2: np.ndarray
    cross: np.ndarray
    theory: np.ndarray
    inexact: bool

    def discrepancy(self) -> float:
        """Largest absolute deviation of either output block from the target covariance."""
        return float(
            max(
                np.max(np.abs(self.z1 - self.theory)),
                np.max(np.abs(self.z2 - self.theory)),
                np.max(np.abs(self.cross)),
            )
        )


def output_map(sampler: CirculantSampler) -> np.ndarray:
    """Real ``4n x 8m`` matrix from ``(w1, w2, w3, w4)`` to ``(Re qx, Re qy, Im qx, Im qy)[:n]``.

    The DFT is formed as an explicit matrix, independent of the FFT path.
    """
    n, two_m = sampler.n, 2 * sampler.m
    t = np.arange(n)[:, None]
    k = np.arange(two_m)[None, :]
    dft = np.exp(-2j * np.pi * ((t * k) % two_m) / two_m)
    gx = dft * sampler._cx1
    gy1 = dft * sampler._cy1
    gy2 = dft * sampler._cy2
    zero = np.zeros_like(gx)
    kx = np.hstack([gx, 1j * gx, zero, zero])
    ky = np.hstack([gy1, 1j * gy1, gy2, 1j * gy2])
    return np.vstack([kx.real, ky.real, kx.imag, ky.imag])


def exact_output_covariance(
    spec: CovarianceSpec,
    m: Optional[int] = None,
    policy: NegEigPolicy = NegEigPolicy(),
    sampler: Optional[CirculantSampler] = None,
) -> OutputCovariance:
    """Exact second-order law of one synthesis run, by composing its linear maps."""
    if spec.n > ORACLE_MAX_N:
        raise ValueError(f"exact output covariance is limited to n <= {ORACLE_MAX_N}")
    if sampler is None:
        sampler = CirculantSampler(spec, m, policy)
    L = output_map(sampler)
    cov = 0.5 * L @ L.T
    h = 2 * spec.n
    return OutputCovariance(
        z1=cov[:h, :h],
        z2=cov[h:, h:],
        cross=cov[:h, h:],
        theory=complex_to_bivariate(spec).full_covariance(spec.n),
        inexact=sampler.inexact,
    )


# --- experiments ------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    H: float
    n: int
    min_eig: float


@dataclass
class SweepTable:
    rows: list[SweepRow] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["H", "n", "min_eig"])
        for r in self.rows:
            w.writerow([repr(r.H), r.n, repr(r.min_eig)])
        return buf.getvalue()

    def grid(self) -> dict[tuple[float, int], float]:
        return {(r.H, r.n): r.min_eig for r in self.rows}


DEFAULT_SWEEP_H = tuple(round(0.5 + 0.05 * i, 2) for i in range(10)) + (0.9999,)
DEFAULT_SWEEP_N = tuple(2**p for p in range(4, 13))


def min_eigenvalue_sweep(
    H_values: Iterable[float] = DEFAULT_SWEEP_H,
    n_values: Iterable[int] = DEFAULT_SWEEP_N,
    A: float = 1.0,
    B: float = 2**-0.5,
) -> SweepTable:
    """Smallest of ``lambda_xx`` and ``lambda_yy`` for improper fGn embedded at m = n."""
    table = SweepTable()
    n_values = list(n_values)
    for H in H_values:
        params = FgnParams(H, A, B)
        for n in n_values:
            biv = complex_to_bivariate(improper_fgn_spec(params, n))
            table.rows.append(SweepRow(H, n, eigen_spectrum(build_first_rows(biv, n)).min_eig))
    return table


@dataclass(frozen=True)
class RmsResult:
    n: int
    rms_s: float
    rms_r: float
    replicates: int


def rms_to_csv(results: Sequence[RmsResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "rms_s", "rms_r", "replicates"])
    for r in results:
        w.writerow([r.n, repr(r.rms_s), repr(r.rms_r), r.replicates])
    return buf.getvalue()


def batch_seed(seed: int, n: int) -> int:
    """Independent batch seed for cell ``n`` of an experiment seeded with ``seed``."""
    return int(np.random.SeedSequence(seed, spawn_key=(n,)).generate_state(1, np.uint64)[0])


def rms_experiment(
    H: float,
    A: float,
    B: float,
    n_values: Iterable[int],
    replicates: int = 1000,
    seed: int = 0,
    policy: NegEigPolicy = NegEigPolicy(),
    workers: int = 1,
) -> list[RmsResult]:
    """RMS distance between the model covariances and their replicate-averaged estimates."""
    params = FgnParams(H, A, B)
    results = []
    for n in n_values:
        spec = improper_fgn_spec(params, n)
        Z = CirculantSampler(spec, policy=policy).batch(replicates, batch_seed(seed, n), workers)
        s_hat = estimate_autocovariance(Z, n - 1).mean(axis=0)
        r_hat = estimate_complementary(Z, n - 1).mean(axis=0)
        results.append(
            RmsResult(
                n=n,
                rms_s=rms_metric(spec.s_zz[:n], s_hat),
                rms_r=rms_metric(spec.r_zz[:n], r_hat),
                replicates=replicates,
            )
        )
    return results


# --- Monte Carlo helpers ----------------------------------------------------


def stacked_real(z: np.ndarray) -> np.ndarray:
    """``(x_0..x_{n-1}, y_0..y_{n-1})`` rows from complex replicates."""
    z = np.atleast_2d(z)
    return np.hstack([z.real, z.imag])


def sample_second_moment(v: np.ndarray, w: Optional[np.ndarray] = None) -> np.ndarray:
    """``E[v w^T]`` estimated over rows, for known zero mean."""
    w = v if w is None else w
    return v.T @ w / v.shape[0]


def second_moment_stderr(cov_v: np.ndarray, cov_w: np.ndarray, cross: np.ndarray, R: int) -> np.ndarray:
    """Standard error of each entry of a zero-mean Gaussian second-moment estimate.

    For jointly Gaussian ``(v, w)``, ``Var(v_i w_j) = C_vv[i,i] C_ww[j,j] + C_vw[i,j]^2``.
    """
    return np.sqrt((np.outer(np.diag(cov_v), np.diag(cov_w)) + cross**2) / R)
