"""Sampling: per-frequency 2x2 factors, spectral scaling and back-transform.

Each synthesis run costs five length-2m FFTs (three for the spectra, two for
the back-transform) and returns two independent length-n sequences.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from improper_sim import _fft
from improper_sim.covariance import CovarianceSpec, complex_to_bivariate
from improper_sim.embedding import (
    EigenSpectrum,
    NegEigPolicy,
    apply_policy,
    build_first_rows,
    eigen_spectrum,
    next_pow2,
)

SQRT2 = math.sqrt(2.0)
# |rho| may exceed 1 by this much from round-off before the 2x2 factor is clipped.
RHO_SLACK = 1e-12

SeedLike = Union[int, np.random.Generator, None]


def run_rng(seed: int, run: int) -> np.random.Generator:
    """Counter-based generator for run ``run`` of a batch seeded with ``seed``."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=(run,)))
    )


def _as_rng(rng: SeedLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return run_rng(0 if rng is None else int(rng), 0)


@dataclass(frozen=True)
class GaussianInputs:
    """Four i.i.d. N(0, 1/2) streams of length 2m, stacked as rows."""

    w: np.ndarray

    @property
    def w1(self) -> np.ndarray:
        return self.w[0]

    @property
    def w2(self) -> np.ndarray:
        return self.w[1]

    @property
    def w3(self) -> np.ndarray:
        return self.w[2]

    @property
    def w4(self) -> np.ndarray:
        return self.w[3]


def draw_gaussian_inputs(rng: SeedLike, m: int) -> GaussianInputs:
    rng = _as_rng(rng)
    return GaussianInputs(rng.standard_normal((4, 2 * m)) * math.sqrt(0.5))


@dataclass(frozen=True)
class FrequencyFactor:
    """Lower-triangular ``A_k`` with ``A_k A_k^H = Sigma_k``."""

    k: int
    a11: complex
    a21: complex
    a22: complex
    degenerate: bool = False
    clipped: bool = False

    def matrix(self) -> np.ndarray:
        return np.array([[self.a11, 0.0], [self.a21, self.a22]], dtype=complex)


def frequency_factors(lxx, lyy, lxy):
    """Vectorized factors of ``Sigma_k = 2 [[1, rho_k], [conj(rho_k), 1]]``.

    Returns ``(a11, a21, a22, degenerate, clipped)`` arrays. ``rho_k`` is
    zero when either eigenvalue vanishes; when ``|rho_k| > 1`` the negative
    eigenvalue of ``Sigma_k`` is set to zero before factoring.
    """
    lxx = np.asarray(lxx, dtype=float)
    lyy = np.asarray(lyy, dtype=float)
    lxy = np.asarray(lxy, dtype=complex)
    if np.any(lxx < 0) or np.any(lyy < 0):
        raise ValueError("negative eigenvalues: apply a NegEigPolicy first")

    prod = lxx * lyy
    degenerate = prod <= 0.0
    rho = np.zeros(lxy.shape, dtype=complex)
    ok = ~degenerate
    rho[ok] = lxy[ok] / np.sqrt(prod[ok])
    mag = np.abs(rho)
    clipped = mag > 1.0 + RHO_SLACK

    a11 = np.full(rho.shape, SQRT2, dtype=complex)
    a21 = SQRT2 * np.conj(rho)
    a22 = np.sqrt(2.0 * np.clip(1.0 - mag * mag, 0.0, None)).astype(complex)
    if np.any(clipped):
        # Rank-one part (1 + |rho|) v v^H with v = [1, conj(rho)/|rho|].
        root = np.sqrt(1.0 + mag[clipped])
        a11[clipped] = root
        a21[clipped] = root * np.conj(rho[clipped]) / mag[clipped]
        a22[clipped] = 0.0
    return a11, a21, a22, degenerate, clipped


def frequency_factor(lxx_k: float, lyy_k: float, lxy_k: complex, k: int = 0) -> FrequencyFactor:
    a11, a21, a22, degenerate, clipped = frequency_factors([lxx_k], [lyy_k], [lxy_k])
    return FrequencyFactor(
        k=k,
        a11=complex(a11[0]),
        a21=complex(a21[0]),
        a22=complex(a22[0]),
        degenerate=bool(degenerate[0]),
        clipped=bool(clipped[0]),
    )


@dataclass(frozen=True)
class SamplePair:
    z1: np.ndarray
    z2: np.ndarray
    inexact: bool
    seed: Optional[int] = None


class CirculantSampler:
    """Prepared embedding for one covariance spec.

    Construction performs the three spectral FFTs and the per-frequency
    factorization; every :meth:`sample` call then costs two FFTs.

    Parameters
    ----------
    spec : CovarianceSpec
        Covariances at lags 0..n; sequences of length ``n`` are produced.
    m : int, optional
        Embedding half-length, at least n (default n). Rounded up to a power
        of two under the oversample policy.
    policy : NegEigPolicy
        Negative-eigenvalue handling.
    """

    def __init__(
        self,
        spec: CovarianceSpec,
        m: Optional[int] = None,
        policy: NegEigPolicy = NegEigPolicy(),
    ):
        n = spec.n
        m = n if m is None else int(m)
        if m < n:
            raise ValueError(f"embedding half-length m={m} is below n={n}")
        if policy.mode == "oversample":
            if spec.extend is None:
                raise ValueError(
                    "oversample policy needs a model that can generate extra lags; "
                    "supply more lags or use clip"
                )
            m = next_pow2(m)

        def embed(mm: int) -> EigenSpectrum:
            biv = complex_to_bivariate(spec.with_lags(mm))
            return eigen_spectrum(build_first_rows(biv, mm))

        rebuild = embed if spec.extend is not None else None
        spectrum = apply_policy(embed(m), policy, rebuild)
        a11, a21, a22, degenerate, clipped = frequency_factors(
            spectrum.lambda_xx, spectrum.lambda_yy, spectrum.lambda_xy
        )

        self.spec = spec
        self.policy = policy
        self.n = n
        self.m = spectrum.m
        self.spectrum = spectrum
        self.degenerate = degenerate
        self.clipped = clipped
        self.inexact = spectrum.inexact or bool(np.any(clipped))

        two_m = 2 * self.m
        scale_x = np.sqrt(spectrum.lambda_xx / two_m)
        scale_y = np.sqrt(spectrum.lambda_yy / two_m)
        # h_x = cx1*u1, h_y = cy1*u1 + cy2*u2 with u = w_odd + i w_even.
        self._cx1 = scale_x * a11
        self._cy1 = scale_y * a21
        self._cy2 = scale_y * a22
        self.factors = (a11, a21, a22)

    def transform(self, inputs: GaussianInputs) -> tuple[np.ndarray, np.ndarray]:
        w = inputs.w
        u1 = w[0] + 1j * w[1]
        u2 = w[2] + 1j * w[3]
        qx = _fft.fft(self._cx1 * u1)
        qy = _fft.fft(self._cy1 * u1 + self._cy2 * u2)
        n = self.n
        z1 = qx[:n].real + 1j * qy[:n].real
        z2 = qx[:n].imag + 1j * qy[:n].imag
        return z1, z2

    def sample(self, rng: SeedLike = None) -> SamplePair:
        seed = rng if isinstance(rng, (int, np.integer)) else None
        z1, z2 = self.transform(draw_gaussian_inputs(_as_rng(rng), self.m))
        return SamplePair(z1, z2, self.inexact, seed)

    def batch(self, M: int, seed: int = 0, workers: int = 1) -> np.ndarray:
        """``M`` sequences from ``ceil(M/2)`` runs, ordered z1, z2 of run 0, then run 1, ...

        Run ``r`` draws from its own substream, so the result does not depend
        on ``workers``.
        """
        if M < 1:
            raise ValueError("M must be at least 1")
        runs = self.runs_needed(M)
        out = np.empty((2 * runs, self.n), dtype=complex)

        def one(r: int) -> None:
            out[2 * r], out[2 * r + 1] = self.transform(
                draw_gaussian_inputs(run_rng(seed, r), self.m)
            )

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(one, range(runs)))
        else:
            for r in range(runs):
                one(r)
        return out[:M]

    @staticmethod
    def runs_needed(M: int) -> int:
        return -(-M // 2)


def synthesize_pair(
    spec: CovarianceSpec,
    m: Optional[int] = None,
    policy: NegEigPolicy = NegEigPolicy(),
    rng: SeedLike = None,
) -> SamplePair:
    """One full run: embed, factor, draw, back-transform."""
    return CirculantSampler(spec, m, policy).sample(rng)


def simulate_batch(
    spec: CovarianceSpec,
    n: Optional[int] = None,
    M: int = 1,
    policy: NegEigPolicy = NegEigPolicy(),
    seed: int = 0,
    m: Optional[int] = None,
    workers: int = 1,
) -> np.ndarray:
    """``M`` length-n sequences as an ``(M, n)`` complex array."""
    if n is not None:
        if n > spec.n and spec.extend is None:
            raise ValueError(f"spec carries lags up to {spec.n}, cannot simulate n={n}")
        spec = spec.truncate(n) if n <= spec.n else spec.with_lags(n)
    return CirculantSampler(spec, m, policy).batch(M, seed, workers)
