"""Circulant embedding of the bivariate covariance and its eigenvalue spectra.

The three length-2m first rows are never expanded into matrices; their
eigenvalues are the forward DFTs of the rows.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from improper_sim import _fft
from improper_sim.covariance import BivariateCovariance

# Eigenvalues above -EIG_RTOL * max|lambda| are FFT round-off, not negatives.
EIG_RTOL = 1e-9

POLICY_MODES = ("strict", "clip", "oversample")


class NegativeEigenvalueError(ValueError):
    """Raised under the strict policy when the embedding is not nonnegative definite."""

    def __init__(self, min_eig: float, index: int, m: int):
        self.min_eig = min_eig
        self.index = index
        self.m = m
        super().__init__(
            f"negative circulant eigenvalue {min_eig:.6g} at k={index + 1} (m={m})"
        )


@dataclass(frozen=True)
class CirculantRows:
    m: int
    c_xx: np.ndarray
    c_yy: np.ndarray
    c_xy: np.ndarray


@dataclass(frozen=True)
class EigenSpectrum:
    """Eigenvalues of the embedded circulants, stored in DFT order k = 1..2m.

    ``min_eig``/``min_index`` describe the spectrum before any policy was
    applied; ``clipped_count`` and ``inexact`` record what the policy did.
    """

    m: int
    lambda_xx: np.ndarray
    lambda_yy: np.ndarray
    lambda_xy: np.ndarray
    min_eig: float
    min_index: int
    clipped_count: int = 0
    inexact: bool = False
    notes: tuple[str, ...] = ()

    @property
    def tolerance(self) -> float:
        scale = max(np.max(np.abs(self.lambda_xx)), np.max(np.abs(self.lambda_yy)))
        return EIG_RTOL * scale


@dataclass(frozen=True)
class NegEigPolicy:
    """What to do about negative circulant eigenvalues.

    ``strict`` raises, ``clip`` zeroes them (inexact), ``oversample`` doubles
    m up to ``max_doublings`` times and then falls back to clipping.
    """

    mode: str = "strict"
    max_doublings: int = 4

    def __post_init__(self) -> None:
        if self.mode not in POLICY_MODES:
            raise ValueError(f"unknown policy mode {self.mode!r}")
        if self.max_doublings < 0:
            raise ValueError("max_doublings must be >= 0")


def next_pow2(m: int) -> int:
    return 1 << max(0, int(m) - 1).bit_length()


def build_first_rows(biv: BivariateCovariance, m: int) -> CirculantRows:
    """First rows of the three 2m x 2m circulants.

    Lags the bivariate covariance does not carry (m > biv.n) are zero.
    """
    if m < biv.n:
        raise ValueError(f"embedding half-length m={m} is below n={biv.n}")
    if m < 1:
        raise ValueError("m must be positive")
    pad = m - biv.n

    def lags(a):
        return np.concatenate([a, np.zeros(pad)]) if pad else a

    s_xx, s_yy = lags(biv.s_xx), lags(biv.s_yy)
    pos, neg = lags(biv.s_xy_pos), lags(biv.s_xy_neg)
    return CirculantRows(
        m=m,
        c_xx=np.concatenate([s_xx[: m + 1], s_xx[m - 1 : 0 : -1]]),
        c_yy=np.concatenate([s_yy[: m + 1], s_yy[m - 1 : 0 : -1]]),
        c_xy=np.concatenate([neg[: m + 1], pos[m - 1 : 0 : -1]]),
    )


def eigen_spectrum(rows: CirculantRows) -> EigenSpectrum:
    lxx = _fft.fft(rows.c_xx).real
    lyy = _fft.fft(rows.c_yy).real
    lxy = _fft.fft(rows.c_xy)
    both = np.concatenate([lxx, lyy])
    idx = int(np.argmin(both))
    return EigenSpectrum(
        m=rows.m,
        lambda_xx=lxx,
        lambda_yy=lyy,
        lambda_xy=lxy,
        min_eig=float(both[idx]),
        min_index=idx % lxx.size,
    )


def _clip(spectrum: EigenSpectrum, note: Optional[str] = None) -> EigenSpectrum:
    tol = spectrum.tolerance
    lxx, lyy = spectrum.lambda_xx, spectrum.lambda_yy
    clipped = int(np.count_nonzero(lxx < -tol) + np.count_nonzero(lyy < -tol))
    notes = spectrum.notes + ((note,) if note else ())
    return replace(
        spectrum,
        lambda_xx=np.maximum(lxx, 0.0),
        lambda_yy=np.maximum(lyy, 0.0),
        clipped_count=spectrum.clipped_count + clipped,
        inexact=spectrum.inexact or clipped > 0,
        notes=notes,
    )


def apply_policy(
    spectrum: EigenSpectrum,
    policy: NegEigPolicy,
    rebuild: Optional[Callable[[int], EigenSpectrum]] = None,
) -> EigenSpectrum:
    """Enforce nonnegative ``lambda_xx`` and ``lambda_yy``.

    ``rebuild(m)`` must return the spectrum of the same model embedded at
    half-length m; it is required only for the oversample mode.
    """
    tol = spectrum.tolerance
    if spectrum.min_eig >= -tol:
        # Round-off below zero is zeroed without counting as a clip.
        return _clip(spectrum)

    if policy.mode == "strict":
        raise NegativeEigenvalueError(spectrum.min_eig, spectrum.min_index, spectrum.m)
    if policy.mode == "clip":
        return _clip(spectrum)

    if rebuild is None:
        raise ValueError(
            "oversampling needs covariances beyond lag n; supply more lags or use clip"
        )
    current = spectrum
    for _ in range(policy.max_doublings):
        current = rebuild(2 * current.m)
        if current.min_eig >= -current.tolerance:
            return _clip(current, f"oversampled from m={spectrum.m} to m={current.m}")
    msg = (
        f"negative eigenvalues persist at m={current.m} after "
        f"{policy.max_doublings} doublings; clipping"
    )
    warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return _clip(current, msg)
