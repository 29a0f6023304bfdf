"""Sufficient conditions under which the circulant embedding is exact for every m >= n.

For a time-reversible bivariate process (``s_xy(tau) == s_xy(-tau)``) the
embedding is exact when the lag matrices ``R_tau``, their first differences
and their second differences are all nonnegative definite. When both
``s_zz`` and ``r_zz`` are real, ``R_tau`` is diagonal and the conditions
reduce to three scalar inequalities in the complex domain.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from improper_sim.covariance import BivariateCovariance, CovarianceSpec, complex_to_bivariate
from improper_sim.embedding import build_first_rows, eigen_spectrum

REL_TOL = 1e-12


@dataclass(frozen=True)
class Condition:
    """Outcome of one condition over lags 0..last_tau."""

    holds: bool
    first_failure: Optional[int] = None
    last_tau: int = 0

    def __bool__(self) -> bool:
        return self.holds


def _first_failure(bad: np.ndarray, last_tau: int) -> Condition:
    idx = np.flatnonzero(bad)
    if idx.size:
        return Condition(False, int(idx[0]), last_tau)
    return Condition(True, None, last_tau)


def lag_matrices(biv: BivariateCovariance) -> np.ndarray:
    """``R_tau = [[s_xx, s_xy(tau)], [s_xy(-tau), s_yy]]`` stacked over tau = 0..n."""
    return np.stack(
        [
            np.stack([biv.s_xx, biv.s_xy_pos], axis=-1),
            np.stack([biv.s_xy_neg, biv.s_yy], axis=-1),
        ],
        axis=-2,
    )


def _nonneg_definite(mats: np.ndarray, tol: float) -> np.ndarray:
    # x'Mx only sees the symmetric part of M.
    a = mats[:, 0, 0]
    d = mats[:, 1, 1]
    b = 0.5 * (mats[:, 0, 1] + mats[:, 1, 0])
    return (a >= -tol) & (d >= -tol) & (a * d - b * b >= -tol * (1.0 + np.abs(a) + np.abs(d)))


def check_time_reversible(biv: BivariateCovariance) -> bool:
    scale = max(1.0, float(np.max(np.abs(biv.s_xy_pos))), float(np.max(np.abs(biv.s_xy_neg))))
    return bool(np.all(np.abs(biv.s_xy_pos - biv.s_xy_neg) <= REL_TOL * scale))


def check_matrix_conditions(biv: BivariateCovariance) -> tuple[Condition, Condition, Condition]:
    """Nonnegative definiteness of ``R_tau``, ``R_tau - R_{tau+1}`` and
    ``R_tau - 2 R_{tau+1} + R_{tau+2}`` over every tau the stored lags allow."""
    R = lag_matrices(biv)
    tol = REL_TOL * (1.0 + float(np.max(np.abs(R))))
    dR = R[:-1] - R[1:]
    d2R = R[:-2] - 2 * R[1:-1] + R[2:]
    return (
        _first_failure(~_nonneg_definite(R, tol), len(R) - 1),
        _first_failure(~_nonneg_definite(dR, tol), len(dR) - 1),
        _first_failure(~_nonneg_definite(d2R, tol), len(d2R) - 1),
    )


def check_complex_conditions(
    spec: CovarianceSpec,
) -> Optional[tuple[Condition, Condition, Condition]]:
    """The three scalar inequalities on real ``s_zz``, ``r_zz``.

    Returns None when either sequence has an imaginary part, where the
    inequalities do not apply.
    """
    if not spec.is_real:
        return None
    s = spec.s_zz.real
    r = spec.r_zz.real
    tol = REL_TOL * (1.0 + float(np.max(np.abs(s))))
    ds, dr = s[:-1] - s[1:], r[:-1] - r[1:]
    d2s, d2r = s[:-2] - 2 * s[1:-1] + s[2:], r[:-2] - 2 * r[1:-1] + r[2:]
    return (
        _first_failure(np.abs(r) > s + tol, len(s) - 1),
        _first_failure(np.abs(dr) > ds + tol, len(ds) - 1),
        _first_failure(np.abs(d2r) > d2s + tol, len(d2s) - 1),
    )


@dataclass(frozen=True)
class ExactnessReport:
    """Outcome of the sufficient conditions over lags 0..n.

    ``min_eig`` is the smallest circulant eigenvalue at m = n. It is
    informational: a positive value means this embedding is exact, but it
    does not enter the verdict.
    """

    n: int
    time_reversible: bool
    cond_R: Condition
    cond_dR: Condition
    cond_d2R: Condition
    complex_conditions: Optional[tuple[Condition, Condition, Condition]]
    min_eig: float
    verdict: str

    @property
    def guaranteed_exact(self) -> bool:
        return self.verdict == "guaranteed_exact"

    def failures(self) -> list[str]:
        """Human-readable reasons the verdict is not guaranteed_exact."""
        out = []
        if not self.time_reversible:
            out.append("time_reversible: s_xy(tau) != s_xy(-tau)")
        for name in ("cond_R", "cond_dR", "cond_d2R"):
            cond = getattr(self, name)
            if not cond.holds:
                out.append(f"{name}: fails at tau={cond.first_failure}")
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.complex_conditions is not None:
            d["complex_conditions"] = {
                f"complex_cond_{i + 1}": asdict(c) for i, c in enumerate(self.complex_conditions)
            }
        return d

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def exactness_report(spec: CovarianceSpec, max_lag: Optional[int] = None) -> ExactnessReport:
    """Check every condition on lags 0..max_lag (default: every supplied lag).

    A ``max_lag`` beyond ``spec.n`` regenerates lags from the model and is
    rejected for specs without a generator.
    """
    if max_lag is not None and max_lag != spec.n:
        if max_lag > spec.n and spec.extend is None:
            raise ValueError(f"spec carries lags up to {spec.n}, cannot check to {max_lag}")
        spec = spec.with_lags(max_lag)
    biv = complex_to_bivariate(spec)
    reversible = check_time_reversible(biv)
    cond_R, cond_dR, cond_d2R = check_matrix_conditions(biv)
    verdict = (
        "guaranteed_exact"
        if reversible and cond_R.holds and cond_dR.holds and cond_d2R.holds
        else "not_guaranteed"
    )
    return ExactnessReport(
        n=spec.n,
        time_reversible=reversible,
        cond_R=cond_R,
        cond_dR=cond_dR,
        cond_d2R=cond_d2R,
        complex_conditions=check_complex_conditions(spec),
        min_eig=eigen_spectrum(build_first_rows(biv, spec.n)).min_eig,
        verdict=verdict,
    )
