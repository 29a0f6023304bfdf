"""Complex and bivariate covariance representations, and the improper fGn model.

A zero-mean stationary complex process ``z_t = x_t + i y_t`` is described
either by its autocovariance ``s_zz(tau) = E{z_{t+tau} conj(z_t)}`` and
complementary covariance ``r_zz(tau) = E{z_{t+tau} z_t}``, or by the real
auto/cross covariances of ``x`` and ``y``. Only lags ``tau >= 0`` are stored;
negative lags follow from ``s_zz(-tau) = conj(s_zz(tau))`` and
``r_zz(-tau) = r_zz(tau)``.
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass, field
from functools import partial
from typing import Callable, Optional

import numpy as np

# Lags at or above this switch the fGn bracket to its even binomial series.
_SERIES_MIN_LAG = 8
_SERIES_TERMS = 14


def _as_lag_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype).reshape(-1)
    arr.setflags(write=False)
    return arr


def validate_spec(s_zz, r_zz=None) -> list[str]:
    """Return every invariant violation of a complex covariance pair.

    Accepts either a :class:`CovarianceSpec` or the two lag sequences.
    Never raises for bad covariance content; an empty list means valid.
    """
    if isinstance(s_zz, CovarianceSpec):
        s_zz, r_zz = s_zz.s_zz, s_zz.r_zz
    s = np.asarray(s_zz, dtype=complex).reshape(-1)
    r = np.zeros_like(s) if r_zz is None else np.asarray(r_zz, dtype=complex).reshape(-1)
    problems = []
    if s.size < 2:
        problems.append("need lags 0..n with n >= 1")
    if s.size != r.size:
        problems.append(f"s_zz has {s.size} lags but r_zz has {r.size}")
    if not (np.all(np.isfinite(s)) and np.all(np.isfinite(r))):
        problems.append("non-finite covariance values")
    if s.size == 0:
        return problems
    s0 = s[0]
    if s0.imag != 0.0:
        problems.append("s_zz(0) not real")
    if s0.real <= 0.0:
        problems.append("s_zz(0) <= 0")
    if r.size and abs(r[0]) > s0.real:
        problems.append("|r(0)| > s(0)")
    return problems


@dataclass(frozen=True)
class CovarianceSpec:
    """Autocovariance ``s_zz`` and complementary covariance ``r_zz`` at lags 0..n.

    ``extend`` optionally regenerates the same model at a larger maximum lag;
    it is what lets the embedding oversample without inventing covariances.
    Pass ``validate=False`` to build a spec that violates the variance
    invariants (useful only for diagnostics).
    """

    s_zz: np.ndarray
    r_zz: np.ndarray
    extend: Optional[Callable[[int], "CovarianceSpec"]] = field(
        default=None, compare=False, repr=False
    )
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool) -> None:
        object.__setattr__(self, "s_zz", _as_lag_array(self.s_zz, complex))
        object.__setattr__(self, "r_zz", _as_lag_array(self.r_zz, complex))
        if validate:
            problems = validate_spec(self.s_zz, self.r_zz)
            if problems:
                raise ValueError("invalid covariance spec: " + "; ".join(problems))
        elif self.s_zz.size != self.r_zz.size:
            raise ValueError("s_zz and r_zz must cover the same lags")

    @property
    def n(self) -> int:
        return self.s_zz.size - 1

    @property
    def is_real(self) -> bool:
        return not (np.any(self.s_zz.imag) or np.any(self.r_zz.imag))

    def truncate(self, n: int) -> CovarianceSpec:
        """Keep lags 0..n."""
        if not 1 <= n <= self.n:
            raise ValueError(f"cannot truncate a spec with max lag {self.n} to {n}")
        if n == self.n:
            return self
        return CovarianceSpec(self.s_zz[: n + 1], self.r_zz[: n + 1], self.extend)

    def with_lags(self, m: int) -> CovarianceSpec:
        """Spec covering lags 0..m, regenerated from the model or zero-padded."""
        if m <= self.n:
            return self.truncate(m)
        if self.extend is not None:
            return self.extend(m)
        pad = np.zeros(m - self.n, dtype=complex)
        return CovarianceSpec(
            np.concatenate([self.s_zz, pad]), np.concatenate([self.r_zz, pad])
        )


@dataclass(frozen=True)
class BivariateCovariance:
    """Real covariances of the (x, y) pair at lags 0..n.

    ``s_xy_pos[tau] = s_xy(tau) = E{x_{t+tau} y_t}`` and
    ``s_xy_neg[tau] = s_xy(-tau)``; both share lag 0.
    """

    s_xx: np.ndarray
    s_yy: np.ndarray
    s_xy_pos: np.ndarray
    s_xy_neg: np.ndarray

    def __post_init__(self) -> None:
        for name in ("s_xx", "s_yy", "s_xy_pos", "s_xy_neg"):
            object.__setattr__(self, name, _as_lag_array(getattr(self, name), float))
        sizes = {a.size for a in (self.s_xx, self.s_yy, self.s_xy_pos, self.s_xy_neg)}
        if len(sizes) != 1:
            raise ValueError("all bivariate sequences must cover lags 0..n")
        if self.s_xx[0] < 0 or self.s_yy[0] < 0:
            raise ValueError("negative variance at lag 0")
        if self.s_xy_pos[0] != self.s_xy_neg[0]:
            raise ValueError("s_xy(0) must be shared by both halves")

    @property
    def n(self) -> int:
        return self.s_xx.size - 1

    def s_xy(self, tau: int) -> float:
        """Cross covariance at a signed lag."""
        return float(self.s_xy_pos[tau] if tau >= 0 else self.s_xy_neg[-tau])

    def full_covariance(self, n: Optional[int] = None) -> np.ndarray:
        """Covariance of the stacked real vector ``(x_0..x_{n-1}, y_0..y_{n-1})``."""
        n = self.n if n is None else n
        if n > self.n + 1:
            raise ValueError(f"lags up to {n - 1} needed, spec has {self.n}")
        lag = np.arange(n)[:, None] - np.arange(n)[None, :]
        cross = np.where(lag >= 0, self.s_xy_pos[np.abs(lag)], self.s_xy_neg[np.abs(lag)])
        return np.block(
            [
                [self.s_xx[np.abs(lag)], cross],
                [cross.T, self.s_yy[np.abs(lag)]],
            ]
        )


def complex_to_bivariate(spec: CovarianceSpec) -> BivariateCovariance:
    s, r = spec.s_zz, spec.r_zz
    if s[0].imag != 0.0 or s[0].real <= 0.0:
        raise ValueError("s_zz(0) must be real and positive")
    return BivariateCovariance(
        s_xx=((s + r) / 2).real,
        s_yy=((s - r) / 2).real,
        s_xy_pos=((r - s) / 2).imag,
        s_xy_neg=((s + r) / 2).imag,
    )


def bivariate_to_complex(biv: BivariateCovariance, validate: bool = True) -> CovarianceSpec:
    s = biv.s_xx + biv.s_yy + 1j * (biv.s_xy_neg - biv.s_xy_pos)
    r = biv.s_xx - biv.s_yy + 1j * (biv.s_xy_neg + biv.s_xy_pos)
    return CovarianceSpec(s, r, validate=validate)


@dataclass(frozen=True)
class FgnParams:
    """Hurst parameter and the auto/complementary amplitudes of improper fGn."""

    H: float
    A: float
    B: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.H < 1.0:
            raise ValueError(f"Hurst parameter must lie in (0, 1), got {self.H}")
        if self.A < 0 or self.B < 0:
            raise ValueError("amplitudes must be nonnegative")
        if self.B**2 >= self.A**2:
            raise ValueError(f"need B^2 < A^2, got A={self.A}, B={self.B}")

    @classmethod
    def normalized(cls, H: float, ratio: float = 0.0) -> FgnParams:
        """Unit-variance parameters: ``A = 1/sqrt(V_H)`` and ``B^2 = ratio * A^2``."""
        A = 1.0 / math.sqrt(fgn_normalizer(H))
        return cls(H, A, math.sqrt(ratio) * A)


def fgn_normalizer(H: float) -> float:
    """``V_H = Gamma(H) Gamma(1-H) / (pi Gamma(2H+1))``.

    Uses the reflection formula ``Gamma(H) Gamma(1-H) = pi / sin(pi H)``, so
    nothing overflows as H approaches 0 or 1, and ``V_0.5 == 1.0`` exactly.
    """
    if not 0.0 < H < 1.0:
        raise ValueError(f"Hurst parameter must lie in (0, 1), got {H}")
    return 1.0 / (math.sin(math.pi * min(H, 1.0 - H)) * math.gamma(2.0 * H + 1.0))


def _fgn_bracket(H: float, lags: np.ndarray) -> np.ndarray:
    """``|t+1|^2H + |t-1|^2H - 2|t|^2H`` for integer lags ``t >= 0``.

    Large lags use ``t^2H * 2 * sum_k C(2H, 2k) t^-2k``; every term of that
    series has the same sign, so there is no cancellation.
    """
    a = 2.0 * H
    t = lags.astype(float)
    out = np.empty_like(t)
    small = t < _SERIES_MIN_LAG
    ts = t[small]
    out[small] = (ts + 1) ** a + np.abs(ts - 1) ** a - 2 * ts**a

    tl = t[~small]
    if tl.size:
        x2 = tl**-2.0
        coef = 1.0
        acc = np.zeros_like(tl)
        power = np.ones_like(tl)
        for j in range(1, 2 * _SERIES_TERMS + 1):
            coef *= (a - j + 1) / j
            if j % 2 == 0:
                power = power * x2
                acc += coef * power
        out[~small] = 2.0 * tl**a * acc
    return out


def fgn_autocovariance(H: float, A: float, n: int) -> np.ndarray:
    """fGn autocovariance ``(V_H/2) A^2 (|t+1|^2H + |t-1|^2H - 2|t|^2H)`` for t = 0..n."""
    if not 0.0 < H < 1.0:
        raise ValueError(f"Hurst parameter must lie in (0, 1), got {H}")
    if A < 0:
        raise ValueError("amplitude must be nonnegative")
    if n < 0:
        raise ValueError("n must be nonnegative")
    return 0.5 * fgn_normalizer(H) * A * A * _fgn_bracket(H, np.arange(n + 1))


def improper_fgn_spec(params: FgnParams, n: int) -> CovarianceSpec:
    """Improper fGn: ``r_zz`` has the fGn form with amplitude B, so ``r = (B/A)^2 s``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    base = fgn_autocovariance(params.H, 1.0, n)
    return CovarianceSpec(
        params.A**2 * base,
        params.B**2 * base,
        extend=partial(improper_fgn_spec, params),
    )
