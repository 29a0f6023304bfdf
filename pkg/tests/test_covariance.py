import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from improper_sim.covariance import (
    BivariateCovariance,
    CovarianceSpec,
    FgnParams,
    bivariate_to_complex,
    complex_to_bivariate,
    fgn_autocovariance,
    fgn_normalizer,
    improper_fgn_spec,
    validate_spec,
)


def mp_fgn(H, A, tau, dps=50):
    """High-precision fGn autocovariance straight from the Gamma-function definition."""
    with mp.workdps(dps):
        H = mp.mpf(H)
        V = mp.gamma(H) * mp.gamma(1 - H) / (mp.pi * mp.gamma(2 * H + 1))
        a = 2 * H
        t = mp.mpf(tau)
        return V / 2 * mp.mpf(A) ** 2 * ((t + 1) ** a + abs(t - 1) ** a - 2 * t**a)


# --- conversion ---------------------------------------------------------------


def test_proper_white_noise_splits_variance():
    biv = complex_to_bivariate(CovarianceSpec([2, 0], [0, 0]))
    np.testing.assert_array_equal(biv.s_xx, [1, 0])
    np.testing.assert_array_equal(biv.s_yy, [1, 0])
    np.testing.assert_array_equal(biv.s_xy_pos, [0, 0])
    np.testing.assert_array_equal(biv.s_xy_neg, [0, 0])


def test_real_improper_arithmetic():
    biv = complex_to_bivariate(CovarianceSpec([2, 1], [1, 0.5]))
    np.testing.assert_array_equal(biv.s_xx, [1.5, 0.75])
    np.testing.assert_array_equal(biv.s_yy, [0.5, 0.25])
    assert not biv.s_xy_pos.any() and not biv.s_xy_neg.any()


def test_imaginary_autocovariance_gives_antisymmetric_cross():
    biv = complex_to_bivariate(CovarianceSpec([1, 1j], [0, 0]))
    assert biv.s_xy(1) == -0.5
    assert biv.s_xy(-1) == 0.5
    assert biv.s_xx[1] == 0 and biv.s_yy[1] == 0


def test_independent_components_to_complex():
    spec = bivariate_to_complex(BivariateCovariance([1, 0], [1, 0], [0, 0], [0, 0]))
    np.testing.assert_array_equal(spec.s_zz, [2, 0])
    np.testing.assert_array_equal(spec.r_zz, [0, 0])


def test_proper_bivariate_structure_gives_zero_complementary():
    biv = BivariateCovariance([1, 0.3, 0.1], [1, 0.3, 0.1], [0, 0.2, -0.4], [0, -0.2, 0.4])
    spec = bivariate_to_complex(biv)
    assert not np.any(spec.r_zz)


def test_rejects_bad_lag_zero():
    with pytest.raises(ValueError):
        CovarianceSpec([0, 0], [0, 0])
    with pytest.raises(ValueError):
        CovarianceSpec([1 + 0.1j, 0], [0, 0])
    with pytest.raises(ValueError):
        complex_to_bivariate(CovarianceSpec([-1, 0], [0, 0], validate=False))


@st.composite
def valid_specs(draw, max_n=12):
    n = draw(st.integers(1, max_n))
    fin = st.floats(-5, 5, allow_nan=False)
    s0 = draw(st.floats(0.01, 10))
    r0 = complex(draw(fin), draw(fin))
    if abs(r0) > s0:
        r0 *= 0.999 * s0 / abs(r0)
    s = [s0] + [complex(draw(fin), draw(fin)) for _ in range(n)]
    r = [r0] + [complex(draw(fin), draw(fin)) for _ in range(n)]
    return CovarianceSpec(s, r)


@given(valid_specs())
def test_round_trip_complex(spec):
    back = bivariate_to_complex(complex_to_bivariate(spec))
    np.testing.assert_allclose(back.s_zz, spec.s_zz, rtol=0, atol=1e-12)
    np.testing.assert_allclose(back.r_zz, spec.r_zz, rtol=0, atol=1e-12)


@given(valid_specs())
def test_round_trip_bivariate(spec):
    biv = complex_to_bivariate(spec)
    again = complex_to_bivariate(bivariate_to_complex(biv))
    for name in ("s_xx", "s_yy", "s_xy_pos", "s_xy_neg"):
        np.testing.assert_allclose(getattr(again, name), getattr(biv, name), rtol=0, atol=1e-12)


@given(valid_specs())
def test_properness_detection(spec):
    biv = complex_to_bivariate(spec)
    proper_form = np.array_equal(biv.s_xx, biv.s_yy) and np.array_equal(biv.s_xy_pos, -biv.s_xy_neg)
    assert proper_form == (not np.any(spec.r_zz))


def test_full_covariance_layout():
    biv = complex_to_bivariate(CovarianceSpec([2, 0.5 + 0.25j, 0.1], [0.5, 0.2j, 0.05]))
    C = biv.full_covariance(3)
    # Cov(x_t, y_s) = s_xy(t - s)
    assert C[1, 3 + 0] == biv.s_xy(1)
    assert C[0, 3 + 1] == biv.s_xy(-1)
    assert C[3 + 1, 0] == biv.s_xy(-1)
    np.testing.assert_array_equal(C, C.T)


# --- fGn ------------------------------------------------------------------------


def test_normalizer_white_noise_is_exactly_one():
    assert fgn_normalizer(0.5) == 1.0


@pytest.mark.parametrize("H", [1e-6, 0.05, 0.3, 0.5, 0.75, 0.95, 0.9999, 1 - 1e-9])
def test_normalizer_matches_gamma_definition(H):
    with mp.workdps(40):
        h = mp.mpf(H)
        V = mp.gamma(h) * mp.gamma(1 - h) / (mp.pi * mp.gamma(2 * h + 1))
    assert fgn_normalizer(H) == pytest.approx(float(V), rel=1e-13)


def test_white_noise_sequence():
    np.testing.assert_array_equal(fgn_autocovariance(0.5, 1.0, 5), [1, 0, 0, 0, 0, 0])
    np.testing.assert_array_equal(fgn_autocovariance(0.5, 3.0, 3), [9, 0, 0, 0])


def test_normalized_variance_and_lag_one():
    A = 1 / math.sqrt(fgn_normalizer(0.75))
    s = fgn_autocovariance(0.75, A, 2)
    assert s[0] == pytest.approx(1.0, rel=1e-14)
    assert s[1] == pytest.approx(math.sqrt(2) - 1, rel=1e-13)
    assert s[1] == pytest.approx(0.414214, abs=1e-6)


@pytest.mark.parametrize("H", [0.05, 0.3, 0.55, 0.75, 0.95, 0.9999])
def test_fgn_against_high_precision(H):
    taus = [0, 1, 2, 3, 7, 8, 9, 15, 16, 100, 1000, 12345, 10**6]
    s = fgn_autocovariance(H, 1.0, 10**6)
    for tau in taus:
        assert s[tau] == pytest.approx(float(mp_fgn(H, 1.0, tau)), rel=1e-11), tau


@settings(deadline=None)
@given(st.floats(0.02, 0.98), st.integers(0, 300))
def test_fgn_telescoping(H, k):
    A = 1.3
    s = fgn_autocovariance(H, A, k + 1)
    total = s[0] + 2 * s[1 : k + 1].sum()
    expected = fgn_normalizer(H) * A * A * ((k + 1) ** (2 * H) - k ** (2 * H))
    assert total == pytest.approx(expected, rel=1e-9, abs=1e-12)


@settings(deadline=None)
@given(st.floats(0.01, 0.99).filter(lambda h: abs(h - 0.5) > 1e-3))
def test_fgn_sign_pattern(H):
    s = fgn_autocovariance(H, 1.0, 2000)
    if H > 0.5:
        assert np.all(s > 0)
    else:
        assert np.all(s[1:] < 0)


def test_fgn_rejects_bad_hurst():
    for H in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            fgn_autocovariance(H, 1.0, 4)
        with pytest.raises(ValueError):
            FgnParams(H, 1.0, 0.5)


def test_improper_fgn_proper_case():
    spec = improper_fgn_spec(FgnParams(0.7, 1.0, 0.0), 10)
    assert not np.any(spec.r_zz)


@given(st.floats(0.05, 0.95), st.floats(0.1, 3.0), st.floats(0.0, 0.99))
def test_improper_fgn_ratio(H, A, q):
    B = q * A
    spec = improper_fgn_spec(FgnParams(H, A, B), 50)
    assert spec.is_real
    nz = spec.s_zz != 0
    np.testing.assert_allclose(spec.r_zz[nz] / spec.s_zz[nz], B**2 / A**2, rtol=1e-12)
    assert validate_spec(spec) == []


def test_improper_fgn_normalized_complementary_variance():
    spec = improper_fgn_spec(FgnParams.normalized(0.75, 0.5), 4)
    assert spec.r_zz[0].real == pytest.approx(0.5, rel=1e-14)


def test_improper_fgn_rejects_b_not_below_a():
    with pytest.raises(ValueError):
        FgnParams(0.75, 1.0, 1.0)
    with pytest.raises(ValueError):
        FgnParams(0.75, 1.0, 1.5)


def test_improper_fgn_extends_itself():
    spec = improper_fgn_spec(FgnParams(0.8, 1.0, 0.5), 10)
    longer = spec.with_lags(40)
    assert longer.n == 40
    np.testing.assert_array_equal(longer.s_zz[:11], spec.s_zz)


def test_with_lags_zero_pads_without_model():
    spec = CovarianceSpec([1, 0.5], [0.2, 0.1])
    padded = spec.with_lags(3)
    np.testing.assert_array_equal(padded.s_zz, [1, 0.5, 0, 0])


# --- validate_spec ------------------------------------------------------------


def test_validate_reports_infeasible_variance():
    assert "|r(0)| > s(0)" in validate_spec([1, 0], [2, 0])


def test_validate_reports_complex_variance():
    assert "s_zz(0) not real" in validate_spec([1 + 0.1j, 0], [0, 0])


def test_validate_reports_everything_and_never_raises():
    problems = validate_spec([-1 + 1j, 0], [5, 0, 0])
    assert "s_zz(0) not real" in problems
    assert "s_zz(0) <= 0" in problems
    assert any("lags" in p for p in problems)
    assert validate_spec([]) != []
