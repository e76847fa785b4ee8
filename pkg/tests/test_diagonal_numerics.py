import mpmath as mp
import pytest
from hypothesis import given
from hypothesis import strategies as st

from welding_moments.diagonal_numerics import (
    CARDY_EXPONENT,
    WERNER_CONSTANT_LOWER_BOUND,
    ConjectureParams,
    DomainError,
    bessel_K,
    cardy_exponent,
    cardy_F,
    cardy_log_F,
    cumulative_int,
    diag_cdf,
    diag_density,
    diag_laplace,
    large_x_expansion,
    ode_residual,
    regularized_upper_gamma,
    sandwich_check,
    upper_gamma,
)

mp.mp.dps = 40


def close(a, b, tol):
    return abs(mp.mpf(a) - mp.mpf(b)) <= tol


@given(st.floats(-4.5, 4.5), st.floats(0.01, 60))
def test_bessel_matches_mpmath(alpha, x):
    e = bessel_K(alpha, x)
    ref = mp.besselk(alpha, x)
    assert abs(e.value - ref) <= max(e.error_bound, mp.mpf(10) ** -35) * 10 + abs(ref) * mp.mpf(10) ** -35


def test_bessel_half_integer_closed_form():
    assert close(bessel_K(0.5, 1).value, mp.sqrt(mp.pi / 2) * mp.e**-1, 1e-40)
    assert str(bessel_K(0.5, 1).to_dict()["value"]).startswith("0.4610685044")


def test_bessel_envelope():
    with pytest.raises(DomainError):
        bessel_K(1, 1000)
    assert close(bessel_K(1, 1000, strict=False).value, mp.besselk(1, 1000), mp.besselk(1, 1000) * 1e-30)


@given(st.floats(0, 3), st.floats(0.01, 50))
def test_upper_gamma_matches_mpmath(a, z):
    assert close(upper_gamma(a, z).value, mp.gammainc(a, z), abs(mp.gammainc(a, z)) * 1e-30 + 1e-40)


def test_cdf_values():
    assert close(diag_cdf(1, ConjectureParams(1)).value, mp.e**-1, 1e-30)
    assert close(diag_cdf(2, ConjectureParams(1, 0.5)).value, mp.gammainc(0.5, 0.5) / mp.gamma(0.5), 1e-30)
    assert close(diag_cdf(1e12, ConjectureParams(1)).value, 1, 1e-11)
    assert close(regularized_upper_gamma(0.5, 0.5).value, mp.gammainc(0.5, 0.5) / mp.gamma(0.5), 1e-30)


def test_density_integrates_to_cdf():
    p = ConjectureParams(2, 0.5)
    q = mp.quad(lambda t: diag_density(t, p), [0, 1, 3])
    assert close(q, diag_cdf(3, p).value, 1e-20)


@pytest.mark.parametrize("beta", [1, 5])
@pytest.mark.parametrize("c", [0, 0.5])
@pytest.mark.parametrize("lam", [0.1, 1, 10])
def test_laplace_against_quadrature(beta, c, lam):
    p = ConjectureParams(beta, c)
    quad = mp.quad(lambda t: mp.e ** (-lam * t) * diag_density(t, p), [0, 1, 10, mp.inf])
    assert close(diag_laplace(lam, p).value, quad, 1e-8)


def test_laplace_normalization():
    assert close(diag_laplace(0, ConjectureParams(1)).value, 1, 1e-12)
    assert diag_laplace(0, ConjectureParams(1)).to_dict()["value"] == "1.000000000000000"


def test_probability_requires_alpha_positive():
    with pytest.raises(DomainError):
        ConjectureParams(1, 1).require_probability()
    with pytest.raises(DomainError):
        ConjectureParams(0)


@pytest.mark.parametrize("beta,c,lam", [(1, 0, 1), (2, 0.5, 3)])
def test_ode_residual_second_order(beta, c, lam):
    p = ConjectureParams(beta, c)
    r1 = abs(ode_residual(lam, p, mp.mpf("1e-3")).value)
    r2 = abs(ode_residual(lam, p, mp.mpf("5e-4")).value)
    assert abs(ode_residual(lam, p, mp.mpf("1e-4")).value) < 1e-6
    assert 3.5 < r1 / r2 < 4.5


def test_cardy_slope_and_exponent():
    assert close(cardy_F(51).value - cardy_F(50).value, 1, 1e-3)
    assert close(cardy_exponent(0.1).value, 5 * mp.pi**2 / 4, 1e-6)
    assert close(CARDY_EXPONENT, 5 * mp.pi**2 / 4, 1e-30)


def test_cardy_log_space_agrees_with_direct():
    for rho in (0.3, 0.6, 2):
        assert close(cardy_log_F(rho).value, mp.log(cardy_F(rho).value), 1e-25)
    assert cardy_log_F(0.01).value < -1000  # far below double-precision underflow


@given(st.floats(0.05, 30), st.floats(0.2, 12))
def test_cumulative_integral_matches_quadrature(x, beta):
    ref = mp.quad(lambda t: mp.e ** (-beta / t), [0, x])
    got = cumulative_int(x, beta).value
    assert close(got, ref, abs(ref) * 1e-20 + 1e-30)


def test_cumulative_integral_modes():
    beta = 2
    assert close(cumulative_int(5, beta, "series_large").value, cumulative_int(5, beta).value, 1e-30)
    small = cumulative_int(0.05, beta, "asymptotic_small")
    assert close(small.value, cumulative_int(0.05, beta).value, small.error_bound)
    assert cumulative_int(1e-3, 1).value < mp.mpf("1e-400")
    with pytest.raises(DomainError):
        cumulative_int(0.05, beta, "series_large")


def test_large_x_expansion_order():
    exact = cumulative_int(50, 1).value
    assert abs(large_x_expansion(50, 1, 5) - exact) < 1e-6
    assert abs(large_x_expansion(50, 1, 4) - exact) > abs(large_x_expansion(50, 1, 5) - exact)


def test_sandwich_large_beta_violates_lower_bound():
    rep = sandwich_check(100, [1, 2, 3, 5])
    assert not any(r.lower_ok for r in rep.rows)
    assert all(r.upper_ok for r in rep.rows)


def test_werner_constant_is_only_a_bound():
    assert WERNER_CONSTANT_LOWER_BOUND == 1


def test_upper_gamma_domain():
    with pytest.raises(DomainError):
        upper_gamma(-1, 1)
