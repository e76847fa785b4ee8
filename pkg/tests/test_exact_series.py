from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from welding_moments.exact_series import (
    GaussianRational,
    Point,
    Series,
    SeriesError,
    TruncationError,
    compose,
    conj_star,
    power,
    project,
    reciprocal,
    residue,
    revert,
    series_from_coeffs,
)

z = Series.identity()
rationals = st.fractions(min_value=-5, max_value=5, max_denominator=7)


def poly(*cs):
    return series_from_coeffs([F(c) for c in cs])


def unit_series(coeffs, high):
    # 1 + c1 z + c2 z^2 + ... known through z^high
    return Series({0: F(1), **{k: c for k, c in enumerate(coeffs, start=1)}}, high)


# -- worked values -----------------------------------------------------------


def test_reciprocal_geometric():
    assert reciprocal(poly(1, 1), order=3) == Series({0: 1, 1: -1, 2: 1, 3: -1}, 3)


def test_sqrt_binomial():
    assert power(poly(1, 1), F(1, 2), order=2) == Series({0: 1, 1: F(1, 2), 2: F(-1, 8)}, 2)


def test_family_geometric_series():
    w = F(1, 3)
    s = power(poly(1, w), -1, order=4) * z
    assert [s.coefficient(k) for k in range(1, 5)] == [1, -w, w**2, -(w**3)]


def test_compose_with_identity_and_scaling():
    f = Series({1: 1, 2: 3, 3: -2}, 6)
    assert compose(f, z) == f
    assert compose(poly(0, 0, 1), poly(0, 2)) == poly(0, 0, 4)


def test_compose_with_catalan_inverse():
    f = poly(0, 1, 1)
    g = Series({1: 1, 2: -1, 3: 2, 4: -5}, 4)
    assert compose(f, g).agrees_with(Series({1: 1}, None), through=4)


def test_revert_examples():
    assert revert(Series({1: 1}, 6)) == Series({1: 1}, 6)
    assert revert(Series({1: 1, 2: -1}, 4)) == Series({1: 1, 2: 1, 3: 2, 4: 5}, 4)
    w = F(2, 5)
    u = z * reciprocal(poly(1, w), order=8)
    want = z * reciprocal(poly(1, -w), order=8)
    assert revert(u.truncate(8)).agrees_with(want, through=8)


def test_residues_at_both_points():
    inv = Series.monomial(-1)
    assert residue(inv) == 1
    assert residue(inv.at_point(Point.INFINITY), Point.INFINITY) == -1
    assert residue(poly(0, 1, 0, 1)) == 0


def test_projections():
    f = Series({-2: 1, 0: 3, 1: 1}, None)
    assert project(f, "minus") == Series({-2: 1}, None)
    assert project(f, "plusplus") == Series({1: 1}, None)
    w = F(1, 2)
    u = z * reciprocal(poly(1, w), order=5)
    assert project(u, 2) == -w


def test_conj_star_moves_to_infinity():
    s = conj_star(z)
    assert s.point is Point.INFINITY and s.coefficient(-1) == 1
    u1 = GaussianRational(F(1, 2), F(1, 3))
    t = conj_star(Series({2: u1}, None))
    assert t.coefficient(-2) == u1.conj()


def test_truncation_is_explicit():
    s = Series({0: 1, 1: 2}, 3)
    with pytest.raises(TruncationError):
        s.coefficient(4)
    with pytest.raises(SeriesError):
        reciprocal(poly(1, 1))  # exact non-monomial needs an order


# -- ring laws and oracles ----------------------------------------------------


@given(st.lists(rationals, min_size=1, max_size=6), st.lists(rationals, min_size=1, max_size=6))
def test_multiplication_commutes(a, b):
    A, B = unit_series(a, 6), unit_series(b, 6)
    assert A * B == B * A


@given(st.lists(rationals, min_size=1, max_size=5), st.lists(rationals, min_size=1, max_size=5), st.lists(rationals, min_size=1, max_size=5))
def test_distributive(a, b, c):
    A, B, C = unit_series(a, 5), unit_series(b, 5), unit_series(c, 5)
    assert A * (B + C) == A * B + A * C


@given(st.lists(rationals, min_size=1, max_size=8))
def test_reciprocal_is_inverse(a):
    A = unit_series(a, 8)
    assert (A * reciprocal(A)).agrees_with(Series({0: 1}, None), through=8)


@given(st.lists(rationals, min_size=1, max_size=6), st.integers(1, 4))
def test_rational_power_round_trip(a, k):
    A = unit_series(a, 6)
    r = power(A, F(1, k))
    assert (r**k).agrees_with(A, through=6)


@given(st.lists(rationals, min_size=1, max_size=6))
def test_revert_composes_to_identity(a):
    u = z * unit_series(a, 6)
    U = revert(u.truncate(7))
    assert compose(u.truncate(7), U).agrees_with(z, through=7)
    assert compose(U, u.truncate(7)).agrees_with(z, through=7)


@given(st.lists(rationals, min_size=2, max_size=6))
def test_revert_matches_bruteforce_solve(a):
    # solve u(U(t)) = t coefficient by coefficient, independently of Lagrange inversion
    u = z * unit_series(a, 6)
    order = 6
    U = {1: F(1)}
    for n in range(2, order + 1):
        U[n] = F(0)
        trial = compose(u.truncate(order), Series(U, order))
        U[n] = -trial.coefficient(n)
    assert revert(u.truncate(order)).agrees_with(Series(U, order), through=order)


@given(st.lists(rationals, min_size=1, max_size=5))
def test_conj_star_involution(a):
    s = Series({k: GaussianRational(c, c / 2) for k, c in enumerate(a, start=1)}, None)
    assert conj_star(conj_star(s)) == s


@given(rationals, rationals, rationals, rationals)
def test_gaussian_field_laws(a, b, c, d):
    x, y = GaussianRational(a, b), GaussianRational(c, d)
    assert x * y == y * x
    assert (x * y).conj() == x.conj() * y.conj()
    if y != GaussianRational(0):
        assert (x / y) * y == x
    assert GaussianRational.parse(str(x)) == x
