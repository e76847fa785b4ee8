from fractions import Fraction as F

import mpmath as mp
import pytest
from hypothesis import given
from hypothesis import strategies as st

from welding_moments.exact_series import GaussianRational as G
from welding_moments.welding_family import (
    FamilyError,
    FamilyPoint,
    family_a_closed,
    family_area,
    family_P_check,
    family_series,
    inversion_check,
    literal_b_coefficients,
    welding_identity_check,
)

ZERO = G(0)


def test_zero_parameter_is_identity():
    for N in (1, 2, 3):
        fs = family_series(FamilyPoint(N, 0), 10)
        assert all(c == ZERO for c in fs.u + fs.l + fs.b)
        assert family_a_closed(FamilyPoint(N, 0)).exact == 1
        assert family_area(FamilyPoint(N, 0), 20).value == 1


def test_N1_series_is_geometric():
    w = G(F(1, 2), F(1, 3))
    fs = family_series(FamilyPoint(1, w), 6)
    assert fs.u == [(-w) ** k for k in range(1, 7)]


def test_closed_a_values():
    assert family_a_closed(FamilyPoint(1, F(1, 2))).exact == F(3, 4)
    a2 = family_a_closed(FamilyPoint(2, F(1, 2)))
    with mp.workdps(50):
        assert a2.exact is None and abs(a2.value - mp.sqrt(3) / 2) < mp.mpf(10) ** -40


@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("w", [G(F(1, 4)), G(F(1, 2)), G(0, F(1, 2)), G(F(3, 10), F(2, 5))])
def test_area_theorem_limit(N, w):
    pt = FamilyPoint(N, w)
    res = family_area(pt, 200)
    err = abs(res.value - family_a_closed(pt).value)
    assert err < 1e-8
    assert err <= res.tail_bound + mp.mpf(10) ** -40


def test_area_error_shrinks_with_order():
    pt = FamilyPoint(2, F(1, 2))
    target = family_a_closed(pt).value
    errs = [abs(family_area(pt, n).value - target) for n in (10, 20, 40)]
    assert errs[0] > errs[1] > errs[2]


def test_single_term_b_breaks_area_theorem_beyond_N1():
    # b_N = conj(w) alone is the exterior map only for N = 1
    for N, ok in ((1, True), (2, False), (3, False)):
        pt = FamilyPoint(N, F(1, 2))
        err = abs(family_area(pt, 200, literal_b=True).value - family_a_closed(pt).value)
        assert (err < 1e-8) == ok
    assert literal_b_coefficients(FamilyPoint(2, F(1, 3)), 4) == [ZERO, G(F(1, 3)), ZERO, ZERO]


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_P_pattern_and_signed_relation(N):
    pt = FamilyPoint(N, G(F(1, 3), F(-1, 5)))
    fs = family_series(pt, 13)
    for n in range(1, 13):
        c = family_P_check(pt, n, fs)
        assert c.pattern_ok, c.as_dict()
        assert c.signed_relation_ok, c.as_dict()


def test_minus_conj_relation_fails_for_even_m():
    pt = FamilyPoint(2, F(1, 3))
    assert family_P_check(pt, 2).stated_relation_ok  # m = 1
    c = family_P_check(pt, 4)  # m = 2
    assert c.P_u == G(F(1, 3)) and c.P_l == G(F(1, 3))
    assert not c.stated_relation_ok


def test_P2_at_N1():
    w = G(F(1, 2))
    c = family_P_check(FamilyPoint(1, w), 2)
    assert c.P_u == w * w * 3 and c.P_l.conj() == w * w * 3


@pytest.mark.parametrize("N", [1, 2, 3])
def test_inversion_gives_negated_parameter(N):
    pt = FamilyPoint(N, G(F(1, 3), F(1, 7)))
    rep = inversion_check(pt, 50)
    assert rep.ok and rep.parameter == -pt.w


@given(st.fractions(-F(1, 2), F(1, 2), max_denominator=9), st.fractions(-F(1, 2), F(1, 2), max_denominator=9),
       st.integers(1, 4))
def test_welding_identity_exact(re, im, N):
    pt = FamilyPoint(N, G(re, im))
    assert welding_identity_check(pt, [G(F(1, 3)), G(F(-2, 5), F(1, 2)), G(2, -1)])


def test_parameter_validation():
    with pytest.raises(FamilyError):
        FamilyPoint(1, 1)
    with pytest.raises(FamilyError):
        FamilyPoint(0, F(1, 2))
