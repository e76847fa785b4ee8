from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from welding_moments.graded_algebra import (
    LambdaPoly,
    const,
    enumerate_partitions,
    from_coordinates,
    gen,
    kernel,
    monomial,
    partition_count,
    primitive_integer,
    rank,
    rho0,
    rhoinf,
)
from welding_moments.virasoro_ops import (
    apply_L,
    apply_Lbar,
    b_action_direct,
    build_level_operators,
    commutator_check,
    compute_B,
    compute_P,
    convert_l_b,
    exterior_bracket_check,
    l_b_consistency,
    p_coefficient,
    real_variation,
    stress_check,
    substitute,
    verify_diagonal_lemma,
)

u1, u2, u3 = gen("u", 1), gen("u", 2), gen("u", 3)
ub1 = gen("ubar", 1)
ONE = const(1)
LAM = LambdaPoly((0, 1))
rho_lam = rho0(0, 1)


# -- residue polynomials -------------------------------------------------------


def test_low_P_polynomials():
    assert compute_P(1).value == u1 * -2
    assert compute_P(2).value == u1 * u1 * 7 - u2 * 4
    assert str(compute_P(2)) == "7*u1^2 - 4*u2"


@pytest.mark.parametrize("n", range(1, 9))
def test_P_linear_coefficient(n):
    assert compute_P(n).value.coefficient_of(gen("u", n).sorted_terms()[0][0]).constant() == -2 * n


def test_P2_on_family_point():
    w = F(1, 3)
    val = substitute(compute_P(2).value, "u", {1: const(-w), 2: const(w * w)})
    assert val == const(3 * w * w)


@pytest.mark.parametrize("m", range(-4, 5))
@pytest.mark.parametrize("n", range(0, 7))
def test_B_routes_agree(m, n):
    # compute_B raises if its two residue routes disagree
    compute_B(m, n)


def test_B_special_values():
    assert compute_B(0, 3).value == compute_P(3).value
    assert compute_B(0, 1).value == u1 * -2
    zero_u = {j: const(0) for j in range(1, 4)}
    assert substitute(compute_B(-1, 1).value, "u", zero_u).is_zero()


def test_unit_power_coefficients():
    assert p_coefficient(1, -1) == -u1
    assert p_coefficient(0, 3) == ONE
    assert p_coefficient(1, 2) == u1 * 2


# -- actions on generators -----------------------------------------------------


def test_interior_L_examples():
    assert apply_L(2, rho_lam).is_zero()
    assert apply_L(-1, u1) == rho0(-1) * (u1 * u1 - u2) * 3
    assert apply_L(0, rho_lam * u2) == rho_lam * u2 * (LAM / 2 - 1)
    assert apply_L(-2, rho0(1)) == rho0(-1) * (u1 * u1 * 7 - u2 * 4) * F(1, 2)
    assert apply_L(3, rho0(1)).is_zero()
    assert apply_L(-1, rho0(1)) == -u1


def test_interior_Lbar_examples():
    assert apply_Lbar(3, gen("u", 5)).is_zero()
    assert apply_Lbar(-1, u1) == rho0(-1) * (ONE - u1 * ub1)
    # weight rule k/2 (see the decisions ledger)
    assert apply_Lbar(0, u3) == u3 * F(3, 2)


def test_exterior_scale_is_killed():
    assert apply_L(-2, rhoinf(1)).is_zero()
    assert apply_Lbar(-2, rhoinf(1)).is_zero()


def test_l_b_conversion():
    b1, b2 = F(2), F(3)
    assert convert_l_b("l_from_b", [b1]) == [-b1]
    assert convert_l_b("l_from_b", [b1, b2]) == [-b1, -b2 + b1 * b1]
    b = [F(k, k + 1) for k in range(1, 9)]
    assert convert_l_b("b_from_l", convert_l_b("l_from_b", b)) == b


@pytest.mark.parametrize("n", [-2, -1, 1, 2])
def test_l_and_b_actions_consistent(n):
    assert l_b_consistency(n, 4)
    assert l_b_consistency(n, 4, conjugate=True)
    assert b_action_direct(n, 4)


# -- bracket relations ---------------------------------------------------------

idx = st.integers(-3, 3)
interior_monomial = st.sampled_from(
    [rho_lam * monomial("u", P) for k in range(4) for P in enumerate_partitions(k)]
    + [rho_lam * u2 * ub1, rho_lam * u1 * gen("ubar", 2)]
)


@given(idx, idx, interior_monomial)
def test_interior_bracket(n, m, x):
    assert commutator_check(n, m, x, "LL").is_zero()
    assert commutator_check(n, m, x, "BB").is_zero()
    assert commutator_check(n, m, x, "LB").is_zero()


def test_spec_bracket_samples():
    assert commutator_check(1, -1, rho_lam).is_zero()
    assert commutator_check(2, -2, rho_lam * u1).is_zero()
    assert commutator_check(1, 2, rho_lam * u2 * ub1, "LB").is_zero()


exterior_monomial = st.sampled_from(
    [rhoinf(0, 1) * monomial("l", P) for k in range(3) for P in enumerate_partitions(k)]
)


@given(idx, idx, exterior_monomial)
def test_exterior_rules_satisfy_opposite_bracket(n, m, x):
    assert exterior_bracket_check(n, m, x).is_zero()


def test_exterior_rules_fail_the_interior_sign():
    # documented: the exterior rules do not satisfy [L_n, L_m] = (m-n) L_{n+m}
    assert not commutator_check(1, -1, rhoinf(1)).is_zero()


@pytest.mark.parametrize("target", ["rho0", "rhoinf"])
def test_stress_generating_function(target):
    rep = stress_check(target, (-6, 6))
    assert rep.ok, rep.details


# -- level operators -----------------------------------------------------------


@pytest.mark.parametrize("n", range(1, 6))
def test_level_operator_routes(n):
    ops = build_level_operators(n)
    assert ops.checks and all(ops.checks.values()), ops.checks
    assert rank(ops.R1) == partition_count(n - 1)
    assert len(kernel(ops.R1t)) == partition_count(n) - partition_count(n - 1)


def test_R1_at_level_one():
    assert build_level_operators(1).R1.to_lists() == [["-2"]]


def test_kernel_level_four():
    K = kernel(build_level_operators(4, with_action=False).R1t)
    polys = {str(from_coordinates(primitive_integer(v), 4, "u")) for v in K}
    assert polys == {"3*u1^4 + 16*u1^2*u2 + 16*u1*u3", "2*u2^2 - 3*u1*u3"}


# -- diagonal identities -------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("order", ["L_n L_-n", "L_-n L_n"])
def test_diagonal_identity(n, order):
    assert verify_diagonal_lemma(n, order=order).ok


@pytest.mark.parametrize("m,n", [(2, 1), (3, 1), (3, 2)])
def test_off_diagonal_identity(m, n):
    assert verify_diagonal_lemma(n, m).ok


def test_off_diagonal_identity_at_zero_has_residual():
    # at n = 0 the exact difference is -(lam^2/2) l1 rho0^lam rhoinf^(1-lam), not zero
    r = verify_diagonal_lemma(0, 1)
    assert not r.ok
    assert r.difference == gen("l", 1) * rho_lam * rhoinf(1, -1) * (LAM * LAM * F(-1, 2))


# -- real variation ------------------------------------------------------------


@pytest.mark.parametrize("n", [-1, 0, 1, 2])
def test_real_variation_closed_form(n):
    rv = real_variation(n, 6)
    assert rv["action"] == rv["closed"] == rv["combined"]
