"""Closed-form welding family and the area-theorem formula for the dilation a.

For ``|w| < 1`` and ``N >= 1`` the family is

    sigma(z) = z (1 + conj(w) z^-N)^(1/N) / (1 + w z^N)^(1/N)

with interior map ``u(z) = z (1 + w z^N)^(-1/N)``.  From
``sigma^N - conj(w) = (1 - |w|^2) u^N`` the exterior map is
``L(z) = z (1 - conj(w) z^-N)^(1/N)`` and ``a = (1 - |w|^2)^(1/N)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import mpmath

from .exact_series import GaussianRational, Point, Series, power, reciprocal, revert
from .virasoro_ops import compute_P, convert_l_b

__all__ = [
    "FamilyError",
    "FamilyPoint",
    "FamilySeries",
    "family_series",
    "literal_b_coefficients",
    "family_a_closed",
    "AreaResult",
    "area_theorem_a",
    "family_area",
    "PCheck",
    "family_P_check",
    "residue_P_values",
    "InversionReport",
    "inversion_check",
    "welding_identity_check",
]

DEFAULT_ORDER = 200
WORK_DPS = 50


class FamilyError(ValueError):
    pass


def _gr(x: Any) -> GaussianRational:
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, str):
        return GaussianRational.parse(x)
    if isinstance(x, complex):
        return GaussianRational(Fraction(x.real), Fraction(x.imag))
    return GaussianRational(Fraction(x), 0)


@dataclass(frozen=True)
class FamilyPoint:
    N: int
    w: GaussianRational

    def __init__(self, N: int, w: Any):
        w = _gr(w)
        if N < 1:
            raise FamilyError("N must be a positive integer")
        if w.abs2() >= 1:
            raise FamilyError("the family needs |w| < 1")
        object.__setattr__(self, "N", int(N))
        object.__setattr__(self, "w", w)


@dataclass
class FamilySeries:
    u: list[GaussianRational]  # u_1..u_order
    l: list[GaussianRational]  # l_1..l_order
    b: list[GaussianRational]  # b_1..b_order


def _binomial_series(c: GaussianRational, N: int, r: Fraction, order: int) -> list[GaussianRational]:
    """Coefficients 1..order of (1 + c t^N)^r in t."""
    base = Series({0: GaussianRational(1), N: c}, None, Point.ZERO)
    s = power(base, r, order)
    return [_gr(s.coefficient(k)) for k in range(1, order + 1)]


def family_series(pt: FamilyPoint, order: int) -> FamilySeries:
    """u, l, b coefficients through ``order``.

    ``u`` and ``b`` are binomial series; ``l`` is obtained from ``b`` by
    inverting the unit series (the l/b conversion).
    """
    if order < pt.N:
        raise FamilyError("order must be at least N")
    u = _binomial_series(pt.w, pt.N, Fraction(-1, pt.N), order)
    b = _binomial_series(-pt.w.conj(), pt.N, Fraction(1, pt.N), order)
    l = [_gr(x) for x in convert_l_b("l_from_b", b)]
    return FamilySeries(u, l, b)


def literal_b_coefficients(pt: FamilyPoint, order: int) -> list[GaussianRational]:
    """The single-term exterior coefficients ``b_N = conj(w)`` (others zero).

    Kept as a diagnostic: this is the exterior map without the 1/N power,
    which only coincides with the family (up to the sign of b_1) at N = 1.
    """
    out = [GaussianRational(0)] * order
    if pt.N <= order:
        out[pt.N - 1] = pt.w.conj()
    return out


@dataclass(frozen=True)
class ClosedA:
    exact: Fraction | None
    value: mpmath.mpf

    def text(self, digits: int = 15) -> str:
        return str(self.exact) if self.exact is not None else mpmath.nstr(self.value, digits)


def family_a_closed(pt: FamilyPoint) -> ClosedA:
    """``(1 - |w|^2)^(1/N)``; exact when the root is rational."""
    base = 1 - pt.w.abs2()
    root = _rational_root(base, pt.N)
    with mpmath.workdps(WORK_DPS):
        val = mpmath.root(mpmath.mpf(base.numerator) / base.denominator, pt.N)
    return ClosedA(root, val)


def _rational_root(q: Fraction, N: int) -> Fraction | None:
    def iroot(n: int) -> int | None:
        r = round(n ** (1.0 / N)) if n else 0
        for c in (r - 1, r, r + 1):
            if c >= 0 and c ** N == n:
                return c
        return None

    a, b = iroot(q.numerator), iroot(q.denominator)
    return None if a is None or b is None else Fraction(a, b)


@dataclass
class AreaResult:
    value: mpmath.mpf
    tail_bound: mpmath.mpf
    order: int
    numerator: Fraction
    denominator: Fraction
    decay: float | None
    decay_source: str


def _tail(weight_shift: int, start: int, q: mpmath.mpf, C: mpmath.mpf) -> mpmath.mpf:
    """Upper bound for sum_{n>=start} (n + weight_shift) C q^n with 0 <= q < 1."""
    if C == 0 or q == 0:
        return mpmath.mpf(0)
    # sum_{n>=s} (n+k) q^n = q^s ((s+k)/(1-q) + q/(1-q)^2)
    return C * q ** start * ((start + weight_shift) / (1 - q) + q / (1 - q) ** 2)


def _decay_estimate(seq: Sequence[Fraction]) -> tuple[float | None, Fraction]:
    nz = [(n, x) for n, x in enumerate(seq, start=1) if x]
    if len(nz) < 2:
        return (0.0 if nz else None), Fraction(0)
    tail = nz[-min(len(nz), 8):]
    ratios = []
    for (n1, x1), (n2, x2) in zip(tail, tail[1:]):
        ratios.append(float(x2 / x1) ** (1.0 / (n2 - n1)))
    q = max(ratios)
    n_last, x_last = nz[-1]
    return q, x_last / Fraction(q) ** n_last if q > 0 else Fraction(0)


def area_theorem_a(
    u: Sequence[Any],
    b: Sequence[Any],
    order: int,
    decay: tuple[float, float] | None = None,
) -> AreaResult:
    """Truncated ``((1 - sum (m-1)|b_m|^2) / (1 + sum (n+1)|u_n|^2))^(1/2)``.

    The sums run over indices ``<= order`` in exact rationals.  The tail
    bound assumes ``|c_n|^2 <= C q^n`` for both sequences; ``decay=(C, q)``
    supplies it, otherwise ``q`` is estimated from the last computed terms
    (reported as an estimate, not a proof).
    """
    ua = [_gr(x).abs2() for x in list(u)[:order]]
    ba = [_gr(x).abs2() for x in list(b)[:order]]
    num = 1 - sum(((m - 1) * x for m, x in enumerate(ba, start=1)), Fraction(0))
    den = 1 + sum(((n + 1) * x for n, x in enumerate(ua, start=1)), Fraction(0))
    if num <= 0:
        raise FamilyError("truncated numerator is not positive")
    with mpmath.workdps(WORK_DPS):
        val = mpmath.sqrt(mpmath.mpf(num.numerator) / num.denominator / (mpmath.mpf(den.numerator) / den.denominator))
        if decay is not None:
            C, q = mpmath.mpf(decay[0]), mpmath.mpf(decay[1])
            src = "supplied"
            Cu = Cb = C
        else:
            qu, Cu_ = _decay_estimate(ua)
            qb, Cb_ = _decay_estimate(ba)
            q = mpmath.mpf(max(qu or 0.0, qb or 0.0))
            Cu = mpmath.mpf(Cu_.numerator) / Cu_.denominator
            Cb = mpmath.mpf(Cb_.numerator) / Cb_.denominator
            src = "estimated"
        if q >= 1:
            tail = mpmath.inf
        else:
            tden = _tail(1, order + 1, q, Cu)
            tnum = _tail(-1, order + 1, q, Cb)
            n_ = mpmath.mpf(num.numerator) / num.denominator
            d_ = mpmath.mpf(den.numerator) / den.denominator
            lo = mpmath.sqrt(max(n_ - tnum, mpmath.mpf(0)) / (d_ + tden))
            tail = max(abs(val - lo), mpmath.mpf(0))
    return AreaResult(val, tail, order, num, den, None if decay is None else float(decay[1]), src)


def family_area(pt: FamilyPoint, order: int = DEFAULT_ORDER, literal_b: bool = False) -> AreaResult:
    """area_theorem_a on the family with its known decay ``|c_n|^2 <= |w|^(2n/N)``."""
    fs = family_series(pt, order)
    b = literal_b_coefficients(pt, order) if literal_b else fs.b
    q = float(pt.w.abs2()) ** (1.0 / pt.N)
    return area_theorem_a(fs.u, b, order, decay=(1.0, q))


# --------------------------------------------------------------------------
# residue polynomials on the family


def _evaluate_P(n: int, coeffs: Sequence[GaussianRational], family: str = "u") -> GaussianRational:
    values = {(family, j): c for j, c in enumerate(coeffs, start=1)}
    poly = compute_P(n).value
    acc = GaussianRational(0)
    for key, v in poly.terms.items():
        term = GaussianRational(v.constant())
        for j, e in enumerate(key[0], start=1):
            if e:
                term = term * values[(family, j)] ** e
        acc = acc + term
    return acc


def residue_P_values(coeffs: Sequence[GaussianRational], n_max: int) -> list[GaussianRational]:
    """P_1..P_n_max straight from the series: residues of (d log U)^2, U = inverse of t(1+sum c_k t^k)."""
    c = {1: GaussianRational(1)}
    for k, x in enumerate(coeffs[: n_max + 1], start=1):
        c[k + 1] = _gr(x)
    u = Series(c, n_max + 2, Point.ZERO)
    U = revert(u)
    q = U.derivative() * reciprocal(U)
    sq = q * q
    out = []
    for n in range(1, n_max + 1):
        out.append(_gr(sq.coefficient(n - 2)))
    return out


@dataclass
class PCheck:
    n: int
    P_u: GaussianRational
    P_l: GaussianRational
    expected_u: GaussianRational
    expected_l: GaussianRational
    residue_route_u: GaussianRational
    pattern_ok: bool
    stated_relation_ok: bool  # P_n(u) == -conj(P_n(l))
    signed_relation_ok: bool  # P_n(u) == (-1)^m conj(P_n(l))

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "P_u": str(self.P_u),
            "P_l": str(self.P_l),
            "expected_u": str(self.expected_u),
            "expected_l": str(self.expected_l),
            "pattern": self.pattern_ok,
            "relation_minus_conj": self.stated_relation_ok,
            "relation_signed_conj": self.signed_relation_ok,
        }


def family_P_check(pt: FamilyPoint, n: int, _series: FamilySeries | None = None) -> PCheck:
    """Evaluate P_n at the family's u and l coefficients and compare with the pattern.

    Pattern: ``P_{mN}(u) = (m+1) w^m``, ``P_{mN}(l) = (m+1)(-conj w)^m``,
    zero when N does not divide n.  Both the relation
    ``P_n(u) = -conj(P_n(l))`` and the sign-corrected
    ``P_n(u) = (-1)^m conj(P_n(l))`` are reported.
    """
    fs = _series or family_series(pt, max(n, pt.N) + 1)
    Pu = _evaluate_P(n, fs.u[:n])
    Pl = _evaluate_P(n, fs.l[:n])
    res_u = residue_P_values(fs.u, n)[n - 1]
    if n % pt.N == 0:
        m = n // pt.N
        eu = pt.w ** m * (m + 1)
        el = (-pt.w.conj()) ** m * (m + 1)
        sign = -1 if m % 2 else 1
    else:
        m = None
        eu = el = GaussianRational(0)
        sign = 1
    return PCheck(
        n,
        Pu,
        Pl,
        eu,
        el,
        res_u,
        pattern_ok=(Pu == eu and Pl == el and res_u == Pu),
        stated_relation_ok=(Pu == -Pl.conj()),
        signed_relation_ok=(Pu == Pl.conj() * sign),
    )


# --------------------------------------------------------------------------
# inversion


@dataclass
class InversionReport:
    ok: bool
    order: int
    parameter: GaussianRational
    mismatches: list[int] = field(default_factory=list)
    a_equal: bool = True


def inversion_check(pt: FamilyPoint, order: int) -> InversionReport:
    """Build ``1/conj(L(1/conj z))`` from the exterior coefficients and compare with the family at ``-w``.

    With ``L(z) = z (1 + sum b_m z^-m)`` one has
    ``1/conj(L(1/conj z)) = z / (1 + sum conj(b_m) z^m)``.
    """
    fs = family_series(pt, order)
    denom = Series({0: GaussianRational(1), **{m: x.conj() for m, x in enumerate(fs.b, start=1)}}, order, Point.ZERO)
    inv = reciprocal(denom)
    target_pt = FamilyPoint(pt.N, -pt.w)
    target = family_series(target_pt, order).u
    bad = [k for k in range(1, order + 1) if _gr(inv.coefficient(k)) != target[k - 1]]
    a_eq = family_a_closed(target_pt).value == family_a_closed(pt).value
    return InversionReport(not bad and a_eq, order, target_pt.w, bad, a_eq)


def welding_identity_check(pt: FamilyPoint, samples: Sequence[Any]) -> bool:
    """Exact check of ``sigma^N - conj(w) = (1 - |w|^2) u^N`` at sample values ``s = z^N``."""
    w, wb = pt.w, pt.w.conj()
    for s in samples:
        s = _gr(s)
        lhs = (s + wb) / (GaussianRational(1) + w * s) - wb
        rhs = s / (GaussianRational(1) + w * s) * (1 - pt.w.abs2())
        if lhs != rhs:
            return False
    return True
