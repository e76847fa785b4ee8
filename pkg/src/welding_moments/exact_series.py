"""Exact truncated Laurent series over a generic coefficient ring.

A :class:`Series` is stored in the *local* variable of its expansion point:
``t = z`` at zero and ``t = 1/z`` at infinity.  Coefficients are known for
local exponents ``<= high`` (``high is None`` means the series is an exact
finite Laurent polynomial).  Reading a coefficient beyond ``high`` raises
:class:`TruncationError` instead of returning zero.

Coefficients may be :class:`fractions.Fraction` (or ``int``), or any object
implementing ``+ - *``, ``== 0``, multiplication by ``Fraction``, and
optionally ``conj()`` and ``inverse()``.
"""

from __future__ import annotations

from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Iterable, Mapping

Rational = Fraction

__all__ = [
    "Rational",
    "Point",
    "Series",
    "SeriesError",
    "TruncationError",
    "PointMismatchError",
    "parse_rational",
    "compose",
    "revert",
    "residue",
    "project",
    "conj_star",
    "reciprocal",
    "power",
]


class SeriesError(ArithmeticError):
    """Base class for series failures."""


class TruncationError(SeriesError):
    """A coefficient outside the tracked validity window was requested."""


class PointMismatchError(SeriesError):
    """Operands are expanded at different points."""


class Point(str, Enum):
    ZERO = "zero"
    INFINITY = "infinity"


def parse_rational(text: str | int | Fraction) -> Fraction:
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    return Fraction(str(text).strip())


def _is_zero(c: Any) -> bool:
    return c == 0


def _conj(c: Any) -> Any:
    if isinstance(c, (int, Fraction)):
        return c
    return c.conj()


def _inverse(c: Any) -> Any:
    if isinstance(c, (int, Fraction)):
        if c == 0:
            raise SeriesError("leading coefficient is not invertible")
        return Fraction(1) / c
    inv = getattr(c, "inverse", None)
    if inv is None:
        raise SeriesError(f"cannot invert coefficient of type {type(c).__name__}")
    return inv()


def _min_high(*hs: int | None) -> int | None:
    known = [h for h in hs if h is not None]
    return min(known) if known else None


class Series:
    """Immutable truncated Laurent series (see module docstring)."""

    __slots__ = ("_c", "high", "point")

    def __init__(
        self,
        local_coeffs: Mapping[int, Any] | None = None,
        high: int | None = None,
        point: Point = Point.ZERO,
    ):
        point = Point(point)
        c = {}
        for e, v in (local_coeffs or {}).items():
            if high is not None and e > high:
                continue
            if not _is_zero(v):
                c[int(e)] = v
        self._c = c
        self.high = high
        self.point = point

    # construction -----------------------------------------------------
    @classmethod
    def from_z(
        cls,
        coeffs: Mapping[int, Any],
        high_z: int | None = None,
        point: Point = Point.ZERO,
    ) -> "Series":
        """Build from a map ``z``-exponent -> coefficient.

        ``high_z`` is the truncation bound in the local variable expressed as
        a ``z`` exponent: the largest known exponent at zero, the most
        negative known exponent at infinity.
        """
        point = Point(point)
        sign = 1 if point is Point.ZERO else -1
        high = None if high_z is None else sign * high_z
        return cls({sign * e: v for e, v in coeffs.items()}, high, point)

    @classmethod
    def monomial(cls, e: int, coeff: Any = 1, point: Point = Point.ZERO) -> "Series":
        return cls.from_z({e: Fraction(coeff) if isinstance(coeff, int) else coeff}, None, point)

    @classmethod
    def identity(cls, point: Point = Point.ZERO) -> "Series":
        return cls.monomial(1, Fraction(1), point)

    # inspection -------------------------------------------------------
    @property
    def exact(self) -> bool:
        return self.high is None

    def _sign(self) -> int:
        return 1 if self.point is Point.ZERO else -1

    @property
    def order_low(self) -> int | None:
        """Lowest possibly-nonzero exponent in ``z`` (None for the zero series)."""
        if not self._c:
            return None
        s = self._sign()
        return min(s * e for e in self._c)

    @property
    def order_high(self) -> int | None:
        """Highest known or stored exponent in ``z``.

        At zero this is the truncation bound; at infinity the series is exact
        towards ``+inf`` so this is the top stored exponent.
        """
        if self.point is Point.ZERO:
            return self.high
        return max((-e for e in self._c), default=None)

    def local_terms(self) -> dict[int, Any]:
        return dict(self._c)

    def terms(self) -> dict[int, Any]:
        s = self._sign()
        return {s * e: v for e, v in sorted(self._c.items())}

    def valuation(self) -> int | None:
        """Lowest nonzero local exponent."""
        return min(self._c) if self._c else None

    def _local(self, e: int) -> Any:
        if self.high is not None and e > self.high:
            raise TruncationError(
                f"local exponent {e} is beyond the tracked bound {self.high}"
            )
        return self._c.get(e, 0)

    def coefficient(self, e: int) -> Any:
        """Coefficient of ``z**e``; raises outside the validity window."""
        return self._local(self._sign() * e)

    def __getitem__(self, e: int) -> Any:
        return self.coefficient(e)

    def is_zero(self) -> bool:
        return not self._c

    def __repr__(self) -> str:
        parts = [f"({v})*z^{e}" for e, v in self.terms().items()]
        body = " + ".join(parts) if parts else "0"
        if self.high is not None:
            tail = self.high + 1
            body += f" + O(z^{tail if self.point is Point.ZERO else -tail})"
        return f"Series[{self.point.value}]({body})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Series):
            return NotImplemented
        return (
            self.point == other.point
            and self.high == other.high
            and self._c.keys() == other._c.keys()
            and all(_is_zero(self._c[k] - other._c[k]) for k in self._c)
        )

    def __hash__(self):  # pragma: no cover - series are not used as keys
        raise TypeError("Series is unhashable")

    def agrees_with(self, other: "Series", through: int | None = None) -> bool:
        """Equality of coefficients through a common local bound."""
        self._check_point(other)
        h = _min_high(self.high, other.high, through)
        keys = set(self._c) | set(other._c)
        return all(
            _is_zero(self._c.get(k, 0) - other._c.get(k, 0))
            for k in keys
            if h is None or k <= h
        )

    # point handling ----------------------------------------------------
    def at_point(self, point: Point) -> "Series":
        """Re-expand an exact finite Laurent polynomial at another point."""
        point = Point(point)
        if point is self.point:
            return self
        if not self.exact:
            raise PointMismatchError("only exact Laurent polynomials can change point")
        return Series({-e: v for e, v in self._c.items()}, None, point)

    def _check_point(self, other: "Series") -> None:
        if self.point is not other.point:
            raise PointMismatchError(
                f"expansion points differ: {self.point.value} vs {other.point.value}"
            )

    def _coerce(self, other: "Series") -> "Series":
        if other.point is self.point:
            return other
        if other.exact:
            return other.at_point(self.point)
        raise PointMismatchError(
            f"expansion points differ: {self.point.value} vs {other.point.value}"
        )

    # ring operations ----------------------------------------------------
    def _scalar_like(self, x: Any) -> bool:
        return not isinstance(x, Series)

    def __add__(self, other: Any) -> "Series":
        if self._scalar_like(other):
            other = Series({0: other}, None, self.point)
        elif self.exact and not other.exact:
            return other.__add__(self)
        other = self._coerce(other)
        c = dict(self._c)
        for e, v in other._c.items():
            c[e] = c[e] + v if e in c else v
        return Series(c, _min_high(self.high, other.high), self.point)

    __radd__ = __add__

    def __neg__(self) -> "Series":
        return Series({e: -v for e, v in self._c.items()}, self.high, self.point)

    def __sub__(self, other: Any) -> "Series":
        return self + (-other)

    def __rsub__(self, other: Any) -> "Series":
        return (-self) + other

    def scale(self, s: Any) -> "Series":
        return Series({e: v * s for e, v in self._c.items()}, self.high, self.point)

    def __mul__(self, other: Any) -> "Series":
        if self._scalar_like(other):
            return self.scale(other)
        if self.exact and not other.exact:
            return other.__mul__(self)
        other = self._coerce(other)
        va, vb = self.valuation(), other.valuation()
        if va is None or vb is None:
            h = _min_high(self.high, other.high)
            return Series({}, h, self.point)
        ha = None if self.high is None else self.high + vb
        hb = None if other.high is None else other.high + va
        h = _min_high(ha, hb)
        c: dict[int, Any] = {}
        for ea, a in self._c.items():
            for eb, b in other._c.items():
                e = ea + eb
                if h is not None and e > h:
                    continue
                p = a * b
                c[e] = c[e] + p if e in c else p
        return Series(c, h, self.point)

    def __rmul__(self, other: Any) -> "Series":
        return self.scale(other)

    def shift(self, k: int) -> "Series":
        """Multiply by ``z**k``."""
        d = k * self._sign()
        return Series(
            {e + d: v for e, v in self._c.items()},
            None if self.high is None else self.high + d,
            self.point,
        )

    def truncate(self, high_local: int) -> "Series":
        h = _min_high(self.high, high_local)
        return Series(self._c, h, self.point)

    def map_coefficients(self, fn: Callable[[Any], Any]) -> "Series":
        return Series({e: fn(v) for e, v in self._c.items()}, self.high, self.point)

    def derivative(self) -> "Series":
        """``d/dz`` of the series."""
        if self.point is Point.ZERO:
            c = {e - 1: v * e for e, v in self._c.items() if e != 0}
            h = None if self.high is None else self.high - 1
            return Series(c, h, self.point)
        # f = sum a_k t^k with t = 1/z  =>  df/dz = sum -k a_k t^(k+1)
        c = {e + 1: v * (-e) for e, v in self._c.items() if e != 0}
        h = None if self.high is None else self.high + 1
        return Series(c, h, self.point)

    def __pow__(self, n: int) -> "Series":
        if not isinstance(n, int):
            raise TypeError("use power() for non-integer exponents")
        if n < 0:
            return reciprocal(self) ** (-n)
        result = Series({0: Fraction(1)}, None, self.point)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def conj_star(self) -> "Series":
        return conj_star(self)


def _split_unit(f: Series) -> tuple[int, Series]:
    """Write ``f = t**v * g`` with ``g`` a unit in the local variable."""
    v = f.valuation()
    if v is None:
        raise SeriesError("the zero series has no leading term")
    g = Series(
        {e - v: c for e, c in f._c.items()},
        None if f.high is None else f.high - v,
        f.point,
    )
    return v, g


def reciprocal(f: Series, order: int | None = None) -> Series:
    """``1/f``; ``order`` bounds the local exponent when ``f`` is exact."""
    v, g = _split_unit(f)
    g0inv = _inverse(g._c[0])
    gh = g.high
    if gh is None:
        if order is None:
            if len(g._c) == 1:
                return Series({-v: g0inv}, None, f.point)
            raise SeriesError("reciprocal of an exact non-monomial needs an order")
        gh = order + v
    out = {0: g0inv}
    for k in range(1, gh + 1):
        acc = None
        for j in range(1, k + 1):
            gj = g._c.get(j)
            if gj is None or (k - j) not in out:
                continue
            term = gj * out[k - j]
            acc = term if acc is None else acc + term
        if acc is not None and not _is_zero(acc):
            out[k] = -(acc * g0inv)
    return Series({e - v: c for e, c in out.items()}, gh - v, f.point)


def power(f: Series, r: Fraction | int, order: int | None = None) -> Series:
    """``f**r`` for rational ``r`` when ``f = 1 + O(t)`` in the local variable.

    Uses the J. C. P. Miller recurrence ``k g_k = sum_j ((r+1) j - k) f_j g_{k-j}``.
    """
    r = Fraction(r)
    if r.denominator == 1 and f.exact and order is None:
        return f ** int(r)
    if f.valuation() is None or f.valuation() < 0 or f._local(0) != 1:
        raise SeriesError("rational power requires constant term 1")
    h = f.high
    if h is None:
        if order is None:
            raise SeriesError("power of an exact series needs an order")
        h = order
    elif order is not None:
        h = min(h, order)
    g: dict[int, Any] = {0: Fraction(1)}
    for k in range(1, h + 1):
        acc = None
        for j in range(1, k + 1):
            fj = f._c.get(j)
            if fj is None or (k - j) not in g:
                continue
            w = ((r + 1) * j - k) / k
            if w == 0:
                continue
            term = fj * g[k - j] * w
            acc = term if acc is None else acc + term
        if acc is not None and not _is_zero(acc):
            g[k] = acc
    return Series(g, h, f.point)


def compose(f: Series, g: Series, order: int | None = None) -> Series:
    """``f(g(z))`` at zero; ``g`` must have zero constant term.

    Negative powers in ``f`` are allowed and use ``1/g``.
    """
    if f.point is not Point.ZERO or g.point is not Point.ZERO:
        raise PointMismatchError("compose is defined for expansions at zero")
    m = g.valuation()
    if m is None or m < 1:
        raise SeriesError("inner series must have zero constant term")
    bounds = [] if order is None else [order]
    if f.high is not None:
        # the first unknown coefficient of f enters at t^((high+1) m)
        bounds.append((f.high + 1) * m - 1)
    if g.high is not None and f.valuation() is not None:
        bounds.append(g.high + (max(f.valuation(), 1) - 1) * m)
    h = min(bounds) if bounds else None
    if h is not None:
        g = g.truncate(h)
    acc = Series({}, h, Point.ZERO)
    pos = sorted(n for n in f._c if n >= 0)
    run, cur = Series({0: Fraction(1)}, None, Point.ZERO), 0
    for n in pos:
        while cur < n:
            run = run * g
            if h is not None:
                run = run.truncate(h)
            cur += 1
        acc = acc + run.scale(f._c[n])
    neg = sorted((n for n in f._c if n < 0), reverse=True)
    if neg:
        ginv = reciprocal(g, order=h)
        run, cur = Series({0: Fraction(1)}, None, Point.ZERO), 0
        for n in neg:
            while cur > n:
                run = run * ginv
                cur -= 1
            acc = acc + run.scale(f._c[n])
    return acc if h is None else acc.truncate(h)


def revert(u: Series) -> Series:
    """Compositional inverse of ``u = c z + ...`` via Lagrange inversion."""
    if u.point is not Point.ZERO:
        raise PointMismatchError("revert is defined for expansions at zero")
    if u.valuation() != 1:
        raise SeriesError("revert requires a series vanishing to exactly first order")
    if u.high is None:
        raise SeriesError("revert of an exact series needs a truncation bound")
    h = u.high
    _, unit = _split_unit(u)  # u = t * unit
    phi = reciprocal(unit)  # t / u(t), known through h - 1
    coeffs: dict[int, Any] = {}
    pw = Series({0: Fraction(1)}, None, Point.ZERO)
    for n in range(1, h + 1):
        pw = (pw * phi).truncate(h - 1)
        c = pw._local(n - 1)
        if not _is_zero(c):
            coeffs[n] = c * Fraction(1, n)
    return Series(coeffs, h, Point.ZERO)


def residue(f: Series, at: Point | str = Point.ZERO) -> Any:
    """Coefficient of ``z**-1``; negated when ``at`` is infinity."""
    at = Point(at)
    c = f.coefficient(-1)
    return c if at is Point.ZERO else -c


def project(f: Series, part: str | int) -> Series | Any:
    """``minus``: exponents < 0; ``plus``: >= 0; ``plusplus``: > 0; int k: one coefficient."""
    if isinstance(part, int) and not isinstance(part, bool):
        return f.coefficient(part)
    s = f._sign()
    if part == "minus":
        keep = lambda ez: ez < 0  # noqa: E731
        bound = -1
    elif part == "plus":
        keep = lambda ez: ez >= 0  # noqa: E731
        bound = 0
    elif part == "plusplus":
        keep = lambda ez: ez > 0  # noqa: E731
        bound = 1
    else:
        raise ValueError(f"unknown projection {part!r}")
    c = {e: v for e, v in f._c.items() if keep(s * e)}
    finite = (f.point is Point.ZERO and part == "minus") or (
        f.point is Point.INFINITY and part in ("plus", "plusplus")
    )
    if finite:
        # the kept exponents are all on the exact side; make sure they are known
        if f.high is not None and f.high < s * bound * (1 if f.point is Point.ZERO else 1):
            need = -1 if f.point is Point.ZERO else -bound
            if f.high < need:
                raise TruncationError(
                    f"projection {part} needs local exponent {need}, bound is {f.high}"
                )
        return Series(c, None, f.point)
    return Series(c, f.high, f.point)


def conj_star(f: Series) -> Series:
    """``sum conj(f_n) z**-n``: local coefficients are conjugated and the point flips."""
    other = Point.INFINITY if f.point is Point.ZERO else Point.ZERO
    return Series({e: _conj(v) for e, v in f._c.items()}, f.high, other)


def series_from_coeffs(
    coeffs: Iterable[Any], start: int = 0, high: int | None = None
) -> Series:
    """Series at zero with ``coeffs[i]`` at exponent ``start + i``."""
    d = {start + i: (Fraction(c) if isinstance(c, int) else c) for i, c in enumerate(coeffs)}
    return Series(d, high, Point.ZERO)


class GaussianRational:
    """Exact complex number ``re + im*i`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: Any = 0, im: Any = 0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def parse(cls, text: str) -> "GaussianRational":
        """Accept ``"1/2"``, ``"1/2+1/3 i"``, ``"-1/4i"``, ``"1/2-1/3*i"``."""
        s = text.replace(" ", "").replace("*", "").replace("j", "i")
        if not s:
            raise ValueError("empty complex literal")
        if not s.endswith("i"):
            return cls(Fraction(s), 0)
        body = s[:-1]
        cut = max(body.rfind("+"), body.rfind("-"))
        while cut > 0 and body[cut - 1] in "eE/":
            cut = max(body.rfind("+", 0, cut), body.rfind("-", 0, cut))
        if cut <= 0:
            im = body if body not in ("", "+", "-") else body + "1"
            return cls(0, Fraction(im))
        re, im = body[:cut], body[cut:]
        if im in ("+", "-"):
            im += "1"
        return cls(Fraction(re), Fraction(im))

    def _lift(self, o: Any) -> "GaussianRational | None":
        if isinstance(o, GaussianRational):
            return o
        if isinstance(o, (int, Fraction)):
            return GaussianRational(o, 0)
        return None

    def __add__(self, o):
        o = self._lift(o)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, o):
        o = self._lift(o)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        o = self._lift(o)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._lift(o)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, o):
        return self.inverse() * o

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out, base = GaussianRational(1), self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def __eq__(self, o: object) -> bool:
        o2 = self._lift(o)
        if o2 is None:
            return NotImplemented
        return self.re == o2.re and self.im == o2.im

    def __hash__(self):
        return hash((self.re, self.im))

    def conj(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def inverse(self) -> "GaussianRational":
        d = self.abs2()
        if d == 0:
            raise ZeroDivisionError("division by zero")
        return GaussianRational(self.re / d, -self.im / d)

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __str__(self) -> str:
        sign = "-" if self.im < 0 else "+"
        return f"{self.re}{sign}{abs(self.im)} i"

    def __repr__(self) -> str:
        return f"GaussianRational({self})"


__all__ += ["GaussianRational", "series_from_coeffs"]
