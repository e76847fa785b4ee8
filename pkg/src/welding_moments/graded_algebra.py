"""Graded polynomial algebra in u, ubar, l, lbar with rho-power bookkeeping.

Elements are finite sums of monomials

    u^a ubar^b l^c lbar^d * rho0^(c0 + d0*lam) * rhoinf^(c1 + d1*lam)

with coefficients in Q[lam].  The index-0 generator of every family is the
constant 1 (``u_0 = 1``), so ``gen("u", 0)`` is simply ``1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial, gcd
from typing import Any, Callable, Iterable, Mapping, Sequence

__all__ = [
    "FAMILIES",
    "LambdaPoly",
    "AlgebraElement",
    "Partition",
    "OperatorMatrix",
    "GradeError",
    "gen",
    "rho0",
    "rhoinf",
    "const",
    "LAM",
    "enumerate_partitions",
    "partition_count",
    "monomial",
    "monomial_basis",
    "coordinates",
    "inner_product",
    "materialize",
    "kernel",
    "rref",
    "rank",
]

FAMILIES = ("u", "ubar", "l", "lbar")
_FIDX = {f: i for i, f in enumerate(FAMILIES)}
_CONJ_FAMILY = (1, 0, 3, 2)


class GradeError(ValueError):
    """An element leaves the graded component it was declared to live in."""


def _frac(x: Any) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _norm_exp(x: Any):
    if type(x) is int:
        return x
    x = _frac(x)
    return int(x) if x.denominator == 1 else x


# --------------------------------------------------------------------------
# Q[lam]


class LambdaPoly:
    """Univariate polynomial in the formal real symbol ``lam`` over Q."""

    __slots__ = ("c",)

    def __init__(self, coeffs: Iterable[Any] = ()):
        c = [_frac(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.c = tuple(c)

    @classmethod
    def const(cls, x: Any) -> "LambdaPoly":
        return cls((x,))

    @property
    def degree(self) -> int:
        return len(self.c) - 1

    def is_constant(self) -> bool:
        return len(self.c) <= 1

    def constant(self) -> Fraction:
        return self.c[0] if self.c else Fraction(0)

    def __bool__(self) -> bool:
        return bool(self.c)

    def _lift(self, other: Any) -> "LambdaPoly | None":
        if isinstance(other, LambdaPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return LambdaPoly((other,))
        return None

    def __add__(self, other: Any):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        n = max(len(self.c), len(o.c))
        a = self.c + (Fraction(0),) * (n - len(self.c))
        b = o.c + (Fraction(0),) * (n - len(o.c))
        return LambdaPoly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return LambdaPoly(-x for x in self.c)

    def __sub__(self, other: Any):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: Any):
        return (-self) + other

    def __mul__(self, other: Any):
        if isinstance(other, (int, Fraction)):
            return LambdaPoly(x * other for x in self.c)
        if not isinstance(other, LambdaPoly):
            return NotImplemented
        if not self.c or not other.c:
            return LambdaPoly()
        out = [Fraction(0)] * (len(self.c) + len(other.c) - 1)
        for i, x in enumerate(self.c):
            if x:
                for j, y in enumerate(other.c):
                    out[i + j] += x * y
        return LambdaPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, other: Any):
        if isinstance(other, (int, Fraction)):
            return LambdaPoly(x / other for x in self.c)
        if isinstance(other, LambdaPoly) and other.is_constant() and other.c:
            return self / other.c[0]
        return NotImplemented

    def __eq__(self, other: object) -> bool:
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self.c == o.c

    def __hash__(self):
        return hash(self.c)

    def conj(self) -> "LambdaPoly":
        return self

    def inverse(self) -> "LambdaPoly":
        if not self.is_constant() or not self.c:
            raise ZeroDivisionError("only nonzero constants are invertible in Q[lam]")
        return LambdaPoly((1 / self.c[0],))

    def evaluate(self, lam: Any) -> Any:
        acc = 0
        for x in reversed(self.c):
            acc = acc * lam + x
        return acc

    def __str__(self) -> str:
        if not self.c:
            return "0"
        parts = []
        for i, x in enumerate(self.c):
            if x == 0:
                continue
            if i == 0:
                parts.append(str(x))
            else:
                mono = "lam" if i == 1 else f"lam^{i}"
                parts.append(mono if x == 1 else ("-" + mono if x == -1 else f"{x}*{mono}"))
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"LambdaPoly({self})"


LAM_POLY = LambdaPoly((0, 1))


# --------------------------------------------------------------------------
# monomial keys
#
# key = (fam0, fam1, fam2, fam3, r0c, r0d, ric, rid)
# famX is a tuple of exponents of generators 1, 2, ... (trailing zeros stripped)

_EMPTY_KEY = ((), (), (), (), 0, 0, 0, 0)


def _strip(t: Sequence[int]) -> tuple:
    t = list(t)
    while t and t[-1] == 0:
        t.pop()
    return tuple(t)


def _add_exps(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, x in enumerate(b):
        out[i] += x
    return _strip(out)


def _key_mul(k1: tuple, k2: tuple) -> tuple:
    return (
        _add_exps(k1[0], k2[0]),
        _add_exps(k1[1], k2[1]),
        _add_exps(k1[2], k2[2]),
        _add_exps(k1[3], k2[3]),
        _norm_exp(k1[4] + k2[4]),
        _norm_exp(k1[5] + k2[5]),
        _norm_exp(k1[6] + k2[6]),
        _norm_exp(k1[7] + k2[7]),
    )


def _key_conj(k: tuple) -> tuple:
    return (k[1], k[0], k[3], k[2]) + k[4:]


def _weight(exps: tuple) -> int:
    return sum((i + 1) * e for i, e in enumerate(exps))


def _coef(x: Any) -> LambdaPoly:
    if isinstance(x, LambdaPoly):
        return x
    return LambdaPoly((x,))


class AlgebraElement:
    """Immutable sparse polynomial; see module docstring."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[tuple, Any] | None = None, _trusted: bool = False):
        if _trusted:
            self.terms = terms  # type: ignore[assignment]
        else:
            t = {}
            for k, v in (terms or {}).items():
                v = _coef(v)
                if v:
                    t[k] = v
            self.terms = t
        self._hash = None

    # construction --------------------------------------------------------
    @classmethod
    def scalar(cls, x: Any) -> "AlgebraElement":
        return cls({_EMPTY_KEY: _coef(x)})

    # arithmetic ------------------------------------------------------------
    @staticmethod
    def _lift(x: Any) -> "AlgebraElement | None":
        if isinstance(x, AlgebraElement):
            return x
        if isinstance(x, (int, Fraction, LambdaPoly)):
            return AlgebraElement.scalar(x)
        return None

    def __add__(self, other: Any):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if len(o.terms) > len(self.terms):
            a, b = o.terms, self.terms
        else:
            a, b = self.terms, o.terms
        t = dict(a)
        for k, v in b.items():
            if k in t:
                s = t[k] + v
                if s:
                    t[k] = s
                else:
                    del t[k]
            else:
                t[k] = v
        return AlgebraElement(t, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraElement({k: -v for k, v in self.terms.items()}, _trusted=True)

    def __sub__(self, other: Any):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: Any):
        return (-self) + other

    def __mul__(self, other: Any):
        if isinstance(other, (int, Fraction, LambdaPoly)):
            if other == 0:
                return AlgebraElement()
            return AlgebraElement({k: v * other for k, v in self.terms.items()}, _trusted=True)
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        t: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = _key_mul(k1, k2)
                p = v1 * v2
                if k in t:
                    t[k] = t[k] + p
                else:
                    t[k] = p
        return AlgebraElement({k: v for k, v in t.items() if v}, _trusted=True)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = AlgebraElement.scalar(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def __truediv__(self, other: Any):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / other)
        return NotImplemented

    def __eq__(self, other: object) -> bool:
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # structure ---------------------------------------------------------------
    def conj(self) -> "AlgebraElement":
        """Ring involution: swaps u<->ubar and l<->lbar; rho and lam are real."""
        return AlgebraElement({_key_conj(k): v for k, v in self.terms.items()}, _trusted=True)

    def inverse(self) -> "AlgebraElement":
        if len(self.terms) != 1:
            raise ZeroDivisionError("only monomial units are invertible")
        (k, v), = self.terms.items()
        if any(k[:4]):
            raise ZeroDivisionError("polynomial generators are not invertible")
        return AlgebraElement(
            {(k[0], k[1], k[2], k[3], -k[4], -k[5], -k[6], -k[7]): v.inverse()}, _trusted=True
        )

    def weights(self) -> set[tuple[int, int, int, int]]:
        return {tuple(_weight(k[i]) for i in range(4)) for k in self.terms}

    def rho_powers(self) -> set[tuple]:
        return {k[4:] for k in self.terms}

    def families(self) -> set[str]:
        out = set()
        for k in self.terms:
            for i in range(4):
                if k[i]:
                    out.add(FAMILIES[i])
        return out

    def map_coefficients(self, fn: Callable[[LambdaPoly], Any]) -> "AlgebraElement":
        return AlgebraElement({k: fn(v) for k, v in self.terms.items()})

    def specialize_lambda(self, lam: Any) -> "AlgebraElement":
        """Substitute a rational value for ``lam`` (including in rho exponents)."""
        lam = _frac(lam)
        t: dict = {}
        for k, v in self.terms.items():
            nk = k[:4] + (_norm_exp(k[4] + k[5] * lam), 0, _norm_exp(k[6] + k[7] * lam), 0)
            c = LambdaPoly((v.evaluate(lam),))
            t[nk] = t[nk] + c if nk in t else c
        return AlgebraElement(t)

    def scale_rho(self, r0: tuple = (0, 0), ri: tuple = (0, 0)) -> "AlgebraElement":
        """Multiply by rho0^(r0[0]+r0[1] lam) rhoinf^(ri[0]+ri[1] lam)."""
        k = ((), (), (), (), _norm_exp(r0[0]), _norm_exp(r0[1]), _norm_exp(ri[0]), _norm_exp(ri[1]))
        return AlgebraElement({_key_mul(kk, k): v for kk, v in self.terms.items()}, _trusted=True)

    def strip_rho(self) -> "AlgebraElement":
        """Drop all rho factors (used once rho bookkeeping has been checked)."""
        t: dict = {}
        for k, v in self.terms.items():
            nk = k[:4] + (0, 0, 0, 0)
            t[nk] = t[nk] + v if nk in t else v
        return AlgebraElement(t)

    def evaluate(self, values: Mapping[tuple[str, int], Any], one: Any = Fraction(1)) -> Any:
        """Substitute scalars for generators; rho powers must be absent."""
        acc = one * 0
        for k, v in self.terms.items():
            if any(k[4:]):
                raise ValueError("cannot evaluate an element carrying rho powers")
            if not v.is_constant():
                raise ValueError("cannot evaluate an element with lam-dependent coefficients")
            term = one * v.constant()
            for fi in range(4):
                for i, e in enumerate(k[fi]):
                    if e:
                        term = term * (values[(FAMILIES[fi], i + 1)] ** e)
            acc = acc + term
        return acc

    def derive(self, images: Callable[[str, int], "AlgebraElement"],
               rho_log: Callable[[int], "AlgebraElement"]) -> "AlgebraElement":
        """Apply the derivation fixed by generator images.

        ``images(family, j)`` is the image of a polynomial generator;
        ``rho_log(i)`` is ``D(rho)/rho`` for rho0 (i=0) and rhoinf (i=1).
        """
        acc: dict = {}

        def add(elem: AlgebraElement, key: tuple, coef: LambdaPoly):
            for k2, v2 in elem.terms.items():
                nk = _key_mul(key, k2)
                p = coef * v2
                acc[nk] = acc[nk] + p if nk in acc else p

        for k, v in self.terms.items():
            for fi in range(4):
                exps = k[fi]
                for i, e in enumerate(exps):
                    if not e:
                        continue
                    img = images(FAMILIES[fi], i + 1)
                    if not img:
                        continue
                    lowered = list(exps)
                    lowered[i] -= 1
                    nk = list(k)
                    nk[fi] = _strip(lowered)
                    add(img, tuple(nk), v * e)
            for ri in range(2):
                c, d = k[4 + 2 * ri], k[5 + 2 * ri]
                if c == 0 and d == 0:
                    continue
                img = rho_log(ri)
                if not img:
                    continue
                add(img, k, v * LambdaPoly((c, d)))
        return AlgebraElement({k: v for k, v in acc.items() if v}, _trusted=True)

    def coefficient_of(self, key: tuple) -> LambdaPoly:
        return self.terms.get(key, LambdaPoly())

    # printing ----------------------------------------------------------------
    def sorted_terms(self) -> list[tuple[tuple, LambdaPoly]]:
        return sorted(self.terms.items(), key=lambda kv: _print_order(kv[0]))

    def __str__(self) -> str:
        return format_element(self)

    def __repr__(self) -> str:
        return f"AlgebraElement({self})"


def _print_order(k: tuple):
    return (
        tuple(_weight(k[i]) for i in range(4)),
        tuple(_partition_of(k[i]).sort_key() for i in range(4)),
        tuple(_frac(x) for x in k[4:]),
    )


_GEN_NAMES = ("u", "ub", "l", "lb")


def _format_exp(x) -> str:
    return str(x) if not isinstance(x, Fraction) or x.denominator == 1 else f"({x})"


def _mono_str(k: tuple) -> str:
    parts = []
    for fi in range(4):
        for i, e in enumerate(k[fi]):
            if e == 1:
                parts.append(f"{_GEN_NAMES[fi]}{i + 1}")
            elif e:
                parts.append(f"{_GEN_NAMES[fi]}{i + 1}^{e}")
    for name, c, d in (("rho0", k[4], k[5]), ("rhoinf", k[6], k[7])):
        if c == 0 and d == 0:
            continue
        ex = str(LambdaPoly((c, d)))
        ex = ex if (d == 0 and not str(c).startswith("-") and "/" not in str(c)) else f"({ex})"
        parts.append(name if ex == "1" else f"{name}^{ex}")
    return "*".join(parts)


def format_element(x: AlgebraElement) -> str:
    """Deterministic text form, e.g. ``7*u1^2 - 4*u2``."""
    if not x.terms:
        return "0"
    out = []
    for k, v in x.sorted_terms():
        mono = _mono_str(k)
        if v.is_constant():
            c = v.constant()
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if mono:
                body = mono if a == 1 else f"{a}*{mono}"
            else:
                body = str(a)
        else:
            sign = "+"
            body = f"({v})" + (f"*{mono}" if mono else "")
        out.append((sign, body))
    first_sign, first = out[0]
    s = ("-" if first_sign == "-" else "") + first
    for sign, body in out[1:]:
        s += f" {sign} {body}"
    return s


def gen(family: str, j: int) -> AlgebraElement:
    """Generator ``family_j``; index 0 is the constant 1."""
    if family not in _FIDX:
        raise ValueError(f"unknown family {family!r}")
    if j < 0:
        raise ValueError("generator index must be nonnegative")
    if j == 0:
        return AlgebraElement.scalar(1)
    exps = [0] * j
    exps[j - 1] = 1
    k = [(), (), (), (), 0, 0, 0, 0]
    k[_FIDX[family]] = tuple(exps)
    return AlgebraElement({tuple(k): LambdaPoly((1,))}, _trusted=True)


def rho0(c: Any = 1, d: Any = 0) -> AlgebraElement:
    return AlgebraElement({((), (), (), (), _norm_exp(c), _norm_exp(d), 0, 0): LambdaPoly((1,))})


def rhoinf(c: Any = 1, d: Any = 0) -> AlgebraElement:
    return AlgebraElement({((), (), (), (), 0, 0, _norm_exp(c), _norm_exp(d)): LambdaPoly((1,))})


def const(x: Any) -> AlgebraElement:
    return AlgebraElement.scalar(x)


LAM = AlgebraElement.scalar(LAM_POLY)


# --------------------------------------------------------------------------
# partitions


@dataclass(frozen=True, order=False)
class Partition:
    """Non-increasing tuple of positive parts."""

    parts: tuple[int, ...] = ()

    def __post_init__(self):
        p = tuple(int(x) for x in self.parts)
        if any(x <= 0 for x in p) or list(p) != sorted(p, reverse=True):
            raise ValueError(f"not a partition: {self.parts}")
        object.__setattr__(self, "parts", p)

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def multiplicities(self) -> tuple[int, ...]:
        """Exponent vector (p_1, p_2, ...) with p_j = number of parts equal to j."""
        if not self.parts:
            return ()
        m = [0] * self.parts[0]
        for x in self.parts:
            m[x - 1] += 1
        return tuple(m)

    @classmethod
    def from_multiplicities(cls, mult: Sequence[int]) -> "Partition":
        parts = []
        for j in range(len(mult), 0, -1):
            parts.extend([j] * mult[j - 1])
        return cls(tuple(parts))

    @classmethod
    def parse(cls, text: str) -> "Partition":
        text = text.strip()
        if not text:
            return cls(())
        return cls(tuple(sorted((int(x) for x in text.split("+")), reverse=True)))

    def factorial(self) -> int:
        """p! = prod_j p_j! over multiplicities."""
        out = 1
        for m in self.multiplicities():
            out *= factorial(m)
        return out

    def sort_key(self):
        return self.parts

    def __str__(self) -> str:
        return "+".join(str(x) for x in self.parts)

    def __lt__(self, other: "Partition") -> bool:
        return (self.weight, self.parts) < (other.weight, other.parts)


def _partition_of(exps: tuple) -> Partition:
    return Partition.from_multiplicities(exps)


@lru_cache(maxsize=None)
def _partitions(n: int, largest: int) -> tuple[tuple[int, ...], ...]:
    if n == 0:
        return ((),)
    out = []
    for first in range(1, min(n, largest) + 1):
        for rest in _partitions(n - first, first):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def enumerate_partitions(n: int) -> tuple[Partition, ...]:
    """All partitions of ``n`` in the canonical order.

    Parts are listed in non-increasing order and partitions are sorted
    lexicographically on that tuple, so ``u1^3, u2*u1, u3`` at n = 3.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    return tuple(Partition(p) for p in sorted(_partitions(n, n)))


def partition_count(n: int) -> int:
    return len(enumerate_partitions(n))


def monomial(family: str, p: Partition | str | Sequence[int]) -> AlgebraElement:
    if isinstance(p, str):
        p = Partition.parse(p)
    elif not isinstance(p, Partition):
        p = Partition(tuple(sorted(p, reverse=True)))
    k = [(), (), (), (), 0, 0, 0, 0]
    k[_FIDX[family]] = p.multiplicities()
    return AlgebraElement({tuple(k): LambdaPoly((1,))}, _trusted=True)


def monomial_basis(n: int, family: str = "u") -> list[AlgebraElement]:
    return [monomial(family, p) for p in enumerate_partitions(n)]


def pure_partition(x_key: tuple, family: str) -> Partition:
    return _partition_of(x_key[_FIDX[family]])


def coordinates(x: AlgebraElement, n: int, family: str = "u") -> list[Fraction]:
    """Coordinates of ``x`` in the weight-n monomial basis of one family.

    Raises :class:`GradeError` if ``x`` has terms outside that component.
    """
    fi = _FIDX[family]
    index = {p.multiplicities(): i for i, p in enumerate(enumerate_partitions(n))}
    out = [Fraction(0)] * len(index)
    for k, v in x.terms.items():
        if any(k[j] for j in range(4) if j != fi) or any(k[4:]):
            raise GradeError(f"term {_mono_str(k)} is not pure in family {family}")
        if k[fi] not in index:
            raise GradeError(f"term {_mono_str(k) or '1'} is not of weight {n}")
        if not v.is_constant():
            raise GradeError("coordinates require rational coefficients")
        out[index[k[fi]]] += v.constant()
    return out


def from_coordinates(vec: Sequence[Any], n: int, family: str = "u") -> AlgebraElement:
    acc = AlgebraElement()
    for c, m in zip(vec, monomial_basis(n, family)):
        if c:
            acc = acc + m * _frac(c)
    return acc


def inner_product(x: AlgebraElement, y: AlgebraElement) -> LambdaPoly:
    """<u^p, u^q> = p! if p == q else 0, extended sesquilinearly.

    Both operands must be pure in one common generator family.
    """
    fams = x.families() | y.families()
    if len(fams) > 1:
        raise ValueError(f"inner product needs a single family, got {sorted(fams)}")
    for z in (x, y):
        if any(any(k[4:]) for k in z.terms):
            raise ValueError("inner product operands must not carry rho powers")
    fi = _FIDX[fams.pop()] if fams else 0
    acc = LambdaPoly()
    for k, v in x.terms.items():
        w = y.terms.get(k)
        if w is not None:
            acc = acc + v * w.conj() * _partition_of(k[fi]).factorial()
    return acc


# --------------------------------------------------------------------------
# matrices and exact linear algebra


@dataclass(frozen=True)
class OperatorMatrix:
    """Entry (Q, P) is the coefficient of basis monomial Q in the image of P."""

    rows: tuple[Partition, ...]
    cols: tuple[Partition, ...]
    entries: tuple[tuple[Fraction, ...], ...]
    name: str = ""

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), len(self.cols))

    def transpose(self) -> "OperatorMatrix":
        ent = tuple(tuple(self.entries[i][j] for i in range(len(self.rows))) for j in range(len(self.cols)))
        return OperatorMatrix(self.cols, self.rows, ent, self.name + "^T")

    def apply(self, vec: Sequence[Fraction]) -> list[Fraction]:
        return [sum((a * b for a, b in zip(row, vec)), Fraction(0)) for row in self.entries]

    def hstack(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if self.rows != other.rows:
            raise ValueError("row labels differ")
        ent = tuple(a + b for a, b in zip(self.entries, other.entries))
        return OperatorMatrix(self.rows, self.cols + other.cols, ent, f"[{self.name}|{other.name}]")

    def to_lists(self) -> list[list[str]]:
        return [[str(x) for x in row] for row in self.entries]


def materialize(
    op: Callable[[AlgebraElement], AlgebraElement],
    n_from: int,
    n_to: int,
    family: str = "u",
    name: str = "",
) -> OperatorMatrix:
    """Exact matrix of a linear map between graded components of one family."""
    cols = enumerate_partitions(n_from)
    rows = enumerate_partitions(n_to)
    columns = [coordinates(op(monomial(family, p)), n_to, family) for p in cols]
    ent = tuple(tuple(columns[j][i] for j in range(len(cols))) for i in range(len(rows)))
    return OperatorMatrix(rows, cols, ent, name)


def rref(mat: Sequence[Sequence[Any]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Q with pivots chosen left to right, top to bottom."""
    a = [[_frac(x) for x in row] for row in mat]
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return a, pivots


def _integer_rows(mat: Sequence[Sequence[Any]]) -> list[list[int]]:
    out = []
    for row in mat:
        fr = [_frac(x) for x in row]
        den = 1
        for x in fr:
            den = den * x.denominator // gcd(den, x.denominator)
        out.append([int(x * den) for x in fr])
    return out


def bareiss_rank(mat: Sequence[Sequence[Any]]) -> int:
    """Exact rank by fraction-free (Bareiss) elimination on integer-scaled rows."""
    a = _integer_rows(mat)
    if not a:
        return 0
    nrows, ncols = len(a), len(a[0])
    prev = 1
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        for i in range(r + 1, nrows):
            f = a[i][c]
            a[i] = [(p * x - f * y) // prev for x, y in zip(a[i], a[r])]
        prev = p
        r += 1
        if r == nrows:
            break
    return r


def rank(m: OperatorMatrix | Sequence[Sequence[Any]]) -> int:
    ent = m.entries if isinstance(m, OperatorMatrix) else m
    if not ent or not ent[0]:
        return 0
    return bareiss_rank(ent)


def kernel(m: OperatorMatrix | Sequence[Sequence[Any]]) -> list[list[Fraction]]:
    """Canonical kernel basis: the RREF of any kernel basis (leading ones)."""
    ent = m.entries if isinstance(m, OperatorMatrix) else m
    ncols = len(m.cols) if isinstance(m, OperatorMatrix) else (len(ent[0]) if ent else 0)
    if ncols == 0:
        return []
    if not ent:
        red, piv = [], []
    else:
        red, piv = rref(ent)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, pc in zip(red, piv):
            v[pc] = -row[f]
        basis.append(v)
    if not basis:
        return []
    canon, _ = rref(basis)
    return [row for row in canon if any(row)]


def primitive_integer(vec: Sequence[Fraction]) -> list[int]:
    """Scale a rational vector to coprime integers with positive leading entry."""
    den = 1
    for x in vec:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in vec]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        return ints
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x)
    return ints if lead > 0 else [-x for x in ints]


__all__ += ["format_element", "from_coordinates", "primitive_integer", "bareiss_rank", "LAM_POLY"]
