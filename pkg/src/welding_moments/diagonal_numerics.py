"""High-precision numerics for the conjectured law of ``x = -log a``.

All evaluations run in :mod:`mpmath` at ``WORK_DPS`` decimal digits and
return an :class:`Estimate` carrying a value and an error bound.  The
modified Bessel function K and the incomplete gamma function are computed
here (trapezoid rule on the cosh integral; series and continued fraction);
mpmath's own routines serve only as test oracles and as a fallback outside
the supported Bessel envelope.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import mpmath
from mpmath import mpf

__all__ = [
    "WORK_DPS",
    "HighPrecFloat",
    "DomainError",
    "Estimate",
    "ConjectureParams",
    "WERNER_CONSTANT_LOWER_BOUND",
    "CARDY_EXPONENT",
    "bessel_K",
    "upper_gamma",
    "regularized_upper_gamma",
    "diag_cdf",
    "diag_density",
    "diag_laplace",
    "ode_residual",
    "cardy_F",
    "cardy_log_F",
    "cardy_exponent",
    "cumulative_int",
    "large_x_expansion",
    "SandwichRow",
    "SandwichReport",
    "sandwich_check",
    "sandwich_scan",
]

WORK_DPS = 50
HighPrecFloat = mpf

# Only a lower bound on Werner's constant is known; no value is asserted.
WERNER_CONSTANT_LOWER_BOUND = 1
BESSEL_ENVELOPE_X = (mpf("1e-3"), mpf(100))
BESSEL_ENVELOPE_ALPHA = 5
SERIES_LARGE_MAX_Y = 10


def _cardy_exponent() -> mpf:
    with mpmath.workdps(WORK_DPS):
        return 5 * mpmath.pi ** 2 / 4


CARDY_EXPONENT = _cardy_exponent()


class DomainError(ValueError):
    """Argument outside the supported domain or envelope."""


@dataclass(frozen=True)
class Estimate:
    value: mpf
    error_bound: mpf
    method: str = ""

    def __float__(self) -> float:
        return float(self.value)

    def to_dict(self, digits: int = 16) -> dict:
        return {
            "value": _fmt(self.value, digits),
            "error_bound": mpmath.nstr(self.error_bound, 3),
            "method": self.method,
        }


def _fmt(x: mpf, digits: int = 16) -> str:
    return mpmath.nstr(x, digits, strip_zeros=False)


def _eps() -> mpf:
    return mpf(10) ** (-WORK_DPS)


@dataclass(frozen=True)
class ConjectureParams:
    beta: float | str | mpf
    c: float | str | mpf = 0

    def __post_init__(self):
        with mpmath.workdps(WORK_DPS):
            b = mpf(self.beta)
            c = mpf(self.c)
        if not b > 0:
            raise DomainError("beta must be positive")
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "c", c)

    @property
    def alpha(self) -> mpf:
        with mpmath.workdps(WORK_DPS):
            return 1 - self.c

    def require_probability(self) -> None:
        if not self.alpha > 0:
            raise DomainError("alpha = 1 - c must be positive for a probability law")


# --------------------------------------------------------------------------
# modified Bessel function of the second kind


def _in_envelope(alpha: mpf, x: mpf) -> bool:
    return BESSEL_ENVELOPE_X[0] <= x <= BESSEL_ENVELOPE_X[1] and abs(alpha) <= BESSEL_ENVELOPE_ALPHA


def bessel_K(alpha, x, strict: bool = True) -> Estimate:
    """``K_alpha(x) = int_0^inf exp(-x cosh t) cosh(alpha t) dt`` by the trapezoid rule.

    The cut-off ``T`` makes the log-integrand drop ``dps + 10`` decades below
    its maximum, with the remaining tail bounded by ``g(T)/(x sinh T - |alpha|)``.
    The step is halved until successive sums agree to the working precision;
    the last difference is reported in the error bound.  Outside
    ``x in [1e-3, 100]``, ``|alpha| <= 5`` this raises unless
    ``strict=False``, in which case mpmath's besselk is used.
    """
    with mpmath.workdps(WORK_DPS + 15):
        alpha, x = mpf(alpha), mpf(x)
        if not x > 0:
            raise DomainError("x must be positive")
        if not _in_envelope(alpha, x):
            if strict:
                raise DomainError(f"K_alpha(x) outside the supported envelope: alpha={alpha}, x={x}")
            v = mpmath.besselk(alpha, x)
            return Estimate(+v, abs(v) * _eps() * 10, "mpmath-fallback")
        a = abs(alpha)

        def log_g(t):
            return -x * mpmath.cosh(t) + a * t

        t_star = mpmath.asinh(a / x)
        peak = log_g(t_star)
        drop = (WORK_DPS + 10) * mpmath.log(10)
        lo, hi = t_star, t_star + 1
        while log_g(hi) > peak - drop:
            lo, hi = hi, 2 * hi
        for _ in range(60):
            mid = (lo + hi) / 2
            if log_g(mid) > peak - drop:
                lo = mid
            else:
                hi = mid
        T = hi

        def g(t):
            return mpmath.exp(-x * mpmath.cosh(t)) * mpmath.cosh(alpha * t)

        tail = g(T) / (x * mpmath.sinh(T) - a) if x * mpmath.sinh(T) > a else mpmath.inf
        n = 16
        h = T / n
        total = g(0) / 2 + sum(g(k * h) for k in range(1, n)) + g(T) / 2
        s_prev = total * h
        err = mpmath.inf
        for _ in range(14):
            mids = sum(g((2 * k + 1) * h / 2) for k in range(n))
            total += mids
            n *= 2
            h /= 2
            s = total * h
            err = abs(s - s_prev)
            if err <= abs(s) * _eps():
                break
            s_prev = s
        else:
            raise ArithmeticError("trapezoid rule did not converge")
        bound = err + tail + abs(s) * _eps()
    return Estimate(+s, +bound, "trapezoid")


# --------------------------------------------------------------------------
# incomplete gamma


def _lower_series(a: mpf, z: mpf) -> tuple[mpf, mpf]:
    """gamma(a, z) = z^a e^-z sum z^k / (a (a+1) ... (a+k))."""
    term = 1 / a
    total = term
    k = 0
    while True:
        k += 1
        term *= z / (a + k)
        total += term
        if abs(term) < abs(total) * _eps() / 10:
            break
    pref = mpmath.exp(a * mpmath.log(z) - z)
    return pref * total, abs(pref * term) * 2


def _upper_cf(a: mpf, z: mpf) -> tuple[mpf, mpf]:
    """Gamma(a, z) by the modified Lentz continued fraction."""
    tiny = mpf(10) ** (-(WORK_DPS + 30))
    b = z + 1 - a
    c = 1 / tiny
    d = 1 / b
    f = d
    for i in range(1, 100000):
        an = -i * (i - a)
        b += 2
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1 / d
        delta = d * c
        f *= delta
        if abs(delta - 1) < _eps() / 10:
            break
    else:
        raise ArithmeticError("continued fraction did not converge")
    pref = mpmath.exp(a * mpmath.log(z) - z)
    return pref * f, abs(pref * f) * _eps()


def _upper_small_a(a: mpf, z: mpf) -> tuple[mpf, mpf]:
    """Gamma(a, z) for 0 < a < 1 without the 1/a cancellation of Gamma(a) - gamma(a, z).

    Gamma(a) - z^a/a = ((Gamma(1+a) - 1) - expm1(a log z)) / a, and the rest of
    the lower series sum_{k>=1} (-1)^k z^(a+k) / (k! (a+k)) is O(z).
    """
    lost = int(-mpmath.log10(a)) + 1 if a < mpf("0.1") else 0
    with mpmath.workdps(mpmath.mp.dps + lost):
        head = ((mpmath.gamma(1 + a) - 1) - mpmath.expm1(a * mpmath.log(z))) / a
    za = mpmath.exp(a * mpmath.log(z))
    total = mpf(0)
    term = za  # (-1)^k z^(a+k) / k!
    k = 0
    while True:
        k += 1
        term *= -z / k
        add = term / (a + k)
        total += add
        if abs(add) < _eps() / 10:
            break
    return head - total, abs(add) * 2 + abs(head) * _eps()


def _e1_series(z: mpf) -> tuple[mpf, mpf]:
    total = mpf(0)
    term = mpf(1)
    k = 0
    while True:
        k += 1
        term *= -z / k
        add = term / k
        total += add
        if abs(add) < _eps() / 10:
            break
    return -mpmath.euler - mpmath.log(z) - total, abs(add) * 2


def upper_gamma(a, z) -> Estimate:
    """Upper incomplete gamma ``Gamma(a, z)`` for ``a >= 0``, ``z > 0``."""
    with mpmath.workdps(WORK_DPS + 15):
        a, z = mpf(a), mpf(z)
        if not z > 0 or a < 0:
            raise DomainError("upper_gamma needs a >= 0 and z > 0")
        if a == 0:
            v, e = _e1_series(z) if z <= 2 else _upper_cf(a, z)
            method = "E1-series" if z <= 2 else "continued-fraction"
        elif z < a + 1 and a < 1:
            v, e = _upper_small_a(a, z)
            method = "small-a-series"
        elif z < a + 1:
            low, e = _lower_series(a, z)
            v = mpmath.gamma(a) - low
            method = "series"
        else:
            v, e = _upper_cf(a, z)
            method = "continued-fraction"
    return Estimate(+v, +e, method)


def regularized_upper_gamma(a, z) -> Estimate:
    """``Gamma(a, z) / Gamma(a)`` for ``a > 0``."""
    with mpmath.workdps(WORK_DPS + 15):
        a, z = mpf(a), mpf(z)
        if not a > 0:
            raise DomainError("regularized gamma needs a > 0")
        if z < a + 1:
            low, e = _lower_series(a, z)
            ga = mpmath.gamma(a)
            return Estimate(+(1 - low / ga), +(e / ga), "series")
        v, e = _upper_cf(a, z)
        ga = mpmath.gamma(a)
        return Estimate(+(v / ga), +(e / ga), "continued-fraction")


# --------------------------------------------------------------------------
# conjectured law


def diag_cdf(x, p: ConjectureParams) -> Estimate:
    """P(-log a <= x) = Gamma(alpha, beta/x) / Gamma(alpha)."""
    p.require_probability()
    with mpmath.workdps(WORK_DPS):
        x = mpf(x)
        if not x > 0:
            raise DomainError("x must be positive")
        if p.alpha == 1:
            v = mpmath.exp(-p.beta / x)
            return Estimate(v, abs(v) * _eps(), "exp")
        return regularized_upper_gamma(p.alpha, p.beta / x)


def diag_density(x, p: ConjectureParams) -> mpf:
    """Inverse-gamma density beta^alpha / Gamma(alpha) x^(-alpha-1) exp(-beta/x)."""
    with mpmath.workdps(WORK_DPS):
        x = mpf(x)
        a = p.alpha
        return mpmath.exp(a * mpmath.log(p.beta) - mpmath.loggamma(a) - (a + 1) * mpmath.log(x) - p.beta / x)


def diag_laplace(lam, p: ConjectureParams) -> Estimate:
    """E exp(-lam x) = 2 (beta lam)^(alpha/2) / Gamma(alpha) K_alpha(2 sqrt(beta lam)); 1 at lam = 0."""
    p.require_probability()
    with mpmath.workdps(WORK_DPS + 10):
        lam = mpf(lam)
        if lam < 0:
            raise DomainError("lambda must be nonnegative")
        if lam == 0:
            return Estimate(mpf(1), mpf(0), "limit")
        arg = 2 * mpmath.sqrt(p.beta * lam)
        k = bessel_K(p.alpha, arg, strict=False)
        pref = 2 * mpmath.power(p.beta * lam, p.alpha / 2) / mpmath.gamma(p.alpha)
        v = pref * k.value
        return Estimate(+v, +(abs(pref) * k.error_bound), k.method)


def ode_residual(lam, p: ConjectureParams, h) -> Estimate:
    """lam f'' + c f' - beta f with central differences of diag_laplace."""
    with mpmath.workdps(WORK_DPS):
        lam, h = mpf(lam), mpf(h)
        if not lam > 2 * h > 0:
            raise DomainError("need lam > 2h > 0")
        fm = diag_laplace(lam - h, p)
        f0 = diag_laplace(lam, p)
        fp = diag_laplace(lam + h, p)
        d1 = (fp.value - fm.value) / (2 * h)
        d2 = (fp.value - 2 * f0.value + fm.value) / h ** 2
        r = lam * d2 + p.c * d1 - p.beta * f0.value
        round_err = (fm.error_bound + 2 * f0.error_bound + fp.error_bound) * (lam / h ** 2 + abs(p.c) / h + p.beta)
        return Estimate(r, round_err, "central-difference")


# --------------------------------------------------------------------------
# Cardy's series


def _cardy_pieces(log_q: mpf) -> tuple[mpf, mpf, mpf]:
    """(log of the leading term factor, log of the normalized numerator sum, log product).

    Numerator terms are normalized by the k = 1 term ``q^(5/8)``.
    """
    eps = _eps()
    q_exp = lambda e: mpmath.exp(e * log_q)  # noqa: E731
    total = mpf(1)
    tail = mpf(0)
    for sgn in (1, -1):
        k = 2 if sgn == 1 else 1
        while True:
            kk = sgn * k
            e = mpf(3) * kk * kk / 2 - kk + mpf(1) / 8 - mpf(5) / 8
            term = (-1) ** (kk - 1) * kk * q_exp(e)
            total += term
            if abs(term) < eps * abs(total):
                tail += abs(term)
                break
            k += 1
    log_prod = mpf(0)
    k = 1
    while True:
        qk = q_exp(k)
        log_prod += mpmath.log1p(-qk)
        if qk < eps:
            break
        k += 1
    return mpf(5) / 8 * log_q, mpmath.log(total), log_prod


def cardy_log_F(rho) -> Estimate:
    """log F(rho), assembled in log space."""
    with mpmath.workdps(WORK_DPS + 10):
        rho = mpf(rho)
        if not rho > 0:
            raise DomainError("rho must be positive")
        log_q = -2 * mpmath.pi ** 2 / rho
        lead, lsum, lprod = _cardy_pieces(log_q)
        v = mpmath.log(6 * mpmath.pi) + lead + lsum - lprod
        return Estimate(+v, _eps() * 10 * (1 + abs(v)), "log-space")


def cardy_F(rho) -> Estimate:
    """F(rho) = 6 pi sum_k (-1)^(k-1) k q^(3k^2/2 - k + 1/8) / prod (1 - q^k), q = exp(-2 pi^2 / rho).

    For rho < 0.5 the value is exponentiated from :func:`cardy_log_F`.
    """
    with mpmath.workdps(WORK_DPS + 10):
        rho = mpf(rho)
        if not rho > 0:
            raise DomainError("rho must be positive")
        if rho < mpf("0.5"):
            lf = cardy_log_F(rho)
            v = mpmath.exp(lf.value)
            return Estimate(+v, abs(v) * lf.error_bound * 2, "log-space")
        q = mpmath.exp(-2 * mpmath.pi ** 2 / rho)
        eps = _eps()
        num = mpf(0)
        for sgn in (1, -1):
            k = 1
            while True:
                kk = sgn * k
                term = (-1) ** (kk - 1) * kk * q ** (mpf(3) * kk * kk / 2 - kk + mpf(1) / 8)
                num += term
                if abs(term) < eps * abs(num):
                    break
                k += 1
        prod = mpf(1)
        k = 1
        while True:
            qk = q ** k
            prod *= 1 - qk
            if qk < eps:
                break
            k += 1
        v = 6 * mpmath.pi * num / prod
        return Estimate(+v, abs(v) * eps * 10, "direct")


def cardy_exponent(rho) -> Estimate:
    """-rho (log F(rho) - log 6 pi), which tends to 5 pi^2 / 4 as rho -> 0."""
    with mpmath.workdps(WORK_DPS):
        lf = cardy_log_F(rho)
        rho = mpf(rho)
        v = -rho * (lf.value - mpmath.log(6 * mpmath.pi))
        return Estimate(v, rho * lf.error_bound, "log-space")


# --------------------------------------------------------------------------
# cumulative integral of exp(-beta / y)


def cumulative_int(x, beta, mode: str = "closed") -> Estimate:
    """int_0^x exp(-beta/y) dy.

    ``closed``: x e^(-beta/x) - beta Gamma(0, beta/x).
    ``series_large``: x - beta log x + beta(log beta + gamma - 1)
    - sum_{n>=2} (-1)^n beta^n / (n! (n-1)) x^(1-n), summed to convergence.
    ``asymptotic_small``: (x^2/beta) e^(-beta/x) sum (-1)^n (n+1)! (x/beta)^n,
    optimally truncated; only for x <= beta/5.
    """
    with mpmath.workdps(WORK_DPS + 10):
        x, beta = mpf(x), mpf(beta)
        if not x > 0 or not beta > 0:
            raise DomainError("x and beta must be positive")
        y = beta / x
        if mode == "closed":
            g = upper_gamma(0, y)
            v = x * mpmath.exp(-y) - beta * g.value
            return Estimate(+v, +(beta * g.error_bound + abs(v) * _eps()), "closed")
        if mode == "series_large":
            if y > SERIES_LARGE_MAX_Y:
                raise DomainError(f"series_large needs beta/x <= {SERIES_LARGE_MAX_Y}")
            v = x - beta * mpmath.log(x) + beta * (mpmath.log(beta) + mpmath.euler - 1)
            n = 1
            term_x = x  # (-1)^n beta^n x^(1-n) / n! built incrementally
            while True:
                n += 1
                term_x = term_x * (-y) / n if n > 2 else x * y * y / 2
                term = -term_x / (n - 1)
                v += term
                if abs(term) < _eps() * max(abs(v), mpf(1)) / 10 or n > 100000:
                    break
            return Estimate(+v, abs(term) * 2 + abs(v) * _eps(), "series_large")
        if mode == "asymptotic_small":
            if x > beta / 5:
                raise DomainError("asymptotic_small is valid only for x <= beta/5")
            r = x / beta
            pref = x * x / beta * mpmath.exp(-y)
            total = mpf(0)
            term = mpf(1)
            n = 0
            best = None
            while True:
                nxt = term * (-(n + 2)) * r
                if abs(nxt) >= abs(term):
                    best = abs(nxt)
                    break
                total += term
                term = nxt
                n += 1
            # the omitted remainder is bounded by the first dropped term (alternating, decreasing)
            total += term
            return Estimate(+(pref * total), +(pref * best), f"asymptotic_small(n={n})")
        raise ValueError(f"unknown mode {mode!r}")


def large_x_expansion(x, beta, terms: int) -> mpf:
    """First ``terms`` pieces of x - beta log x + beta(log beta + gamma - 1) - beta^2/(2x) + ...

    ``terms=3`` stops after the constant; each further term adds the next
    power ``x^(1-n)`` with coefficient ``-(-1)^n beta^n / (n! (n-1))``.
    """
    with mpmath.workdps(WORK_DPS):
        x, beta = mpf(x), mpf(beta)
        pieces = [x, -beta * mpmath.log(x), beta * (mpmath.log(beta) + mpmath.euler - 1)]
        n = 1
        while len(pieces) < terms:
            n += 1
            pieces.append(-((-1) ** n) * beta ** n / (mpmath.factorial(n) * (n - 1)) * x ** (1 - n))
        return mpmath.fsum(pieces[:terms])


# --------------------------------------------------------------------------
# sandwich feasibility


@dataclass(frozen=True)
class SandwichRow:
    rho: mpf
    lower: mpf
    middle: mpf
    upper: mpf

    @property
    def lower_ok(self) -> bool:
        return self.lower <= self.middle

    @property
    def upper_ok(self) -> bool:
        return self.middle <= self.upper

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok


@dataclass
class SandwichReport:
    beta: mpf
    rows: list[SandwichRow]
    feasible_runs: list[tuple[mpf, mpf]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def violations(self) -> list[SandwichRow]:
        return [r for r in self.rows if not r.ok]


def _runs(rows: Sequence[SandwichRow]) -> list[tuple[mpf, mpf]]:
    runs, start, prev = [], None, None
    for r in rows:
        if r.ok and start is None:
            start = r.rho
        if not r.ok and start is not None:
            runs.append((start, prev))
            start = None
        prev = r.rho
    if start is not None:
        runs.append((start, prev))
    return runs


def sandwich_check(beta, grid: Iterable) -> SandwichReport:
    """F(rho) <= int_0^rho exp(-beta/x) dx <= F(log 16 + rho) on a grid (c = 0 law)."""
    with mpmath.workdps(WORK_DPS):
        beta = mpf(beta)
        rows = []
        for rho in grid:
            rho = mpf(rho)
            if not rho > 0:
                raise DomainError("grid points must be positive")
            lo = cardy_F(rho).value
            mid = cumulative_int(rho, beta).value
            hi = cardy_F(mpmath.log(16) + rho).value
            rows.append(SandwichRow(rho, lo, mid, hi))
    return SandwichReport(beta, rows, _runs(rows))


def sandwich_scan(betas: Iterable, grid: Sequence) -> dict:
    """Which candidate betas pass on the whole grid, with the passing betas' range."""
    grid = list(grid)
    result = []
    for b in betas:
        rep = sandwich_check(b, grid)
        result.append((mpf(b), rep.ok))
    passing = [b for b, ok in result if ok]
    contiguous = True
    if passing:
        idx = [i for i, (_, ok) in enumerate(result) if ok]
        contiguous = idx == list(range(idx[0], idx[-1] + 1))
    return {
        "results": result,
        "feasible_min": min(passing) if passing else None,
        "feasible_max": max(passing) if passing else None,
        "contiguous": contiguous,
    }
