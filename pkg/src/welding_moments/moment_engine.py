"""Joint moments E(u^P ubar^Q) fixed by infinitesimal invariance, solved level by level.

At level ``n`` the unknowns are all ``E(u^P ubar^Q)`` with ``P, Q`` partitions
of ``n``.  Each equation states that the expectation of
``Lbar_{-1}(rho0 u^P ubar^Q')`` or ``Lbar_{-2}(rho0^2 u^P ubar^Q'')`` vanishes
(plus the same with ``L`` and the roles of u and ubar swapped).  Moments of
lower bidegree come from already solved tables; moments of unequal
weights vanish.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from .graded_algebra import (
    AlgebraElement,
    Partition,
    enumerate_partitions,
    gen,
    monomial,
    rho0,
)
from .virasoro_ops import (
    N1_formula,
    N2_formula,
    R1_formula,
    R2_formula,
    apply_L,
    apply_Lbar,
)

__all__ = [
    "MomentError",
    "UnsolvedLevelError",
    "RankDeficiencyError",
    "ResidualError",
    "EngineConfig",
    "Equation",
    "EquationSystem",
    "MomentTable",
    "MomentEngine",
    "equation_element",
    "factored_element",
    "solve_sparse",
    "table_to_json",
    "table_to_csv",
    "table_from_json",
]

WORKERS_ENV = "WELDING_MOMENTS_WORKERS"
DEFAULT_MAX_LEVEL = 6
HARD_MAX_LEVEL = 8

Pair = tuple[Partition, Partition]


class MomentError(RuntimeError):
    pass


class UnsolvedLevelError(MomentError):
    """A lower level needed by the assembly has not been solved."""


class RankDeficiencyError(MomentError):
    """The system does not determine every unknown."""


class ResidualError(MomentError):
    """Some equation is not satisfied exactly by the solution."""


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class EngineConfig:
    max_level: int = DEFAULT_MAX_LEVEL
    allow_large: bool = False
    include_conjugate: bool = True
    workers: int = field(default_factory=_default_workers)

    def __post_init__(self):
        cap = HARD_MAX_LEVEL if self.allow_large else DEFAULT_MAX_LEVEL
        if self.max_level > cap:
            raise ValueError(
                f"max_level {self.max_level} exceeds {cap}"
                + ("" if self.allow_large else " (pass allow_large for levels up to 8)")
            )


# --------------------------------------------------------------------------
# equation elements


def _seed(kind: str, P: Partition, Q: Partition) -> tuple[int, AlgebraElement]:
    """Generator index and seed monomial for an equation label."""
    order = 1 if kind.endswith("1") else 2
    if kind.startswith("Lbar"):
        return order, rho0(order) * monomial("u", P) * monomial("ubar", Q)
    return order, rho0(order) * monomial("ubar", P) * monomial("u", Q)


def equation_element(kind: str, P: Partition, Q: Partition) -> AlgebraElement:
    """Direct route: the operator applied by the Leibniz rule to the seed monomial.

    ``kind`` is ``Lbar-1``/``Lbar-2`` (seed ``rho0^k u^P ubar^Q``) or
    ``L-1``/``L-2`` (seed ``rho0^k ubar^P u^Q``).
    """
    order, seed = _seed(kind, P, Q)
    op = apply_Lbar if kind.startswith("Lbar") else apply_L
    return op(-order, seed)


def factored_element(kind: str, P: Partition, Q: Partition) -> AlgebraElement:
    """Factored route: ``N1 x 1 + 1 x R1`` or ``N2 x 1 - 3 N1 x ubar_1 + 1 x R2``."""
    holo, anti = ("u", "ubar") if kind.startswith("Lbar") else ("ubar", "u")
    n = P.weight
    jmax = n + 2
    uP = monomial(holo, P)
    uQ = monomial(anti, Q)
    N1 = N1_formula(jmax, holo)
    if kind.endswith("1"):
        R1 = R1_formula(jmax, anti)
        return N1(uP) * uQ + uP * R1(uQ)
    N2 = N2_formula(jmax, holo)
    R2 = R2_formula(jmax, anti)
    return N2(uP) * uQ - N1(uP) * gen(anti, 1) * uQ * 3 + uP * R2(uQ)


def _monomial_pair(key: tuple) -> Pair:
    return Partition.from_multiplicities(key[0]), Partition.from_multiplicities(key[1])


# --------------------------------------------------------------------------
# systems


@dataclass(frozen=True)
class Equation:
    ident: str
    coeffs: tuple[tuple[int, Fraction], ...]  # unknown index -> coefficient
    rhs: Fraction  # sum(coeffs * x) = rhs


@dataclass
class EquationSystem:
    level: int
    unknowns: tuple[Pair, ...]
    equations: list[Equation]

    def index(self) -> dict[Pair, int]:
        return {p: i for i, p in enumerate(self.unknowns)}

    def matrix(self) -> list[list[Fraction]]:
        m = [[Fraction(0)] * len(self.unknowns) for _ in self.equations]
        for r, eq in enumerate(self.equations):
            for c, v in eq.coeffs:
                m[r][c] = v
        return m


@dataclass
class MomentTable:
    level: int
    entries: dict[Pair, Fraction]
    provenance: dict[Pair, tuple[str, ...]] = field(default_factory=dict)

    def __getitem__(self, pq: Pair) -> Fraction:
        return self.entries[pq]

    def is_symmetric(self) -> bool:
        return all(self.entries[(Q, P)] == v for (P, Q), v in self.entries.items())


def _equation_labels(n: int, include_conjugate: bool) -> list[tuple[str, Partition, Partition]]:
    labels = []
    kinds = ["Lbar-1", "Lbar-2"] + (["L-1", "L-2"] if include_conjugate else [])
    for kind in kinds:
        lower = n - (1 if kind.endswith("1") else 2)
        if lower < 0:
            continue
        for P in enumerate_partitions(n):
            for Q in enumerate_partitions(lower):
                labels.append((kind, P, Q))
    return labels


def _label_id(kind: str, P: Partition, Q: Partition) -> str:
    return f"{kind}[{_pstr(P)}|{_pstr(Q)}]"


def _element_worker(args):
    kind, P, Q, route = args
    fn = equation_element if route == "direct" else factored_element
    return fn(kind, P, Q)


def _linearize(
    ident: str,
    elem: AlgebraElement,
    n: int,
    index: dict[Pair, int],
    lookup,
) -> Equation:
    coeffs: dict[int, Fraction] = {}
    rhs = Fraction(0)
    for key, v in elem.terms.items():
        if any(key[2:4]) or any(key[4:]):
            raise MomentError(f"{ident}: unexpected generator or rho power in {key}")
        if not v.is_constant():
            raise MomentError(f"{ident}: lambda-dependent coefficient")
        c = v.constant()
        P, Q = _monomial_pair(key)
        if P.weight != Q.weight:
            continue
        if P.weight == n:
            i = index[(P, Q)]
            coeffs[i] = coeffs.get(i, Fraction(0)) + c
        else:
            rhs -= c * lookup(P, Q)
    return Equation(ident, tuple(sorted((i, c) for i, c in coeffs.items() if c)), rhs)


# --------------------------------------------------------------------------
# exact sparse solver


def _content_normalize(row: dict[int, int]) -> dict[int, int]:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            return row
    if g > 1:
        return {k: v // g for k, v in row.items()}
    return row


def _integer_row(eq: Equation, rhs_col: int) -> dict[int, int]:
    den = 1
    for _, c in eq.coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    den = den * eq.rhs.denominator // gcd(den, eq.rhs.denominator)
    row = {i: int(c * den) for i, c in eq.coeffs}
    if eq.rhs:
        row[rhs_col] = int(eq.rhs * den)
    return _content_normalize(row)


@dataclass
class SolveResult:
    values: list[Fraction]
    provenance: list[frozenset[int]]
    rank: int


def solve_sparse(equations: Sequence[Equation], n_unknowns: int) -> SolveResult:
    """Exact solution of an overdetermined consistent system.

    Fraction-free elimination on sparse integer rows (each row scaled to
    primitive content after every update).  Columns are eliminated in index
    order; the pivot row is the candidate with the fewest nonzeros, ties
    broken by original equation index.  Back substitution is done in exact
    rationals and every equation's residual is checked to be exactly zero.
    """
    rhs_col = n_unknowns
    rows: list[dict[int, int]] = [_integer_row(eq, rhs_col) for eq in equations]
    origin: list[frozenset[int]] = [frozenset((i,)) for i in range(len(rows))]
    by_col: dict[int, set[int]] = {}
    for r, row in enumerate(rows):
        for c in row:
            if c != rhs_col:
                by_col.setdefault(c, set()).add(r)
    used: set[int] = set()
    pivots: dict[int, int] = {}
    for c in range(n_unknowns):
        cands = [r for r in by_col.get(c, ()) if r not in used]
        if not cands:
            raise RankDeficiencyError(f"unknown {c} is not determined")
        p = min(cands, key=lambda r: (len(rows[r]), r))
        used.add(p)
        pivots[c] = p
        prow = rows[p]
        a = prow[c]
        for r in cands:
            if r == p:
                continue
            row = rows[r]
            b = row[c]
            g = gcd(a, b)
            ma, mb = a // g, b // g
            new = {k: v * ma for k, v in row.items()}
            for k, v in prow.items():
                nv = new.get(k, 0) - mb * v
                if nv:
                    new[k] = nv
                else:
                    new.pop(k, None)
            new = _content_normalize(new)
            for k in row:
                if k != rhs_col and k not in new:
                    by_col[k].discard(r)
            for k in new:
                if k != rhs_col and k not in row:
                    by_col.setdefault(k, set()).add(r)
            rows[r] = new
            origin[r] = origin[r] | origin[p]
    # remaining rows must reduce to 0 = 0
    for r, row in enumerate(rows):
        if r not in used and row and any(k != rhs_col for k in row):
            raise MomentError("elimination left a non-pivot row with unknowns")
        if r not in used and row.get(rhs_col, 0):
            raise ResidualError(f"inconsistent equation {r}")
    values: list[Fraction] = [Fraction(0)] * n_unknowns
    prov: list[frozenset[int]] = [frozenset()] * n_unknowns
    for c in reversed(range(n_unknowns)):
        row = rows[pivots[c]]
        acc = Fraction(row.get(rhs_col, 0))
        dep = set(origin[pivots[c]])
        for k, v in row.items():
            if k == rhs_col or k == c:
                continue
            if k < c:
                raise MomentError("pivot row not in echelon form")
            acc -= v * values[k]
            dep |= prov[k]
        values[c] = acc / row[c]
        prov[c] = frozenset(dep)
    for eq in equations:
        lhs = sum((v * values[i] for i, v in eq.coeffs), Fraction(0))
        if lhs != eq.rhs:
            raise ResidualError(f"equation {eq.ident} has residual {lhs - eq.rhs}")
    return SolveResult(values, prov, len(pivots))


# --------------------------------------------------------------------------
# engine


class MomentEngine:
    """Holds solved tables and assembles/solves new levels on demand."""

    def __init__(self, config: EngineConfig | None = None):
        self.config = config or EngineConfig()
        self.tables: dict[int, MomentTable] = {
            0: MomentTable(0, {(Partition(()), Partition(())): Fraction(1)}, {(Partition(()), Partition(())): ("normalization",)})
        }

    # lookups -------------------------------------------------------------
    def moment(self, P: Partition | Sequence[int] | str, Q: Partition | Sequence[int] | str) -> Fraction:
        P, Q = _as_partition(P), _as_partition(Q)
        if P.weight != Q.weight:
            return Fraction(0)
        t = self.tables.get(P.weight)
        if t is None:
            raise UnsolvedLevelError(f"level {P.weight} has not been solved")
        return t.entries[(P, Q)]

    def expectation(self, x: AlgebraElement) -> Fraction:
        """E of a polynomial in u and ubar with rational coefficients."""
        total = Fraction(0)
        for key, v in x.terms.items():
            if any(key[2:]):
                raise MomentError("expectation only defined on u/ubar polynomials")
            P, Q = _monomial_pair(key)
            total += v.constant() * self.moment(P, Q)
        return total

    def _lower(self, n: int):
        def lookup(P: Partition, Q: Partition) -> Fraction:
            if P.weight >= n:
                raise MomentError("lookup of an unknown treated as known")
            return self.moment(P, Q)
        return lookup

    # assembly ------------------------------------------------------------
    def assemble_level(self, n: int, route: str = "direct", include_conjugate: bool | None = None) -> EquationSystem:
        if route not in ("direct", "factored"):
            raise ValueError("route must be 'direct' or 'factored'")
        if include_conjugate is None:
            include_conjugate = self.config.include_conjugate
        missing = [k for k in range(n) if k not in self.tables]
        if missing:
            raise UnsolvedLevelError(f"levels {missing} must be solved before level {n}")
        parts = enumerate_partitions(n)
        unknowns = tuple((P, Q) for P in parts for Q in parts)
        index = {p: i for i, p in enumerate(unknowns)}
        labels = _equation_labels(n, include_conjugate)
        elems = self._elements(labels, route)
        lookup = self._lower(n)
        eqs = [
            _linearize(_label_id(*lab), el, n, index, lookup)
            for lab, el in zip(labels, elems)
        ]
        return EquationSystem(n, unknowns, eqs)

    def _elements(self, labels, route: str) -> list[AlgebraElement]:
        jobs = [(k, P, Q, route) for k, P, Q in labels]
        if self.config.workers > 1 and len(jobs) > 8:
            with ProcessPoolExecutor(self.config.workers) as ex:
                return list(ex.map(_element_worker, jobs, chunksize=max(1, len(jobs) // (4 * self.config.workers))))
        return [_element_worker(j) for j in jobs]

    def solve_level(self, n: int, system: EquationSystem | None = None) -> MomentTable:
        if n in self.tables and system is None:
            return self.tables[n]
        limit = HARD_MAX_LEVEL if self.config.allow_large else self.config.max_level
        if n > limit:
            raise ValueError(f"level {n} exceeds the configured maximum {limit}")
        if system is None:
            system = self.assemble_level(n)
        res = solve_sparse(system.equations, len(system.unknowns))
        entries = {pq: res.values[i] for i, pq in enumerate(system.unknowns)}
        prov = {
            pq: tuple(system.equations[j].ident for j in sorted(res.provenance[i]))
            for i, pq in enumerate(system.unknowns)
        }
        table = MomentTable(n, entries, prov)
        self.tables[n] = table
        return table

    def solve_through(self, n_max: int) -> list[MomentTable]:
        return [self.solve_level(k) for k in range(0, n_max + 1)]

    # checks --------------------------------------------------------------
    def verify_identities(self, n_max: int) -> list[dict]:
        """Pass/fail entries for E(u_n ubar_n), E(u^P ubar_n) = 1/(n+1) and symmetry."""
        report = []
        for n in range(1, n_max + 1):
            self.solve_level(n)
            want = Fraction(1, n + 1)
            single = Partition((n,))
            got = self.moment(single, single)
            report.append({"identity": f"E(u_{n} ub_{n}) = 1/{n + 1}", "value": str(got), "pass": got == want})
            for P in enumerate_partitions(n):
                got = self.moment(P, single)
                report.append({"identity": f"E(u^[{P}] ub_{n}) = 1/{n + 1}", "value": str(got), "pass": got == want})
            report.append({"identity": f"symmetry at level {n}", "value": "", "pass": self.tables[n].is_symmetric()})
        return report


def dual_route_agreement(engine: MomentEngine, n: int) -> tuple[bool, list[str]]:
    """Equation-by-equation comparison of direct and factored assembly."""
    labels = _equation_labels(n, True)
    bad = []
    for kind, P, Q in labels:
        if equation_element(kind, P, Q) != factored_element(kind, P, Q):
            bad.append(_label_id(kind, P, Q))
    a = engine.assemble_level(n, "direct", True)
    b = engine.assemble_level(n, "factored", True)
    for ea, eb in zip(a.equations, b.equations):
        if ea != eb and ea.ident not in bad:
            bad.append(ea.ident)
    return not bad, bad


def _as_partition(p) -> Partition:
    if isinstance(p, Partition):
        return p
    if isinstance(p, str):
        return Partition.parse(p)
    return Partition(tuple(sorted((int(x) for x in p), reverse=True)))


# --------------------------------------------------------------------------
# serialization


def _pstr(p: Partition) -> str:
    return str(p) if p.parts else ""


def table_to_json(table: MomentTable) -> dict:
    items = sorted(table.entries.items(), key=lambda kv: (kv[0][0].sort_key(), kv[0][1].sort_key()))
    return {
        "schema": "welding-moments/moment-table/v1",
        "level": table.level,
        "moments": {f"{_pstr(P)}|{_pstr(Q)}": str(v) for (P, Q), v in items},
    }


def table_from_json(data: dict) -> MomentTable:
    entries = {}
    for k, v in data["moments"].items():
        a, b = k.split("|")
        entries[(_parse_p(a), _parse_p(b))] = Fraction(v)
    return MomentTable(int(data["level"]), entries)


def _parse_p(s: str) -> Partition:
    return Partition(()) if s in ("", "0") else Partition.parse(s)


def table_to_csv(tables: Iterable[MomentTable]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["level", "P", "Q", "value"])
    for t in tables:
        for (P, Q), v in sorted(t.entries.items(), key=lambda kv: (kv[0][0].sort_key(), kv[0][1].sort_key())):
            w.writerow([t.level, _pstr(P), _pstr(Q), str(v)])
    return buf.getvalue()


def tables_to_json_text(tables: Iterable[MomentTable]) -> str:
    return json.dumps([table_to_json(t) for t in tables], indent=2, sort_keys=True)
