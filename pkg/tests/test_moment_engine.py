import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from welding_moments.graded_algebra import Partition, enumerate_partitions, gen, rank
from welding_moments.moment_engine import (
    EngineConfig,
    Equation,
    EquationSystem,
    MomentEngine,
    RankDeficiencyError,
    ResidualError,
    UnsolvedLevelError,
    dual_route_agreement,
    solve_sparse,
    table_from_json,
    table_to_csv,
    table_to_json,
)


@pytest.fixture(scope="module")
def engine():
    eng = MomentEngine()
    eng.solve_through(5)
    return eng


def test_normalization_and_level_one(engine):
    assert engine.moment("", "") == 1
    assert engine.moment([1], [1]) == F(1, 2)


def test_level_two_table(engine):
    m = engine.moment
    assert m("2", "2") == F(1, 3)
    assert m("2", "1+1") == m("1+1", "2") == F(1, 3)
    assert m("1+1", "1+1") == F(17, 42)


def test_off_level_moments_vanish(engine):
    assert engine.moment([2], [1]) == 0


@pytest.mark.parametrize("n", range(1, 6))
def test_diagonal_and_corollary(engine, n):
    single = Partition((n,))
    for P in enumerate_partitions(n):
        assert engine.moment(P, single) == F(1, n + 1)
        assert engine.moment(single, P) == F(1, n + 1)


def test_expectation_of_polynomial(engine):
    u1, ub1 = gen("u", 1), gen("ubar", 1)
    assert engine.expectation(u1 * ub1 * 4 + u1 * u1 * ub1 * ub1) == 2 + F(17, 42)


@pytest.mark.parametrize("n", range(1, 6))
def test_tables_symmetric(engine, n):
    assert engine.tables[n].is_symmetric()


@pytest.mark.parametrize("n", range(1, 5))
def test_direct_and_factored_assembly_agree(engine, n):
    ok, bad = dual_route_agreement(engine, n)
    assert ok, bad


def test_conjugate_equations_are_redundant(engine):
    eng = MomentEngine(EngineConfig(include_conjugate=False))
    eng.solve_through(4)
    for n in range(1, 5):
        assert eng.tables[n].entries == engine.tables[n].entries


def test_provenance_names_equations(engine):
    prov = engine.tables[2].provenance
    assert all(prov[k] for k in prov)


def test_level_cap():
    with pytest.raises(ValueError):
        EngineConfig(max_level=7)
    assert EngineConfig(max_level=8, allow_large=True).max_level == 8


def test_unsolved_lower_level():
    with pytest.raises(UnsolvedLevelError):
        MomentEngine().assemble_level(3)


def test_json_and_csv_round_trip(engine):
    t = engine.tables[3]
    back = table_from_json(table_to_json(t))
    assert back.entries == t.entries
    lines = table_to_csv([t]).splitlines()
    assert lines[0] == "level,P,Q,value" and len(lines) == 1 + 9


@pytest.mark.parametrize("seed", range(3))
def test_solution_invariant_under_reordering(engine, seed):
    system = engine.assemble_level(4)
    eqs = list(system.equations)
    random.Random(seed).shuffle(eqs)
    res = solve_sparse(eqs, len(system.unknowns))
    assert {pq: res.values[i] for i, pq in enumerate(system.unknowns)} == engine.tables[4].entries


def test_system_is_overdetermined_full_rank(engine):
    system = engine.assemble_level(3)
    assert len(system.equations) > len(system.unknowns)
    assert rank(system.matrix()) == len(system.unknowns)


# -- solver oracles -------------------------------------------------------------

small = st.integers(-5, 5)


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=3, max_size=6), st.lists(small, min_size=3, max_size=3))
def test_solver_recovers_planted_solution(rows, x):
    if rank([[F(v) for v in r] for r in rows]) < 3:
        return
    eqs = [
        Equation(f"e{i}", tuple((c, F(v)) for c, v in enumerate(r) if v), F(sum(a * b for a, b in zip(r, x))))
        for i, r in enumerate(rows)
    ]
    assert solve_sparse(eqs, 3).values == [F(v) for v in x]


def test_solver_detects_inconsistency():
    eqs = [Equation("a", ((0, F(1)),), F(1)), Equation("b", ((0, F(2)),), F(3))]
    with pytest.raises(ResidualError):
        solve_sparse(eqs, 1)


def test_solver_detects_underdetermined():
    eqs = [Equation("a", ((0, F(1)), (1, F(1))), F(1))]
    with pytest.raises(RankDeficiencyError):
        solve_sparse(eqs, 2)
