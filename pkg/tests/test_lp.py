"""LP core: model validation, the bundled simplex, and agreement with vertex enumeration."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nearopt.lp import (
    INF,
    LinearConstraint,
    LinearObjective,
    LinearProgram,
    ModelError,
    SolveOutcome,
    SolverError,
    Status,
    Tolerances,
    Variable,
    add_constraint,
    evaluate,
    objective_row,
    solve,
)
from nearopt.oracle import random_tiny_lp, vertex_enumerate
from nearopt.simplex import DenseSimplex

from conftest import program


def residual_ok(lp, x, tol=Tolerances()):
    for row in lp.constraints:
        r = row.activity(x) - row.rhs
        t = tol.feas_for(row.rhs)
        if row.sense == ">=" and r < -t:
            return False
        if row.sense == "<=" and r > t:
            return False
        if row.sense == "=" and abs(r) > t:
            return False
    return True


def test_bound_active_identity():
    lp = program([1.0], [])
    out = solve(lp)
    assert out.status is Status.OPTIMAL
    assert out.value == 0.0 and out.x[0] == 0.0


def test_min_sum_matches_vertex_enumeration(min_sum):
    out = solve(min_sum)
    ref = vertex_enumerate(program([1.0, 1.0], [([1.0, 2.0], ">=", 2.0)], bounds=[(0, 10), (0, 10)]))[0]
    assert ref.value == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(ref.x, [0.0, 1.0], atol=1e-12)
    assert out.value == pytest.approx(ref.value, abs=1e-9)
    np.testing.assert_allclose(out.x, [0.0, 1.0], atol=1e-9)


def test_contradictory_bound_and_row_is_infeasible():
    lp = program([1.0], [([1.0], "<=", -1.0)])
    assert solve(lp).status is Status.INFEASIBLE


def test_unbounded_maximization(min_sum):
    assert solve(min_sum, direction="max").status is Status.UNBOUNDED


def test_free_variables_and_equalities():
    # min x1 + 2 x2, x1 + x2 = 2, x1 - x2 >= 12, x1 <= 7, x2 free
    lp = program([1.0, 2.0], [([1.0, 1.0], "=", 2.0), ([1.0, -1.0], ">=", 12.0)], bounds=[(-INF, 7.0), (-INF, INF)])
    out = solve(lp)
    assert out.value == pytest.approx(-3.0)
    np.testing.assert_allclose(out.x, [7.0, -5.0])


def test_add_upper_bound_row_gives_interval():
    lp = add_constraint(program([1.0], []), LinearConstraint(((0, 1.0),), "<=", 5.0))
    assert solve(lp, direction="min").value == 0.0
    assert solve(lp, direction="max").value == pytest.approx(5.0)


def test_duplicate_row_is_idempotent(min_sum):
    again = add_constraint(min_sum, min_sum.constraints[0])
    assert solve(again).value == pytest.approx(solve(min_sum).value, rel=1e-6)


def test_cap_row_moves_x2_optimum(min_sum):
    capped = add_constraint(min_sum, LinearConstraint(((0, 1.0), (1, 1.0)), "<=", 1.1))
    x2 = LinearObjective(np.array([0.0, 1.0]))
    assert solve(capped, x2).value == pytest.approx(0.9, abs=1e-9)


def test_evaluate_examples():
    assert evaluate(LinearObjective(np.zeros(2), 2.0), [5.0, 7.0]) == 2.0
    assert evaluate(LinearObjective(np.array([1.0, 1.0])), [0.0, 1.0]) == 1.0


def test_toy_cost_objective_evaluates_to_solver_value(toy):
    out = solve(toy.program, "C_tot")
    assert Tolerances().same_value(evaluate(toy.program.objectives[0], out.x), out.value)


def test_objective_row_folds_offset():
    obj = LinearObjective(np.array([2.0, 0.0]), 3.0)
    row = objective_row(obj, "<=", 7.0)
    assert row.rhs == 4.0 and row.coefficients == ((0, 2.0),)


@pytest.mark.parametrize(
    "make",
    [
        lambda: Variable("", 0, 1),
        lambda: Variable("x", 2, 1),
        lambda: Variable("x", math.nan, 1),
        lambda: LinearConstraint(((0, 1.0),), "<>", 1.0),
        lambda: LinearConstraint(((0, 0.0),), ">=", 1.0),
        lambda: LinearConstraint(((0, 1.0), (0, 2.0)), ">=", 1.0),
        lambda: LinearConstraint(((0, 1.0),), "=", INF),
        lambda: LinearProgram((Variable("x"), Variable("x")), (), (LinearObjective(np.zeros(2)),)),
        lambda: LinearProgram((Variable("x"),), (LinearConstraint(((3, 1.0),), ">=", 0.0),), (LinearObjective(np.zeros(1)),)),
        lambda: LinearProgram((Variable("x"),), (), ()),
        lambda: LinearObjective(np.array([math.inf])),
    ],
)
def test_model_validation_rejects(make):
    with pytest.raises(ModelError):
        make()


def test_solve_argument_errors(min_sum):
    with pytest.raises(ModelError):
        solve(min_sum, "nope")
    with pytest.raises(ModelError):
        solve(min_sum, LinearObjective(np.ones(3)))
    with pytest.raises(ValueError):
        solve(min_sum, direction="up")


def test_determinism(toy):
    a = solve(toy.program, 1)
    b = solve(toy.program, 1)
    assert a.status is b.status and a.value == b.value
    assert np.array_equal(a.x, b.x)


def test_program_is_immutable(min_sum):
    with pytest.raises(Exception):
        min_sum.objectives[0].coefficients[0] = 5.0


class _VertexBackend:
    name = "vertex-enumeration"
    version = "test"

    def minimize(self, lp, c, tol):
        return vertex_enumerate(lp, [LinearObjective(c)])[0]


class _LyingBackend:
    name = "liar"
    version = "test"

    def minimize(self, lp, c, tol):
        return SolveOutcome(Status.OPTIMAL, np.full(lp.n_vars, -1.0), 0.0)


def test_backend_substitution(min_sum):
    out = solve(program([1.0, 1.0], [([1.0, 2.0], ">=", 2.0)], bounds=[(0, 10)] * 2), backend=_VertexBackend())
    assert out.value == pytest.approx(1.0)
    with pytest.raises(SolverError):
        solve(min_sum, backend=_LyingBackend())


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_feasibility_certificate_and_oracle_agreement(seed):
    lp = random_tiny_lp(np.random.default_rng(seed))
    out = solve(lp)
    ref = vertex_enumerate(lp)[0]
    assert out.status is ref.status
    if out.optimal:
        assert residual_ok(lp, out.x)
        lo, hi = lp.bounds()
        assert np.all(out.x >= lo - 1e-7) and np.all(out.x <= hi + 1e-7)
        assert abs(out.value - ref.value) <= 1e-6 * max(1.0, abs(ref.value))


def test_degenerate_cycling_example_terminates():
    # Beale's classic cycling example (in minimization form); Bland's rule must terminate.
    c = [-0.75, 150.0, -0.02, 6.0]
    rows = [
        ([0.25, -60.0, -0.04, 9.0], "<=", 0.0),
        ([0.5, -90.0, -0.02, 3.0], "<=", 0.0),
        ([0.0, 0.0, 1.0, 0.0], "<=", 1.0),
    ]
    out = solve(program(c, rows), backend=DenseSimplex(max_iter=50))
    assert out.value == pytest.approx(-0.05)
