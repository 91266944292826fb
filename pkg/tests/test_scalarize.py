"""Weighted-sum and epsilon-constraint scalarizations."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nearopt.lp import INF, Status, Tolerances, evaluate, solve
from nearopt.oracle import GOLDEN_PAIR, grid_epsilon_space
from nearopt.pareto import dominance_filter, individual_optima, weighted_front
from nearopt.scalarize import (
    DegenerateReferenceError,
    EpsilonConstraintSpec,
    WeightVector,
    epsilon_constraint,
    relative_epsilon_constraint,
    weighted_sum,
)


def test_equal_weights_on_golden_grid_model(golden_lp):
    # Dense 1-D oracle: f1 + f2 = 50 x^2 - 45 x + 18.25 is minimized at x = 0.45.
    xs = np.linspace(0.0, 1.2, 12001)
    f1, f2 = GOLDEN_PAIR.values(xs)
    x_ref = xs[np.argmin(f1 + f2)]
    assert x_ref == pytest.approx(0.45, abs=1e-9)
    out = solve(weighted_sum(golden_lp, (1.0, 1.0)))
    assert out.x[0] == pytest.approx(0.45, abs=1e-9)
    values = [evaluate(o, out.x) for o in golden_lp.objectives]
    assert values == pytest.approx([2.225, 2.4], abs=1e-9)


def test_single_objective_weight_is_identity(min_sum):
    assert solve(weighted_sum(min_sum, [1.0])).value == pytest.approx(solve(min_sum).value)


def test_weight_scaling_keeps_argmin(golden_lp):
    a = solve(weighted_sum(golden_lp, (1.0, 1.0)))
    b = solve(weighted_sum(golden_lp, (2.0, 2.0)))
    assert a.x[0] == pytest.approx(b.x[0])
    assert b.value == pytest.approx(2 * a.value)


@pytest.mark.parametrize("w", [(0.0, 1.0), (-1.0, 1.0), (1.0, float("inf")), ()])
def test_weights_must_be_positive(w):
    with pytest.raises(ValueError):
        WeightVector(w)


def test_weight_arity(golden_lp):
    with pytest.raises(ValueError):
        weighted_sum(golden_lp, (1.0,))


def test_toy_relative_cap_is_respected(toy, toy_anchors):
    c_star = toy_anchors.cross[0, 0]
    sub = relative_epsilon_constraint(toy.program, 1, 0.05, np.diag(toy_anchors.cross))
    out = solve(sub)
    assert out.status is Status.OPTIMAL
    cost = evaluate(toy.program.objectives[0], out.x)
    assert cost <= 1.05 * c_star + Tolerances().feas_for(1.05 * c_star)
    assert toy.program.is_feasible(out.x)


def test_vacuous_absolute_cap_matches_plain_solve(golden_lp):
    spec = EpsilonConstraintSpec(free=1, caps=(INF, None), mode="absolute")
    assert solve(epsilon_constraint(golden_lp, spec)).value == pytest.approx(solve(golden_lp, 1).value)


def test_cap_below_minimum_is_infeasible(golden_lp):
    spec = EpsilonConstraintSpec(free=1, caps=(1.9, None), mode="absolute")
    assert solve(epsilon_constraint(golden_lp, spec)).status is Status.INFEASIBLE


def test_one_cap_row_per_constrained_objective(tri_objective_3var):
    lp = tri_objective_3var.with_objectives(
        list(tri_objective_3var.objectives) + [tri_objective_3var.objectives[0].__class__(np.ones(3), 0.0, "f3")]
    )
    capped = epsilon_constraint(lp, EpsilonConstraintSpec(0, (None, 5.0, 5.0), "absolute"))
    added = capped.constraints[len(lp.constraints):]
    assert [c.name for c in added] == ["cap[f2]", "cap[f3]"]
    assert len(capped.objectives) == 1 and capped.objectives[0].label == "f1"


def test_relative_cap_against_zero_reference_is_rejected(min_sum):
    lp = min_sum.with_objectives(list(min_sum.objectives) * 2)
    with pytest.raises(DegenerateReferenceError):
        relative_epsilon_constraint(lp, 1, 0.1, (0.0, 1.0))


def test_relative_spec_needs_reference_and_nonnegative_eps():
    with pytest.raises(ValueError):
        EpsilonConstraintSpec(1, (0.1, None), "relative")
    with pytest.raises(ValueError):
        EpsilonConstraintSpec(1, (-0.1, None), "relative", (1.0, 1.0))
    with pytest.raises(ValueError):
        EpsilonConstraintSpec(1, (0.1, None), "sideways", (1.0, 1.0))


def test_relative_cap_matches_grid_interval(golden_lp):
    # Capping f1 at 1.25 f1* and minimizing / maximizing x recovers the 1-D sub-level set.
    sub = relative_epsilon_constraint(golden_lp.with_objectives(list(golden_lp.objectives)), 1, 0.25, (2.0, 1.5))
    x = sub.objectives[0].__class__(np.eye(sub.n_vars)[0])
    lo, hi = solve(sub, x).value, solve(sub, x, "max").value
    # Analytic ends: 10 (2x - 0.75)^2 = 0.5.
    exact = ((0.75 - np.sqrt(0.05)) / 2, (0.75 + np.sqrt(0.05)) / 2)
    # The feasible set of the interpolating model sits inside the exact one, within one coarse grid step.
    assert exact[0] - 1e-5 <= lo <= exact[0] + 0.00075
    assert exact[1] - 0.00075 <= hi <= exact[1] + 1e-5
    ref = grid_epsilon_space(which="f1", eps=0.25).hull
    assert ref == pytest.approx(exact, abs=1e-4)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 2.5), st.floats(0.0, 2.5))
def test_relative_constraint_monotone_in_eps(e1, e2):
    lp = _golden()
    lo, hi = sorted((e1, e2))
    v_lo = solve(relative_epsilon_constraint(lp, 1, lo, (2.0, 1.5))).value
    v_hi = solve(relative_epsilon_constraint(lp, 1, hi, (2.0, 1.5))).value
    assert v_hi <= v_lo + 1e-6 * max(1.0, abs(v_lo))


_APPX = []


def _golden():
    from nearopt.oracle import grid_model

    if not _APPX:
        _APPX.append(grid_model(step=0.0075))
    return _APPX[0]


def test_weighted_sum_points_are_efficient(golden_lp):
    pts = weighted_front(golden_lp, [(1, 0.1), (1, 1), (0.1, 1), (1, 3)])
    anchors = individual_optima(golden_lp).points
    everything = list(anchors) + pts
    kept = dominance_filter(everything)
    assert all(any(p is q for q in kept) for p in pts)
