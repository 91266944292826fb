import numpy as np
import pytest

from nearopt.lp import LinearConstraint, LinearObjective, LinearProgram, Variable
from nearopt.modelio import read_model
from nearopt.oracle import grid_model
from nearopt.pareto import generate_front, individual_optima


def program(c, rows, bounds=None, labels=None):
    """Small dense helper: ``rows`` is a list of (coefficients, sense, rhs)."""
    n = len(c[0]) if np.ndim(c) == 2 else len(c)
    bounds = bounds or [(0.0, np.inf)] * n
    variables = tuple(Variable(f"x{i + 1}", lo, hi) for i, (lo, hi) in enumerate(bounds))
    constraints = tuple(LinearConstraint.from_dense(a, s, b, f"r{k}") for k, (a, s, b) in enumerate(rows))
    objs = [c] if np.ndim(c) == 1 else list(c)
    labels = labels or [f"f{k + 1}" for k in range(len(objs))]
    return LinearProgram(variables, constraints, tuple(LinearObjective(np.asarray(o, float), 0.0, lab) for o, lab in zip(objs, labels)))


@pytest.fixture
def min_sum():
    # min x1 + x2  s.t.  x1 + 2 x2 >= 2,  x >= 0
    return program([1.0, 1.0], [([1.0, 2.0], ">=", 2.0)])


@pytest.fixture
def tri_objective_3var():
    """Three bounded variables, two objectives; efficient vertices computed by hand in the tests."""
    return program(
        [[1.0, 2.0, 3.0], [3.0, 1.0, 0.5]],
        [([1.0, 1.0, 1.0], ">=", 1.5), ([1.0, 2.0, 0.0], ">=", 1.0)],
        bounds=[(0.0, 1.0)] * 3,
    )


@pytest.fixture(scope="session")
def toy():
    return read_model()


@pytest.fixture(scope="session")
def toy_anchors(toy):
    return individual_optima(toy.program)


@pytest.fixture(scope="session")
def toy_front(toy, toy_anchors):
    return generate_front(toy.program, anchors=toy_anchors)


@pytest.fixture(scope="session")
def golden_lp():
    return grid_model()


# -- acceptance reporting ------------------------------------------------------

ACCEPTANCE: dict[int, tuple[bool, str]] = {}
ACCEPTANCE_COUNT = 11


@pytest.fixture
def criterion():
    """Record one acceptance criterion's outcome; printed again in the terminal summary."""

    def record(number: int, passed: bool, detail: str):
        ACCEPTANCE[number] = (bool(passed), detail)
        print(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    collected = any("test_acceptance" in str(getattr(r, "nodeid", "")) for rs in terminalreporter.stats.values() for r in rs)
    if not collected:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, ACCEPTANCE_COUNT + 1):
        if n in ACCEPTANCE:
            ok, detail = ACCEPTANCE[n]
            terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            terminalreporter.write_line(f"criterion {n:2d}: FAIL  (not run or errored before recording)")
