"""Linear program model, solve entry point and backend interface.

Programs are immutable values. Every transformation (adding a row, swapping
the objective list) returns a new program and leaves the original untouched,
so programs can be shared freely between threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

INF = math.inf

SENSES = (">=", "<=", "=")


class ModelError(ValueError):
    """A program violates a structural invariant and cannot be solved."""


class SolverError(RuntimeError):
    """The solver broke one of its own guarantees (iteration cap, infeasible answer)."""


@dataclass(frozen=True)
class Tolerances:
    """Feasibility and optimality tolerances.

    ``feas`` is applied to each row scaled by ``max(1, |rhs|)``; ``opt`` is
    relative to ``max(1, |value|)``.
    """

    feas: float = 1e-7
    opt: float = 1e-6

    def feas_for(self, rhs: float) -> float:
        return self.feas * max(1.0, abs(rhs)) if math.isfinite(rhs) else self.feas

    def same_value(self, a: float, b: float) -> bool:
        return abs(a - b) <= self.opt * max(1.0, abs(a), abs(b))


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class Variable:
    name: str
    lower: float = 0.0
    upper: float = INF

    def __post_init__(self):
        if not self.name:
            raise ModelError("variable name must be non-empty")
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise ModelError(f"variable {self.name!r}: NaN bound")
        if self.lower > self.upper:
            raise ModelError(f"variable {self.name!r}: lower {self.lower} > upper {self.upper}")
        if self.lower == INF or self.upper == -INF:
            raise ModelError(f"variable {self.name!r}: empty domain")


@dataclass(frozen=True)
class LinearConstraint:
    """``sum(coef * x[idx]) <sense> rhs`` with sparse coefficients."""

    coefficients: tuple[tuple[int, float], ...]
    sense: str
    rhs: float
    name: str = ""

    def __post_init__(self):
        coefs = tuple((int(i), float(a)) for i, a in self.coefficients)
        object.__setattr__(self, "coefficients", coefs)
        object.__setattr__(self, "rhs", float(self.rhs))
        if self.sense not in SENSES:
            raise ModelError(f"constraint {self.name!r}: unknown sense {self.sense!r}")
        idx = [i for i, _ in coefs]
        if len(set(idx)) != len(idx):
            raise ModelError(f"constraint {self.name!r}: duplicate variable index")
        if not any(a != 0.0 for _, a in coefs):
            raise ModelError(f"constraint {self.name!r}: no nonzero coefficient")
        if any(not math.isfinite(a) for _, a in coefs):
            raise ModelError(f"constraint {self.name!r}: non-finite coefficient")
        if math.isnan(self.rhs) or (self.sense == "=" and not math.isfinite(self.rhs)):
            raise ModelError(f"constraint {self.name!r}: invalid rhs {self.rhs}")

    @classmethod
    def from_dense(cls, row: Sequence[float], sense: str, rhs: float, name: str = "") -> "LinearConstraint":
        return cls(tuple((i, float(a)) for i, a in enumerate(row) if a != 0.0), sense, rhs, name)

    def activity(self, x: np.ndarray) -> float:
        return float(sum(a * x[i] for i, a in self.coefficients))

    def violation(self, x: np.ndarray) -> float:
        """Amount by which ``x`` violates the row (0 when satisfied)."""
        lhs = self.activity(x)
        if self.sense == ">=":
            return max(0.0, self.rhs - lhs)
        if self.sense == "<=":
            return max(0.0, lhs - self.rhs)
        return abs(lhs - self.rhs)


@dataclass(frozen=True, eq=False)
class LinearObjective:
    coefficients: np.ndarray
    offset: float = 0.0
    label: str = "objective"

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float).reshape(-1)
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "offset", float(self.offset))
        if not np.all(np.isfinite(c)) or not math.isfinite(self.offset):
            raise ModelError(f"objective {self.label!r}: non-finite coefficient")

    def __eq__(self, other):
        if not isinstance(other, LinearObjective):
            return NotImplemented
        return (
            self.label == other.label
            and self.offset == other.offset
            and np.array_equal(self.coefficients, other.coefficients)
        )

    def __hash__(self):
        return hash((self.label, self.offset, self.coefficients.tobytes()))


@dataclass(frozen=True)
class LinearProgram:
    variables: tuple[Variable, ...]
    constraints: tuple[LinearConstraint, ...] = ()
    objectives: tuple[LinearObjective, ...] = ()
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "objectives", tuple(self.objectives))
        names = [v.name for v in self.variables]
        index = {name: i for i, name in enumerate(names)}
        if len(index) != len(names):
            raise ModelError("variable names must be unique")
        object.__setattr__(self, "_index", index)
        if not self.objectives:
            raise ModelError("a program needs at least one objective")
        n = len(self.variables)
        for obj in self.objectives:
            if obj.coefficients.shape != (n,):
                raise ModelError(
                    f"objective {obj.label!r} has {obj.coefficients.size} coefficients, expected {n}"
                )
        for row in self.constraints:
            for i, _ in row.coefficients:
                if not 0 <= i < n:
                    raise ModelError(f"constraint {row.name!r}: variable index {i} out of range")

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def variable_names(self) -> list[str]:
        return [v.name for v in self.variables]

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ModelError(f"unknown variable {name!r}") from None

    def objective_index(self, key: int | str) -> int:
        if isinstance(key, str) and not key.lstrip("-").isdigit():
            for k, obj in enumerate(self.objectives):
                if obj.label == key:
                    return k
            raise ModelError(f"unknown objective {key!r}")
        k = int(key)
        if not 0 <= k < len(self.objectives):
            raise ModelError(f"objective index {k} out of range")
        return k

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([v.lower for v in self.variables], dtype=float)
        hi = np.array([v.upper for v in self.variables], dtype=float)
        return lo, hi

    def dense(self) -> tuple[np.ndarray, list[str], np.ndarray]:
        """Return ``(A, senses, b)`` with A dense, one row per constraint."""
        A = np.zeros((len(self.constraints), self.n_vars))
        for r, row in enumerate(self.constraints):
            for i, a in row.coefficients:
                A[r, i] = a
        b = np.array([row.rhs for row in self.constraints], dtype=float)
        return A, [row.sense for row in self.constraints], b

    def max_violation(self, x: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> float:
        """Largest row or bound violation, each scaled by its feasibility tolerance.

        A result ``<= 1`` means ``x`` is feasible within tolerance.
        """
        x = np.asarray(x, dtype=float)
        worst = 0.0
        for row in self.constraints:
            worst = max(worst, row.violation(x) / tol.feas_for(row.rhs))
        for v, xi in zip(self.variables, x):
            worst = max(worst, (v.lower - xi) / tol.feas_for(v.lower), (xi - v.upper) / tol.feas_for(v.upper))
        return worst

    def is_feasible(self, x: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> bool:
        return self.max_violation(x, tol) <= 1.0

    def with_objectives(self, objectives: Sequence[LinearObjective]) -> "LinearProgram":
        return LinearProgram(self.variables, self.constraints, tuple(objectives))


def add_constraint(lp: LinearProgram, c: LinearConstraint) -> LinearProgram:
    """Return ``lp`` intersected with the half-space (or hyperplane) ``c``."""
    return add_constraints(lp, [c])


def add_constraints(lp: LinearProgram, rows: Sequence[LinearConstraint]) -> LinearProgram:
    return LinearProgram(lp.variables, lp.constraints + tuple(rows), lp.objectives)


def evaluate(objective: LinearObjective, point) -> float:
    x = np.asarray(point, dtype=float).reshape(-1)
    if x.shape != objective.coefficients.shape:
        raise ModelError(
            f"point has dimension {x.size}, objective {objective.label!r} expects {objective.coefficients.size}"
        )
    return float(objective.coefficients @ x) + objective.offset


def objective_row(objective: LinearObjective, sense: str, rhs: float, name: str = "") -> LinearConstraint:
    """Turn ``f(x) <sense> rhs`` into a constraint, folding the offset into the rhs."""
    return LinearConstraint.from_dense(objective.coefficients, sense, rhs - objective.offset, name)


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True, eq=False)
class SolveOutcome:
    status: Status
    x: np.ndarray | None = None
    value: float | None = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL

    def __repr__(self):
        if self.optimal:
            return f"SolveOutcome({self.status.value}, value={self.value!r})"
        return f"SolveOutcome({self.status.value})"


class Backend(Protocol):
    """Anything that minimizes ``c @ x`` over a program.

    Implementations receive the program untouched (bounds as stated) and must
    return a :class:`SolveOutcome` whose ``value`` is ``c @ x`` without offset;
    :func:`solve` adds the offset and checks feasibility.
    """

    name: str
    version: str

    def minimize(self, lp: LinearProgram, c: np.ndarray, tol: Tolerances) -> SolveOutcome: ...


_default_backend: Backend | None = None


def default_backend() -> Backend:
    global _default_backend
    if _default_backend is None:
        from .simplex import DenseSimplex

        _default_backend = DenseSimplex()
    return _default_backend


def solve(
    lp: LinearProgram,
    objective: int | str | LinearObjective = 0,
    direction: str = "min",
    *,
    backend: Backend | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> SolveOutcome:
    """Optimize one objective of ``lp``.

    ``objective`` is an index or label into ``lp.objectives`` or a free-standing
    :class:`LinearObjective` over the same variables (e.g. a condition selector).
    Infeasible and unbounded programs are reported through the status.
    """
    if isinstance(objective, LinearObjective):
        obj = objective
        if obj.coefficients.shape != (lp.n_vars,):
            raise ModelError("objective dimension does not match program")
    else:
        obj = lp.objectives[lp.objective_index(objective)]
    if direction not in ("min", "max"):
        raise ValueError(f"direction must be 'min' or 'max', got {direction!r}")
    sign = 1.0 if direction == "min" else -1.0
    backend = backend or default_backend()
    raw = backend.minimize(lp, sign * obj.coefficients, tol)
    if not raw.optimal:
        return SolveOutcome(raw.status, iterations=raw.iterations)
    x = np.asarray(raw.x, dtype=float)
    x.setflags(write=False)
    if not lp.is_feasible(x, tol):
        raise SolverError(
            f"{backend.name} returned a point violating the program (scaled violation {lp.max_violation(x, tol):.3g})"
        )
    return SolveOutcome(Status.OPTIMAL, x, evaluate(obj, x), raw.iterations)
