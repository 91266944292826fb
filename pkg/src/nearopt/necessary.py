"""Near-optimal spaces and the thresholds of necessary conditions over them.

Single objective: cap the objective at ``(1 + eps) f(x*)`` and minimize the
selected sum over the capped program; the minimum is the exact threshold.

Several objectives: around each anchor of an approximate front, cap every
objective at ``(1 + eps_k) f_k(anchor)`` and minimize the selected sum; the
smallest of these minima is the threshold. It can only overestimate the
true one, since the anchors cover part of the front.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .conditions import EXACT, UPPER_BOUND, ConditionSpec, NecessaryConditionReport
from .lp import (
    DEFAULT_TOL,
    LinearProgram,
    SolveOutcome,
    Tolerances,
    add_constraints,
    objective_row,
    solve,
)
from .pareto import ParetoFront, ParetoPoint

log = logging.getLogger(__name__)

# Per-objective percentages of the case-study heatmaps.
DEFAULT_GRID = (0.01, 0.02, 0.05, 0.10, 0.20, 0.50)


class NearOptError(RuntimeError):
    """An internal inconsistency (a capped space that should contain its anchor is empty)."""


@dataclass(frozen=True)
class EpsilonVector:
    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if any(not v >= 0.0 for v in vals):
            raise ValueError(f"epsilon entries must be >= 0, got {vals}")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


@dataclass(frozen=True)
class CappedSpace:
    """A program with added cap rows and a note on each degenerate cap."""

    program: LinearProgram
    caps: tuple[float, ...]
    degenerate: tuple[str, ...] = ()


def _as_eps(eps, n: int) -> EpsilonVector:
    if not isinstance(eps, EpsilonVector):
        eps = EpsilonVector(tuple(np.atleast_1d(np.asarray(eps, dtype=float))))
    if len(eps) != n:
        raise ValueError(f"epsilon has {len(eps)} entries, expected {n}")
    return eps


def _cap_rows(lp: LinearProgram, objectives: Sequence[int], refs: Sequence[float], eps: Sequence[float], tag: str):
    rows, caps, notes = [], [], []
    for k, ref, e in zip(objectives, refs, eps):
        obj = lp.objectives[k]
        if not np.isfinite(ref):
            raise ValueError(f"reference value of {obj.label} is not finite")
        if ref < 0:
            raise ValueError(f"relative caps need f >= 0; {obj.label} reference is {ref}")
        if ref == 0.0:
            notes.append(f"{obj.label}: reference is 0, cap collapses to equality f = 0")
            rows.append(objective_row(obj, "=", 0.0, f"{tag}[{obj.label}]"))
            caps.append(0.0)
            continue
        cap = (1.0 + e) * ref
        rows.append(objective_row(obj, "<=", cap, f"{tag}[{obj.label}]"))
        caps.append(cap)
    return rows, caps, notes


def epsilon_space_single(
    lp: LinearProgram,
    objective: int | str = 0,
    eps: float = 0.0,
    optimum: SolveOutcome | None = None,
    *,
    tol: Tolerances = DEFAULT_TOL,
    backend=None,
) -> CappedSpace:
    """``lp`` plus the row ``f(x) <= (1 + eps) f(x*)``.

    ``optimum`` is the prior solve of ``f``; it is computed when omitted.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    k = lp.objective_index(objective)
    if optimum is None:
        optimum = solve(lp, k, tol=tol, backend=backend)
    if not optimum.optimal:
        raise NearOptError(f"base objective is {optimum.status.value}; no optimum to cap against")
    rows, caps, notes = _cap_rows(lp, [k], [optimum.value], [eps], "near-opt")
    return CappedSpace(add_constraints(lp, rows), tuple(caps), tuple(notes))


def necessary_condition_single(
    lp: LinearProgram,
    objective: int | str,
    eps: float,
    cond: ConditionSpec,
    *,
    optimum: SolveOutcome | None = None,
    tol: Tolerances = DEFAULT_TOL,
    backend=None,
) -> NecessaryConditionReport:
    """Exact threshold ``min d @ x`` over the single-objective near-optimal space."""
    k = lp.objective_index(objective)
    if optimum is None:
        optimum = solve(lp, k, tol=tol, backend=backend)
    space = epsilon_space_single(lp, k, eps, optimum, tol=tol, backend=backend)
    out = solve(space.program, cond.as_objective(), tol=tol, backend=backend)
    if not out.optimal:
        raise NearOptError(f"capped program is {out.status.value}, but the optimum lies inside it")
    n = len(lp.objectives)
    eps_vec = tuple(float(eps) if i == k else 0.0 for i in range(n))
    anchor = tuple(float(v) for v in ParetoPoint.at(lp, optimum.x).objectives)
    return NecessaryConditionReport(
        cond.with_threshold(out.value), (out.value,), (out.x,), 0, eps_vec, EXACT, (anchor,), space.degenerate
    )


def epsilon_box(lp: LinearProgram, anchor: ParetoPoint, eps) -> CappedSpace:
    """``lp`` plus ``f_k(x) <= (1 + eps_k) f_k(anchor)`` for every objective."""
    n = len(lp.objectives)
    if len(anchor.objectives) != n:
        raise ValueError(f"anchor has {len(anchor.objectives)} objective values, program has {n}")
    eps = _as_eps(eps, n)
    rows, caps, notes = _cap_rows(lp, range(n), anchor.objectives, eps.values, "box")
    return CappedSpace(add_constraints(lp, rows), tuple(caps), tuple(notes))


def _box_min(lp, anchor, eps, d, tol, backend):
    space = epsilon_box(lp, anchor, eps)
    out = solve(space.program, d, tol=tol, backend=backend)
    return space, out


def necessary_condition_multi(
    lp: LinearProgram,
    front: ParetoFront | Sequence[ParetoPoint],
    eps,
    cond: ConditionSpec,
    *,
    jobs: int = 1,
    tol: Tolerances = DEFAULT_TOL,
    backend=None,
) -> NecessaryConditionReport:
    """Upper bound on the threshold from one box solve per front point."""
    points = tuple(front.points if isinstance(front, ParetoFront) else front)
    if not points:
        raise ValueError("empty front")
    eps = _as_eps(eps, len(lp.objectives))
    d = cond.as_objective()

    def task(p):
        return _box_min(lp, p, eps, d, tol, backend)

    if jobs > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(task, points))
    else:
        results = [task(p) for p in points]

    values, witnesses, notes = [], [], []
    for i, (space, out) in enumerate(results):
        if not out.optimal:
            raise NearOptError(
                f"box around anchor {i} {points[i].objectives} is {out.status.value}; "
                "anchors must lie inside their own box"
            )
        values.append(out.value)
        witnesses.append(out.x)
        notes.extend(f"anchor {i}: {s}" for s in space.degenerate)
    best = min(values)
    # Lowest index among exact ties.
    winner = values.index(best)
    return NecessaryConditionReport(
        cond.with_threshold(best),
        tuple(values),
        tuple(witnesses),
        winner,
        eps.values,
        UPPER_BOUND,
        tuple(tuple(p.objectives) for p in points),
        tuple(notes),
    )


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Thresholds on the cross product of per-objective deviation lists.

    ``thresholds[i, j]`` belongs to ``(axes[0][i], axes[1][j])`` for two
    objectives; in general it is indexed by one axis per objective.
    """

    axes: tuple[tuple[float, ...], ...]
    thresholds: np.ndarray
    reports: tuple[NecessaryConditionReport, ...]
    condition: ConditionSpec
    m: int
    monotone: bool
    violations: tuple[str, ...] = ()

    @property
    def grid(self) -> list[EpsilonVector]:
        return [EpsilonVector(c) for c in itertools.product(*self.axes)]


def sweep(
    lp: LinearProgram,
    front: ParetoFront | Sequence[ParetoPoint],
    grid,
    cond: ConditionSpec,
    *,
    jobs: int = 1,
    tol: Tolerances = DEFAULT_TOL,
    backend=None,
) -> SweepResult:
    """Thresholds over a grid of deviation vectors.

    ``grid`` is either one list of deviations reused for every objective or a
    sequence with one list per objective; cells are their cross product.
    """
    n = len(lp.objectives)
    if not len(grid):
        raise ValueError("empty grid")
    if np.ndim(grid[0]) == 0:
        axes = tuple(tuple(float(v) for v in grid) for _ in range(n))
    else:
        axes = tuple(tuple(float(v) for v in ax) for ax in grid)
    if len(axes) != n or any(len(ax) == 0 for ax in axes):
        raise ValueError("grid needs one non-empty axis per objective")
    cells = list(itertools.product(*axes))
    points = tuple(front.points if isinstance(front, ParetoFront) else front)

    def cell(c):
        try:
            return necessary_condition_multi(lp, points, c, cond, tol=tol, backend=backend)
        except Exception as exc:
            raise NearOptError(f"sweep cell eps={c}: {exc}") from exc

    if jobs > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(cell, cells))
    else:
        reports = [cell(c) for c in cells]

    shape = tuple(len(ax) for ax in axes)
    values = np.array([r.threshold for r in reports]).reshape(shape)
    violations = tuple(_monotonicity_violations(axes, values, tol))
    for v in violations:
        log.warning("sweep monotonicity: %s", v)
    return SweepResult(axes, values, tuple(reports), cond, len(points), not violations, violations)


def _monotonicity_violations(axes, values: np.ndarray, tol: Tolerances):
    # Thresholds must not increase when any single deviation grows.
    for axis in range(values.ndim):
        order = np.argsort(axes[axis], kind="stable")
        v = np.take(values, order, axis=axis)
        prev = np.take(v, range(v.shape[axis] - 1), axis=axis)
        nxt = np.take(v, range(1, v.shape[axis]), axis=axis)
        slack = tol.opt * np.maximum(1.0, np.maximum(np.abs(prev), np.abs(nxt)))
        bad = np.argwhere(nxt > prev + slack)
        for idx in bad:
            yield f"axis {axis} at {tuple(int(i) for i in idx)}: {float(prev[tuple(idx)]):.9g} -> {float(nxt[tuple(idx)]):.9g}"
