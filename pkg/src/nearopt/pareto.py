"""Approximate Pareto fronts: anchors, epsilon-constraint sweeps, dominance filtering."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lp import (
    DEFAULT_TOL,
    LinearProgram,
    SolveOutcome,
    Tolerances,
    evaluate,
    solve,
)
from .scalarize import relative_epsilon_constraint, weighted_sum

log = logging.getLogger(__name__)

DOM_TOL = 1e-9

# Relative cost deviations used for the case-study front.
DEFAULT_SCHEDULE = (0.0025, 0.005, 0.01, 0.025, 0.05, 0.075)


class FrontGenerationError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ParetoPoint:
    decision: np.ndarray
    objectives: tuple[float, ...]
    provenance: str = ""
    # Deviation vector of the epsilon-constraint member that produced the
    # point (0 on the free objective); None for anchors and other sources.
    epsilon: tuple[float, ...] | None = None

    @classmethod
    def at(cls, lp: LinearProgram, x, provenance: str = "", epsilon=None) -> "ParetoPoint":
        x = np.array(x, dtype=float)
        x.setflags(write=False)
        eps = None if epsilon is None else tuple(float(e) for e in epsilon)
        return cls(x, tuple(evaluate(obj, x) for obj in lp.objectives), provenance, eps)

    def __repr__(self):
        vals = ", ".join(f"{v:.6g}" for v in self.objectives)
        return f"ParetoPoint(({vals}), {self.provenance!r})"


@dataclass(frozen=True)
class AnchorTable:
    """Individual optima and the cross-evaluation table.

    ``cross[k, l]`` is objective ``k`` evaluated at the optimum of objective ``l``.
    """

    outcomes: tuple[SolveOutcome, ...]
    points: tuple[ParetoPoint, ...]
    cross: np.ndarray


@dataclass(frozen=True)
class ParetoFront:
    points: tuple[ParetoPoint, ...]
    anchors: tuple[ParetoPoint, ...] = ()
    labels: tuple[str, ...] = ()
    meta: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def objective_matrix(self) -> np.ndarray:
        return np.array([p.objectives for p in self.points], dtype=float)


def individual_optima(
    lp: LinearProgram, *, tol: Tolerances = DEFAULT_TOL, backend=None
) -> AnchorTable:
    """Minimize each objective on its own and cross-evaluate the optima."""
    outcomes, points = [], []
    for k, obj in enumerate(lp.objectives):
        out = solve(lp, k, backend=backend, tol=tol)
        if not out.optimal:
            raise FrontGenerationError(
                f"objective {k} ({obj.label}) is {out.status.value}; cannot anchor the front"
            )
        outcomes.append(out)
        points.append(ParetoPoint.at(lp, out.x, f"anchor:{obj.label}"))
    cross = np.array([[p.objectives[k] for p in points] for k in range(len(lp.objectives))])
    return AnchorTable(tuple(outcomes), tuple(points), cross)


def dominates(a: Sequence[float], b: Sequence[float], tol: float = DOM_TOL) -> bool:
    """True when ``a`` is no worse than ``b`` everywhere and strictly better somewhere."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return bool(np.all(a <= b + tol) and np.any(a < b - tol))


def dominance_filter(points: Sequence, tol: float = DOM_TOL) -> list:
    """Keep the non-dominated members of ``points``, in input order.

    Accepts :class:`ParetoPoint` instances or plain objective tuples. Points are
    visited in lexicographic order of their objectives; any dominator of a
    point precedes it in that order, so comparing against the kept set
    suffices.
    """
    if not points:
        return []
    values = [np.asarray(p.objectives if isinstance(p, ParetoPoint) else p, dtype=float) for p in points]
    arity = {v.size for v in values}
    if len(arity) != 1:
        raise ValueError("points do not share objective arity")
    order = sorted(range(len(values)), key=lambda i: tuple(values[i]))
    kept: list[int] = []
    for i in order:
        if not any(dominates(values[k], values[i], tol) for k in kept):
            kept.append(i)
    return [points[i] for i in sorted(kept)]


def _check_schedule(schedule, upper: np.ndarray, free: int) -> list[np.ndarray]:
    n = upper.size
    entries = []
    for s in schedule:
        eps = np.full(n, float(s)) if np.ndim(s) == 0 else np.asarray(s, dtype=float)
        if eps.size != n:
            raise ValueError(f"schedule entry {s!r} has wrong arity")
        for k in range(n):
            if k == free:
                continue
            if not 0.0 < eps[k] < upper[k]:
                raise ValueError(
                    f"schedule entry {float(eps[k])!r} for objective {k} outside ]0, {upper[k]:.6g}["
                )
        entries.append(eps)
    return entries


def generate_front(
    lp: LinearProgram,
    schedule: Sequence = DEFAULT_SCHEDULE,
    free: int = 1,
    *,
    jobs: int = 1,
    tol: Tolerances = DEFAULT_TOL,
    backend=None,
    anchors: AnchorTable | None = None,
) -> ParetoFront:
    """Relative epsilon-constraint front plus the individual optima.

    Each schedule entry ``eps`` solves ``min f_free`` subject to
    ``f_k <= (1 + eps) f_k*`` for the other objectives. Entries must lie in
    ``]0, f_k(x_free*) / f_k* - 1[``. Infeasible members are dropped with a
    warning; the assembled front is sorted by the first objective and passed
    through :func:`dominance_filter`.
    """
    n = len(lp.objectives)
    if n < 2:
        raise ValueError("a front needs at least two objectives")
    free = lp.objective_index(free)
    anchors = anchors or individual_optima(lp, tol=tol, backend=backend)
    ref = np.array([anchors.cross[k, k] for k in range(n)])
    # Deviation of f_k at the free objective's optimum: the top of the useful range.
    upper = np.array([anchors.cross[k, free] / ref[k] - 1.0 if ref[k] > 0 else np.inf for k in range(n)])
    entries = _check_schedule(schedule, upper, free)

    def member(eps: np.ndarray):
        sub = relative_epsilon_constraint(lp, free, eps, ref)
        out = solve(sub, 0, backend=backend, tol=tol)
        return eps, out

    if jobs > 1 and len(entries) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(member, entries))
    else:
        results = [member(e) for e in entries]

    points = list(anchors.points)
    for eps, out in results:
        tag = ",".join(f"{e:g}" for k, e in enumerate(eps) if k != free)
        if not out.optimal:
            log.warning("epsilon-constraint member eps=%s is %s; dropped", tag, out.status.value)
            continue
        eps = np.where(np.arange(n) == free, 0.0, eps)
        points.append(ParetoPoint.at(lp, out.x, f"eps-constraint:{tag}", eps))
    kept = _collapse_duplicates(dominance_filter(points))
    kept.sort(key=lambda p: p.objectives)
    return ParetoFront(
        tuple(kept),
        anchors.points,
        tuple(o.label for o in lp.objectives),
        {"schedule": [e.tolist() for e in entries], "free": free},
    )


def _collapse_duplicates(points: list[ParetoPoint], tol: float = DOM_TOL) -> list[ParetoPoint]:
    # Earlier entries win, so anchors survive over members that landed on them.
    out: list[ParetoPoint] = []
    for p in points:
        if not any(np.all(np.abs(np.subtract(p.objectives, q.objectives)) <= tol) for q in out):
            out.append(p)
    return out


def weighted_front(
    lp: LinearProgram, weight_list: Sequence[Sequence[float]], *, tol: Tolerances = DEFAULT_TOL, backend=None
) -> list[ParetoPoint]:
    """Efficient points from weighted-sum solves, one per weight vector."""
    pts = []
    for w in weight_list:
        out = solve(weighted_sum(lp, w), 0, backend=backend, tol=tol)
        if out.optimal:
            pts.append(ParetoPoint.at(lp, out.x, "weighted-sum:" + ",".join(f"{v:g}" for v in w)))
    return pts


@dataclass(frozen=True)
class SpreadReport:
    count: int
    largest_gap: float | None
    gap_defined: bool
    coverage: float
    note: str = "coverage is a 2-D rectangle-union proxy against the anchor box, not an exact hypervolume"


def _normalizer(front: ParetoFront):
    ref_pts = front.anchors or front.points
    vals = np.array([p.objectives for p in ref_pts], dtype=float)
    lo = vals.min(axis=0)
    hi = vals.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    return lo, hi, span


def spread_report(front: ParetoFront) -> SpreadReport:
    """Point count, largest normalized gap and a 2-D coverage proxy.

    Objectives are normalized to the box spanned by the anchors (the
    individual optima) when the front carries them. The chain whose gaps are
    measured runs from the first anchor through the points to the last
    anchor, so clustered points leave large gaps at the ends.
    """
    if not front.points:
        raise ValueError("empty front")
    lo, hi, span = _normalizer(front)
    chain = [p.objectives for p in front.points]
    if front.anchors:
        chain = [front.anchors[0].objectives] + chain + [front.anchors[-1].objectives]
    chain_arr = (np.array(sorted(chain), dtype=float) - lo) / span
    gaps = np.linalg.norm(np.diff(chain_arr, axis=0), axis=1) if len(chain_arr) > 1 else np.array([])
    gaps = gaps[gaps > 0] if gaps.size else gaps
    gap = float(gaps.max()) if gaps.size else None
    coverage = 0.0
    if lo.size == 2 and np.all(hi > lo):
        pts = (np.array([p.objectives for p in front.points], dtype=float) - lo) / span
        pts = np.clip(pts, 0.0, 1.0)
        coverage = _dominated_area(pts)
    return SpreadReport(len(front.points), gap, gap is not None, coverage)


def _dominated_area(pts: np.ndarray) -> float:
    """Area of the union of rectangles ``[x, 1] x [y, 1]`` for 2-D points in the unit box."""
    order = np.argsort(pts[:, 0], kind="stable")
    area = 0.0
    best_y = 1.0
    xs = pts[order, 0]
    ys = pts[order, 1]
    for i in range(len(xs)):
        best_y = min(best_y, ys[i])
        x_next = xs[i + 1] if i + 1 < len(xs) else 1.0
        area += (x_next - xs[i]) * (1.0 - best_y)
    return float(area)
