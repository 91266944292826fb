"""Brute-force references: the two-quadratic example on a dense grid, and vertex
enumeration for tiny polyhedra.

Nothing here calls the simplex; these functions exist to check it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .lp import (
    INF,
    LinearConstraint,
    LinearObjective,
    LinearProgram,
    SolveOutcome,
    Status,
    Variable,
)


@dataclass(frozen=True)
class QuadraticPair:
    """Two convex scalar objectives on an interval."""

    f1: Callable[[np.ndarray], np.ndarray]
    f2: Callable[[np.ndarray], np.ndarray]
    domain: tuple[float, float] = (0.0, 1.2)
    argmin: tuple[float, float] = (0.375, 0.75)

    def values(self, x) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        return self.f1(x), self.f2(x)

    def minima(self) -> tuple[tuple[float, float], tuple[float, float]]:
        a, b = self.argmin
        return (a, float(self.f1(np.float64(a)))), (b, float(self.f2(np.float64(b))))


GOLDEN_PAIR = QuadraticPair(
    f1=lambda x: 10.0 * (2.0 * x - 0.75) ** 2 + 2.0,
    f2=lambda x: 10.0 * (x - 0.75) ** 2 + 1.5,
)


@dataclass(frozen=True)
class GridResult:
    step: float
    intervals: tuple[tuple[float, float], ...]
    minima: tuple[tuple[float, float], ...] = ()

    @property
    def hull(self) -> tuple[float, float]:
        if not self.intervals:
            raise ValueError("empty set")
        return self.intervals[0][0], self.intervals[-1][1]


def _grid(pair: QuadraticPair, step: float) -> np.ndarray:
    if step <= 0:
        raise ValueError("step must be positive")
    lo, hi = pair.domain
    n = int(round((hi - lo) / step))
    return lo + step * np.arange(n + 1)


def _intervals(xs: np.ndarray, mask: np.ndarray) -> tuple[tuple[float, float], ...]:
    if not mask.any():
        return ()
    m = mask.astype(np.int8)
    edges = np.diff(np.concatenate([[0], m, [0]]))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1) - 1
    return tuple((float(xs[a]), float(xs[b])) for a, b in zip(starts, stops))


def _grid_minima(pair: QuadraticPair, xs: np.ndarray):
    v1, v2 = pair.values(xs)
    return ((float(xs[v1.argmin()]), float(v1.min())), (float(xs[v2.argmin()]), float(v2.min())))


def grid_epsilon_space(
    pair: QuadraticPair = GOLDEN_PAIR,
    which: str = "f1",
    eps: float | Sequence[float] = 0.25,
    anchors: Sequence[float] | None = None,
    step: float = 1e-4,
) -> GridResult:
    """Sub-level sets evaluated on a dense grid.

    ``which="f1"`` / ``"f2"``: ``{x | f(x) <= (1 + eps) min f}``.
    ``which="both"``: union over anchors ``a`` of
    ``{x | f1(x) <= (1 + eps1) f1(a), f2(x) <= (1 + eps2) f2(a)}``.
    """
    xs = _grid(pair, step)
    v1, v2 = pair.values(xs)
    minima = _grid_minima(pair, xs)
    if which in ("f1", "f2"):
        e = float(np.atleast_1d(eps)[0])
        v = v1 if which == "f1" else v2
        return GridResult(step, _intervals(xs, v <= (1.0 + e) * v.min()), minima)
    if which != "both":
        raise ValueError(f"which must be 'f1', 'f2' or 'both', got {which!r}")
    if anchors is None or len(anchors) == 0:
        raise ValueError("anchors are required for the two-objective space")
    e1, e2 = (float(v) for v in eps)
    a = np.asarray(anchors, dtype=float)
    cap1, cap2 = pair.values(a)
    cap1, cap2 = (1.0 + e1) * cap1, (1.0 + e2) * cap2
    mask = np.zeros(xs.size, dtype=bool)
    for chunk in range(0, a.size, 256):
        c1 = cap1[chunk : chunk + 256, None]
        c2 = cap2[chunk : chunk + 256, None]
        mask |= np.any((v1[None, :] <= c1) & (v2[None, :] <= c2), axis=0)
    return GridResult(step, _intervals(xs, mask), minima)


def pareto_interval(pair: QuadraticPair = GOLDEN_PAIR, step: float = 1e-4) -> np.ndarray:
    """Grid points between the two minimizers: the efficient set of the pair."""
    a, b = sorted(pair.argmin)
    n = int(round((b - a) / step))
    return a + (b - a) * np.arange(n + 1) / n


def grid_optimum_limits(pair: QuadraticPair = GOLDEN_PAIR, eps=(0.25, 0.6), step: float = 1e-4) -> GridResult:
    """Hull of the per-objective sub-level sets taken at each objective's own optimum.

    This is the shortcut that bounds the two-objective space by capping only
    ``f1`` around its minimizer and only ``f2`` around its minimizer, then
    taking the outermost limits. It is looser than the union of boxes of
    :func:`grid_epsilon_space`, which also caps the other objective.
    """
    r1 = grid_epsilon_space(pair, "f1", eps[0], step=step)
    r2 = grid_epsilon_space(pair, "f2", eps[1], step=step)
    lo = min(r1.hull[0], r2.hull[0])
    hi = max(r1.hull[1], r2.hull[1])
    return GridResult(step, ((lo, hi),), r1.minima)


def grid_pareto(
    pair: QuadraticPair = GOLDEN_PAIR,
    m: int = 3,
    spacing: str = "by-x",
    xs: Sequence[float] | None = None,
    interval: tuple[float, float] | None = None,
) -> list[tuple[float, float]]:
    """Objective tuples of ``m`` efficient points.

    ``by-x`` spaces points evenly in ``x`` over ``interval`` (default: the
    efficient interval); ``by-f1`` evenly in ``f1`` value; ``prescribed-x``
    evaluates the given ``xs``.
    """
    a, b = interval or tuple(sorted(pair.argmin))
    if spacing == "prescribed-x":
        if xs is None:
            raise ValueError("prescribed-x needs xs")
        pts = np.asarray(xs, dtype=float)
    else:
        if m < 2:
            raise ValueError("m must be >= 2")
        if spacing == "by-x":
            pts = np.linspace(a, b, m)
        elif spacing == "by-f1":
            # Invert f1 on the efficient branch x >= argmin(f1).
            lo1, hi1 = float(pair.f1(np.float64(a))), float(pair.f1(np.float64(b)))
            targets = np.linspace(lo1, hi1, m)
            grid = pareto_interval(pair, 1e-6)
            vals = pair.f1(grid)
            pts = np.interp(targets, vals, grid)
        else:
            raise ValueError(f"unknown spacing {spacing!r}")
    v1, v2 = pair.values(pts)
    return [(float(p), float(q)) for p, q in zip(v1, v2)]


def round_sig(v: float, digits: int = 3) -> float:
    if v == 0:
        return 0.0
    return round(v, digits - 1 - int(math.floor(math.log10(abs(v)))))


# Point lists quoted for the three approximate fronts of the example.
GOLDEN_LISTS = {
    1: [(2.0, 2.91), (3.41, 1.85), (7.62, 1.5)],
    2: [(2.9, 2.01), (2.99, 1.97), (3.09, 1.94), (3.19, 1.91), (3.3, 1.88), (3.41, 1.85),
        (3.52, 1.82), (3.64, 1.8), (3.77, 1.77), (3.9, 1.75), (4.03, 1.72)],
    3: [(2.0, 2.91), (2.06, 2.64), (2.23, 2.40), (2.51, 2.19), (2.9, 2.01), (3.41, 1.85),
        (4.03, 1.72), (4.76, 1.63), (5.61, 1.56), (6.57, 1.51), (7.62, 1.5)],
}

# x-coordinates reproducing each list.
GOLDEN_LIST_XS = {
    1: np.linspace(0.375, 0.75, 3),
    2: np.linspace(0.525, 0.6, 11),
    3: np.linspace(0.375, 0.75, 11),
}


def grid_model(pair: QuadraticPair = GOLDEN_PAIR, step: float = 0.00075) -> LinearProgram:
    """LP over convex combinations of grid points of the pair.

    Variables: ``x`` and one weight ``w[g]`` per grid point ``g``, with
    ``sum w = 1`` and ``x = sum g w``. Objective ``k`` is ``sum f_k(g) w[g]``.
    Because both functions are convex the lower-left boundary of the image
    consists of grid points, so LP optima land on grid points.
    """
    xs = _grid(pair, step)
    n = xs.size
    variables = [Variable("x", pair.domain[0], pair.domain[1])] + [Variable(f"w[{i}]") for i in range(n)]
    rows = [
        LinearConstraint(tuple((1 + i, 1.0) for i in range(n)), "=", 1.0, "convexity"),
        LinearConstraint(((0, 1.0),) + tuple((1 + i, -float(g)) for i, g in enumerate(xs) if g != 0.0), "=", 0.0, "position"),
    ]
    v1, v2 = pair.values(xs)
    objs = [
        LinearObjective(np.concatenate([[0.0], v1]), 0.0, "f1"),
        LinearObjective(np.concatenate([[0.0], v2]), 0.0, "f2"),
    ]
    return LinearProgram(tuple(variables), tuple(rows), tuple(objs))


def grid_model_point(lp: LinearProgram, x: float) -> np.ndarray:
    """Decision vector of a :func:`grid_model` program placed on the grid point nearest ``x``."""
    grid = {i: -a for i, a in lp.constraints[1].coefficients if i != 0}
    best = min(range(1, lp.n_vars), key=lambda i: abs(grid.get(i, 0.0) - x))
    point = np.zeros(lp.n_vars)
    point[best] = 1.0
    point[0] = grid.get(best, 0.0)
    return point


# ---------------------------------------------------------------------------
# Vertex enumeration


@dataclass(frozen=True, eq=False)
class Polyhedron:
    """``G x >= h`` (inequalities) and ``E x = e`` (equalities), dense."""

    G: np.ndarray
    h: np.ndarray
    E: np.ndarray
    e: np.ndarray

    @classmethod
    def of(cls, lp: LinearProgram) -> "Polyhedron":
        n = lp.n_vars
        G, h, E, e = [], [], [], []
        for row in lp.constraints:
            a = np.zeros(n)
            for i, v in row.coefficients:
                a[i] = v
            if row.sense == "=":
                E.append(a)
                e.append(row.rhs)
            elif row.sense == ">=":
                if row.rhs != -INF:
                    G.append(a)
                    h.append(row.rhs)
            else:
                if row.rhs != INF:
                    G.append(-a)
                    h.append(-row.rhs)
        for j, v in enumerate(lp.variables):
            if np.isfinite(v.lower):
                a = np.zeros(n)
                a[j] = 1.0
                G.append(a)
                h.append(v.lower)
            if np.isfinite(v.upper):
                a = np.zeros(n)
                a[j] = -1.0
                G.append(a)
                h.append(-v.upper)
        G = np.array(G).reshape(-1, n)
        E = np.array(E).reshape(-1, n)
        return cls(G, np.array(h, dtype=float), E, np.array(e, dtype=float))


def enumerate_vertices(lp: LinearProgram, feas_tol: float = 1e-9) -> np.ndarray:
    """All basic feasible points, by solving every square active subsystem.

    Equalities and inequalities (bounds included) are pooled as hyperplanes;
    every ``n``-subset with a nonsingular matrix gives a candidate, which is
    kept when it satisfies all rows.
    """
    P = Polyhedron.of(lp)
    n = lp.n_vars
    H = np.vstack([P.E, P.G])
    rhs = np.concatenate([P.e, P.h])
    if n == 0 or H.shape[0] < n:
        return np.zeros((0, n))
    idx = np.array(list(itertools.combinations(range(H.shape[0]), n)), dtype=int)
    M = H[idx]
    r = rhs[idx]
    det = np.linalg.det(M)
    scale = np.prod(np.linalg.norm(M, axis=2), axis=1)
    ok = np.abs(det) > 1e-10 * scale
    if not ok.any():
        return np.zeros((0, n))
    X = np.linalg.solve(M[ok], r[ok][..., None])[..., 0]
    feas = np.ones(X.shape[0], dtype=bool)
    if P.G.shape[0]:
        slack = X @ P.G.T - P.h[None, :]
        feas &= np.all(slack >= -feas_tol * np.maximum(1.0, np.abs(P.h))[None, :], axis=1)
    if P.E.shape[0]:
        res = X @ P.E.T - P.e[None, :]
        feas &= np.all(np.abs(res) <= feas_tol * np.maximum(1.0, np.abs(P.e))[None, :], axis=1)
    V = X[feas]
    if V.size:
        V = np.unique(np.round(V, 12), axis=0)
    return V


def _recession_min(lp: LinearProgram, c: np.ndarray) -> float:
    """Min of ``c @ r`` over recession directions normalized to ``|r_i| <= 1``."""
    lo, hi = lp.bounds()
    if np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)):
        return 0.0
    P = Polyhedron.of(lp)
    n = lp.n_vars
    rows = [LinearConstraint.from_dense(a, ">=", 0.0) for a in P.G if np.any(a)]
    rows += [LinearConstraint.from_dense(a, "=", 0.0) for a in P.E if np.any(a)]
    cone = LinearProgram(
        tuple(Variable(f"r{i}", -1.0, 1.0) for i in range(n)),
        tuple(rows),
        (LinearObjective(c),),
    )
    V = enumerate_vertices(cone)
    return float((V @ c).min()) if V.size else 0.0


def vertex_enumerate(
    lp: LinearProgram,
    objectives: Sequence[int | LinearObjective] | None = None,
    direction: str = "min",
) -> list[SolveOutcome]:
    """Optimum of each objective by exhaustive vertex enumeration.

    Meant for at most ~8 variables and ~10 rows. A nonempty region with a
    recession direction improving the objective reports Unbounded. A
    nonempty region without vertices (it contains a line) is outside the
    intended use and reports Unbounded only when such a direction improves
    the objective.
    """
    if objectives is None:
        objectives = list(range(len(lp.objectives)))
    V = enumerate_vertices(lp)
    results = []
    sign = 1.0 if direction == "min" else -1.0
    for key in objectives:
        obj = key if isinstance(key, LinearObjective) else lp.objectives[key]
        c = sign * obj.coefficients
        if V.shape[0] == 0:
            results.append(SolveOutcome(Status.INFEASIBLE))
            continue
        if _recession_min(lp, c) < -1e-9:
            results.append(SolveOutcome(Status.UNBOUNDED))
            continue
        vals = V @ c
        i = int(np.argmin(vals))
        x = V[i]
        results.append(SolveOutcome(Status.OPTIMAL, x, float(obj.coefficients @ x + obj.offset)))
    return results


def efficient_vertices(lp: LinearProgram) -> np.ndarray:
    """Efficient extreme points of a bounded bi-objective program, ordered by ``f1``.

    The image of a polytope under two linear maps is a convex polygon whose
    efficient boundary is the lower-left convex chain of the vertex images.
    """
    if len(lp.objectives) != 2:
        raise ValueError("efficient_vertices needs exactly two objectives")
    V = enumerate_vertices(lp)
    if V.shape[0] == 0:
        return V
    F = np.column_stack([V @ o.coefficients + o.offset for o in lp.objectives])
    order = np.lexsort((F[:, 1], F[:, 0]))
    chain: list[int] = []
    for i in order:
        # Keep strictly decreasing f2; drop points that break convexity of the chain.
        if chain and F[i, 1] >= F[chain[-1], 1] - 1e-12:
            continue
        while len(chain) >= 2:
            a, b = F[chain[-2]], F[chain[-1]]
            cross = (b[0] - a[0]) * (F[i, 1] - a[1]) - (b[1] - a[1]) * (F[i, 0] - a[0])
            if cross <= 1e-12:
                chain.pop()
            else:
                break
        chain.append(int(i))
    return V[chain]


def exact_union_minimum(lp: LinearProgram, eps: Sequence[float], d: Sequence[float]) -> float:
    """Exact ``min d @ x`` over the union of boxes around every efficient point.

    For a bounded bi-objective program the efficient set is the chain of
    segments joining consecutive efficient vertices ``a, b``. On one segment
    the anchor is ``(1 - t) a + t b`` and the box rows stay linear in
    ``(x, t)``, so each segment is one small joint program, solved here by
    vertex enumeration.
    """
    E = efficient_vertices(lp)
    if E.shape[0] == 0:
        raise ValueError("program is infeasible")
    e1, e2 = (float(v) for v in eps)
    d = np.asarray(d, dtype=float)
    objs = lp.objectives
    pairs = [(E[i], E[i + 1]) for i in range(len(E) - 1)] or [(E[0], E[0])]
    best = INF
    for a, b in pairs:
        rows = [
            LinearConstraint(tuple(c.coefficients), c.sense, c.rhs, c.name) for c in lp.constraints
        ]
        for o, e in zip(objs, (e1, e2)):
            fa = float(o.coefficients @ a + o.offset)
            fb = float(o.coefficients @ b + o.offset)
            # f(x) <= (1 + e) ((1 - t) fa + t fb)
            coef = np.concatenate([o.coefficients, [-(1.0 + e) * (fb - fa)]])
            rows.append(LinearConstraint.from_dense(coef, "<=", (1.0 + e) * fa - o.offset))
        joint = LinearProgram(
            tuple(lp.variables) + (Variable("t", 0.0, 1.0),),
            tuple(rows),
            (LinearObjective(np.concatenate([d, [0.0]])),),
        )
        out = vertex_enumerate(joint)[0]
        if out.optimal:
            best = min(best, out.value)
    return float(best)


def random_tiny_lp(rng: np.random.Generator, max_vars: int = 6, max_rows: int = 6) -> LinearProgram:
    """Random program with a bounded box, mixed row senses and integer-ish data."""
    n = int(rng.integers(1, max_vars + 1))
    m = int(rng.integers(0, max_rows + 1))
    variables = []
    for j in range(n):
        lo = float(rng.integers(-3, 2))
        hi = lo + float(rng.integers(1, 6))
        variables.append(Variable(f"x{j}", lo, hi))
    rows = []
    for r in range(m):
        a = rng.integers(-4, 5, size=n).astype(float)
        if not np.any(a):
            a[int(rng.integers(n))] = 1.0
        sense = str(rng.choice([">=", "<=", "="], p=[0.45, 0.45, 0.10]))
        rhs = float(rng.integers(-6, 7))
        rows.append(LinearConstraint.from_dense(a, sense, rhs, f"r{r}"))
    c = rng.integers(-5, 6, size=n).astype(float)
    return LinearProgram(tuple(variables), tuple(rows), (LinearObjective(c, float(rng.integers(-2, 3))),))


@dataclass
class CorpusResult:
    total: int = 0
    agree: int = 0
    statuses: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.total > 0 and self.agree == self.total


def equivalence_corpus(n: int = 200, seed: int = 0, tol: float = 1e-6, backend=None) -> CorpusResult:
    """Compare the LP solver against vertex enumeration on ``n`` random programs."""
    from .lp import solve

    rng = np.random.default_rng(seed)
    res = CorpusResult()
    for i in range(n):
        lp = random_tiny_lp(rng)
        ref = vertex_enumerate(lp)[0]
        got = solve(lp, 0, backend=backend)
        res.total += 1
        res.statuses[ref.status.value] = res.statuses.get(ref.status.value, 0) + 1
        same = ref.status is got.status
        if same and ref.optimal:
            same = abs(ref.value - got.value) <= tol * max(1.0, abs(ref.value))
        if same:
            res.agree += 1
        else:
            res.failures.append((i, ref, got))
    return res


# ---------------------------------------------------------------------------
# Worked-example checks


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def _interval_check(name, got, want, tol=1e-3):
    ok = abs(got[0] - want[0]) <= tol and abs(got[1] - want[1]) <= tol
    return Check(name, ok, f"got [{got[0]:.4f}, {got[1]:.4f}], expected [{want[0]}, {want[1]}] +/- {tol}")


def _list_check(name, got, want, tol=0.01):
    if len(got) != len(want):
        return Check(name, False, f"{len(got)} points, expected {len(want)}")
    worst = max(max(abs(round_sig(a) - p), abs(round_sig(b) - q)) for (a, b), (p, q) in zip(got, want))
    # Inclusive band; the slack absorbs binary representation of the rounded values.
    return Check(name, worst <= tol + 1e-9, f"max deviation after 3-sig-fig rounding {worst:.4f} (tol {tol})")


def golden_checks(step: float = 1e-4) -> list[Check]:
    """Golden values of the two-quadratic example."""
    pair = GOLDEN_PAIR
    checks = []
    (x1, v1), (x2, v2) = _grid_minima(pair, _grid(pair, step))
    checks.append(
        Check(
            "minima",
            abs(x1 - 0.375) <= step and abs(v1 - 2) <= 1e-6 and abs(x2 - 0.75) <= step and abs(v2 - 1.5) <= 1e-6,
            f"({x1:.4f}, {v1:.4f}) and ({x2:.4f}, {v2:.4f})",
        )
    )
    checks.append(_interval_check("1-D eps-space f1 eps=0.25", grid_epsilon_space(pair, "f1", 0.25, step=step).hull, (0.263, 0.487)))
    checks.append(_interval_check("2-D limits from per-objective caps at the two optima eps=(0.25,0.6)", grid_optimum_limits(pair, (0.25, 0.6), step).hull, (0.263, 1.05)))
    checks.append(
        _interval_check("anchor box x=0.6 eps=(0.25,0.6)", grid_epsilon_space(pair, "both", (0.25, 0.6), [0.6], step).hull, (0.395, 0.65))
    )
    for k in (1, 2, 3):
        got = grid_pareto(pair, spacing="prescribed-x", xs=GOLDEN_LIST_XS[k])
        checks.append(_list_check(f"approximate front list {k}", got, GOLDEN_LISTS[k]))
    return checks
