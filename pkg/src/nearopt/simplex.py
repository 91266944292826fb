"""Dense two-phase primal simplex with Bland's anti-cycling rule.

The program is brought to standard form ``A y = b, y >= 0, b >= 0``:

* a variable with a finite lower bound becomes ``x = l + y`` (plus a row
  ``y <= u - l`` when the upper bound is finite);
* a variable with only an upper bound becomes ``x = u - y``;
* a free variable is split into ``x = y+ - y-``.

Rows get a slack (``<=``) or surplus (``>=``), are sign-normalized so the
rhs is nonnegative and scaled by their largest coefficient. Phase 1
minimizes the sum of artificials; phase 2 the real cost.
"""

from __future__ import annotations

import numpy as np

from .lp import LinearProgram, SolveOutcome, SolverError, Status, Tolerances

PIVOT_TOL = 1e-9
COST_TOL = 1e-9
MAX_ITER = 50_000


class DenseSimplex:
    name = "dense-simplex-bland"
    version = "1.0"

    def __init__(self, max_iter: int = MAX_ITER):
        self.max_iter = max_iter

    def minimize(self, lp: LinearProgram, c: np.ndarray, tol: Tolerances) -> SolveOutcome:
        form = _StandardForm(lp, np.asarray(c, dtype=float))
        if form.trivially_infeasible:
            return SolveOutcome(Status.INFEASIBLE)
        status, y, iters = _two_phase(form.A, form.b, form.c, form.n_slack_basis, tol, self.max_iter)
        if status is not Status.OPTIMAL:
            return SolveOutcome(status, iterations=iters)
        x = form.recover(y)
        return SolveOutcome(Status.OPTIMAL, x, float(c @ x), iters)


class _StandardForm:
    def __init__(self, lp: LinearProgram, c: np.ndarray):
        n = lp.n_vars
        lo, hi = lp.bounds()
        # x = shift + sum_k T[:, k] * y_k
        cols: list[tuple[int, float]] = []
        shift = np.zeros(n)
        extra_rows: list[tuple[int, float]] = []  # (y column, upper) rows y <= upper
        for j in range(n):
            if np.isfinite(lo[j]):
                shift[j] = lo[j]
                cols.append((j, 1.0))
                if np.isfinite(hi[j]):
                    extra_rows.append((len(cols) - 1, hi[j] - lo[j]))
            elif np.isfinite(hi[j]):
                shift[j] = hi[j]
                cols.append((j, -1.0))
            else:
                cols.append((j, 1.0))
                cols.append((j, -1.0))
        ny = len(cols)
        T = np.zeros((n, ny))
        for k, (j, s) in enumerate(cols):
            T[j, k] = s
        self.T, self.shift = T, shift

        A0, senses, b0 = lp.dense()
        rows, rhs, kinds = [], [], []
        self.trivially_infeasible = False
        for r in range(A0.shape[0]):
            a = A0[r] @ T
            beta = b0[r] - A0[r] @ shift
            sense = senses[r]
            if sense == "<=" and beta == np.inf or sense == ">=" and beta == -np.inf:
                continue
            if not np.isfinite(beta):
                self.trivially_infeasible = True
                return
            scale = np.max(np.abs(a))
            if scale == 0.0:
                ok = (sense == ">=" and beta <= 1e-12) or (sense == "<=" and beta >= -1e-12) or (
                    sense == "=" and abs(beta) <= 1e-12
                )
                if not ok:
                    self.trivially_infeasible = True
                    return
                continue
            rows.append(a / scale)
            rhs.append(beta / scale)
            kinds.append(sense)
        for k, ub in extra_rows:
            a = np.zeros(ny)
            a[k] = 1.0
            rows.append(a)
            rhs.append(ub)
            kinds.append("<=")

        m = len(rows)
        n_slack = sum(1 for s in kinds if s != "=")
        A = np.zeros((m, ny + n_slack))
        b = np.zeros(m)
        slack_basis = np.full(m, -1)
        s_col = ny
        for i, (a, beta, sense) in enumerate(zip(rows, rhs, kinds)):
            A[i, :ny] = a
            b[i] = beta
            if sense != "=":
                A[i, s_col] = 1.0 if sense == "<=" else -1.0
                s_idx = s_col
                s_col += 1
            else:
                s_idx = -1
            if b[i] < 0:
                A[i] = -A[i]
                b[i] = -b[i]
            if s_idx >= 0 and A[i, s_idx] > 0:
                slack_basis[i] = s_idx
        self.A, self.b = A, b
        self.c = np.concatenate([c @ T, np.zeros(n_slack)])
        self.n_slack_basis = slack_basis
        self.ny = ny

    def recover(self, y: np.ndarray) -> np.ndarray:
        return self.shift + self.T @ y[: self.ny]


def _pivot(T: np.ndarray, basis: np.ndarray, r: int, j: int) -> None:
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    basis[r] = j


def _entering(cost_row: np.ndarray, allowed: int, tol: float) -> int:
    # Bland: first improving column.
    cand = np.flatnonzero(cost_row[:allowed] < -tol)
    return int(cand[0]) if cand.size else -1


def _leaving(T: np.ndarray, basis: np.ndarray, m: int, j: int) -> int:
    col = T[:m, j]
    mask = col > PIVOT_TOL
    if not mask.any():
        return -1
    ratios = np.full(m, np.inf)
    ratios[mask] = T[:m, -1][mask] / col[mask]
    best = ratios.min()
    ties = np.flatnonzero(ratios <= best + 1e-12 * max(1.0, abs(best)))
    # Bland: among tied rows, the one whose basic variable has the smallest index.
    return int(ties[np.argmin(basis[ties])])


def _run(T: np.ndarray, basis: np.ndarray, m: int, allowed: int, max_iter: int, count: list[int]) -> bool:
    """Iterate on the tableau until optimal; False when unbounded."""
    scale = max(1.0, float(np.max(np.abs(T[m, :allowed]))) if allowed else 1.0)
    while True:
        j = _entering(T[m], allowed, COST_TOL * scale)
        if j < 0:
            return True
        r = _leaving(T, basis, m, j)
        if r < 0:
            return False
        _pivot(T, basis, r, j)
        count[0] += 1
        if count[0] > max_iter:
            raise SolverError(f"simplex exceeded {max_iter} iterations")


def _two_phase(A, b, c, slack_basis, tol: Tolerances, max_iter: int):
    m, n = A.shape
    count = [0]
    if m == 0:
        if np.any(c < -COST_TOL * max(1.0, float(np.max(np.abs(c))) if c.size else 1.0)):
            return Status.UNBOUNDED, None, 0
        return Status.OPTIMAL, np.zeros(n), 0

    need_art = np.flatnonzero(slack_basis < 0)
    n_art = need_art.size
    T = np.zeros((m + 1, n + n_art + 1))
    T[:m, :n] = A
    T[:m, -1] = b
    basis = slack_basis.copy()
    for k, i in enumerate(need_art):
        T[i, n + k] = 1.0
        basis[i] = n + k

    if n_art:
        T[m, :] = 0.0
        T[m, n : n + n_art] = 1.0
        for i in need_art:
            T[m] -= T[i]
        _run(T, basis, m, n + n_art, max_iter, count)
        infeas = -T[m, -1]
        if infeas > tol.feas * max(1.0, float(np.max(b))):
            return Status.INFEASIBLE, None, count[0]
        # Drive remaining artificials out of the basis; drop redundant rows.
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= n:
                cand = np.flatnonzero(np.abs(T[i, :n]) > PIVOT_TOL)
                if cand.size:
                    _pivot(T, basis, i, int(cand[0]))
                    count[0] += 1
                else:
                    keep[i] = False
        rows = np.flatnonzero(keep)
        T = np.vstack([T[rows][:, list(range(n)) + [n + n_art]], np.zeros((1, n + 1))])
        basis = basis[rows]
        m = rows.size
    else:
        T = np.vstack([T[:m], np.zeros((1, T.shape[1]))])

    # Phase 2 reduced costs.
    T[m, :n] = c
    T[m, -1] = 0.0
    for i in range(m):
        cb = c[basis[i]]
        if cb != 0.0:
            T[m] -= cb * T[i]
    if not _run(T, basis, m, n, max_iter, count):
        return Status.UNBOUNDED, None, count[0]
    y = np.zeros(n)
    y[basis] = T[:m, -1]
    np.maximum(y, 0.0, out=y)
    return Status.OPTIMAL, y, count[0]
