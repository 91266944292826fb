"""Threshold-sum conditions ``d @ x >= c`` over binary selectors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lp import DEFAULT_TOL, LinearObjective, LinearProgram, Tolerances

EXACT = "exact"
UPPER_BOUND = "upper-bound"


class SelectorMismatch(ValueError):
    """Implication was asked across two different selectors."""


@dataclass(frozen=True)
class ConditionSpec:
    selector: tuple[int, ...]
    threshold: float = 0.0
    name: str = ""

    def __post_init__(self):
        sel = tuple(int(v) for v in np.asarray(self.selector).reshape(-1))
        if any(v not in (0, 1) for v in sel):
            raise ValueError("selector entries must be 0 or 1")
        if not any(sel):
            raise ValueError("selector must pick at least one variable")
        object.__setattr__(self, "selector", sel)
        object.__setattr__(self, "threshold", float(self.threshold))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.selector, dtype=float)

    def with_threshold(self, c: float) -> "ConditionSpec":
        return ConditionSpec(self.selector, c, self.name)

    def as_objective(self) -> LinearObjective:
        return LinearObjective(self.vector, 0.0, self.name or "selector")


def selector(lp: LinearProgram, names: Sequence[str], label: str = "") -> ConditionSpec:
    """Selector over the named variables of ``lp`` (threshold left at 0)."""
    d = np.zeros(lp.n_vars, dtype=int)
    for name in names:
        d[lp.index(name)] = 1
    return ConditionSpec(tuple(d), 0.0, label)


def holds(cond: ConditionSpec, x, tol: Tolerances = DEFAULT_TOL) -> bool:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != len(cond.selector):
        raise ValueError(f"point has dimension {x.size}, selector {len(cond.selector)}")
    return float(cond.vector @ x) >= cond.threshold - tol.feas_for(cond.threshold)


def implies(a: ConditionSpec, b: ConditionSpec) -> bool:
    """psi(a | b): whether knowing ``b`` holds is enough to conclude ``a`` holds.

    Only decided inside one selector family, where the truth space of
    ``d @ x >= c`` shrinks as ``c`` grows, so ``b`` implies ``a`` iff
    ``a.threshold <= b.threshold``.
    """
    if a.selector != b.selector:
        raise SelectorMismatch("implication is only decided for conditions sharing a selector")
    return a.threshold <= b.threshold


def non_implied(thresholds: Sequence[float], sel: ConditionSpec | Sequence[int]) -> ConditionSpec:
    """The member of a certified-necessary family that no other member implies."""
    values = [float(c) for c in thresholds]
    if not values:
        raise ValueError("no thresholds given")
    if any(math.isnan(c) for c in values):
        raise ValueError("NaN threshold")
    base = sel if isinstance(sel, ConditionSpec) else ConditionSpec(tuple(sel))
    return base.with_threshold(max(values))


@dataclass(frozen=True, eq=False)
class NecessaryConditionReport:
    """Computed threshold for ``d @ x >= c`` over a near-optimal space.

    ``per_anchor[i]`` is the minimum of ``d @ x`` over the box of anchor ``i``
    and ``witnesses[i]`` the minimizer. ``threshold`` is their minimum;
    ``winner`` indexes the anchor that attains it (lowest index on ties).
    """

    condition: ConditionSpec
    per_anchor: tuple[float, ...]
    witnesses: tuple[np.ndarray, ...]
    winner: int
    epsilon: tuple[float, ...]
    bound_kind: str
    anchors: tuple[tuple[float, ...], ...] = ()
    degenerate: tuple[str, ...] = field(default=())

    @property
    def threshold(self) -> float:
        return self.condition.threshold

    @property
    def m(self) -> int:
        return len(self.per_anchor)

    @property
    def witness(self) -> np.ndarray:
        return self.witnesses[self.winner]

    def to_dict(self, names: Sequence[str] | None = None) -> dict:
        def wit(x):
            if names is None:
                return [float(v) for v in x]
            return {n: float(v) for n, v in zip(names, x)}

        return {
            "selector": self.condition.name,
            "selected_variables": [
                (names[i] if names else i) for i, s in enumerate(self.condition.selector) if s
            ],
            "threshold": self.threshold,
            "bound_kind": self.bound_kind,
            "epsilon": list(self.epsilon),
            "front_size": self.m,
            "per_anchor": list(self.per_anchor),
            "anchors": [list(a) for a in self.anchors],
            "winner": self.winner,
            "witnesses": [wit(x) for x in self.witnesses],
            "degenerate": list(self.degenerate),
        }
