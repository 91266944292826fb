"""Weighted-sum and epsilon-constraint scalarizations of multi-objective programs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lp import LinearObjective, LinearProgram, add_constraints, objective_row


class DegenerateReferenceError(ValueError):
    """A relative cap was requested against a zero reference optimum."""


@dataclass(frozen=True)
class WeightVector:
    weights: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        object.__setattr__(self, "weights", w)
        if not w:
            raise ValueError("empty weight vector")
        if any(not (v > 0.0 and math.isfinite(v)) for v in w):
            raise ValueError(f"weights must be strictly positive and finite, got {w}")


def weighted_sum(lp: LinearProgram, weights: WeightVector | Sequence[float]) -> LinearProgram:
    """Single-objective program minimizing ``sum_k w_k f_k`` over the same feasible set."""
    if not isinstance(weights, WeightVector):
        weights = WeightVector(tuple(weights))
    if len(weights.weights) != len(lp.objectives):
        raise ValueError(
            f"{len(weights.weights)} weights for {len(lp.objectives)} objectives"
        )
    coef = np.zeros(lp.n_vars)
    offset = 0.0
    for w, obj in zip(weights.weights, lp.objectives):
        coef += w * obj.coefficients
        offset += w * obj.offset
    label = "+".join(f"{w:g}*{obj.label}" for w, obj in zip(weights.weights, lp.objectives))
    return lp.with_objectives([LinearObjective(coef, offset, label)])


@dataclass(frozen=True)
class EpsilonConstraintSpec:
    """Caps on every objective except ``free``.

    In ``absolute`` mode ``caps[k]`` is the bound on ``f_k``. In ``relative``
    mode ``caps[k]`` is a deviation ``eps_k`` and the bound is
    ``(1 + eps_k) * reference[k]``. Entries at ``free`` are ignored.
    """

    free: int
    caps: tuple[float | None, ...]
    mode: str = "relative"
    reference: tuple[float | None, ...] | None = None

    def __post_init__(self):
        if self.mode not in ("absolute", "relative"):
            raise ValueError(f"mode must be 'absolute' or 'relative', got {self.mode!r}")
        object.__setattr__(self, "caps", tuple(self.caps))
        if self.reference is not None:
            object.__setattr__(self, "reference", tuple(self.reference))
        if not 0 <= self.free < len(self.caps):
            raise ValueError(f"free objective {self.free} out of range")
        for k, cap in enumerate(self.caps):
            if k == self.free:
                continue
            if cap is None or math.isnan(cap):
                raise ValueError(f"missing cap for objective {k}")
            if self.mode == "relative":
                if cap < 0:
                    raise ValueError(f"relative deviation for objective {k} must be >= 0")
                if self.reference is None or self.reference[k] is None:
                    raise ValueError(f"relative mode needs a reference optimum for objective {k}")
                ref = self.reference[k]
                if ref == 0.0:
                    raise DegenerateReferenceError(
                        f"reference optimum of objective {k} is 0; relative cap undefined "
                        "(the near-optimal set reduces to the argmin set)"
                    )
                if ref < 0.0:
                    raise ValueError(f"relative caps need a positive reference, objective {k} has {ref}")

    def bound(self, k: int) -> float:
        if self.mode == "absolute":
            return float(self.caps[k])
        return (1.0 + self.caps[k]) * self.reference[k]


def epsilon_constraint(lp: LinearProgram, spec: EpsilonConstraintSpec) -> LinearProgram:
    """Minimize ``f_free`` with one added cap row per other objective.

    The returned program has the single objective ``f_free``; rows are named
    ``cap[<label>]``.
    """
    if len(spec.caps) != len(lp.objectives):
        raise ValueError(f"{len(spec.caps)} caps for {len(lp.objectives)} objectives")
    rows = [
        objective_row(obj, "<=", spec.bound(k), f"cap[{obj.label}]")
        for k, obj in enumerate(lp.objectives)
        if k != spec.free
    ]
    capped = add_constraints(lp, rows)
    return capped.with_objectives([lp.objectives[spec.free]])


def relative_epsilon_constraint(
    lp: LinearProgram, free: int, eps: float | Sequence[float], reference: Sequence[float]
) -> LinearProgram:
    """Shorthand: the same relative deviation ``eps`` on every constrained objective."""
    n = len(lp.objectives)
    if np.ndim(eps) == 0:
        caps = tuple(None if k == free else float(eps) for k in range(n))
    else:
        caps = tuple(None if k == free else float(e) for k, e in enumerate(eps))
    return epsilon_constraint(lp, EpsilonConstraintSpec(free, caps, "relative", tuple(reference)))
