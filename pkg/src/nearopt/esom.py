"""A miniature multi-carrier energy system compiled to a bi-objective LP.

Layers are energy vectors (``electricity``, ``heat``, ``gas``, ``solar``...).
Resources feed a layer directly; technologies draw from one layer and
deliver to another with a fixed efficiency. Each period stands for
``weight`` hours of the year and all period quantities are energy totals
over those hours, so annual resource use is the plain sum over periods.

Variables (all >= 0):

* ``cap[j]``    installed capacity of technology ``j`` (output power)
* ``F[i,p]``    energy drawn from resource ``i`` in period ``p``
* ``G[j,p]``    output energy of technology ``j`` in period ``p``

Objectives: total annual cost and total annual invested energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .conditions import ConditionSpec
from .lp import (
    INF,
    LinearConstraint,
    LinearObjective,
    LinearProgram,
    ModelError,
    SolveOutcome,
    Variable,
    evaluate,
)

HOURS_PER_YEAR = 8760.0
ENDOGENOUS = "endogenous"
EXOGENOUS = "exogenous"
COST = "C_tot"
ENERGY = "E_in"


@dataclass(frozen=True)
class Resource:
    name: str
    c_op: float
    e_op: float
    gwp_op: float = 0.0
    potential: float = INF
    kind: str = EXOGENOUS
    layer: str | None = None

    def __post_init__(self):
        if self.kind not in (ENDOGENOUS, EXOGENOUS):
            raise ModelError(f"resource {self.name}: kind must be endogenous or exogenous")
        if min(self.c_op, self.e_op, self.gwp_op) < 0:
            raise ModelError(f"resource {self.name}: c_op, e_op and gwp_op must be >= 0")
        if self.potential < 0:
            raise ModelError(f"resource {self.name}: negative potential")
        if self.layer is None:
            object.__setattr__(self, "layer", self.name)


@dataclass(frozen=True)
class Technology:
    name: str
    input: str
    output: str
    efficiency: float
    c_inv: float = 0.0
    c_maint: float = 0.0
    e_constr: float = 0.0
    gwp_constr: float = 0.0
    max_capacity: float = INF
    capacity_factor: tuple[float, ...] | float = 1.0

    def __post_init__(self):
        if not 0.0 < self.efficiency <= 1.0:
            raise ModelError(f"technology {self.name}: efficiency must lie in (0, 1]")
        cf = self.capacity_factor
        cf = (float(cf),) if np.ndim(cf) == 0 else tuple(float(v) for v in cf)
        if any(not 0.0 <= v <= 1.0 for v in cf):
            raise ModelError(f"technology {self.name}: capacity factors must lie in [0, 1]")
        object.__setattr__(self, "capacity_factor", cf)
        if min(self.c_inv, self.c_maint, self.e_constr, self.gwp_constr) < 0:
            raise ModelError(f"technology {self.name}: negative cost or footprint")

    def cf(self, p: int) -> float:
        cf = self.capacity_factor
        return cf[0] if len(cf) == 1 else cf[p]


@dataclass(frozen=True)
class Demand:
    layer: str
    per_period: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.per_period)
        if any(v < 0 for v in vals):
            raise ModelError(f"demand on {self.layer}: negative value")
        object.__setattr__(self, "per_period", vals)


@dataclass(frozen=True)
class Period:
    id: str
    weight: float


@dataclass(frozen=True)
class EnergyModelSpec:
    periods: tuple[Period, ...]
    resources: tuple[Resource, ...]
    technologies: tuple[Technology, ...]
    demands: tuple[Demand, ...]
    gwp_cap: float = INF
    name: str = "energy-model"
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        for attr in ("periods", "resources", "technologies", "demands", "notes"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        if not self.periods:
            raise ModelError("no periods")
        if any(p.weight <= 0 for p in self.periods):
            raise ModelError("period weights must be positive")
        total = sum(p.weight for p in self.periods)
        if not math.isclose(total, HOURS_PER_YEAR, rel_tol=1e-9):
            raise ModelError(f"period weights sum to {total}, expected {HOURS_PER_YEAR:g}")
        for group, items in (("period", self.periods), ("resource", self.resources), ("technology", self.technologies)):
            names = [getattr(x, "id", None) or x.name for x in items]
            if len(set(names)) != len(names):
                raise ModelError(f"duplicate {group} name")
        layers = self.layers()
        for t in self.technologies:
            if t.input not in layers:
                raise ModelError(f"technology {t.name}: input {t.input!r} is supplied by nothing")
            if len(t.capacity_factor) not in (1, len(self.periods)):
                raise ModelError(f"technology {t.name}: capacity factor count does not match periods")
        for d in self.demands:
            if len(d.per_period) != len(self.periods):
                raise ModelError(f"demand on {d.layer}: {len(d.per_period)} values for {len(self.periods)} periods")
            if d.layer not in layers:
                raise ModelError(f"demand on {d.layer!r}: nothing supplies that layer")

    def layers(self) -> list[str]:
        seen: dict[str, None] = {}
        for r in self.resources:
            seen[r.layer] = None
        for t in self.technologies:
            seen[t.output] = None
        return list(seen)

    def scaled(self, alpha: float) -> "EnergyModelSpec":
        """Same system with every demand multiplied by ``alpha``."""
        demands = tuple(Demand(d.layer, tuple(alpha * v for v in d.per_period)) for d in self.demands)
        return EnergyModelSpec(self.periods, self.resources, self.technologies, demands, self.gwp_cap, self.name, self.notes)


@dataclass(frozen=True)
class CompiledModel:
    spec: EnergyModelSpec
    lp: LinearProgram
    selectors: Mapping[str, ConditionSpec]

    def F(self, resource: str, period: str) -> int:
        return self.lp.index(f"F[{resource},{period}]")

    def cap(self, tech: str) -> int:
        return self.lp.index(f"cap[{tech}]")

    def selector(self, name: str) -> ConditionSpec:
        try:
            return self.selectors[name]
        except KeyError:
            raise ModelError(f"unknown selector {name!r}; known: {', '.join(sorted(self.selectors))}") from None


def compile_model(spec: EnergyModelSpec) -> CompiledModel:
    """Build the LP and the resource-group selectors of ``spec``."""
    P = len(spec.periods)
    names: list[str] = []
    bounds: list[tuple[float, float]] = []

    def var(name, hi=INF):
        names.append(name)
        bounds.append((0.0, hi))
        return len(names) - 1

    cap = {t.name: var(f"cap[{t.name}]", t.max_capacity) for t in spec.technologies}
    F = {(r.name, p): var(f"F[{r.name},{per.id}]") for r in spec.resources for p, per in enumerate(spec.periods)}
    G = {(t.name, p): var(f"G[{t.name},{per.id}]") for t in spec.technologies for p, per in enumerate(spec.periods)}

    rows: list[LinearConstraint] = []
    demand = {d.layer: d.per_period for d in spec.demands}
    for layer in spec.layers():
        for p, per in enumerate(spec.periods):
            terms: dict[int, float] = {}
            for r in spec.resources:
                if r.layer == layer:
                    terms[F[r.name, p]] = terms.get(F[r.name, p], 0.0) + 1.0
            for t in spec.technologies:
                if t.output == layer:
                    terms[G[t.name, p]] = terms.get(G[t.name, p], 0.0) + 1.0
                if t.input == layer:
                    terms[G[t.name, p]] = terms.get(G[t.name, p], 0.0) - 1.0 / t.efficiency
            terms = {i: a for i, a in terms.items() if a != 0.0}
            if not terms:
                continue
            rhs = demand.get(layer, (0.0,) * P)[p]
            rows.append(LinearConstraint(tuple(sorted(terms.items())), ">=", rhs, f"balance[{layer},{per.id}]"))
    for t in spec.technologies:
        for p, per in enumerate(spec.periods):
            avail = t.cf(p) * per.weight
            coefs = ((cap[t.name], -avail), (G[t.name, p], 1.0)) if avail > 0 else ((G[t.name, p], 1.0),)
            rows.append(LinearConstraint(coefs, "<=", 0.0, f"capacity[{t.name},{per.id}]"))
    for r in spec.resources:
        if math.isfinite(r.potential):
            coefs = tuple((F[r.name, p], 1.0) for p in range(P))
            rows.append(LinearConstraint(coefs, "<=", r.potential, f"potential[{r.name}]"))
    if math.isfinite(spec.gwp_cap):
        gwp: dict[int, float] = {}
        for t in spec.technologies:
            if t.gwp_constr:
                gwp[cap[t.name]] = t.gwp_constr
        for r in spec.resources:
            if r.gwp_op:
                for p in range(P):
                    gwp[F[r.name, p]] = r.gwp_op
        if gwp:
            rows.append(LinearConstraint(tuple(sorted(gwp.items())), "<=", spec.gwp_cap, "gwp"))
        elif spec.gwp_cap < 0:
            raise ModelError("negative GWP cap with no emitting component")

    n = len(names)
    c_tot = np.zeros(n)
    e_in = np.zeros(n)
    for t in spec.technologies:
        c_tot[cap[t.name]] = t.c_inv + t.c_maint
        e_in[cap[t.name]] = t.e_constr
    for r in spec.resources:
        for p in range(P):
            c_tot[F[r.name, p]] = r.c_op
            e_in[F[r.name, p]] = r.e_op

    variables = tuple(Variable(nm, lo, hi) for nm, (lo, hi) in zip(names, bounds))
    lp = LinearProgram(variables, tuple(rows), (LinearObjective(c_tot, 0.0, COST), LinearObjective(e_in, 0.0, ENERGY)))

    def sel(label, resources):
        d = np.zeros(n, dtype=int)
        for r in resources:
            for p in range(P):
                d[F[r.name, p]] = 1
        return ConditionSpec(tuple(d), 0.0, label)

    selectors = {}
    for kind in (ENDOGENOUS, EXOGENOUS):
        members = [r for r in spec.resources if r.kind == kind]
        if members:
            selectors[kind] = sel(kind, members)
    for r in spec.resources:
        selectors[r.name] = sel(r.name, [r])
    return CompiledModel(spec, lp, selectors)


@dataclass(frozen=True)
class EnergyReport:
    resources: dict[str, float]
    subtotals: dict[str, float]
    total_primary: float
    objectives: dict[str, float]
    gwp: float
    capacities: dict[str, float]
    placeholder_note: str = "technology construction energy and GWP factors are fixture placeholders"

    def to_dict(self) -> dict:
        return {
            "resources": self.resources,
            "subtotals": self.subtotals,
            "total_primary": self.total_primary,
            "objectives": self.objectives,
            "gwp": self.gwp,
            "capacities": self.capacities,
            "note": self.placeholder_note,
        }


def report(outcome: SolveOutcome | np.ndarray, model: CompiledModel) -> EnergyReport:
    """Annual energy per resource, class subtotals, objectives and emissions at a solution."""
    if isinstance(outcome, SolveOutcome):
        if not outcome.optimal:
            raise ValueError(f"cannot report on a {outcome.status.value} outcome")
        x = outcome.x
    else:
        x = np.asarray(outcome, dtype=float)
    spec = model.spec
    per_res = {r.name: float(sum(x[model.F(r.name, p.id)] for p in spec.periods)) for r in spec.resources}
    subtotals = {
        kind: float(evaluate(model.selectors[kind].as_objective(), x)) if kind in model.selectors else 0.0
        for kind in (ENDOGENOUS, EXOGENOUS)
    }
    gwp = sum(t.gwp_constr * x[model.cap(t.name)] for t in spec.technologies)
    gwp += sum(r.gwp_op * per_res[r.name] for r in spec.resources)
    return EnergyReport(
        per_res,
        subtotals,
        float(sum(per_res.values())),
        {obj.label: evaluate(obj, x) for obj in model.lp.objectives},
        float(gwp),
        {t.name: float(x[model.cap(t.name)]) for t in spec.technologies},
    )
