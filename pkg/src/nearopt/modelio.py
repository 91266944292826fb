"""Model files, result files and run manifests.

Two JSON model flavors share a ``format``/``version`` header:

* ``nearopt-lp``: variables, constraints, objectives and named selectors;
* ``nearopt-energy-model``: the fields of :class:`~nearopt.esom.EnergyModelSpec`.

Infinite bounds, potentials and caps are written as ``null``. All result
files are written atomically (temporary file, then rename) and CSV numbers
carry 12 significant digits, so identical runs produce identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from importlib import resources as _resources
from pathlib import Path
from typing import Any, Mapping, Sequence

import jsonschema
import numpy as np

from .conditions import ConditionSpec
from .esom import (
    ENDOGENOUS,
    EXOGENOUS,
    CompiledModel,
    Demand,
    EnergyModelSpec,
    Period,
    Resource,
    Technology,
    compile_model,
)
from .lp import (
    INF,
    LinearConstraint,
    LinearObjective,
    LinearProgram,
    ModelError,
    Variable,
)
from .necessary import SweepResult
from .pareto import ParetoFront

LP_FORMAT = "nearopt-lp"
ENERGY_FORMAT = "nearopt-energy-model"
FORMAT_VERSION = 1
NUMBER_FORMAT = "%.12g"


class ModelFileError(ModelError):
    """A model file that cannot be read, parsed or validated."""


class OutputError(OSError):
    """A result file that cannot be written."""


_num = {"type": "number"}
_opt_num = {"type": ["number", "null"]}
_name = {"type": "string", "minLength": 1}
_terms = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["var", "coef"],
        "properties": {"var": _name, "coef": _num},
        "additionalProperties": False,
    },
}
_header = {
    "format": {"enum": [LP_FORMAT, ENERGY_FORMAT]},
    "version": {"type": "integer"},
    "name": {"type": "string"},
    "notes": {"type": "array", "items": {"type": "string"}},
}

LP_SCHEMA = {
    "type": "object",
    "required": ["format", "version", "variables", "constraints", "objectives"],
    "properties": {
        **_header,
        "variables": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name"],
                "properties": {"name": _name, "lower": _opt_num, "upper": _opt_num},
                "additionalProperties": False,
            },
        },
        "constraints": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["terms", "sense", "rhs"],
                "properties": {
                    "name": {"type": "string"},
                    "terms": _terms,
                    "sense": {"enum": [">=", "<=", "="]},
                    "rhs": _opt_num,
                },
                "additionalProperties": False,
            },
        },
        "objectives": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["label", "terms"],
                "properties": {"label": _name, "terms": _terms, "offset": _num},
                "additionalProperties": False,
            },
        },
        "selectors": {"type": "object", "additionalProperties": {"type": "array", "items": _name, "minItems": 1}},
    },
    "additionalProperties": False,
}

ENERGY_SCHEMA = {
    "type": "object",
    "required": ["format", "version", "periods", "resources", "technologies", "demands"],
    "properties": {
        **_header,
        "units": {"type": "object", "additionalProperties": {"type": "string"}},
        "gwp_cap": _opt_num,
        "periods": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "weight"],
                "properties": {"id": _name, "weight": _num},
                "additionalProperties": False,
            },
        },
        "resources": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name", "c_op", "e_op", "class"],
                "properties": {
                    "name": _name,
                    "c_op": _num,
                    "e_op": _num,
                    "gwp_op": _num,
                    "potential": _opt_num,
                    "class": {"enum": [ENDOGENOUS, EXOGENOUS]},
                    "layer": _name,
                },
                "additionalProperties": False,
            },
        },
        "technologies": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "input", "output", "efficiency"],
                "properties": {
                    "name": _name,
                    "input": _name,
                    "output": _name,
                    "efficiency": _num,
                    "c_inv": _num,
                    "c_maint": _num,
                    "e_constr": _num,
                    "gwp_constr": _num,
                    "max_capacity": _opt_num,
                    "capacity_factor": {"oneOf": [_num, {"type": "array", "items": _num, "minItems": 1}]},
                },
                "additionalProperties": False,
            },
        },
        "demands": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["carrier", "per_period"],
                "properties": {"carrier": _name, "per_period": {"type": "array", "items": _num}},
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}


@dataclass(frozen=True, eq=False)
class ModelDocument:
    """A loaded model file.

    ``content`` is the :class:`LinearProgram` or :class:`EnergyModelSpec`;
    ``program`` and ``selectors`` are the compiled form either way.
    """

    content: LinearProgram | EnergyModelSpec
    program: LinearProgram
    selectors: Mapping[str, ConditionSpec]
    digest: str
    source: str
    compiled: CompiledModel | None = None

    @property
    def kind(self) -> str:
        return ENERGY_FORMAT if isinstance(self.content, EnergyModelSpec) else LP_FORMAT

    def selector(self, name: str) -> ConditionSpec:
        try:
            return self.selectors[name]
        except KeyError:
            known = ", ".join(sorted(self.selectors)) or "none"
            raise ModelFileError(f"unknown selector {name!r}; known: {known}") from None


def fixture_path() -> Path:
    """Path of the bundled miniature energy-system model."""
    return Path(str(_resources.files("nearopt") / "data" / "toy_esom.json"))


def _finite_or_inf(v, default=INF):
    return default if v is None else float(v)


def _null_if_inf(v):
    return None if math.isinf(v) else float(v)


def _field_path(err: jsonschema.ValidationError) -> str:
    path = "$"
    for p in err.absolute_path:
        path += f"[{p}]" if isinstance(p, int) else f".{p}"
    return path


def _validate(doc: Any, schema: dict, source: str):
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        lines = [f"{source}: {_field_path(e)}: {e.message}" for e in errors[:10]]
        if len(errors) > 10:
            lines.append(f"... and {len(errors) - 10} more")
        raise ModelFileError("schema violation\n  " + "\n  ".join(lines))


def parse_model(doc: Any, source: str = "<memory>") -> LinearProgram | EnergyModelSpec:
    """Validate a decoded JSON document and build the object it describes."""
    parsed = _parse(doc, source)
    return parsed.lp if isinstance(parsed, _RawLP) else parsed


def _parse(doc: Any, source: str):
    if not isinstance(doc, dict):
        raise ModelFileError(f"{source}: top level must be an object")
    fmt = doc.get("format")
    if fmt not in (LP_FORMAT, ENERGY_FORMAT):
        raise ModelFileError(f"{source}: $.format: expected {LP_FORMAT!r} or {ENERGY_FORMAT!r}, got {fmt!r}")
    if "version" in doc and doc["version"] != FORMAT_VERSION:
        raise ModelFileError(f"{source}: $.version: unsupported format version {doc['version']!r} (expected {FORMAT_VERSION})")
    _validate(doc, LP_SCHEMA if fmt == LP_FORMAT else ENERGY_SCHEMA, source)
    try:
        return _lp_from_doc(doc) if fmt == LP_FORMAT else _spec_from_doc(doc)
    except ModelError as exc:
        raise ModelFileError(f"{source}: {exc}") from exc


def _lp_from_doc(doc) -> "_RawLP":
    variables = tuple(
        Variable(v["name"], _finite_or_inf(v.get("lower", 0.0), -INF), _finite_or_inf(v.get("upper")))
        for v in doc["variables"]
    )
    index = {v.name: i for i, v in enumerate(variables)}

    def terms(ts, where):
        out: dict[int, float] = {}
        for t in ts:
            if t["var"] not in index:
                raise ModelError(f"{where}: unknown variable {t['var']!r}")
            i = index[t["var"]]
            out[i] = out.get(i, 0.0) + float(t["coef"])
        return out

    rows = []
    for k, c in enumerate(doc["constraints"]):
        where = f"$.constraints[{k}]"
        rhs = c["rhs"]
        if rhs is None:
            rhs = INF if c["sense"] == "<=" else -INF
        rows.append(LinearConstraint(tuple(sorted(terms(c["terms"], where).items())), c["sense"], float(rhs), c.get("name", "")))
    objectives = []
    for k, o in enumerate(doc["objectives"]):
        vec = np.zeros(len(variables))
        for i, a in terms(o["terms"], f"$.objectives[{k}]").items():
            vec[i] = a
        objectives.append(LinearObjective(vec, float(o.get("offset", 0.0)), o["label"]))
    lp = LinearProgram(variables, tuple(rows), tuple(objectives))
    selectors = {}
    for name, names in doc.get("selectors", {}).items():
        d = np.zeros(len(variables), dtype=int)
        for v in names:
            if v not in index:
                raise ModelError(f"$.selectors.{name}: unknown variable {v!r}")
            d[index[v]] = 1
        selectors[name] = ConditionSpec(tuple(d), 0.0, name)
    return _RawLP(lp, selectors)


@dataclass(frozen=True)
class _RawLP:
    lp: LinearProgram
    selectors: dict


def _spec_from_doc(doc) -> EnergyModelSpec:
    return EnergyModelSpec(
        periods=tuple(Period(p["id"], float(p["weight"])) for p in doc["periods"]),
        resources=tuple(
            Resource(
                r["name"],
                float(r["c_op"]),
                float(r["e_op"]),
                float(r.get("gwp_op", 0.0)),
                _finite_or_inf(r.get("potential")),
                r["class"],
                r.get("layer"),
            )
            for r in doc["resources"]
        ),
        technologies=tuple(
            Technology(
                t["name"],
                t["input"],
                t["output"],
                float(t["efficiency"]),
                float(t.get("c_inv", 0.0)),
                float(t.get("c_maint", 0.0)),
                float(t.get("e_constr", 0.0)),
                float(t.get("gwp_constr", 0.0)),
                _finite_or_inf(t.get("max_capacity")),
                t.get("capacity_factor", 1.0),
            )
            for t in doc["technologies"]
        ),
        demands=tuple(Demand(d["carrier"], tuple(d["per_period"])) for d in doc["demands"]),
        gwp_cap=_finite_or_inf(doc.get("gwp_cap")),
        name=doc.get("name", "energy-model"),
        notes=tuple(doc.get("notes", ())),
    )


def read_model(path: str | os.PathLike | None = None) -> ModelDocument:
    """Load, validate and compile a model file (the bundled fixture when ``path`` is None)."""
    path = Path(path) if path is not None else fixture_path()
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ModelFileError(f"cannot read model file {path}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ModelFileError(f"{path}: not UTF-8 text ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    parsed = _parse(doc, str(path))
    digest = "sha256:" + hashlib.sha256(raw).hexdigest()
    if isinstance(parsed, _RawLP):
        return ModelDocument(parsed.lp, parsed.lp, parsed.selectors, digest, str(path))
    try:
        compiled = compile_model(parsed)
    except ModelError as exc:
        raise ModelFileError(f"{path}: {exc}") from exc
    return ModelDocument(parsed, compiled.lp, compiled.selectors, digest, str(path), compiled)


def load_model(path: str | os.PathLike | None = None) -> LinearProgram | EnergyModelSpec:
    """The :class:`LinearProgram` or :class:`EnergyModelSpec` stored in ``path``."""
    return read_model(path).content


def model_to_doc(model: LinearProgram | EnergyModelSpec, selectors: Mapping[str, ConditionSpec] | None = None) -> dict:
    if isinstance(model, EnergyModelSpec):
        return _spec_to_doc(model)
    if isinstance(model, LinearProgram):
        return _lp_to_doc(model, selectors or {})
    raise TypeError(f"cannot serialize {type(model).__name__}")


def _lp_to_doc(lp: LinearProgram, selectors: Mapping[str, ConditionSpec]) -> dict:
    names = lp.variable_names
    doc = {
        "format": LP_FORMAT,
        "version": FORMAT_VERSION,
        "variables": [{"name": v.name, "lower": _null_if_inf(v.lower), "upper": _null_if_inf(v.upper)} for v in lp.variables],
        "constraints": [
            {
                "name": c.name,
                "terms": [{"var": names[i], "coef": float(a)} for i, a in c.coefficients],
                "sense": c.sense,
                "rhs": _null_if_inf(c.rhs),
            }
            for c in lp.constraints
        ],
        "objectives": [
            {
                "label": o.label,
                "terms": [{"var": names[i], "coef": float(a)} for i, a in enumerate(o.coefficients) if a != 0.0],
                "offset": float(o.offset),
            }
            for o in lp.objectives
        ],
    }
    if selectors:
        doc["selectors"] = {k: [names[i] for i, s in enumerate(sel.selector) if s] for k, sel in selectors.items()}
    return doc


def _spec_to_doc(spec: EnergyModelSpec) -> dict:
    def cf(t):
        return t.capacity_factor[0] if len(t.capacity_factor) == 1 else list(t.capacity_factor)

    return {
        "format": ENERGY_FORMAT,
        "version": FORMAT_VERSION,
        "name": spec.name,
        "notes": list(spec.notes),
        "gwp_cap": _null_if_inf(spec.gwp_cap),
        "periods": [{"id": p.id, "weight": p.weight} for p in spec.periods],
        "resources": [
            {
                "name": r.name,
                "c_op": r.c_op,
                "e_op": r.e_op,
                "gwp_op": r.gwp_op,
                "potential": _null_if_inf(r.potential),
                "class": r.kind,
                "layer": r.layer,
            }
            for r in spec.resources
        ],
        "technologies": [
            {
                "name": t.name,
                "input": t.input,
                "output": t.output,
                "efficiency": t.efficiency,
                "c_inv": t.c_inv,
                "c_maint": t.c_maint,
                "e_constr": t.e_constr,
                "gwp_constr": t.gwp_constr,
                "max_capacity": _null_if_inf(t.max_capacity),
                "capacity_factor": cf(t),
            }
            for t in spec.technologies
        ],
        "demands": [{"carrier": d.layer, "per_period": list(d.per_period)} for d in spec.demands],
    }


def dump_model(model, path, selectors: Mapping[str, ConditionSpec] | None = None) -> Path:
    """Write ``model`` in the format :func:`load_model` reads back."""
    return write_text(path, json.dumps(model_to_doc(model, selectors), indent=2) + "\n")


# -- result files ------------------------------------------------------------


def write_text(path, text: str) -> Path:
    """Atomically replace ``path`` with ``text``."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    except OSError as exc:
        raise OutputError(f"cannot write to {path.parent}: {exc.strerror or exc}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    return path


def _fmt(v: float) -> str:
    return NUMBER_FORMAT % v


def _csv(rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def front_table(front: ParetoFront) -> list[list[str]]:
    """Rows of the front CSV, header first.

    Columns: the deviation that produced the point, the objective values and
    each objective's relative deviation from its individual optimum. For
    anchors the first column is the realized deviation of the constrained
    objective.
    """
    labels = list(front.labels) or [f"f{k}" for k in range(len(front.points[0].objectives))]
    n = len(labels)
    refs = front.anchors or front.points
    best = np.array([min(p.objectives[k] for p in refs) for k in range(n)])
    free = int(front.meta.get("free", n - 1))
    constrained = [k for k in range(n) if k != free]
    eps_cols = ["epsilon"] if len(constrained) == 1 else [f"epsilon_{labels[k]}" for k in constrained]
    rows = [eps_cols + labels + [f"rel_dev_{lab}" for lab in labels]]
    for p in front.points:
        dev = [(p.objectives[k] / best[k] - 1.0) if best[k] != 0 else 0.0 for k in range(n)]
        eps = [p.epsilon[k] if p.epsilon is not None else dev[k] for k in constrained]
        rows.append([_fmt(v) for v in eps] + [_fmt(v) for v in p.objectives] + [_fmt(v) for v in dev])
    return rows


def write_front_csv(front: ParetoFront, path) -> Path:
    return write_text(path, _csv(front_table(front)))


def sweep_table(result: SweepResult, labels: Sequence[str] = ("f0", "f1")) -> list[list[str]]:
    """Heatmap layout: one row per deviation of the first objective, one column per deviation of the second."""
    if result.thresholds.ndim != 2:
        raise ValueError("the heatmap layout needs exactly two objectives")
    rows = [[f"{labels[0]}\\{labels[1]}"] + [_fmt(e) for e in result.axes[1]]]
    for i, e0 in enumerate(result.axes[0]):
        rows.append([_fmt(e0)] + [_fmt(v) for v in result.thresholds[i]])
    return rows


def write_sweep_csv(result: SweepResult, path, labels: Sequence[str] = ("f0", "f1")) -> Path:
    return write_text(path, _csv(sweep_table(result, labels)))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, payload) -> Path:
    return write_text(path, json.dumps(_jsonable(payload), indent=2, sort_keys=False) + "\n")


@dataclass
class RunManifest:
    """What a run consumed: enough to repeat it and get the same numbers."""

    command: str
    argv: list[str]
    input_digest: str
    input_path: str
    solver: dict
    tolerances: dict
    schedule: list | None = None
    grid: list | None = None
    front_size: int | None = None
    seed: int | None = None
    jobs: int = 1
    package_version: str = ""
    started: str = ""
    finished: str = ""
    outputs: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "argv": self.argv,
            "input": {"path": self.input_path, "digest": self.input_digest},
            "solver": self.solver,
            "tolerances": self.tolerances,
            "schedule": self.schedule,
            "grid": self.grid,
            "front_size": self.front_size,
            "seed": self.seed,
            "jobs": self.jobs,
            "package_version": self.package_version,
            "timestamps": {"started": self.started, "finished": self.finished},
            "outputs": self.outputs,
        }

    def reproducible_part(self) -> dict:
        """The manifest without timestamps: equal parts imply equal CSV bytes."""
        d = self.to_dict()
        d.pop("timestamps")
        return d


def emit_results(out_dir, *, front: ParetoFront | None = None, sweep: SweepResult | None = None,
                 report: Mapping | None = None, manifest: RunManifest | None = None,
                 labels: Sequence[str] | None = None, stem: str = "") -> list[Path]:
    """Write whichever of front CSV, sweep CSV, JSON report and manifest are given."""
    out = Path(out_dir)
    if out.exists() and not out.is_dir():
        raise OutputError(f"{out} exists and is not a directory")
    prefix = f"{stem}-" if stem else ""
    written = []
    if front is not None:
        written.append(write_front_csv(front, out / f"{prefix}front.csv"))
    if sweep is not None:
        written.append(write_sweep_csv(sweep, out / f"{prefix}sweep.csv", labels or ("f0", "f1")))
    if report is not None:
        written.append(write_json(out / f"{prefix}report.json", report))
    if manifest is not None:
        manifest.outputs = sorted({p.name for p in written} | set(manifest.outputs))
        written.append(write_json(out / f"{prefix}manifest.json", manifest.to_dict()))
    return written
