"""Command-line entry point: ``nearopt <command> [options]``.

Exit codes: 0 success, 1 infeasible or unbounded terminal status, 2 input
error, 3 internal invariant failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import logging
import os
import sys
from importlib import metadata
from typing import Sequence

import numpy as np

from . import modelio
from .conditions import SelectorMismatch
from .esom import report as energy_report
from .lp import ModelError, SolverError, Tolerances, default_backend, solve
from .necessary import DEFAULT_GRID, NearOptError, necessary_condition_multi, necessary_condition_single, sweep
from .oracle import golden_checks, equivalence_corpus
from .pareto import DEFAULT_SCHEDULE, FrontGenerationError, generate_front, spread_report
from .scalarize import DegenerateReferenceError

log = logging.getLogger("nearopt")

EXIT_OK, EXIT_STATUS, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2, 3


class _TerminalStatus(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _grid(text: str) -> list[list[float]] | list[float]:
    parts = text.split(";")
    return _floats(parts[0]) if len(parts) == 1 else [_floats(p) for p in parts]


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        v = 0
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _global_options(p: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--model", default=d(None), help="model JSON file (default: bundled toy energy system)")
    p.add_argument("--out", default=d("nearopt-out"), help="output directory (default: ./nearopt-out)")
    p.add_argument("--tol-feas", type=float, default=d(Tolerances().feas), help="primal feasibility tolerance")
    p.add_argument("--tol-opt", type=float, default=d(Tolerances().opt), help="relative optimality tolerance")
    p.add_argument("--seed", type=int, default=d(0), help="seed of the random tiny-LP corpus")
    p.add_argument("--jobs", type=_positive_int, default=d(None), help="parallel solves (default: $NEAROPT_JOBS or 1)")
    p.add_argument("-v", "--verbose", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nearopt", description="Near-optimal spaces and necessary conditions for multi-objective LPs.")
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        _global_options(p, suppress=True)
        return p

    p = add("solve", "minimize (or maximize) each objective and report the optima")
    p.add_argument("--objective", help="label or index of a single objective (default: all)")
    p.add_argument("--maximize", action="store_true")

    for name, help_ in (
        ("pareto", "approximate the Pareto front with relative epsilon-constraints"),
        ("neccond", "threshold of a necessary condition over a near-optimal space"),
        ("sweep", "necessary-condition thresholds over a grid of deviations"),
    ):
        p = add(name, help_)
        p.add_argument("--epsilons", type=_floats, default=list(DEFAULT_SCHEDULE),
                       help="front schedule, comma-separated (default: %(default)s)")
        p.add_argument("--free-objective", default="1", help="objective minimized by the front members (label or index)")
        if name == "neccond":
            p.add_argument("--selector", required=True, help="registered selector name")
            p.add_argument("--eps", nargs="+", required=True, metavar="K=V", help="deviation per objective label or index")
            mode = p.add_mutually_exclusive_group()
            mode.add_argument("--single", dest="mode", action="store_const", const="single")
            mode.add_argument("--multi", dest="mode", action="store_const", const="multi")
            p.set_defaults(mode="multi")
        if name == "sweep":
            p.add_argument("--selector", required=True, help="registered selector name")
            p.add_argument("--grid", type=_grid, default=list(DEFAULT_GRID),
                           help="deviations for every objective, or one list per objective separated by ';'")

    p = add("oracle", "golden checks on the two-quadratic example and the solver/vertex-enumeration corpus")
    p.add_argument("--corpus", type=_positive_int, default=200, help="number of random tiny LPs")
    return parser


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0"


class _Run:
    def __init__(self, args, argv):
        self.args = args
        self.argv = list(argv)
        self.tol = Tolerances(args.tol_feas, args.tol_opt)
        self.jobs = args.jobs or _positive_int(os.environ.get("NEAROPT_JOBS", "1"))
        self.started = _now()
        self.backend = default_backend()
        self._doc = None

    @property
    def doc(self) -> modelio.ModelDocument:
        if self._doc is None:
            self._doc = modelio.read_model(self.args.model)
        return self._doc

    def manifest(self, **extra) -> modelio.RunManifest:
        return modelio.RunManifest(
            command=self.args.command,
            argv=self.argv,
            input_digest=self.doc.digest,
            input_path=self.doc.source,
            solver={"name": self.backend.name, "version": self.backend.version},
            tolerances={"feas": self.tol.feas, "opt": self.tol.opt},
            jobs=self.jobs,
            seed=self.args.seed,
            package_version=_version(),
            started=self.started,
            finished=_now(),
            **extra,
        )

    def front(self):
        lp = self.doc.program
        free = lp.objective_index(_key(self.args.free_objective))
        return generate_front(lp, self.args.epsilons, free, jobs=self.jobs, tol=self.tol, backend=self.backend)


def _key(text: str) -> int | str:
    return int(text) if text.lstrip("-").isdigit() else text


def _cmd_solve(run: _Run) -> int:
    lp = run.doc.program
    keys = [lp.objective_index(_key(run.args.objective))] if run.args.objective else range(len(lp.objectives))
    direction = "max" if run.args.maximize else "min"
    results, status = [], EXIT_OK
    for k in keys:
        out = solve(lp, k, direction, tol=run.tol, backend=run.backend)
        label = lp.objectives[k].label
        entry = {"objective": label, "direction": direction, "status": out.status.value, "iterations": out.iterations}
        if out.optimal:
            entry["value"] = out.value
            entry["objectives"] = {o.label: float(o.coefficients @ out.x + o.offset) for o in lp.objectives}
            entry["solution"] = dict(zip(lp.variable_names, map(float, out.x)))
            if run.doc.compiled is not None:
                entry["energy_report"] = energy_report(out, run.doc.compiled).to_dict()
            print(f"{label}: {direction} = {out.value:.12g} ({out.iterations} pivots)")
        else:
            print(f"{label}: {out.status.value}")
            status = EXIT_STATUS
        results.append(entry)
    modelio.emit_results(run.args.out, report={"solve": results}, manifest=run.manifest(), stem="solve")
    return status


def _front_or_status(run: _Run):
    try:
        return run.front()
    except FrontGenerationError as exc:
        raise _TerminalStatus(str(exc)) from exc


def _cmd_pareto(run: _Run) -> int:
    front = _front_or_status(run)
    spread = spread_report(front)
    for p in front.points:
        print(", ".join(f"{v:.12g}" for v in p.objectives), f"[{p.provenance}]")
    gap = f"{spread.largest_gap:.4g}" if spread.gap_defined else "n/a"
    print(f"{spread.count} points; largest normalized gap {gap}; coverage {spread.coverage:.4f}")
    payload = {
        "labels": list(front.labels),
        "points": [
            {"objectives": list(p.objectives), "provenance": p.provenance, "epsilon": p.epsilon,
             "decision": dict(zip(run.doc.program.variable_names, map(float, p.decision)))}
            for p in front.points
        ],
        "spread": {"count": spread.count, "largest_gap": spread.largest_gap, "coverage": spread.coverage, "note": spread.note},
    }
    modelio.emit_results(run.args.out, front=front, report=payload, stem="pareto",
                         manifest=run.manifest(schedule=run.args.epsilons, front_size=len(front)))
    return EXIT_OK


def _parse_eps(run: _Run) -> dict[int, float]:
    lp = run.doc.program
    eps: dict[int, float] = {}
    for item in run.args.eps:
        key, sep, val = item.partition("=")
        if not sep:
            raise ValueError(f"--eps expects K=V pairs, got {item!r}")
        try:
            eps[lp.objective_index(_key(key))] = float(val)
        except (KeyError, IndexError) as exc:
            raise ValueError(f"--eps: unknown objective {key!r}") from exc
    return eps


def _cmd_neccond(run: _Run) -> int:
    lp = run.doc.program
    cond = run.doc.selector(run.args.selector)
    eps = _parse_eps(run)
    extra = {}
    if run.args.mode == "single":
        if len(eps) != 1:
            raise ValueError("--single takes exactly one K=V deviation")
        (k, e), = eps.items()
        opt = solve(lp, k, tol=run.tol, backend=run.backend)
        if not opt.optimal:
            raise _TerminalStatus(f"objective {lp.objectives[k].label} is {opt.status.value}")
        rep = necessary_condition_single(lp, k, e, cond, optimum=opt, tol=run.tol, backend=run.backend)
    else:
        missing = [o.label for i, o in enumerate(lp.objectives) if i not in eps]
        if missing:
            raise ValueError(f"--multi needs a deviation for every objective; missing {', '.join(missing)}")
        front = _front_or_status(run)
        vec = [eps[i] for i in range(len(lp.objectives))]
        rep = necessary_condition_multi(lp, front, vec, cond, jobs=run.jobs, tol=run.tol, backend=run.backend)
        extra = {"schedule": run.args.epsilons, "front_size": len(front)}
    kind = "exact" if rep.bound_kind == "exact" else "upper bound"
    print(f"{cond.name}: threshold {rep.threshold:.12g} ({kind}, {rep.m} anchor(s), winner {rep.winner})")
    for note in rep.degenerate:
        print(f"note: {note}")
    modelio.emit_results(run.args.out, report=rep.to_dict(lp.variable_names), stem="neccond",
                         manifest=run.manifest(grid=[list(rep.epsilon)], **extra))
    return EXIT_OK


def _cmd_sweep(run: _Run) -> int:
    lp = run.doc.program
    cond = run.doc.selector(run.args.selector)
    front = _front_or_status(run)
    result = sweep(lp, front, run.args.grid, cond, jobs=run.jobs, tol=run.tol, backend=run.backend)
    labels = [o.label for o in lp.objectives]
    for ax, row in zip(result.axes[0], np.atleast_2d(result.thresholds)):
        print(f"{ax:>8g}: " + " ".join(f"{v:12.6g}" for v in row))
    payload = {
        "selector": cond.name,
        "labels": labels,
        "axes": [list(a) for a in result.axes],
        "thresholds": result.thresholds,
        "monotone": result.monotone,
        "violations": list(result.violations),
        "cells": [r.to_dict(lp.variable_names) for r in result.reports],
    }
    modelio.emit_results(
        run.args.out, front=front, sweep=result if len(labels) == 2 else None, report=payload, labels=labels, stem="sweep",
        manifest=run.manifest(schedule=run.args.epsilons, grid=[list(a) for a in result.axes], front_size=len(front)),
    )
    if not result.monotone:
        print("sweep thresholds are not monotone in the deviations:", *result.violations, sep="\n  ", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def _cmd_oracle(run: _Run) -> int:
    checks = golden_checks()
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}")
    corpus = equivalence_corpus(run.args.corpus, run.args.seed, backend=run.backend)
    print(f"{'PASS' if corpus.ok else 'FAIL'} solver/vertex-enumeration corpus: "
          f"{corpus.agree}/{corpus.total} agree (seed {run.args.seed})")
    payload = {
        "golden": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks],
        "corpus": {
            "n": corpus.total,
            "agree": corpus.agree,
            "seed": run.args.seed,
            "statuses": corpus.statuses,
            "disagreements": [{"index": i, "enumeration": repr(ref), "solver": repr(got)} for i, ref, got in corpus.failures],
        },
    }
    manifest = modelio.RunManifest("oracle", run.argv, "", "", {"name": run.backend.name, "version": run.backend.version},
                                   {"feas": run.tol.feas, "opt": run.tol.opt}, seed=run.args.seed, jobs=run.jobs,
                                   package_version=_version(), started=run.started, finished=_now())
    modelio.emit_results(run.args.out, report=payload, manifest=manifest, stem="oracle")
    return EXIT_OK if corpus.ok and all(c.passed for c in checks) else EXIT_INVARIANT


COMMANDS = {"solve": _cmd_solve, "pareto": _cmd_pareto, "neccond": _cmd_neccond, "sweep": _cmd_sweep, "oracle": _cmd_oracle}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        run = _Run(args, argv)
        return COMMANDS[args.command](run)
    except _TerminalStatus as exc:
        print(f"nearopt: {exc}", file=sys.stderr)
        return EXIT_STATUS
    except (NearOptError, SolverError) as exc:
        print(f"nearopt: internal invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ModelError, SelectorMismatch, DegenerateReferenceError, ValueError, KeyError, IndexError,
            argparse.ArgumentTypeError, OSError) as exc:
        print(f"nearopt: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
