"""Command-line entry point: ``wasteroute <command> ...``.

Exit codes: 0 success, 2 input error, 3 infeasible, 4 search limit reached
without a feasible plan. Human summaries go to stdout, diagnostics to
stderr, machine output to files under ``--out``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Dict, List, Optional

from .analysis import ShiftPair, run_sweep
from .core import load_instance_file, save_instance, scale_scenario
from .errors import WasteRouteError
from .evaluator import RoutingPlan, evaluate_plan, metrics_csv, metrics_dict, metrics_table
from .milp import FULL, LITERAL, REPAIRED, build_model, export_model
from .solvers import INFEASIBLE, LIMIT_REACHED, SOLVERS, AnnealingParams, solve
from .synthetic import PROFILES, random_city, random_shifts

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_LIMIT = 4

# option name -> default when neither the flag nor the config file sets it
DEFAULTS = {
    "solver": "exact",
    "seed": 0,
    "max_seconds": None,
    "max_nodes": None,
    "time_accounting": FULL,
    "degree_repair": REPAIRED,
    "format": None,
    "out": None,
    "fractions": [1.0],
    "case": [],
    "fraction": 1.0,
    "restarts": None,
    "initial_temperature": None,
    "cooling_rate": None,
    "moves_per_epoch": None,
    "min_temperature": None,
    "max_epochs": None,
}


class InputError(Exception):
    """Bad flags or configuration (exit code 2)."""


def _fractions(text: str) -> List[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"fractions must be comma-separated numbers: {text!r}") from None
    if not values or any(not v > 0 for v in values):
        raise argparse.ArgumentTypeError("fractions must be positive")
    return values


def _add_solver_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("solver")
    g.add_argument("--solver", choices=SOLVERS)
    g.add_argument("--seed", type=int)
    g.add_argument("--max-seconds", type=float)
    g.add_argument("--max-nodes", type=int)
    g.add_argument("--restarts", type=int)
    g.add_argument("--initial-temperature", type=float)
    g.add_argument("--cooling-rate", type=float)
    g.add_argument("--moves-per-epoch", type=int)
    g.add_argument("--min-temperature", type=float)
    g.add_argument("--max-epochs", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wasteroute", description=__doc__.splitlines()[0])
    parser.add_argument("--config", type=Path, help="JSON file whose keys mirror the long flags; flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check instance files")
    p.add_argument("paths", nargs="+", type=Path)

    p = sub.add_parser("solve", help="solve one shift instance")
    p.add_argument("instance", type=Path)
    p.add_argument("--fraction", type=float, help="waste fraction applied before solving")
    _add_solver_flags(p)
    p.add_argument("--format", choices=["text", "csv", "json"], help="metrics file format")
    p.add_argument("--out", type=Path, help="directory for plan.json, result.json and metrics")

    p = sub.add_parser("evaluate", help="evaluate a plan file against an instance")
    p.add_argument("instance", type=Path)
    p.add_argument("plan", type=Path)
    p.add_argument("--time-accounting", choices=[FULL, LITERAL])
    p.add_argument("--format", choices=["text", "csv", "json"])

    p = sub.add_parser("sweep", help="scenario sweep over waste fractions")
    p.add_argument("--case", action="append", metavar="NAME=DAY,NIGHT",
                   help="a configuration as day and night instance files; repeat per case")
    p.add_argument("--fractions", type=_fractions)
    _add_solver_flags(p)
    p.add_argument("--format", choices=["csv", "text", "json"], help="what to print on stdout")
    p.add_argument("--out", type=Path, help="directory for report.csv, report.txt and plot.csv")

    p = sub.add_parser("export", help="write the MILP as MPS or LP")
    p.add_argument("instance", type=Path)
    p.add_argument("--format", choices=["mps", "lp"])
    p.add_argument("--time-accounting", choices=[FULL, LITERAL])
    p.add_argument("--degree-repair", choices=[REPAIRED, LITERAL])
    p.add_argument("--out", type=Path, help="output file (stdout when omitted)")

    p = sub.add_parser("synth", help="generate synthetic instances")
    p.add_argument("--n", type=int, default=6, help="micro-routes (day shift when --n-night is given)")
    p.add_argument("--n-night", type=int, help="also build a night shift and write every case")
    p.add_argument("--seed", type=int)
    p.add_argument("--profile", choices=sorted(PROFILES), default="campaign")
    p.add_argument("--kind", choices=["CS", "TS"], default="CS")
    p.add_argument("--out", type=Path, help="file (single instance) or directory (--n-night)")
    return parser


def _load_config(path: Optional[Path]) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InputError("config must be a JSON object")
    return {str(k).replace("-", "_"): v for k, v in data.items()}


def _resolve(args: argparse.Namespace, config: dict) -> argparse.Namespace:
    for key, default in DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, config.get(key, default))
    if isinstance(args.fractions, str):
        args.fractions = _fractions(args.fractions)
    if isinstance(args.case, dict):
        args.case = [f"{k}={v}" for k, v in args.case.items()]
    return args


def _params(args) -> AnnealingParams:
    kw = {"seed": int(args.seed)}
    for key in ("restarts", "initial_temperature", "cooling_rate", "moves_per_epoch", "min_temperature",
                "max_epochs"):
        value = getattr(args, key, None)
        if value is not None:
            kw[key] = value
    return AnnealingParams(**kw)


def _dump(obj) -> str:
    return json.dumps(_finite(obj), indent=1, sort_keys=True) + "\n"


def _finite(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(text.encode())


# -- commands -------------------------------------------------------------------

def cmd_validate(args) -> int:
    status = EXIT_OK
    for path in args.paths:
        try:
            inst = load_instance_file(path)
        except OSError as exc:
            print(f"{path}: unreadable: {exc}")
            status = EXIT_INPUT
        except WasteRouteError as exc:
            print(f"{path}: {type(exc).__name__}: {exc}")
            status = EXIT_INPUT
        else:
            print(f"{path}: OK ({inst.case_kind.value}, {inst.n} micro-routes)")
    return status


def _metrics_text(plan, metrics, fmt):
    if fmt == "csv":
        return metrics_csv(plan, metrics)
    if fmt == "json":
        return _dump(metrics_dict(plan, metrics))
    return metrics_table(plan, metrics)


def cmd_solve(args) -> int:
    inst = load_instance_file(args.instance)
    if args.fraction != 1.0:
        inst = scale_scenario(inst, args.fraction)
    result = solve(inst, args.solver, params=_params(args), max_nodes=args.max_nodes,
                   max_seconds=args.max_seconds)
    fmt = args.format or "text"
    if args.out is not None:
        _write(args.out / "result.json", _dump(result.to_dict()))
        if result.plan is not None:
            metrics = evaluate_plan(inst, result.plan)
            _write(args.out / "plan.json", result.plan.to_json())
            ext = {"text": "txt", "csv": "csv", "json": "json"}[fmt]
            _write(args.out / f"metrics.{ext}", _metrics_text(result.plan, metrics, fmt))
    gap = "n/a" if not math.isfinite(result.gap) else f"{result.gap:.4f}"
    objective = "n/a" if result.plan is None else f"{result.objective:.4f}"
    print(f"status: {result.status}")
    print(f"objective_km: {objective}")
    print(f"gap: {gap}")
    if result.plan is not None and args.out is None:
        print(metrics_table(result.plan, evaluate_plan(inst, result.plan)), end="")
    if result.status == INFEASIBLE:
        return EXIT_INFEASIBLE
    if result.status == LIMIT_REACHED:
        return EXIT_LIMIT
    return EXIT_OK


def cmd_evaluate(args) -> int:
    inst = load_instance_file(args.instance)
    try:
        plan = RoutingPlan.from_json(args.plan.read_text())
    except OSError as exc:
        raise InputError(f"cannot read plan {args.plan}: {exc}") from None
    metrics = evaluate_plan(inst, plan, args.time_accounting)
    print(_metrics_text(plan, metrics, args.format or "text"), end="")
    bad = list(metrics.violations) + [v for r in metrics.per_route for v in r.violations]
    for v in bad:
        print(f"violation: {v.kind}: {v.detail}", file=sys.stderr)
    return EXIT_OK if not bad else EXIT_INFEASIBLE


def _parse_cases(specs: List[str]) -> Dict[str, ShiftPair]:
    cases: Dict[str, ShiftPair] = {}
    for entry in specs:
        name, sep, files = entry.partition("=")
        parts = files.split(",")
        if not sep or not name or len(parts) != 2:
            raise InputError(f"--case expects NAME=DAY,NIGHT, got {entry!r}")
        if name in cases:
            raise InputError(f"case {name!r} given twice")
        cases[name] = ShiftPair(load_instance_file(parts[0]), load_instance_file(parts[1]))
    return cases


def cmd_sweep(args) -> int:
    if not args.case:
        raise InputError("sweep needs at least one --case")
    cases = _parse_cases(args.case)
    report = run_sweep(cases, args.fractions, args.solver, params=_params(args), max_nodes=args.max_nodes,
                       max_seconds=args.max_seconds)
    if args.out is not None:
        _write(args.out / "report.csv", report.to_csv())
        _write(args.out / "report.txt", report.to_text())
        _write(args.out / "plot.csv", report.plot_csv())
        _write(args.out / "report.json", _dump(report.to_dict()))
    fmt = args.format or "text"
    if fmt == "csv":
        print(report.to_csv(), end="")
    elif fmt == "json":
        print(_dump(report.to_dict()), end="")
    else:
        print(report.to_text(), end="")
    for row in report.rows:
        for err in row.errors:
            print(f"row {row.fraction:g}: {err}", file=sys.stderr)
    return EXIT_OK if any(r.ok for r in report.rows) else EXIT_INFEASIBLE


def cmd_export(args) -> int:
    inst = load_instance_file(args.instance)
    fmt = args.format or "mps"
    if fmt not in ("mps", "lp"):
        raise InputError(f"export format must be mps or lp, got {fmt!r}")
    model = build_model(inst, time_accounting=args.time_accounting, degree_repair=args.degree_repair)
    if not inst.is_cs and args.degree_repair == LITERAL:
        print("warning: the literal degree rows leave the depot without arcs; this model is infeasible "
              "whenever there is waste to collect", file=sys.stderr)
    data = export_model(model, fmt)
    n_bin = len(model.binaries)
    summary = (f"variables: {len(model.variables)} ({n_bin} binary, {len(model.variables) - n_bin} continuous)\n"
               f"constraints: {len(model.constraints)}\n")
    if args.out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        print(summary, end="", file=sys.stderr)
    else:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_bytes(data)
        print(summary, end="")
    return EXIT_OK


def cmd_synth(args) -> int:
    seed = 0 if args.seed is None else args.seed
    if args.n < 1 or (args.n_night is not None and args.n_night < 1):
        raise InputError("micro-route counts must be >= 1")
    if args.n_night is None:
        city = random_city(args.n, seed, args.profile)
        inst = city.current_situation() if args.kind == "CS" else city.transfer_station()
        data = save_instance(inst)
        if args.out is None:
            sys.stdout.buffer.write(data)
        else:
            args.out.parent.mkdir(parents=True, exist_ok=True)
            args.out.write_bytes(data)
            print(f"wrote {args.out}")
        return EXIT_OK
    if args.out is None:
        raise InputError("--n-night writes several files and needs --out DIR")
    for case, (day, night) in random_shifts(args.n, args.n_night, seed, args.profile).items():
        for label, inst in (("day", day), ("night", night)):
            path = args.out / f"{case}_{label}.json"
            _write(path, save_instance(inst).decode())
            print(f"wrote {path}")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "solve": cmd_solve,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "export": cmd_export,
    "synth": cmd_synth,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        args = _resolve(args, _load_config(args.config))
        return COMMANDS[args.command](args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except WasteRouteError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
