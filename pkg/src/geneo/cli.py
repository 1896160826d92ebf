"""Command-line interface.

Subcommands: diagram, match, dg, validate, apply, gap, reproduce-paper.
Exit codes: 0 success, 1 assertion/validation failure, 2 usage or I/O error.
Numeric output uses 12 significant digits; GENEO_SEED overrides any seed.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .approximation import gap_report
from .circle import (
    FunctionSpace,
    GridCircle,
    Group,
    SampledFunction,
    natural_pseudo_distance_witness,
    parse_builtin_spec,
    read_function_csv,
    sup_distance,
    write_function_csv,
)
from .matching import bottleneck
from .opdsl import ElaborationError, ParseError, parse_operator
from .operators import (
    power_mean,
    precompose,
    identity,
    probe_pairs,
    random_lipschitz_probe,
    verify_equivariance,
    verify_nonexpansivity,
)
from .circle import GroupElement, builtin_function
from .persistence import (
    PersistenceDiagram,
    read_diagram_csv,
    read_diagram_json,
    sublevel_diagram,
)

DEFAULT_TOLERANCE = 1e-9


def fmt(x: float) -> str:
    return f"{x:.12g}"


class CliError(Exception):
    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


def _load_config(path: str) -> dict:
    try:
        import tomllib  # Python >= 3.11
    except ImportError:
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise CliError(f"no such file: {path}")


def _resolve_seed(args) -> int:
    env = os.environ.get("GENEO_SEED")
    if env is not None:
        return int(env)
    return args.seed


def _gather_functions(args, expected: int) -> list[SampledFunction]:
    grid = GridCircle(args.n) if args.n else None
    functions: list[SampledFunction] = []
    for path in args.input or []:
        try:
            functions.append(read_function_csv(path))
        except FileNotFoundError:
            raise CliError(f"no such file: {path}")
        except ValueError as exc:
            raise CliError(f"{path}: {exc}")
    for spec in args.builtin or []:
        if grid is None:
            raise CliError("--builtin requires --n")
        try:
            functions.append(parse_builtin_spec(spec, grid))
        except ValueError as exc:
            raise CliError(str(exc))
    if expected and len(functions) != expected:
        raise CliError(f"expected {expected} function(s) "
                       f"(via --input/--builtin), got {len(functions)}")
    return functions


def _group_for(args, grid: GridCircle) -> Group:
    return Group(args.group, grid)


def _read_diagram(path: str) -> PersistenceDiagram:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise CliError(f"no such file: {path}")
    try:
        if text.lstrip().startswith("{"):
            return read_diagram_json(text)
        return read_diagram_csv(text)
    except (ValueError, KeyError) as exc:
        raise CliError(f"{path}: malformed diagram ({exc})")


def _space(args) -> FunctionSpace:
    return FunctionSpace.unit_lipschitz()


# --- subcommands -----------------------------------------------------------

def cmd_diagram(args) -> int:
    f = _gather_functions(args, expected=1)[0]
    dgm = sublevel_diagram(f)
    if args.plot_data or args.format == "csv":
        sys.stdout.write(dgm.to_csv())
    else:
        print(dgm.to_json())
    return 0


def cmd_match(args) -> int:
    d1 = _read_diagram(args.d1)
    d2 = _read_diagram(args.d2)
    dist, matching = bottleneck(d1, d2)
    print("inf" if dist == float("inf") else fmt(dist))
    print(matching.to_json(d1, d2))
    return 0


def cmd_dg(args) -> int:
    f1, f2 = _gather_functions(args, expected=2)
    if f1.grid != f2.grid:
        raise CliError("functions live on different grids")
    group = _group_for(args, f1.grid)
    d, g = natural_pseudo_distance_witness(f1, f2, group)
    print(fmt(d))
    print(f"g: shift={g.shift} reflect={g.reflect}")
    return 0


def cmd_validate(args) -> int:
    grid = GridCircle(args.n)
    group = _group_for(args, grid)
    try:
        op = parse_operator(args.expression, group, _space(args))
    except (ParseError, ElaborationError) as exc:
        raise CliError(f"bad expression: {exc}")
    rng = np.random.default_rng(_resolve_seed(args))
    probes = [random_lipschitz_probe(rng, grid) for _ in range(args.probes)]
    pairs = [(probes[i], probes[(i + 1) % len(probes)]) for i in range(len(probes))]
    pairs += probe_pairs(rng, grid, args.probes)
    eq = verify_equivariance(op, group, probes)
    ne = verify_nonexpansivity(op, pairs)
    print(f"equivariance max violation: {fmt(eq.max_violation)}")
    if eq.witness_element is not None:
        print(f"  witness: probe {eq.witness_probe}, "
              f"g shift={eq.witness_element.shift} reflect={eq.witness_element.reflect}")
    print(f"non-expansivity max excess: {fmt(ne.max_excess)}")
    if ne.witness_pair is not None:
        print(f"  witness: pair {ne.witness_pair}")
    ok = eq.max_violation <= args.tolerance and ne.max_excess <= args.tolerance
    return 0 if ok else 1


def cmd_apply(args) -> int:
    f = _gather_functions(args, expected=1)[0]
    group = _group_for(args, f.grid)
    try:
        op = parse_operator(args.expression, group, _space(args))
    except (ParseError, ElaborationError) as exc:
        raise CliError(f"bad expression: {exc}")
    out = op(f)
    if args.output:
        write_function_csv(out, args.output)
    else:
        write_function_csv(out, sys.stdout)
    return 0


def cmd_gap(args) -> int:
    corpus = _gather_functions(args, expected=0)
    if len(corpus) < 2:
        raise CliError("gap needs at least two functions")
    group = _group_for(args, corpus[0].grid)
    sizes = [int(s) for s in args.sizes.split(",")]
    report = gap_report(corpus, group, sizes, seed=_resolve_seed(args))
    if args.csv:
        Path(args.csv).write_text(report.to_csv(), encoding="utf-8")
    if args.json:
        Path(args.json).write_text(report.to_json(), encoding="utf-8")
    if not args.csv and not args.json:
        print(report.to_json())
    return 0


def cmd_reproduce_paper(args) -> int:
    n = args.n
    if n % 4 != 0:
        raise CliError("reproduce-paper needs n divisible by 4")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grid = GridCircle(n)
    group = Group.rotations(grid)
    quarter = precompose(grid, GroupElement(n // 4))
    f1 = identity(grid)

    experiments = [
        ("p1", 1.0, builtin_function("abs_sin", grid), builtin_function("sin_sq", grid)),
        (f"p{args.p:g}", float(args.p), builtin_function("abs_sin", grid),
         builtin_function("sin_sq_root", grid, args.p)),
    ]
    summary = {"n": n, "experiments": []}
    failures = []
    for label, p, fa, fb in experiments:
        mp = power_mean(p, [f1, quarter])
        ops = [("raw", f1), ("F1", f1), ("F2", quarter), (f"Mp", mp)]
        write_function_csv(fa, str(out / f"{label}_phi.csv"))
        write_function_csv(fb, str(out / f"{label}_psi.csv"))
        distances = {}
        for name, op in ops:
            da = sublevel_diagram(op(fa))
            db = sublevel_diagram(op(fb))
            (out / f"{label}_{name}_phi_diagram.json").write_text(da.to_json())
            (out / f"{label}_{name}_psi_diagram.json").write_text(db.to_json())
            dist, _ = bottleneck(da, db)
            distances[name] = dist
        d_g, _ = natural_pseudo_distance_witness(fa, fb, group)
        checks = {
            "raw_zero": distances["raw"] <= 1e-9,
            "F1_zero": distances["F1"] <= 1e-9,
            "F2_zero": distances["F2"] <= 1e-9,
            "Mp_positive": distances["Mp"] > 1e-3,
            "bound_sound": distances["Mp"] <= d_g + 1e-9,
        }
        for name, ok in checks.items():
            if not ok:
                failures.append(f"{label}: check {name} failed "
                                f"(distances={ {k: fmt(v) for k, v in distances.items()} },"
                                f" d_G={fmt(d_g)})")
        summary["experiments"].append({
            "label": label, "p": p,
            "distances": {k: float(fmt(v)) for k, v in distances.items()},
            "d_G": float(fmt(d_g)),
            "checks": checks,
        })
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    for line in failures:
        print(f"FAIL {line}", file=sys.stderr)
    if failures:
        return 1
    print(f"ok: wrote {out}/summary.json")
    return 0


# --- argument parsing ------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geneo",
        description="Equivariant operators, persistence diagrams and "
                    "matching distances on sampled circle functions.")
    parser.add_argument("--config", help="TOML config with defaults "
                                         "(n, group, seed, tolerance)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, functions=False):
        p.add_argument("--n", type=int, default=None, help="grid size")
        p.add_argument("--group", choices=["rotations", "cyclic", "dihedral", "trivial"],
                       default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--tolerance", type=float, default=None)
        if functions:
            p.add_argument("--input", action="append", help="function CSV (repeatable)")
            p.add_argument("--builtin", action="append",
                           help="builtin spec name[:param] (repeatable)")

    p = sub.add_parser("diagram", help="sublevel persistence diagram of a function")
    add_common(p, functions=True)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--plot-data", action="store_true",
                   help="emit birth,death rows for plotting")
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("match", help="bottleneck distance between two diagrams")
    add_common(p)
    p.add_argument("d1")
    p.add_argument("d2")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("dg", help="exact natural pseudo-distance")
    add_common(p, functions=True)
    p.set_defaults(func=cmd_dg)

    p = sub.add_parser("validate", help="check the operator axioms empirically")
    add_common(p)
    p.add_argument("expression")
    p.add_argument("--probes", type=int, default=100)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("apply", help="apply an operator expression to a function")
    add_common(p, functions=True)
    p.add_argument("expression")
    p.add_argument("--output", help="write the result CSV here (default stdout)")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("gap", help="lower-bound gap report over random families")
    add_common(p, functions=True)
    p.add_argument("--sizes", default="1,4,16", help="comma-separated family sizes")
    p.add_argument("--json", help="write the JSON report here")
    p.add_argument("--csv", help="write the CSV report here")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("reproduce-paper",
                       help="rebuild the worked power-mean experiments")
    add_common(p)
    p.add_argument("--out", default="paper_out")
    p.add_argument("--p", type=float, default=3.0)
    p.set_defaults(func=cmd_reproduce_paper)

    return parser


_DEFAULTS = {"n": 360, "group": "rotations", "seed": 0,
             "tolerance": DEFAULT_TOLERANCE}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config) if args.config else {}
        for key, fallback in _DEFAULTS.items():
            if getattr(args, key, None) is None and hasattr(args, key):
                setattr(args, key, config.get(key, fallback))
        if getattr(args, "group", None) == "rotations":
            args.group = "cyclic"
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
