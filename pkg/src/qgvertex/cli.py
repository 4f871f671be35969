"""Command-line entry point: ``qgvertex <command> [options]``.

Every option may also come from a JSON config file (``--config run.json``)
holding ``{"command": ..., "<option>": value, ...}``; explicit flags win.
Outputs are written with fixed key order and ``repr`` floats, so identical
inputs give byte-identical files.  Exit codes: 1 invalid input, 2 budget
exceeded, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .couplings import SMatrix, VertexCoupling, build_s_from_t, recover_t_from_s
from .errors import InvalidInputError, QGVertexError
from .families import KappaFamilySpec, build_family, zero_count
from .patterns import MAX_N, max_zeros, search_zero_count
from .potentials import f1, f2, f2_printed, first_column_report, sweep_matrix
from .realization import compile_coupling, export_dot
from .solver import convergence_study, halving_schedule

FIG_GRID = np.linspace(0.05, 5.0, 200)
REPORT_ENERGIES = np.linspace(0.1, 3.0, 20)


def parse_complex(text: str) -> complex:
    """Parse ``"a+bi"``, ``"a-bj"``, ``"bi"``, ``"-i"`` or a plain real."""
    s = str(text).strip().replace(" ", "")
    if not s:
        raise InvalidInputError("empty complex number")
    s = s.replace("i", "j")
    if s.endswith("j") and (len(s) == 1 or s[-2] in "+-"):
        s = s[:-1] + "1j"
    try:
        return complex(s)
    except ValueError as exc:
        raise InvalidInputError(f"cannot parse complex number {text!r}") from exc


def parse_complex_list(text) -> list[complex]:
    if isinstance(text, (list, tuple)):
        return [parse_complex(x) for x in text]
    return [parse_complex(x) for x in str(text).split(",") if x.strip()]


def parse_potentials(items, n: int) -> np.ndarray:
    """``["3=1.0", ...]`` (1-based edge) into a length-``n`` vector."""
    v = np.zeros(n)
    for item in items or []:
        try:
            edge, value = str(item).split("=")
            idx, val = int(edge), float(value)
        except ValueError as exc:
            raise InvalidInputError(f"potential must look like 'edge=U', got {item!r}") from exc
        if not 1 <= idx <= n:
            raise InvalidInputError(f"potential edge {idx} outside 1..{n}")
        if not np.isfinite(val):
            raise InvalidInputError(f"potential on edge {idx} is not finite")
        v[idx - 1] = val
    return v


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path} is not valid JSON: {exc}") from exc


def load_matrix(path: str) -> SMatrix:
    """Coupling JSON or matrix JSON, returned as a validated Hermitian-unitary S."""
    data = _read_json(path)
    if not isinstance(data, dict):
        raise InvalidInputError(f"{path}: expected a JSON object")
    if "re_t" in data:
        return build_s_from_t(VertexCoupling.from_dict(data)).require_hermitian_unitary()
    return SMatrix.from_dict(data).require_hermitian_unitary()


def _spec_from_args(args) -> KappaFamilySpec:
    if args.n is None:
        raise InvalidInputError("need --n (or --coupling / --matrix)")
    kappas = parse_complex_list(args.kappa) if args.kappa is not None else None
    return KappaFamilySpec.default(int(args.n), family=args.family, kappas=kappas)


def _matrix_from_args(args) -> SMatrix:
    path = getattr(args, "coupling", None) or getattr(args, "matrix", None)
    if path:
        return load_matrix(path)
    return build_family(_spec_from_args(args))


def _coupling_from_args(args) -> VertexCoupling:
    s = _matrix_from_args(args)
    c, perm = recover_t_from_s(s)
    if np.any(perm != np.arange(s.n)):
        print("note: edges renumbered as " + ",".join(str(int(p) + 1) for p in perm), file=sys.stderr)
    return c


# ---------------------------------------------------------------- commands


def cmd_family(args) -> int:
    s = build_family(_spec_from_args(args))
    _emit(dumps(s.to_dict()), args.out)
    return 0


def cmd_invert(args) -> int:
    if not args.matrix:
        raise InvalidInputError("invert needs --matrix FILE")
    c, perm = recover_t_from_s(load_matrix(args.matrix))
    _emit(dumps({"coupling": c.to_dict(), "permutation": [int(p) + 1 for p in perm]}), args.out)
    return 0


def cmd_sweep(args) -> int:
    s = _matrix_from_args(args)
    if args.steps < 2 or not 0 < args.emin < args.emax:
        raise InvalidInputError("need 0 < emin < emax and steps >= 2")
    v = parse_potentials(args.potential, s.n)
    res = sweep_matrix(s, v, np.linspace(args.emin, args.emax, args.steps))
    _emit(csv_text(res.header(), res.to_rows()), args.out)
    return 0


def cmd_search_zeros(args) -> int:
    if args.n is None or not 3 <= args.n <= MAX_N:
        raise InvalidInputError(f"search-zeros needs 3 <= n <= {MAX_N}")
    if args.budget < 1:
        raise InvalidInputError("budget (restarts) must be >= 1")
    res = max_zeros(args.n, restarts=args.budget, seed=args.seed, workers=args.workers)
    out = res.to_dict()
    out["restarts"] = args.budget
    out["seed"] = args.seed
    if args.one_more:
        extra = search_zero_count(args.n, res.max_zeros + 1, restarts=args.budget, seed=args.seed,
                                  prune=False, workers=args.workers)
        out["one_more_unpruned"] = extra.to_dict()
    _emit(dumps(out), args.out)
    return 0


def cmd_design(args) -> int:
    if not args.d > 0:
        raise InvalidInputError("--d must be positive")
    b = compile_coupling(_coupling_from_args(args), d=args.d)
    _emit(dumps(b.to_dict()), args.out)
    if args.dot:
        _emit(export_dot(b), args.dot)
    return 0


def cmd_approx(args) -> int:
    if not (args.k > 0 and args.dmax > 0 and args.halvings >= 0):
        raise InvalidInputError("need k > 0, dmax > 0, halvings >= 0")
    study = convergence_study(_coupling_from_args(args), args.k, halving_schedule(args.dmax, args.halvings))
    _emit(csv_text(["d", "error_max", "unitarity_max", "k_used"], study.rows()), args.out)
    return 0


def fig1_rows(grid=FIG_GRID, u: float = 1.0) -> list[list[str]]:
    rows = []
    for e in grid:
        a, b = abs(f1(e, u)) ** 2, abs(f2(e, u)) ** 2
        rows.append([repr(float(e)), repr(float(a)), repr(float(b)), repr(float(a + b))])
    return rows


def _family_sweep_text(n: int, u: float = 1.0) -> str:
    s = build_family(KappaFamilySpec.default(n))
    v = np.zeros(n)
    v[-1] = u
    res = sweep_matrix(s, v, FIG_GRID)
    return csv_text(res.header(), res.to_rows())


def repro_report(seed: int) -> dict:
    reports = [first_column_report(KappaFamilySpec.default(n), 1.0, REPORT_ENERGIES) for n in (3, 5, 7, 9)]
    f2_unitarity = {
        "E": 2.0,
        "fourth_root_numerator": abs(f1(2.0, 1.0)) ** 2 + abs(f2(2.0, 1.0)) ** 2,
        "square_root_numerator": abs(f1(2.0, 1.0)) ** 2 + abs(f2_printed(2.0, 1.0)) ** 2,
    }
    zeros = {str(n): zero_count(build_family(KappaFamilySpec.default(n))) for n in range(3, 13)}
    return {
        "seed": seed,
        "version": __version__,
        "closed_form_first_column": reports,
        "f1_f2_probability_sum": f2_unitarity,
        "family_zero_counts": zeros,
    }


def cmd_repro(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "fig1.csv").write_text(csv_text(["E", "abs_f1_sq", "abs_f2_sq", "sum"], fig1_rows()))
    (out / "fig2.csv").write_text(_family_sweep_text(3))
    (out / "fig3.csv").write_text(_family_sweep_text(5))
    for n in (7, 8, 9):
        c, _ = recover_t_from_s(build_family(KappaFamilySpec.default(n)))
        b = compile_coupling(c, d=1.0)
        (out / f"blueprint_n{n}.json").write_text(dumps(b.to_dict()))
        (out / f"blueprint_n{n}.dot").write_text(export_dot(b))
    (out / "closed_form_report.json").write_text(dumps(repro_report(args.seed)))
    return 0


# ------------------------------------------------------------------ parser


def _add_family_opts(p):
    p.add_argument("--n", type=int, default=None, help="vertex degree")
    p.add_argument("--family", choices=["even", "odd", "a4"], default=None)
    p.add_argument("--kappa", default=None, help='comma-separated complex list, e.g. "1,0.5+1i"')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qgvertex", description="Quantum-graph vertex couplings with few passbands.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="JSON file with 'command' and option values")
    parser.add_argument("--json-errors", action="store_true", help="print errors as JSON on stderr")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("family", help="build a maximal-zero family matrix")
    p.add_argument("action", nargs="?", choices=["build"], default="build")
    _add_family_opts(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("invert", help="recover T (and an edge renumbering) from S")
    p.add_argument("--matrix", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("sweep", help="energy sweep of |S_ij|^2 under edge potentials")
    p.add_argument("--coupling", default=None, help="coupling or matrix JSON")
    _add_family_opts(p)
    p.add_argument("--potential", action="append", default=None, help="edge=U (1-based), repeatable")
    p.add_argument("--emin", type=float, default=0.05)
    p.add_argument("--emax", type=float, default=5.0)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("search-zeros", help="numerical evidence for the maximal zero count")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--budget", type=int, default=200, help="restarts per pattern")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--one-more", action="store_true", help="also optimize every bound+1 pattern without pruning")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_search_zeros)

    p = sub.add_parser("design", help="compile a coupling into a delta-graph blueprint")
    p.add_argument("--coupling", default=None, help="coupling or matrix JSON")
    _add_family_opts(p)
    p.add_argument("--d", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.add_argument("--dot", default=None, help="also write Graphviz DOT here")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("approx", help="convergence of the finite graph to the target S")
    p.add_argument("--coupling", default=None, help="coupling or matrix JSON")
    _add_family_opts(p)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--dmax", type=float, default=0.1)
    p.add_argument("--halvings", type=int, default=6)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("repro", help="regenerate figure data, blueprints and the closed-form report")
    p.add_argument("--out-dir", default="repro_out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_repro)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return argv
    cfg = _read_json(known.config)
    if not isinstance(cfg, dict):
        raise InvalidInputError("config must be a JSON object")
    cfg = dict(cfg)
    command = cfg.pop("command", None)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    has_command = any(a in subparsers.choices for a in argv)
    if not has_command:
        if command not in subparsers.choices:
            raise InvalidInputError(f"config needs a valid 'command', got {command!r}")
        argv = list(argv) + [command]
    else:
        command = next(a for a in argv if a in subparsers.choices)
    sp = subparsers.choices[command]
    dests = {a.dest for a in sp._actions}
    defaults = {}
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest not in dests:
            raise InvalidInputError(f"unknown config key {key!r} for command {command!r}")
        defaults[dest] = value
    sp.set_defaults(**defaults)
    return argv


def _report(exc: Exception, code: int, as_json: bool):
    if as_json:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}), file=sys.stderr)
    else:
        print(f"qgvertex: error: {exc}", file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    as_json = "--json-errors" in argv
    if not argv:
        parser.print_usage(sys.stderr)
        return 1
    try:
        argv = _apply_config(parser, argv)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return 0 if exc.code == 0 else 1
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 1
        return args.func(args)
    except QGVertexError as exc:
        _report(exc, exc.exit_code, as_json)
        return exc.exit_code
    except (ValueError, TypeError) as exc:
        _report(exc, 1, as_json)
        return 1
    except (np.linalg.LinAlgError, ArithmeticError) as exc:
        _report(exc, 3, as_json)
        return 3


if __name__ == "__main__":
    sys.exit(main())
