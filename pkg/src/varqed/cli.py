"""Command-line interface: ``varqed {solve,sweep,converge,oracle,modes}``.

Exit codes: 0 success, 2 invalid configuration or arguments, 3 solver
failure (including sweeps with failed points, whose other points are still
written), 4 output I/O error.  On a nonzero exit a one-line JSON summary is
printed to stderr.
"""
import argparse
import dataclasses
import json
import logging
import os
import sys

from .config import ConfigError, load_config
from .matter import solve_matter
from .modes import solve_frequencies
from .oracle import build_operator, lowest_eigenvalues, zero_point_convention
from .report import csv_text, emit_report, format_number, write_convergence, write_modes, write_text
from .sweep import ComparisonReport, convergence_study, run_sweep, solve_point

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4
THREADS_ENV = "VARQED_THREADS"
_f = format_number

log = logging.getLogger("varqed")


class CliError(Exception):
    def __init__(self, code, kind, message, **extra):
        super().__init__(message)
        self.code, self.kind, self.extra = code, kind, extra


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH", help="scenario JSON file")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides the config)")
    common.add_argument("--format", choices=("csv", "json", "both"), help="report format")
    common.add_argument("--oracle", action="store_true", help="enable exact diagonalization")
    common.add_argument("--seed", type=int, help="oracle start-vector seed")
    common.add_argument("--threads", type=int, metavar="N",
                        help=f"worker threads (else ${THREADS_ENV}, else the config)")
    common.add_argument("--value", type=float,
                        help="sweep value for single-point verbs (default: last sweep value)")
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = argparse.ArgumentParser(
        prog="varqed",
        description="Variational and exact energies of an emitter in a 1D cavity.",
        epilog="Exit codes: 0 ok, 2 bad configuration, 3 solver failure, 4 I/O error.",
    )
    sub = p.add_subparsers(dest="verb", required=True)
    sub.add_parser("solve", parents=[common], help="all methods at one sweep point")
    sub.add_parser("sweep", parents=[common], help="run the configured sweep")
    sub.add_parser("converge", parents=[common], help="energy terms against the cutoffs")
    sub.add_parser("oracle", parents=[common], help="exact diagonalization at one point")
    m = sub.add_parser("modes", parents=[common], help="dump interacting modes and profiles")
    m.add_argument("--samples", type=int, default=512, help="uniform profile samples")
    m.add_argument("--profiles", type=int, help="number of profiles to dump (default: all)")
    return p


def _threads(args, cfg):
    if args.threads is not None:
        n = args.threads
    elif os.environ.get(THREADS_ENV):
        try:
            n = int(os.environ[THREADS_ENV])
        except ValueError:
            raise CliError(EXIT_CONFIG, "ConfigError", f"{THREADS_ENV} must be an integer",
                           field=THREADS_ENV) from None
    else:
        n = cfg.threads
    if n < 1:
        raise CliError(EXIT_CONFIG, "ConfigError", "thread count must be at least 1", field="threads")
    return n


def _configure(args):
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        raise CliError(EXIT_CONFIG, "ConfigError", exc.reason, field=exc.field) from None
    changes = {"threads": _threads(args, cfg)}
    if args.out:
        changes["output_directory"] = args.out
    if args.format:
        changes["formats"] = ("csv", "json") if args.format == "both" else (args.format,)
    if args.seed is not None:
        changes["seed"] = args.seed
    cfg = dataclasses.replace(cfg, **changes)
    if args.oracle:
        cfg = cfg.with_oracle(True)
    return cfg


def _value(args, cfg):
    if args.value is not None:
        return args.value
    values = cfg.sweep.values()
    return values[-1] if values else 1.0


def _io(fn, *a, **kw):
    try:
        return fn(*a, **kw)
    except OSError as exc:
        raise CliError(EXIT_IO, "OSError", str(exc)) from None


def _finish(report):
    bad = report.failed_points
    if bad:
        raise CliError(
            EXIT_SOLVER, "PointFailure", f"{len(bad)} of {len(report.points)} points failed",
            failed_points=[{"index": p.index, "value": p.value, "errors": p.errors} for p in bad],
        )


def cmd_sweep(args, cfg):
    report = run_sweep(cfg)
    for path in _io(emit_report, report):
        print(path)
    _finish(report)


def cmd_solve(args, cfg):
    point = solve_point(cfg, _value(args, cfg), 0, cfg.threads)
    report = ComparisonReport(cfg, [point])
    print(f"{cfg.name}: {cfg.sweep.parameter}={_f(point.value)}  lambda={_f(point.coupling)} eV^3  "
          f"eta={_f(point.eta)}  omega1={_f(point.omega_1)} eV  "
          f"suppression1={_f(point.suppression_1)}")
    for r in point.rows:
        ref = point.reference(r)
        dev = "" if ref is None or r.method == "oracle" else f"  (oracle {_f(r.total - ref)})"
        print(f"  {r.method:<11} M={r.mode_cutoff:<4} {r.label:<10} {_f(r.total)}{dev}")
    for path in _io(emit_report, report, stem=f"{cfg.name}_solve"):
        print(path)
    _finish(report)


def cmd_converge(args, cfg):
    try:
        rows = convergence_study(cfg, _value(args, cfg))
    except Exception as exc:  # noqa: BLE001
        raise CliError(EXIT_SOLVER, type(exc).__name__, str(exc)) from None
    for r in rows:
        print(f"  {r.method:<11} {r.quantity:<17} M={r.mode_cutoff:<4} P={_f(r.max_photons) or '-':<2} "
              f"{_f(r.value)}")
    print(_io(write_convergence, rows, os.path.join(cfg.output_directory, f"{cfg.name}_convergence.csv")))


def cmd_oracle(args, cfg):
    orc = cfg.oracle
    try:
        emitter, cavity = cfg.point(_value(args, cfg))
        eig = solve_matter(emitter)
        op = build_operator(eig, cavity, orc.modes, orc.max_photons, orc.truncation, threads=cfg.threads)
        vals = lowest_eigenvalues(op, k=cfg.levels, tol=orc.tolerance, seed=cfg.seed)
    except Exception as exc:  # noqa: BLE001
        raise CliError(EXIT_SOLVER, type(exc).__name__, str(exc)) from None
    zp = zero_point_convention(op)
    rows = [[_f(j), _f(v), _f(v + zp), _f(orc.modes), _f(orc.max_photons), orc.truncation,
             _f(op.size)] for j, v in enumerate(vals)]
    for row in rows:
        print("  " + "  ".join(row))
    text = csv_text(("level", "energy_eV", "absolute_energy_eV", "mode_cutoff", "max_photons",
                      "truncation", "basis_size"), rows)
    path = os.path.join(cfg.output_directory, f"{cfg.name}_oracle.csv")
    print(_io(write_text, path, text))


def cmd_modes(args, cfg):
    try:
        _, cavity = cfg.point(_value(args, cfg))
        ms = solve_frequencies(cavity, cfg.modes)
    except Exception as exc:  # noqa: BLE001
        raise CliError(EXIT_SOLVER, type(exc).__name__, str(exc)) from None
    for path in _io(write_modes, ms, cfg.output_directory, cfg.name, args.samples, args.profiles):
        print(path)


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "converge": cmd_converge,
            "oracle": cmd_oracle, "modes": cmd_modes}


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _configure(args)
        COMMANDS[args.verb](args, cfg)
    except CliError as exc:
        summary = {"status": "error", "exit_code": exc.code, "kind": exc.kind, "message": str(exc)}
        summary.update(exc.extra)
        print(json.dumps(summary, sort_keys=True), file=sys.stderr)
        return exc.code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
