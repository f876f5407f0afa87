"""Command line front end.

Subcommands:

* ``dsm run`` -- run an experiment preset (optionally overridden by flags
  or a config file), print the result table, optionally write CSV.
* ``dsm dump-solution`` -- run one (delta_rel, seed) cell and write the
  reconstructed solution next to the exact one, node by node.
* ``dsm verify-lemmas`` -- run the analytic checks and report margins.

Exit codes: 0 success, 1 divergent run or failed check, 2 invalid
configuration, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import sys

from .checks import format_reports, reports_to_csv, run_lemma_suite
from .harness import (
    PRESETS,
    emit_csv,
    format_table,
    load_config_file,
    run_experiment,
    run_solution_dump,
)
from .regsolve import ConvergenceError, SingularShiftError

__all__ = ["main"]

_INT_KEYS = {"n_points", "shift", "max_iter", "seed"}
_FLOAT_KEYS = {"c0", "p", "h", "stop_c", "gamma"}
_FLOAT_LIST_KEYS = {"delta_rel"}
_INT_LIST_KEYS = {"seeds"}
_STR_KEYS = {"preset", "model", "exact", "noise", "mode", "out"}
_CONFIG_KEYS = _INT_KEYS | _FLOAT_KEYS | _FLOAT_LIST_KEYS | _INT_LIST_KEYS | _STR_KEYS


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}")


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _coerce(key: str, value: str):
    if key not in _CONFIG_KEYS:
        raise ValueError(f"unknown config key {key!r}")
    if key in _INT_KEYS:
        return int(value)
    if key in _FLOAT_KEYS:
        return float(value)
    if key in _FLOAT_LIST_KEYS:
        return tuple(float(part) for part in value.split(",") if part.strip())
    if key in _INT_LIST_KEYS:
        return tuple(int(part) for part in value.split(",") if part.strip())
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dsm",
        description="Iteratively regularized solver for nonlinear integral equations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment preset")
    run.add_argument("--preset", choices=sorted(PRESETS), help="experiment preset")
    run.add_argument("--config", help="config file with 'key = value' lines")
    run.add_argument("--n-points", type=int, dest="n_points", help="grid size")
    run.add_argument("--c0", type=float, help="schedule amplitude C0")
    run.add_argument("--delta-rel", type=_float_list, dest="delta_rel",
                     help="comma-separated relative noise levels")
    run.add_argument("--seeds", type=_int_list, help="comma-separated noise seeds")
    run.add_argument("--mode", choices=("iterate", "euler"), help="driver to use")
    run.add_argument("--h", type=float, help="Euler step size")
    run.add_argument("--gamma", type=float, help="stopping exponent")
    run.add_argument("--stop-c", type=float, dest="stop_c", help="stopping constant C")
    run.add_argument("--noise", choices=("gaussian", "sine"), help="noise kind")
    run.add_argument("--out", help="write result rows to this CSV file")
    run.set_defaults(func=_cmd_run)

    dump = sub.add_parser("dump-solution", help="write one reconstructed solution as CSV")
    dump.add_argument("--preset", choices=sorted(PRESETS), default="exp1")
    dump.add_argument("--config", help="config file with 'key = value' lines")
    dump.add_argument("--delta-rel", type=float, dest="delta_rel", required=True)
    dump.add_argument("--seed", type=int, help="noise seed (default: preset's first)")
    dump.add_argument("--out", required=True, help="output CSV path")
    dump.set_defaults(func=_cmd_dump)

    verify = sub.add_parser("verify-lemmas", help="run the analytic checks")
    verify.add_argument("--model", choices=("arctan3", "cubic", "identity"),
                        help="restrict checks to one model (default: all three)")
    verify.add_argument("--out", help="write check reports to this CSV file")
    verify.set_defaults(func=_cmd_verify)
    return parser


def _resolve_run_config(args):
    file_opts = {}
    if args.config:
        file_opts = {k: _coerce(k, v) for k, v in load_config_file(args.config).items()}
    preset = args.preset or file_opts.pop("preset", None) or "exp1"
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; expected one of {sorted(PRESETS)}")
    config = PRESETS[preset]
    out = file_opts.pop("out", None)
    file_opts.pop("seed", None)  # dump-solution only
    if file_opts:
        config = config.override(**file_opts)
    # explicit flags win over both the preset and the config file
    flag_keys = ("n_points", "c0", "delta_rel", "seeds", "mode", "h",
                 "gamma", "stop_c", "noise")
    overrides = {k: getattr(args, k) for k in flag_keys if getattr(args, k) is not None}
    if overrides:
        config = config.override(**overrides)
    if args.out is not None:
        out = args.out
    return config, out


def _cmd_run(args) -> int:
    config, out = _resolve_run_config(args)
    rows = run_experiment(config)
    print(format_table(rows))
    if out:
        emit_csv(rows, out)
        print(f"wrote {len(rows)} rows to {out}", file=sys.stderr)
    return 0 if all(r.stopped for r in rows) else 1


def _cmd_dump(args) -> int:
    file_opts = {}
    if args.config:
        file_opts = {k: _coerce(k, v) for k, v in load_config_file(args.config).items()}
    preset = file_opts.pop("preset", None) or args.preset
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; expected one of {sorted(PRESETS)}")
    config = PRESETS[preset]
    seed = args.seed if args.seed is not None else file_opts.pop("seed", None)
    file_opts.pop("out", None)
    file_opts.pop("delta_rel", None)
    if file_opts:
        config = config.override(**file_opts)
    cell, _ = run_solution_dump(config, args.delta_rel, seed=seed, out=args.out)
    print(f"wrote {cell.row.n_points} nodes to {args.out}", file=sys.stderr)
    return 0 if cell.row.stopped else 1


def _cmd_verify(args) -> int:
    kinds = (args.model,) if args.model else ("identity", "arctan3", "cubic")
    reports = run_lemma_suite(kinds)
    print(format_reports(reports))
    if args.out:
        reports_to_csv(reports, args.out)
        print(f"wrote {len(reports)} reports to {args.out}", file=sys.stderr)
    return 0 if all(r.passed for r in reports) else 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConvergenceError, SingularShiftError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
