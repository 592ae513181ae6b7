"""Command-line entry point.

Exit codes: 0 success, 2 a checked property failed, 3 bad input file,
4 numerical error, 5 unknown experiment, 64 command-line usage error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .capacity import optimize_coherent_information, optimize_holevo
from .errors import CausalCapacityError, InputFileError, UnknownExperimentError
from .experiments import ExperimentConfig, emit_report, experiment_names, run_experiment
from .io import channel_to_dict, dumps, load_channel, load_process
from .processes import apply_process, validate_pure_process

EXIT_OK = 0
EXIT_CLAIM_FAILED = 2
EXIT_INPUT = 3
EXIT_NUMERIC = 4
EXIT_UNKNOWN_EXPERIMENT = 5
EXIT_USAGE = 64

SEED_ENV = "CAUSAL_CAPACITY_SEED"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help=f"random seed (default: ${SEED_ENV} or 0)")
    common.add_argument("--out", default=None, help="write the result to this file instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--tol-scale", type=float, default=1.0,
                        help="multiply every tolerance threshold by this factor")

    parser = _Parser(prog="causal-capacity",
                     description="Quantum-controlled noisy channels: processes, capacities, and checks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    rep = sub.add_parser("reproduce", parents=[common], help="run registered experiments")
    rep.add_argument("name", help=f"'all' or one of: {', '.join(experiment_names())}")
    rep.add_argument("--timing", action="store_true", help="include wall time in JSON output")

    cap = sub.add_parser("capacity", parents=[common], help="capacity lower bounds for a channel")
    cap.add_argument("kind", choices=("holevo", "coherent"))
    cap.add_argument("--channel", required=True)
    cap.add_argument("--restarts", type=int, default=None)
    cap.add_argument("--max-iter", type=int, default=None)
    cap.add_argument("--n-states", type=int, default=4)
    cap.add_argument("--history", action="store_true")

    proc = sub.add_parser("process", parents=[common], help="apply a process to two channels")
    proc.add_argument("action", choices=("apply",))
    proc.add_argument("--process", required=True)
    proc.add_argument("--channel-a", required=True)
    proc.add_argument("--channel-b", required=True)
    proc.add_argument("--representation", choices=("kraus", "choi"), default="kraus")

    val = sub.add_parser("validate", parents=[common], help="sampling check of a pure process")
    val.add_argument("--process", required=True)
    val.add_argument("--samples", type=int, default=50)
    return parser


def _write(text: str, out) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _reproduce(args, seed: int) -> int:
    names = experiment_names() if args.name == "all" else [args.name]
    reports = []
    for name in names:
        report = run_experiment(ExperimentConfig(name, seed=seed, tol_scale=args.tol_scale))
        status = "PASS" if report.passed else "FAIL"
        print(f"{status} {name}: value={report.value:.12g} threshold={report.threshold:.3g}", file=sys.stderr)
        reports.append(report)
    payload = reports[0] if len(reports) == 1 else reports
    text = emit_report(payload, args.format, include_timing=args.timing)
    _write(text, args.out)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CLAIM_FAILED


def _capacity(args, seed: int) -> int:
    channel = load_channel(args.channel)
    if args.kind == "holevo":
        report = optimize_holevo(channel, n_states=args.n_states, n_restarts=args.restarts or 32,
                                 max_iter=args.max_iter or 500, seed=seed)
    else:
        report = optimize_coherent_information(channel, n_restarts=args.restarts or 8,
                                               max_iter=args.max_iter or 300, seed=seed)
    _write(dumps(report.to_dict(include_history=args.history)), args.out)
    return EXIT_OK


def _process(args, seed: int) -> int:
    w = load_process(args.process)
    induced = apply_process(w, load_channel(args.channel_a), load_channel(args.channel_b))
    _write(dumps(channel_to_dict(induced, args.representation)), args.out)
    return EXIT_OK


def _validate(args, seed: int) -> int:
    report = validate_pure_process(load_process(args.process), n_samples=args.samples, seed=seed,
                                   tol=1e-9 * args.tol_scale, rank_tol=1e-8 * args.tol_scale)
    _write(dumps(report.to_dict()), args.out)
    return EXIT_OK if report.passed else EXIT_CLAIM_FAILED


_COMMANDS = {"reproduce": _reproduce, "capacity": _capacity, "process": _process, "validate": _validate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    seed = args.seed if args.seed is not None else _default_seed()
    try:
        return _COMMANDS[args.command](args, seed)
    except UnknownExperimentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN_EXPERIMENT
    except InputFileError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CausalCapacityError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
