"""Command-line interface.

Subcommands: prepare, distill, measure, tomo, run.  Exit codes: 0 on
success (including runs whose input is classified degenerate or
quasi-distillable, which still produce a report), 2 on configuration
errors, 3 on numeric failures.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, ParameterMismatchError, QDistillError
from .fileio import load_state, matrix_to_pairs, save_state
from .measures import measure_state
from .normal_form import BELL_DIAGONALIZABLE, optimal_filters
from .pipeline import (
    CUSTOM,
    FORM1,
    FORM2,
    IDEAL,
    TOMO,
    ExperimentConfig,
    compare_to_experiment,
    emit_report,
    format_comparison,
    format_report_table,
    input_state,
    run_experiment,
    write_summary_csv,
)
from .tomography import mle_reconstruct, read_counts_csv, simulate_counts, write_counts_csv

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _add_state_params(p):
    p.add_argument("--form", choices=["1", "2"], default="1", help="mixed-state family")
    p.add_argument("--a", type=float, default=0.23, help="amplitude of |HH>")
    p.add_argument("--p", type=float, default=0.013, help="dephasing probability")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdistill",
        description="optimal two-qubit entanglement distillation under local filtering",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="emit the configured mixed state to a file")
    _add_state_params(p)
    p.add_argument("--out", required=True, help="state file to write")

    p = sub.add_parser("distill", help="optimal filters and distilled state for a state file")
    p.add_argument("--state", required=True, help="input state file")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=["json", "table"], default="json")

    p = sub.add_parser("measure", help="concurrence, EoF and maximal CHSH of a state file")
    p.add_argument("--state", required=True, help="input state file")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=["json", "table"], default="json")

    p = sub.add_parser(
        "tomo",
        help="simulate counts for a state file, or reconstruct a state from a counts CSV",
    )
    p.add_argument("--state", help="state file: simulate counts from it")
    p.add_argument("--counts", help="counts CSV: reconstruct a state from it")
    p.add_argument(
        "--budget",
        type=float,
        default=None,
        help="expected pairs per setting (simulate: default 1e4; "
        "reconstruct: default inferred from the H/V quadruple)",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="counts CSV or reconstructed state file")

    p = sub.add_parser("run", help="full pipeline: prepare, distill, measure, report")
    _add_state_params(p)
    p.add_argument("--state", help="custom input state file (overrides --form)")
    p.add_argument("--mode", choices=[IDEAL, TOMO], default=IDEAL)
    p.add_argument("--budget", type=float, default=1e4)
    p.add_argument("--bootstrap", type=int, default=100, help="bootstrap resamples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="report file (default: stdout)")
    p.add_argument("--format", choices=["json", "table"], default="json")
    p.add_argument("--compare", action="store_true",
                   help="append the reference-experiment comparison table")
    p.add_argument(
        "--figures",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="render figures next to the report (requires --out)",
    )
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _cmd_prepare(args) -> int:
    cfg = ExperimentConfig(form=FORM1 if args.form == "1" else FORM2, a=args.a, p=args.p)
    save_state(args.out, input_state(cfg))
    return 0


def _cmd_distill(args) -> int:
    rho = load_state(args.state)
    nf = optimal_filters(rho)
    if args.format == "table":
        lines = [f"classification: {nf.classification}"]
        if nf.classification == BELL_DIAGONALIZABLE:
            lines.append(f"success probability: {nf.probability:.6f}")
            lines.append(f"alice filter:\n{np.array_str(nf.filter_a.matrix, precision=6)}")
            lines.append(f"bob filter:\n{np.array_str(nf.filter_b.matrix, precision=6)}")
        _emit("\n".join(lines), args.out)
        return 0
    payload = {"classification": nf.classification}
    if nf.classification == BELL_DIAGONALIZABLE:
        payload.update(
            {
                "filter_alice": matrix_to_pairs(nf.filter_a.matrix),
                "filter_bob": matrix_to_pairs(nf.filter_b.matrix),
                "success_probability": nf.probability,
                "distilled_state": matrix_to_pairs(nf.state),
            }
        )
    _emit(json.dumps(payload, indent=1), args.out)
    return 0


def _cmd_measure(args) -> int:
    rho = load_state(args.state)
    m = measure_state(rho)
    if args.format == "table":
        _emit(
            f"concurrence  {m.concurrence:.6f}\n"
            f"eof          {m.eof:.6f}\n"
            f"chsh s_max   {m.s_value:.6f}",
            args.out,
        )
        return 0
    payload = {
        "concurrence": m.concurrence,
        "eof": m.eof,
        "s_value": m.s_value,
        "settings": {
            name: [float(x) for x in getattr(m.settings, name)]
            for name in ("a1", "a2", "b1", "b2")
        },
    }
    _emit(json.dumps(payload, indent=1), args.out)
    return 0


def _cmd_tomo(args) -> int:
    if bool(args.state) == bool(args.counts):
        raise ConfigError("tomo needs exactly one of --state (simulate) or --counts (reconstruct)")
    if args.state:
        rho = load_state(args.state)
        record = simulate_counts(rho, args.budget or 1e4, args.seed)
        write_counts_csv(args.out, record)
    else:
        record = read_counts_csv(args.counts, budget=args.budget)
        result = mle_reconstruct(record)
        save_state(args.out, result.state)
    return 0


def _cmd_run(args) -> int:
    cfg = ExperimentConfig(
        form=CUSTOM if args.state else (FORM1 if args.form == "1" else FORM2),
        a=args.a,
        p=args.p,
        mode=args.mode,
        budget=args.budget,
        bootstrap_resamples=args.bootstrap,
        seed=args.seed,
        custom_state_path=args.state,
    )
    report = run_experiment(cfg)
    if args.out:
        emit_report(report, args.out, fmt=args.format)
        stem = os.path.splitext(args.out)[0]
        write_summary_csv(report, stem + "_summary.csv")
        if args.figures:
            from .plots import save_measures_figure, save_state_figure

            save_state_figure(stem + "_states.png", report.rho_before, report.rho_after)
            save_measures_figure(stem + "_measures.png", report)
    else:
        if args.format == "json":
            from .pipeline import report_to_dict

            print(json.dumps(report_to_dict(report), indent=1))
        else:
            print(format_report_table(report))
    if args.compare:
        try:
            print(format_comparison(compare_to_experiment(report)))
        except ParameterMismatchError as exc:
            print(f"no reference comparison: {exc}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "prepare": _cmd_prepare,
        "distill": _cmd_distill,
        "measure": _cmd_measure,
        "tomo": _cmd_tomo,
        "run": _cmd_run,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QDistillError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
