"""Command-line front end: verify, simulate, analyze, solve-conventions.

Outputs are plain CSV/JSON with an embedded metadata block (config echo,
seed, version) and no timestamps, so identical invocations produce
byte-identical files.  Exit codes: 0 success, 1 check failure, 2 usage
error.  The only environment hook is PINGPONG_EVE_SEED, which overrides the
default simulation seed when --seed is not given.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import __version__
from .attacks import improved_profile, wojcik_profile
from .conventions import CSV_HEADER, report_rows, solve, summarize
from .information import SecurityReport, security_report
from .protocol import (
    SCHEMES,
    ProtocolConfig,
    aggregate,
    metadata_lines,
    run_rounds,
    write_records_csv,
)

DEFAULT_SEED = 2026
SEED_ENV_VAR = "PINGPONG_EVE_SEED"

ANALYZE_PROFILES = {"improved": improved_profile, "wojcik": wojcik_profile}


def _attack_fraction_arg(text: str):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'auto', got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pingpong-eve",
        description=(
            "Exact-state simulation and security analysis of an eavesdropping "
            "attack on the ping-pong protocol"
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("verify", help="run every pinned-value self-check")

    simulate = sub.add_parser("simulate", help="Monte Carlo protocol run")
    simulate.add_argument("--scheme", choices=SCHEMES, default="improved")
    simulate.add_argument("--eta", type=float, default=1.0,
                          help="channel transmission efficiency")
    simulate.add_argument("--c0", type=float, default=0.5,
                          help="prior probability of message bit 0")
    simulate.add_argument("--control-prob", type=float, default=0.5,
                          help="probability a round is a control round")
    simulate.add_argument("--rounds", type=int, default=100000)
    simulate.add_argument("--seed", type=int, default=None,
                          help=f"RNG seed (default {DEFAULT_SEED}, or ${SEED_ENV_VAR})")
    simulate.add_argument("--attack-fraction", type=_attack_fraction_arg,
                          default="auto", metavar="FRACTION|auto")
    simulate.add_argument("--out", metavar="PATH",
                          help="write per-round records CSV here")
    simulate.add_argument("--stats", metavar="PATH",
                          help="write aggregate statistics JSON here")

    analyze = sub.add_parser("analyze", help="information curves and bounds")
    analyze.add_argument("--scheme", choices=sorted(ANALYZE_PROFILES), default="improved")
    analyze.add_argument("--curve", metavar="PATH",
                         help="write the eta curve CSV here")
    analyze.add_argument("--report", metavar="PATH",
                         help="write the security report JSON here")

    solver = sub.add_parser("solve-conventions",
                            help="enumerate gate-semantics candidates")
    solver.add_argument("--out", metavar="PATH",
                        help="write the candidate report CSV here (default stdout)")

    return parser


def _resolve_seed(parser: argparse.ArgumentParser, seed: int | None) -> int:
    if seed is not None:
        return seed
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        parser.error(f"{SEED_ENV_VAR} must be an integer, got {raw!r}")


def _fmt_rate(value: float) -> str:
    return "n/a" if math.isnan(value) else f"{value:.9f}"


def cmd_verify() -> int:
    from .verify import render_report, run_all_checks

    checks = run_all_checks()
    print(render_report(checks))
    return 0 if all(check.passed for check in checks) else 1


def cmd_simulate(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    seed = _resolve_seed(parser, args.seed)
    try:
        config = ProtocolConfig(
            rounds=args.rounds,
            seed=seed,
            c0=args.c0,
            control_prob=args.control_prob,
            eta=args.eta,
            scheme=args.scheme,
            attack_fraction=args.attack_fraction,
        )
    except ValueError as error:
        parser.error(str(error))
    metadata = {
        "version": __version__,
        "command": "simulate",
        "scheme": config.scheme,
        "rounds": config.rounds,
        "seed": config.seed,
        "eta": config.eta,
        "c0": config.c0,
        "control_prob": config.control_prob,
        "attack_fraction": config.attack_fraction,
        # echo rounded to 12 decimals so 0.1/0.25 reads as the 0.4 it means
        "resolved_attack_fraction": round(config.resolved_attack_fraction(), 12),
        "attack_loss": config.attack_loss,
    }
    records = run_rounds(config)
    stats = aggregate(records)
    if args.out:
        write_records_csv(records, args.out, metadata)
    if args.stats:
        with open(args.stats, "w") as handle:
            json.dump(
                {"metadata": metadata, "stats": stats.to_json_dict()},
                handle,
                indent=2,
                sort_keys=True,
            )
            handle.write("\n")
    for line in metadata_lines(metadata):
        print(line)
    print(f"rounds={stats.n_rounds} control={stats.n_control} message={stats.n_message}")
    print(
        f"control_loss_rate={_fmt_rate(stats.control_loss_rate)}"
        f" se={_fmt_rate(stats.control_loss_se)}"
    )
    print(
        f"detection_rate={_fmt_rate(stats.detection_rate)}"
        f" se={_fmt_rate(stats.detection_se)}"
    )
    print(f"qber={_fmt_rate(stats.qber)} se={_fmt_rate(stats.qber_se)}")
    print(
        f"message_attacked={stats.n_message_attacked}"
        f" stray_outcomes={stats.n_stray_outcomes}"
    )
    return 0


def _curve_lines(report: SecurityReport, metadata: dict) -> list[str]:
    lines = metadata_lines(metadata)
    lines.append("eta,mu,i_ae,i_ab,i_be")
    for p in report.curve:
        lines.append(
            f"{p.eta:.9f},{p.mu:.9f},{p.i_ae:.9f},{p.i_ab:.9f},{p.i_be:.9f}"
        )
    return lines


def cmd_analyze(args: argparse.Namespace) -> int:
    report = security_report(ANALYZE_PROFILES[args.scheme]())
    metadata = {
        "version": __version__,
        "command": "analyze",
        "scheme": args.scheme,
        "full_attack_edge": report.full_attack_edge,
        "eta_star": f"{report.eta_star:.9f}",
        "mu_star": f"{report.mu_star:.9f}",
    }
    if args.curve:
        with open(args.curve, "w") as handle:
            handle.write("\n".join(_curve_lines(report, metadata)) + "\n")
    if args.report:
        payload = report.to_json_dict()
        payload["metadata"] = metadata
        with open(args.report, "w") as handle:
            json.dump(payload, handle, indent=2, sort_keys=True)
            handle.write("\n")
    for line in metadata_lines(metadata):
        print(line)
    print(
        f"insecure below eta*={report.eta_star:.9f}"
        f" (optimal attack fraction mu*={report.mu_star:.9f},"
        f" full-attack domain up to eta={report.full_attack_edge})"
    )
    return 0


def cmd_solve_conventions(args: argparse.Namespace) -> int:
    reports = solve()
    rows = [CSV_HEADER] + report_rows(reports)
    counts = summarize(reports)
    metadata = {"version": __version__, "command": "solve-conventions"}
    if args.out:
        with open(args.out, "w") as handle:
            handle.write("\n".join(metadata_lines(metadata) + rows) + "\n")
        for line in metadata_lines(metadata):
            print(line)
        print(
            f"candidates={len(reports)} matches={counts['match']}"
            f" mismatches={counts['mismatch']}"
            f" invalid={counts['invalid-double-occupancy']}"
        )
    else:
        print("\n".join(rows))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify":
        return cmd_verify()
    if args.command == "simulate":
        return cmd_simulate(parser, args)
    if args.command == "analyze":
        return cmd_analyze(args)
    return cmd_solve_conventions(args)


if __name__ == "__main__":
    sys.exit(main())
