"""Command-line harness.

Subcommands: ``ingest`` converts external CI histories into the canonical
format, ``evaluate`` replays configured approaches over histories and
persists raw values plus aggregates, ``report`` renders tables, boxplot
data, and critical-difference data, and ``prioritize`` prints the order one
approach would run a given cycle in.

Exit codes: 0 success, 1 partial failure (some project failed while others
completed), 2 usage or configuration error. The ``TCP_LAB_SEED`` environment
variable overrides the master seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from tcp_lab.combinators import InvalidSpecError, build, presets
from tcp_lab.dataset import (
    ColumnMapping,
    DatasetError,
    attach_sources,
    ingest,
    join_build_times,
    read_build_times,
    read_canonical,
    write_canonical,
)
from tcp_lab.evaluation import (
    ConfigError,
    EvaluationConfig,
    run_evaluation,
    write_outcomes,
)
from tcp_lab.model import FlattenPolicy, flatten
from tcp_lab.report import ReportError, write_report

SEED_ENV_VAR = "TCP_LAB_SEED"


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _env_seed() -> int | None:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None


def _cmd_ingest(args: argparse.Namespace) -> int:
    try:
        mapping_raw = json.loads(Path(args.mapping).read_text(encoding="utf-8"))
        mapping = ColumnMapping.from_dict(mapping_raw)
        project = args.project or Path(args.out).stem
        result = ingest(args.input, mapping, project, delimiter=args.delimiter)
        history = result.history
        mismatches = 0
        if args.build_times:
            table = read_build_times(args.build_times)
            history, mismatches = join_build_times(history, table)
        write_canonical(history, args.out)
    except (DatasetError, OSError, json.JSONDecodeError) as error:
        return _fail(str(error))
    executions = sum(len(c.executions) for c in history.cycles)
    print(
        f"project={history.project} cycles={len(history.cycles)} "
        f"executions={executions} rejected_rows={result.rejected_rows} "
        f"build_time_mismatches={mismatches} out={args.out}"
    )
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    config_path = Path(args.config)
    try:
        raw = json.loads(config_path.read_text(encoding="utf-8"))
        config = EvaluationConfig.from_dict(raw, base_dir=config_path.parent)
        env_seed = _env_seed()
        if env_seed is not None:
            config = dataclasses.replace(config, seed=env_seed)
        for name, spec in config.approaches.items():
            try:
                build(spec, master_seed=0)
            except InvalidSpecError as error:
                raise ConfigError(f"approach {name!r}: {error}") from None
    except (ConfigError, OSError, json.JSONDecodeError) as error:
        return _fail(str(error))
    outcomes = run_evaluation(config, jobs=args.jobs)
    write_outcomes(Path(args.out), config, outcomes)
    failed = False
    for outcome in outcomes:
        if outcome.error:
            failed = True
            print(f"{outcome.project}: FAILED ({outcome.error})", file=sys.stderr)
        else:
            print(
                f"{outcome.project}: cycles={outcome.cycles} "
                f"failed_cycles={outcome.failed_cycles} "
                f"approaches={len(outcome.approaches)}"
            )
    print(f"results written to {args.out}")
    return 1 if failed else 0


def _cmd_report(args: argparse.Namespace) -> int:
    try:
        written = write_report(args.raw, args.out, fmt=args.format, alpha=args.alpha)
    except (ReportError, OSError, json.JSONDecodeError) as error:
        return _fail(str(error))
    for path in written:
        print(path)
    return 0


def _cmd_prioritize(args: argparse.Namespace) -> int:
    try:
        if args.preset:
            if args.preset not in presets():
                raise InvalidSpecError(f"unknown preset {args.preset!r}")
            spec = args.preset
        else:
            spec = json.loads(Path(args.spec).read_text(encoding="utf-8"))
        history = read_canonical(args.history)
        if args.sources:
            history = attach_sources(history, args.sources)
        target = None
        for position, cycle in enumerate(history.cycles):
            if cycle.index == args.cycle:
                target = position
                break
        if target is None:
            return _fail(f"UNKNOWN_CYCLE: no cycle with index {args.cycle}")
        env_seed = _env_seed()
        seed = args.seed if args.seed is not None else (env_seed if env_seed is not None else 0)
        approach = build(spec, sources=history.sources, master_seed=seed)
        for cycle in history.cycles[:target]:
            approach.observe(cycle.executions)
        ranking = approach.rank(list(history.cycles[target].suite))
        for case in flatten(ranking, FlattenPolicy.STABLE):
            print(case)
    except (InvalidSpecError, ConfigError, DatasetError, OSError, json.JSONDecodeError) as error:
        return _fail(str(error))
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tcp-lab",
        description="Test case prioritization toolkit: ingest CI histories, "
        "replay prioritization approaches, and render comparison reports "
        "with statistical tests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="convert a dataset to the canonical format")
    p_ingest.add_argument("--in", dest="input", required=True, help="source file or directory")
    p_ingest.add_argument("--mapping", required=True, help="JSON column mapping file")
    p_ingest.add_argument("--out", required=True, help="canonical history file to write")
    p_ingest.add_argument("--project", help="project name (default: output stem)")
    p_ingest.add_argument("--delimiter", default=",", help="source delimiter (default ,)")
    p_ingest.add_argument("--build-times", help="job_id,seconds table to join")
    p_ingest.set_defaults(func=_cmd_ingest)

    p_eval = sub.add_parser("evaluate", help="replay approaches and collect metrics")
    p_eval.add_argument("--config", required=True, help="JSON evaluation config")
    p_eval.add_argument("--out", required=True, help="output directory")
    p_eval.add_argument("--jobs", type=int, default=1, help="projects to run in parallel")
    p_eval.set_defaults(func=_cmd_evaluate)

    p_report = sub.add_parser("report", help="render tables and plot data")
    p_report.add_argument("--raw", required=True, help="evaluate output directory")
    p_report.add_argument("--format", choices=("csv", "md"), default="csv")
    p_report.add_argument("--out", required=True, help="report output directory")
    p_report.add_argument("--alpha", type=float, default=0.05, help="significance level")
    p_report.set_defaults(func=_cmd_report)

    p_prio = sub.add_parser("prioritize", help="print one cycle's prioritized order")
    p_prio.add_argument("--history", required=True, help="canonical history file")
    group = p_prio.add_mutually_exclusive_group(required=True)
    group.add_argument("--spec", help="JSON approach spec file")
    group.add_argument("--preset", help="preset name (e.g. P1.2)")
    p_prio.add_argument("--cycle", type=int, required=True, help="cycle index to prioritize")
    p_prio.add_argument("--sources", help="checkout directory for code-distance approaches")
    p_prio.add_argument("--seed", type=int, help="master seed (default 0)")
    p_prio.set_defaults(func=_cmd_prioritize)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return int(exit_.code or 0)
    return args.func(args)


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
