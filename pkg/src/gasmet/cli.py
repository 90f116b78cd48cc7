"""Command line entry point: ``gasmet analyze | corpus | stats``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .corpus import CorpusError, GasFileError, default_jobs, format_metrics_csv, ingest_gas, join, read_metrics_csv, run_corpus
from .report import EMITTERS, SEVERITY_RANK, analyze_paths, stats_json, stats_summary
from .rules import RuleConfig, RuleConfigError, load_rules
from .stats import correlation_matrix

EXIT_OK, EXIT_FINDINGS, EXIT_USAGE, EXIT_PARSE = 0, 1, 2, 3


class _Usage(Exception):
    pass


def _load_cfg(args: argparse.Namespace) -> RuleConfig:
    cfg = RuleConfig()
    if args.rules:
        try:
            cfg = load_rules(args.rules)
        except OSError as exc:
            raise _Usage(f"cannot read rules file {args.rules}: {exc.strerror}") from None
        except RuleConfigError as exc:
            raise _Usage(f"{args.rules}: {exc}") from None
    if getattr(args, "iff_include_private", False):
        cfg.iff_include_private = True
    return cfg


def cmd_analyze(args: argparse.Namespace) -> int:
    cfg = _load_cfg(args)
    missing = [p for p in args.paths if not Path(p).exists()]
    if missing:
        raise _Usage(f"no such file or directory: {missing[0]}")
    report = analyze_paths(args.paths, cfg)
    out = EMITTERS[args.format](report)
    if args.output:
        Path(args.output).write_bytes(out)
    else:
        sys.stdout.buffer.write(out)
        sys.stdout.flush()
    if args.strict_parse and any(not fr.parse_ok for fr in report.files):
        return EXIT_PARSE
    if args.fail_on == "none":
        return EXIT_OK
    worst = report.worst_severity()
    if worst is not None and SEVERITY_RANK[worst] >= SEVERITY_RANK[args.fail_on]:
        return EXIT_FINDINGS
    return EXIT_OK


def cmd_corpus(args: argparse.Namespace) -> int:
    cfg = _load_cfg(args)
    if not Path(args.root).is_dir():
        raise _Usage(f"not a directory: {args.root}")
    jobs = args.jobs if args.jobs is not None else default_jobs()
    if jobs < 1:
        raise _Usage("--jobs must be at least 1")
    records = run_corpus(args.root, cfg, jobs, args.id_from_filename_regex)
    data = format_metrics_csv(records).encode("utf-8")
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    failed = sum(not r.parse_ok for r in records)
    print(f"{len(records)} file(s) analysed, {failed} with parse errors", file=sys.stderr)
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    if not 0.0 < args.alpha <= 1.0:
        raise _Usage("--alpha must be in (0, 1]")
    try:
        rows = read_metrics_csv(args.metrics)
        gas = ingest_gas(args.gas)
        table = join(rows, gas, keep_failed=args.keep_failed)
        report = correlation_matrix(table, args.alpha)
    except OSError as exc:
        print(f"error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_FINDINGS
    except (CorpusError, GasFileError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FINDINGS
    for note in table.notes:
        print(f"warning: {note}", file=sys.stderr)
    data = stats_json(report, table.notes)
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
    constants = {c: table.column(c)[0] for c in report.excluded}
    sys.stdout.write(stats_summary(report, constants=constants))
    sys.stdout.flush()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gasmet", description="Gas-cost metrics and smells for Solidity sources.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    an = sub.add_parser("analyze", help="metrics and smell findings for files or directories")
    an.add_argument("paths", nargs="+")
    an.add_argument("--format", choices=sorted(EMITTERS), default="text")
    an.add_argument("--rules", help="rules file (key = value)")
    an.add_argument("--fail-on", choices=("info", "warning", "none"), default="warning")
    an.add_argument("--strict-parse", action="store_true", help="exit 3 when any file fails to parse")
    an.add_argument("--iff-include-private", action="store_true")
    an.add_argument("-o", "--output", help="write the report here instead of stdout")
    an.set_defaults(func=cmd_analyze)

    co = sub.add_parser("corpus", help="metrics CSV for every .sol file under a directory")
    co.add_argument("root")
    co.add_argument("--out", help="CSV destination (default stdout)")
    co.add_argument("--jobs", type=int, default=None, help="worker processes (default $GASMET_JOBS or 1)")
    co.add_argument("--rules")
    co.add_argument("--id-from-filename-regex", default=None, help="regex on the file name; group 1 (or the match) is the id")
    co.add_argument("--iff-include-private", action="store_true")
    co.set_defaults(func=cmd_corpus)

    st = sub.add_parser("stats", help="Spearman/Holm correlation of metrics with gas cost")
    st.add_argument("--metrics", required=True)
    st.add_argument("--gas", required=True)
    st.add_argument("--alpha", type=float, default=0.05)
    st.add_argument("--out", help="JSON report destination (default stdout)")
    st.add_argument("--keep-failed", action="store_true", help="keep rows whose file failed to parse")
    st.set_defaults(func=cmd_stats)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.ERROR, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
