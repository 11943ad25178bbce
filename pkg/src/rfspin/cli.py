"""``rfspin`` command line: run one experiment and write its report.

Exit status: 0 when the checked inequality holds (or the task has no
verdict), 2 when it is violated, 3 when inconclusive, 1 on invalid input.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import TASKS, ConfigError, ExperimentConfig, default_config
from .report import EXIT_CODES, default_out_dir, emit_report, run_task

EXIT_ERROR = 1


class _Parser(argparse.ArgumentParser):
    # keep 2 reserved for violated inequalities
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rfspin", description=__doc__.splitlines()[0])
    p.add_argument("task", choices=TASKS)
    p.add_argument("--config", help="JSON experiment config (defaults to a built-in example for the task)")
    p.add_argument("--seed", type=int, help="base seed for disorder, chains and inner samples")
    p.add_argument("--samples", type=int, help="number of Monte Carlo disorder samples")
    p.add_argument("--out", help="output directory (default: $RFSPIN_OUT or the current directory)")
    p.add_argument("--format", choices=("json", "csv"), help="json writes the report; csv adds the table")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig(default_config(args.task))
        if cfg.task != args.task:
            raise ConfigError(f"config describes task {cfg.task!r} but {args.task!r} was requested")
        cfg = cfg.with_overrides(args.seed, args.samples, args.format)
        fmt = cfg.data.get("output", {}).get("format", "json")
        out = args.out or cfg.data.get("output", {}).get("dir") or default_out_dir()
        result = run_task(cfg, workers=max(1, args.workers))
        paths = emit_report(cfg, result, out, fmt)
    except (ValueError, OSError) as exc:
        print(f"rfspin: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    verdict = result.get("verdict")
    for path in paths:
        print(path)
    print(f"verdict: {verdict}")
    return EXIT_CODES.get(verdict, 0)


if __name__ == "__main__":
    sys.exit(main())
