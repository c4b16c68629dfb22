"""``jetflat <command> <input-file> [--format json|text] [--timings] [--max-degree d]``.

Exit status: 0 for flat or ok verdicts, 1 for negative verdicts, 2 for
input errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from jetflat.cli.commands import COMMANDS, run_selftest
from jetflat.cli.parser import InputError, parse
from jetflat.cli.report import render_report
from jetflat.corpus import DEFAULT_SEED
from jetflat.errors import JetflatError

SEED_VAR = "JETFLAT_SEED"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jetflat", description="Exact point-flatness checks.")
    ap.add_argument("command", choices=[*COMMANDS, "selftest"])
    ap.add_argument("input", nargs="?", help="input document (not needed for selftest)")
    ap.add_argument("--format", choices=("json", "text"), default="json")
    ap.add_argument("--timings", action="store_true", help="include per-phase timings in milliseconds")
    ap.add_argument("--max-degree", type=int, default=2, help="degree cap for the selftest corpus")
    return ap


def _error(code: str, message: str) -> int:
    print(f"error: {code}: {message}", file=sys.stderr)
    return 2


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "selftest":
            if args.max_degree < 1:
                return _error("BadOption", "--max-degree must be at least 1")
            raw = os.environ.get(SEED_VAR, str(DEFAULT_SEED))
            try:
                seed = int(raw)
            except ValueError:
                return _error("BadSeed", f"{SEED_VAR} must be an integer, got {raw!r}")
            report = run_selftest(seed=seed, max_degree=args.max_degree)
        else:
            if args.input is None:
                return _error("MissingInput", f"{args.command} needs an input file")
            try:
                text = Path(args.input).read_text(encoding="utf-8")
            except (OSError, UnicodeDecodeError) as exc:
                return _error("UnreadableInput", str(exc))
            report = COMMANDS[args.command](parse(text))
    except InputError as exc:
        return _error(exc.code, str(exc).split(": ", 1)[1])
    except JetflatError as exc:
        return _error(type(exc).__name__, str(exc))
    sys.stdout.buffer.write(render_report(report, args.format, timings=args.timings))
    sys.stdout.flush()
    return 0 if report.positive else 1


if __name__ == "__main__":
    raise SystemExit(main())
