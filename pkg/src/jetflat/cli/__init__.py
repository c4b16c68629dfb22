"""Command-line front end: input parsing, command dispatch and report rendering."""

from jetflat.cli.commands import COMMANDS, run_selftest
from jetflat.cli.main import main
from jetflat.cli.parser import InputDocument, InputError, ParseError, parse, parse_expr
from jetflat.cli.report import Report, Witness, render_report


def run(command: str, doc: InputDocument | None = None, **flags) -> Report:
    """Dispatch ``command`` on a parsed document; selftest ignores ``doc``."""
    if command == "selftest":
        return run_selftest(**flags)
    if command not in COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    return COMMANDS[command](doc)


__all__ = [
    "InputDocument",
    "InputError",
    "ParseError",
    "Report",
    "Witness",
    "main",
    "parse",
    "parse_expr",
    "render_report",
    "run",
]
