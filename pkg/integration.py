#!/usr/bin/env python3
"""
4+1 Integration Script
Command-line entry point wiring parser, checker, mapper, load estimation,
blueprint rendering and document generation into one tool
"""

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, TextIO, Tuple

import structlog
from dotenv import find_dotenv, load_dotenv
from pydantic import BaseModel, ConfigDict, ValidationError
from rich.console import Console

from architecture_model import ArchitectureModel, resolve
from architecture_parser import format_architecture, parse, parse_file
from blueprint_render import BLUEPRINTS, to_dot
from consistency_checker import CheckMode, CheckOptions, check
from diagnostics import (
    ArchitectureError,
    Diagnostic,
    Severity,
    UncheckedModelError,
    count_by_severity,
    has_errors,
)
from document_generation import generate
from enhanced_logging import EnhancedLogger, configure_logging
from load_estimation import estimate, report_to_json, report_to_table
from process_mapper import (
    MapperConstraints,
    Stimulus,
    apply_mapping,
    inside_out,
    outside_in,
)
from type_definitions import CheckSummaryRecord

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2

SEVERITY_STYLE = {
    Severity.ERROR: "bold red",
    Severity.WARNING: "yellow",
    Severity.INFO: "cyan",
}


class UsageError(Exception):
    """Bad command line; reported on stderr with exit code 2"""


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


class CliSettings(BaseModel):
    """Environment-driven settings; everything else comes from flags"""

    model_config = ConfigDict(frozen=True)

    no_color: bool = False
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls) -> "CliSettings":
        load_dotenv(find_dotenv(usecwd=True), override=False)
        return cls(
            no_color=bool(os.environ.get("FOURVIEW_NO_COLOR")),
            log_level=os.environ.get("FOURVIEW_LOG_LEVEL", "WARNING"),
        )


def _comma_list(values: Optional[Sequence[str]]) -> List[str]:
    return [
        item.strip()
        for value in values or ()
        for item in value.split(",")
        if item.strip()
    ]


def _stimuli(values: Optional[Sequence[str]]) -> List[Stimulus]:
    stimuli = []
    for item in _comma_list(values):
        name, sep, target = item.partition("=")
        if not sep or not name or not target:
            raise UsageError(f"stimulus '{item}' must be written name=class")
        stimuli.append(Stimulus(name=name, target=target))
    return stimuli


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="fourview", description="4+1 view model architecture toolkit"
    )
    parser.add_argument(
        "--verbose", action="store_true", help="Structured debug logs on stderr"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    check_parser = subparsers.add_parser("check", help="Check architecture files")
    check_parser.add_argument("files", nargs="+", help=".arch files")
    check_parser.add_argument(
        "--mode", choices=[m.value for m in CheckMode], default=CheckMode.STRICT.value
    )
    check_parser.add_argument("--format", choices=["text", "json"], default="text")
    check_parser.add_argument(
        "-W", dest="warnings_as_errors", action="store_true", help="Warnings are errors"
    )
    check_parser.add_argument(
        "--disable", action="append", help="Comma-separated rule ids to skip"
    )

    render_parser = subparsers.add_parser("render", help="Render a view as DOT")
    render_parser.add_argument("file")
    render_parser.add_argument("--view", required=True, choices=BLUEPRINTS)
    render_parser.add_argument("--scenario", help="Scenario id for --view scenario")
    render_parser.add_argument("-o", "--output", help="Output file (default stdout)")

    map_parser = subparsers.add_parser("map", help="Synthesize a process view")
    map_parser.add_argument("file")
    map_parser.add_argument(
        "--strategy", required=True, choices=["inside-out", "outside-in"]
    )
    map_parser.add_argument("--max-processes", required=True, type=int)
    map_parser.add_argument(
        "--stimuli", action="append", help="Comma-separated name=class pairs"
    )
    map_parser.add_argument(
        "--exclusive",
        action="append",
        help="Comma-separated classes that must share one agent (repeatable)",
    )
    map_parser.add_argument("-o", "--output", help="Output file (default stdout)")

    doc_parser = subparsers.add_parser("doc", help="Generate the architecture document")
    doc_parser.add_argument("file")
    doc_parser.add_argument("--config", help="Configuration for section 10")
    doc_parser.add_argument("-o", "--output", help="Output file (default stdout)")

    simulate_parser = subparsers.add_parser("simulate", help="Estimate loads")
    simulate_parser.add_argument("file")
    simulate_parser.add_argument("--config", required=True)
    simulate_parser.add_argument("--format", choices=["json", "table"], default="table")
    simulate_parser.add_argument(
        "--mode",
        choices=[m.value for m in CheckMode],
        default=CheckMode.SKETCH.value,
        help="Check mode gating the estimate",
    )

    fmt_parser = subparsers.add_parser("fmt", help="Print the canonical text")
    fmt_parser.add_argument("file")
    fmt_parser.add_argument(
        "--write", action="store_true", help="Rewrite the file in place"
    )
    return parser


class FourViewIntegration:
    """Dispatches CLI subcommands over the toolkit components"""

    def __init__(
        self,
        stdout: TextIO,
        stderr: TextIO,
        settings: Optional[CliSettings] = None,
    ):
        self.settings = settings or CliSettings()
        self.stdout = stdout
        self.stderr = stderr
        self.out = Console(
            file=stdout, no_color=self.settings.no_color, highlight=False, soft_wrap=True
        )
        self.err = Console(
            file=stderr, no_color=self.settings.no_color, highlight=False, soft_wrap=True
        )
        self.events = EnhancedLogger("fourview.cli")

    def print_diagnostics(self, diagnostics: Sequence[Diagnostic], console: Console) -> None:
        for diagnostic in diagnostics:
            console.print(
                diagnostic.format(),
                style=SEVERITY_STYLE[diagnostic.severity],
                markup=False,
            )

    def emit(self, text: str, output: Optional[str]) -> None:
        if output is None:
            self.stdout.write(text)
        else:
            Path(output).write_text(text, encoding="utf-8", newline="\n")
            self.events.log_event("file_written", {"path": output, "chars": len(text)})

    def load(self, path: str) -> Tuple[Optional[ArchitectureModel], List[Diagnostic]]:
        result = parse_file(path)
        if result.model is None:
            return None, result.diagnostics
        problems = resolve(result.model)
        if problems:
            return None, problems
        return result.model, []

    def load_or_report(self, path: str) -> Optional[ArchitectureModel]:
        model, problems = self.load(path)
        if model is None:
            self.print_diagnostics(problems, self.err)
        return model

    # subcommands

    def check_one(self, path: str, options: CheckOptions) -> List[Diagnostic]:
        model, problems = self.load(path)
        if model is None:
            return problems
        return check(model, options)

    def check_files(self, args: argparse.Namespace) -> int:
        try:
            options = CheckOptions(
                mode=CheckMode(args.mode),
                warnings_as_errors=args.warnings_as_errors,
                disabled_rules=frozenset(_comma_list(args.disable)),
            )
        except ValidationError as e:
            raise UsageError(e.errors()[0]["msg"]) from e

        with ThreadPoolExecutor(max_workers=min(8, len(args.files))) as pool:
            per_file = list(pool.map(lambda f: self.check_one(f, options), args.files))

        everything: List[Diagnostic] = []
        for path, diagnostics in zip(args.files, per_file):
            counts = count_by_severity(diagnostics)
            summary: CheckSummaryRecord = {
                "file": path,
                "errors": counts[Severity.ERROR],
                "warnings": counts[Severity.WARNING],
                "infos": counts[Severity.INFO],
            }
            logger.debug("file_checked", **summary)
            everything.extend(diagnostics)

        if args.format == "json":
            records = [d.to_record() for d in everything]
            self.stdout.write(json.dumps(records, indent=2) + "\n")
        else:
            self.print_diagnostics(everything, self.out)
            counts = count_by_severity(everything)
            self.out.print(
                f"{counts[Severity.ERROR]} errors, {counts[Severity.WARNING]} warnings",
                markup=False,
            )
        return EXIT_FINDINGS if has_errors(everything) else EXIT_OK

    def render(self, args: argparse.Namespace) -> int:
        model = self.load_or_report(args.file)
        if model is None:
            return EXIT_FINDINGS
        self.emit(to_dot(model, args.view, args.scenario), args.output)
        return EXIT_OK

    def map(self, args: argparse.Namespace) -> int:
        model = self.load_or_report(args.file)
        if model is None:
            return EXIT_FINDINGS
        if model.logical is None:
            raise UsageError("mapping needs a logical view")
        try:
            constraints = MapperConstraints(
                max_processes=args.max_processes,
                mutual_exclusion_groups=tuple(
                    frozenset(_comma_list([group])) for group in args.exclusive or ()
                ),
                stimuli=tuple(_stimuli(args.stimuli)),
            )
        except ValidationError as e:
            raise UsageError(e.errors()[0]["msg"]) from e

        strategy = inside_out if args.strategy == "inside-out" else outside_in
        result = strategy(model.logical, constraints)
        mapped, notes = apply_mapping(model, result)

        log_console = self.out if args.output else self.err
        for line in list(result.log) + notes:
            log_console.print(f"MAP: {line}", markup=False)

        text = format_architecture(mapped)
        reparsed = parse(text, args.file)
        problems = reparsed.diagnostics
        if reparsed.model is not None:
            problems = resolve(reparsed.model) or check(reparsed.model)
        if has_errors(problems):
            self.print_diagnostics(
                [d for d in problems if d.severity is Severity.ERROR], self.err
            )
            self.err.print("mapped model fails its checks; nothing written", markup=False)
            return EXIT_FINDINGS
        self.emit(text, args.output)
        return EXIT_OK

    def doc(self, args: argparse.Namespace) -> int:
        model = self.load_or_report(args.file)
        if model is None:
            return EXIT_FINDINGS
        diagnostics = check(model)
        report = estimate(model, args.config) if args.config else None
        self.emit(generate(model, report, diagnostics), args.output)
        return EXIT_OK

    def simulate(self, args: argparse.Namespace) -> int:
        model = self.load_or_report(args.file)
        if model is None:
            return EXIT_FINDINGS
        options = CheckOptions(mode=CheckMode(args.mode))
        report = estimate(model, args.config, options)
        if args.format == "json":
            self.stdout.write(report_to_json(report))
        else:
            self.stdout.write(report_to_table(report))
        return EXIT_OK

    def fmt(self, args: argparse.Namespace) -> int:
        model = self.load_or_report(args.file)
        if model is None:
            return EXIT_FINDINGS
        text = format_architecture(model)
        if args.write:
            path = Path(args.file)
            if path.read_text(encoding="utf-8") != text:
                path.write_text(text, encoding="utf-8", newline="\n")
                self.events.log_event("file_formatted", {"path": args.file})
        else:
            self.stdout.write(text)
        return EXIT_OK

    def dispatch(self, args: argparse.Namespace) -> int:
        handlers = {
            "check": self.check_files,
            "render": self.render,
            "map": self.map,
            "doc": self.doc,
            "simulate": self.simulate,
            "fmt": self.fmt,
        }
        return handlers[args.command](args)


def run(
    argv: Sequence[str],
    stdout: Optional[TextIO] = None,
    stderr: Optional[TextIO] = None,
    settings: Optional[CliSettings] = None,
) -> int:
    """Run one command; returns the process exit code"""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    settings = settings or CliSettings.from_env()
    try:
        args = build_parser().parse_args(list(argv))
    except UsageError as e:
        stderr.write(f"usage error: {e}\n")
        return EXIT_USAGE
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_OK

    configure_logging("DEBUG" if args.verbose else settings.log_level)
    integration = FourViewIntegration(stdout, stderr, settings)
    try:
        return integration.dispatch(args)
    except UsageError as e:
        stderr.write(f"usage error: {e}\n")
        return EXIT_USAGE
    except UncheckedModelError as e:
        stderr.write(f"error: {e}\n")
        for diagnostic in e.diagnostics:
            stderr.write(diagnostic.format() + "\n")
        return EXIT_FINDINGS
    except ArchitectureError as e:
        stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    except OSError as e:
        stderr.write(f"error: {e}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
