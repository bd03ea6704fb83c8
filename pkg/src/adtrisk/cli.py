"""riskctl: command-line front end for tree risk assessment.

Subcommands:

    riskctl validate PATH
        Parse and validate a tree file; diagnostics go to stderr as
        file:line:col: rule: message.

    riskctl eval PATH [--mode inherent|residual|both] [--format md|csv|json]
                      [--decimals N] [--bands] [--out PATH]
        Evaluate and report. Mode both renders the full inherent-vs-residual
        comparison plus a summary block; single modes render one attribute
        table. With --format csv the summary goes to stderr so stdout stays
        a clean data grid.

    riskctl catalog lint PATH
        Check control-library consistency (final values, standard refs).

    riskctl catalog coverage PATH
        Cross-reference tree leaves against the threat/control catalogues.

PATH may be - to read from stdin. Exit codes: 0 success, 1 parse or
validation failure (also usage errors), 2 evaluation error, 3 I/O error.
Set RISKCTL_COLOR=never to disable diagnostic coloring (default auto).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .catalogue import (
    LINT_WARNING_RULES,
    ControlLibrary,
    catalogue_only_coverage,
    cross_reference,
    lint_controls,
)
from .dsl import CatalogueResult, ParseResult, SourceSpan, parse_catalogue_file, parse_tree_file
from .engine import EvaluationError, compare, evaluate
from .model import EvalMode, Violation, validate_tree
from .report import (
    ReportFormat,
    ReportOptions,
    render_comparison,
    render_evaluation,
    render_summary_text,
    summarize,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_EVAL = 2
EXIT_IO = 3

# which leaf attribute a validation rule points at, for precise spans
_RULE_FIELDS = {
    "ProbabilityDomain": "prob",
    "LeafCostDomain": "cost",
    "LeafImpactDomain": "impact",
    "SkillDomain": "skill",
    "UnresolvedThreat": "threat",
    "UnresolvedControl": "counter",
}


class _CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


class _ArgumentParser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; our contract reserves 2 for
    evaluation errors, so usage problems exit 1 instead."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _color_enabled() -> bool:
    mode = os.environ.get("RISKCTL_COLOR", "auto")
    if mode == "never":
        return False
    return sys.stderr.isatty()


def _diagnostic(span: SourceSpan, rule: str, message: str, *, warning: bool = False) -> None:
    if _color_enabled():
        color = "\x1b[33m" if warning else "\x1b[31m"
        rule_text = f"{color}{rule}\x1b[0m"
    else:
        rule_text = rule
    prefix = "warning: " if warning else ""
    print(f"{span}: {prefix}{rule_text}: {message}", file=sys.stderr)


def _read_source(path: str) -> tuple[str, str]:
    if path == "-":
        return sys.stdin.read(), "<stdin>"
    try:
        return Path(path).read_text(encoding="utf-8"), path
    except OSError as exc:
        raise _CliError(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from None


def _write_output(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise _CliError(EXIT_IO, f"cannot write {out}: {exc.strerror or exc}") from None


def _print_parse_errors(result: ParseResult | CatalogueResult) -> None:
    for err in result.errors:
        _diagnostic(err.span, "syntax", err.message)


def _violation_span(violation: Violation, node_spans, attr_spans, filename: str) -> SourceSpan:
    attr = _RULE_FIELDS.get(violation.rule)
    if attr is not None:
        span = attr_spans.get((violation.node_id, attr))
        if span is not None:
            return span
    span = node_spans.get(violation.node_id)
    return span if span is not None else SourceSpan(filename, 1, 1, 0)


def cmd_validate(args: argparse.Namespace) -> int:
    source, filename = _read_source(args.path)
    result = parse_tree_file(source, filename)
    if result.errors:
        _print_parse_errors(result)
        return EXIT_INPUT
    violations = validate_tree(result.tree)
    for v in violations:
        span = _violation_span(v, result.node_spans, result.attr_spans, filename)
        _diagnostic(span, v.rule, v.message)
    return EXIT_INPUT if violations else EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    source, filename = _read_source(args.path)
    result = parse_tree_file(source, filename)
    if result.errors:
        _print_parse_errors(result)
        return EXIT_INPUT
    tree = result.tree
    violations = validate_tree(tree)
    if violations:
        for v in violations:
            span = _violation_span(v, result.node_spans, result.attr_spans, filename)
            _diagnostic(span, v.rule, v.message)
        return EXIT_INPUT
    opts = ReportOptions(format=ReportFormat(args.format), decimals=args.decimals,
                         include_bands=args.bands)
    try:
        if args.mode == "both":
            inherent = evaluate(tree, EvalMode.INHERENT)
            residual = evaluate(tree, EvalMode.RESIDUAL)
            rows = compare(inherent, residual)
            summary = summarize(rows)
            if opts.format is ReportFormat.CSV:
                _write_output(render_comparison(rows, opts), args.out)
                sys.stderr.write(render_summary_text(summary))
            else:
                _write_output(render_comparison(rows, opts, summary=summary), args.out)
        else:
            mode = EvalMode.INHERENT if args.mode == "inherent" else EvalMode.RESIDUAL
            ev = evaluate(tree, mode)
            _write_output(render_evaluation(ev, opts), args.out)
    except EvaluationError as exc:
        print(f"riskctl: evaluation error: {exc}", file=sys.stderr)
        return EXIT_EVAL
    return EXIT_OK


def cmd_catalog(args: argparse.Namespace) -> int:
    source, filename = _read_source(args.path)
    result = parse_catalogue_file(source, filename)
    if result.errors:
        _print_parse_errors(result)
        return EXIT_INPUT
    if args.action == "lint":
        return _catalog_lint(result, filename)
    return _catalog_coverage(result, filename)


def _catalog_lint(result: CatalogueResult, filename: str) -> int:
    findings = lint_controls(ControlLibrary(controls=result.controls))
    hard = 0
    for finding in findings:
        warning = finding.rule in LINT_WARNING_RULES
        if not warning:
            hard += 1
        span = result.control_spans.get(finding.node_id) or SourceSpan(filename, 1, 1, 0)
        _diagnostic(span, finding.rule, finding.message, warning=warning)
    return EXIT_INPUT if hard else EXIT_OK


def _catalog_coverage(result: CatalogueResult, filename: str) -> int:
    if result.tree is not None:
        violations = validate_tree(result.tree)
        if violations:
            for v in violations:
                span = _violation_span(v, result.node_spans, result.attr_spans, filename)
                _diagnostic(span, v.rule, v.message)
            return EXIT_INPUT
        report = cross_reference(result.tree)
        title = result.tree.name
    else:
        report = catalogue_only_coverage(result.controls, result.threats)
        title = filename
    lines = [f"STRIDE coverage for {title}:"]
    for cov in report.categories:
        if cov.count:
            lines.append(f"  {cov.category.value}: {cov.count} leaves "
                         f"({len(cov.controlled)} controlled, {len(cov.uncontrolled)} uncontrolled)")
        else:
            lines.append(f"  {cov.category.value}: 0 leaves")
    unc = report.uncategorized
    if unc.count:
        lines.append(f"  uncategorized: {unc.count} leaves "
                     f"({len(unc.controlled)} controlled, {len(unc.uncontrolled)} uncontrolled)")
    lines.append("leaves without threat code: "
                 + (", ".join(report.leaves_without_threat) or "none"))
    lines.append("unreferenced threats: " + (", ".join(report.unreferenced_threats) or "none"))
    lines.append("unreferenced controls: " + (", ".join(report.unreferenced_controls) or "none"))
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="riskctl",
                             description="Attack/defense tree risk assessment")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p_validate = sub.add_parser("validate", help="parse and validate a tree file")
    p_validate.add_argument("path", help="tree file, or - for stdin")
    p_validate.set_defaults(func=cmd_validate)

    p_eval = sub.add_parser("eval", help="evaluate risk and render a report")
    p_eval.add_argument("path", help="tree file, or - for stdin")
    p_eval.add_argument("--mode", choices=("inherent", "residual", "both"), default="both",
                        help="what to compute (default: both, the full comparison)")
    p_eval.add_argument("--format", choices=("md", "csv", "json"), default="md",
                        help="output format (default: md)")
    p_eval.add_argument("--decimals", type=int, default=2, metavar="N",
                        help="rounding for displayed numbers, 0..6 (default: 2)")
    p_eval.add_argument("--bands", action="store_true",
                        help="add probability/impact classification band columns")
    p_eval.add_argument("--out", metavar="PATH", help="write the report to a file")
    p_eval.set_defaults(func=cmd_eval)

    p_catalog = sub.add_parser("catalog", help="inspect catalogues")
    p_catalog.add_argument("action", choices=("lint", "coverage"))
    p_catalog.add_argument("path", help="tree or catalogue file, or - for stdin")
    p_catalog.set_defaults(func=cmd_catalog)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "eval" and not 0 <= args.decimals <= 6:
        parser.error("--decimals must be between 0 and 6")
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"riskctl: {exc.message}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
