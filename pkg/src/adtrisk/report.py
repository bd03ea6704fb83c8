"""Rendering of evaluation and comparison results.

Three output shapes over the same row data:

  * Markdown: GitHub-style pipe tables;
  * CSV: comma separated, minimal quoting, CRLF line endings;
  * JSON: one document carrying full-precision values plus a "display"
    array holding exactly the strings the text formats would print.

Numbers are rounded half-up to the configured number of decimals at this
layer, then trailing zeros are dropped ("1", "0.7", "2.45"); the
% Reduction column always shows one decimal and a trailing percent sign.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from enum import Enum
from typing import Any, Sequence

from .engine import ComparisonRow, EvaluatedTree, classify_impact, classify_probability
from .model import DomainError, NodeAttrs, NodeKind, round_half_up


class ReportFormat(str, Enum):
    MARKDOWN = "md"
    CSV = "csv"
    JSON = "json"


class MissingRootError(Exception):
    """summarize() needs a root row to report root reduction."""


@dataclass(frozen=True)
class ReportOptions:
    format: ReportFormat = ReportFormat.MARKDOWN
    decimals: int = 2
    include_bands: bool = False

    def __post_init__(self) -> None:
        if not 0 <= self.decimals <= 6:
            raise DomainError(f"decimals must be between 0 and 6, got {self.decimals!r}")


COMPARISON_COLUMNS = (
    "Threat Code", "Node", "Cost", "Impact", "Skill", "Probability", "Inherent Risk",
    "Control Code", "Value", "Cost", "Impact", "Skill", "Probability", "Residual Risk",
    "% Reduction",
)
COMPARISON_BAND_COLUMNS = (
    "Inherent Probability Band", "Inherent Impact Band",
    "Residual Probability Band", "Residual Impact Band",
)
EVALUATION_COLUMNS = (
    "Threat Code", "Node", "Cost", "Impact", "Skill", "Probability", "Risk",
)
EVALUATION_BAND_COLUMNS = ("Probability Band", "Impact Band")


def format_number(value: float, decimals: int) -> str:
    """Half-up rounding to `decimals`, with trailing zeros dropped."""
    rounded = round_half_up(value, decimals)
    text = f"{rounded:.{decimals}f}"
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text or "0"


def format_percent(value: float) -> str:
    """Percentages always show one decimal: 40.0%, 2.0%."""
    return f"{round_half_up(value, 1):.1f}%"


def _attr_cells(attrs: NodeAttrs, decimals: int) -> list[str]:
    return [format_number(attrs.cost.value, decimals),
            format_number(attrs.impact.value, decimals),
            format_number(attrs.skill.value, decimals),
            format_number(attrs.probability.value, decimals)]


def _band_cells(attrs: NodeAttrs) -> list[str]:
    return [classify_probability(attrs.probability.value).value,
            classify_impact(attrs.impact.value).value]


def comparison_columns(opts: ReportOptions) -> tuple[str, ...]:
    cols = COMPARISON_COLUMNS
    return cols + COMPARISON_BAND_COLUMNS if opts.include_bands else cols


def comparison_cells(row: ComparisonRow, opts: ReportOptions) -> list[str]:
    """The printed cell strings for one comparison row, column order."""
    d = opts.decimals
    cells = [row.threat_code or "-", row.node_id]
    cells += _attr_cells(row.inherent, d)
    cells.append(format_number(row.inherent.risk, d))
    cells.append(row.control_code or "-")
    cells.append(format_number(row.control_final_value, d) if row.control_final_value is not None else "-")
    cells += _attr_cells(row.residual, d)
    cells.append(format_number(row.residual.risk, d))
    cells.append(format_percent(row.reduction_percent))
    if opts.include_bands:
        pb_i, ib_i = _band_cells(row.inherent)
        pb_r, ib_r = _band_cells(row.residual)
        cells += [pb_i, ib_i, pb_r, ib_r]
    return cells


@dataclass(frozen=True)
class Summary:
    """Headline findings over a comparison: best leaf win, root movement."""

    max_leaf_reduction: float
    root_reduction: float
    persistent_threat_flag: bool


def summarize(rows: Sequence[ComparisonRow], *, persistent_threshold: float = 10.0) -> Summary:
    """Reduce comparison rows to the headline numbers.

    persistent_threat_flag is set when the root's reduction stays under
    the threshold (default 10%): the controls did not meaningfully move
    the main goal's risk.
    """
    root_rows = [r for r in rows if r.is_root]
    if not root_rows:
        raise MissingRootError("comparison rows contain no root row")
    root_reduction = root_rows[0].reduction_percent
    leaf_reductions = [r.reduction_percent for r in rows if r.kind is NodeKind.LEAF]
    max_leaf = max(leaf_reductions, default=root_reduction)
    return Summary(max_leaf_reduction=max_leaf, root_reduction=root_reduction,
                   persistent_threat_flag=root_reduction < persistent_threshold)


def _markdown_table(columns: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    def line(cells: Sequence[str]) -> str:
        return "| " + " | ".join(c.replace("|", "\\|") for c in cells) + " |"

    out = [line(columns), "| " + " | ".join("---" for _ in columns) + " |"]
    out += [line(r) for r in rows]
    return "\n".join(out) + "\n"


def _csv_table(columns: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    sink = io.StringIO()
    writer = csv.writer(sink, lineterminator="\r\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return sink.getvalue()


def _attrs_obj(attrs: NodeAttrs) -> dict[str, float]:
    return {"probability": attrs.probability.value, "cost": attrs.cost.value,
            "impact": attrs.impact.value, "skill": attrs.skill.value, "risk": attrs.risk}


def _bands_obj(attrs: NodeAttrs) -> dict[str, str]:
    return {"probability_band": classify_probability(attrs.probability.value).value,
            "impact_band": classify_impact(attrs.impact.value).value}


def summary_obj(summary: Summary) -> dict[str, Any]:
    return {"max_leaf_reduction": summary.max_leaf_reduction,
            "root_reduction": summary.root_reduction,
            "persistent_threat": summary.persistent_threat_flag}


def render_comparison(rows: Sequence[ComparisonRow], opts: ReportOptions,
                      summary: Summary | None = None) -> str:
    """Render comparison rows in the configured format.

    The summary, when given, is appended as a section (Markdown), embedded
    under a "summary" key (JSON), or left out entirely (CSV keeps the data
    grid clean; the command line prints it on stderr instead).
    """
    columns = comparison_columns(opts)
    cell_rows = [comparison_cells(r, opts) for r in rows]
    if opts.format is ReportFormat.MARKDOWN:
        text = _markdown_table(columns, cell_rows)
        if summary is not None:
            text += "\n" + render_summary_text(summary, markdown=True)
        return text
    if opts.format is ReportFormat.CSV:
        return _csv_table(columns, cell_rows)
    doc: dict[str, Any] = {
        "report": "comparison",
        "decimals": opts.decimals,
        "columns": list(columns),
        "rows": [],
    }
    for row, cells in zip(rows, cell_rows):
        obj: dict[str, Any] = {
            "node": row.node_id,
            "kind": row.kind.value,
            "is_root": row.is_root,
            "threat_code": row.threat_code,
            "control_code": row.control_code,
            "control_value": row.control_final_value,
            "inherent": _attrs_obj(row.inherent),
            "residual": _attrs_obj(row.residual),
            "reduction_percent": row.reduction_percent,
            "display": cells,
        }
        if opts.include_bands:
            obj["inherent_bands"] = _bands_obj(row.inherent)
            obj["residual_bands"] = _bands_obj(row.residual)
        doc["rows"].append(obj)
    if summary is not None:
        doc["summary"] = summary_obj(summary)
    return json.dumps(doc, indent=2) + "\n"


def render_evaluation(ev: EvaluatedTree, opts: ReportOptions) -> str:
    """Render a single evaluation (one mode) as a per-node attribute table."""
    columns = EVALUATION_COLUMNS + EVALUATION_BAND_COLUMNS if opts.include_bands \
        else EVALUATION_COLUMNS
    nodes = list(ev.tree.root.walk_postorder())
    cell_rows = []
    for node in nodes:
        attrs = ev.attrs[node.id]
        cells = [node.threat_code or "-", node.id]
        cells += _attr_cells(attrs, opts.decimals)
        cells.append(format_number(attrs.risk, opts.decimals))
        if opts.include_bands:
            cells += _band_cells(attrs)
        cell_rows.append(cells)
    if opts.format is ReportFormat.MARKDOWN:
        return _markdown_table(columns, cell_rows)
    if opts.format is ReportFormat.CSV:
        return _csv_table(columns, cell_rows)
    doc: dict[str, Any] = {
        "report": "evaluation",
        "mode": ev.mode.value,
        "decimals": opts.decimals,
        "columns": list(columns),
        "rows": [],
    }
    for node, cells in zip(nodes, cell_rows):
        attrs = ev.attrs[node.id]
        obj: dict[str, Any] = {
            "node": node.id,
            "kind": node.kind.value,
            "is_root": node.id == ev.tree.root.id,
            "threat_code": node.threat_code,
            "control_code": node.countermeasure_code,
            "attrs": _attrs_obj(attrs),
            "display": cells,
        }
        if opts.include_bands:
            obj["bands"] = _bands_obj(attrs)
        doc["rows"].append(obj)
    return json.dumps(doc, indent=2) + "\n"


def render_summary_text(summary: Summary, *, markdown: bool = False) -> str:
    """The summary block as text lines (or a small Markdown section)."""
    flag = "yes" if summary.persistent_threat_flag else "no"
    lines = [
        f"max leaf risk reduction: {format_percent(summary.max_leaf_reduction)}",
        f"root risk reduction: {format_percent(summary.root_reduction)}",
        f"persistent threat at root: {flag}",
    ]
    if markdown:
        return "## Summary\n\n" + "\n".join(f"- {line}" for line in lines) + "\n"
    return "\n".join(lines) + "\n"
