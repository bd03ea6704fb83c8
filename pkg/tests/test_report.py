"""Report rendering: number formatting, tables, JSON documents, summaries."""

from __future__ import annotations

import json

import pytest

from adtrisk import (
    AdNode,
    AdTree,
    DomainError,
    EvalMode,
    LeafAttrs,
    NodeKind,
    ReportFormat,
    ReportOptions,
    compare_tree,
    evaluate,
    format_number,
    format_percent,
    render_comparison,
    render_evaluation,
    render_summary_text,
    summarize,
)
from adtrisk.report import (
    COMPARISON_COLUMNS,
    EVALUATION_COLUMNS,
    MissingRootError,
    Summary,
    comparison_cells,
)


class TestNumberFormatting:
    @pytest.mark.parametrize("value, decimals, expected", [
        (1.0, 2, "1"),
        (0.7, 2, "0.7"),
        (2.45, 2, "2.45"),
        (0.455, 2, "0.46"),
        (3.98305085, 2, "3.98"),
        (1.175, 2, "1.18"),
        (3.9033898305084747, 2, "3.9"),
        (0.0, 2, "0"),
        (2.5, 0, "3"),
        (9.4, 2, "9.4"),
    ])
    def test_format_number(self, value, decimals, expected):
        assert format_number(value, decimals) == expected

    def test_format_percent(self):
        assert format_percent(40.0) == "40.0%"
        assert format_percent(2.00000000000001) == "2.0%"
        assert format_percent(65.15) == "65.2%"
        assert format_percent(0.0) == "0.0%"

    def test_options_decimals_domain(self):
        ReportOptions(decimals=0)
        ReportOptions(decimals=6)
        with pytest.raises(DomainError):
            ReportOptions(decimals=7)
        with pytest.raises(DomainError):
            ReportOptions(decimals=-1)


class TestComparisonCells:
    def test_root_row_cells(self, iot_rows):
        root = [r for r in iot_rows if r.is_root][0]
        cells = comparison_cells(root, ReportOptions())
        assert cells == ["-", "O_T", "1.18", "9.4", "0.5", "1", "3.98",
                         "-", "-", "1.18", "9.4", "0.5", "0.98", "3.9", "2.0%"]

    def test_controlled_leaf_cells(self, iot_rows):
        row = {r.node_id: r for r in iot_rows}["H_A.1.1"]
        cells = comparison_cells(row, ReportOptions())
        assert cells == ["B1", "H_A.1.1", "1", "7", "0.5", "0.7", "2.45",
                         "C3", "0.4", "1", "7", "0.5", "0.42", "1.47", "40.0%"]

    def test_band_cells_appended(self, iot_rows):
        opts = ReportOptions(include_bands=True)
        cells = comparison_cells(iot_rows[0], opts)
        assert len(cells) == len(COMPARISON_COLUMNS) + 4
        assert cells[-4:] == ["Medium", "Severe", "Medium", "Severe"]


class TestMarkdown:
    def test_table_shape(self, iot_rows):
        text = render_comparison(iot_rows, ReportOptions())
        lines = text.splitlines()
        assert lines[0].startswith("| Threat Code | Node |")
        assert lines[0].endswith("| % Reduction |")
        assert set(lines[1].replace("|", "").split()) == {"---"}
        assert len(lines) == 2 + len(iot_rows)
        assert lines[0].count("|") == len(COMPARISON_COLUMNS) + 1

    def test_summary_section(self, iot_rows):
        text = render_comparison(iot_rows, ReportOptions(), summary=summarize(iot_rows))
        assert "## Summary" in text
        assert "- max leaf risk reduction: 80.0%" in text
        assert "- root risk reduction: 2.0%" in text
        assert "- persistent threat at root: yes" in text

    def test_pipes_in_cells_are_escaped(self):
        tree = AdTree("t", AdNode(id="a|b", label="x", kind=NodeKind.LEAF,
                                  leaf_attrs=LeafAttrs(0.5, 1, 5, 0.5)))
        text = render_comparison(compare_tree(tree), ReportOptions())
        assert "a\\|b" in text


class TestCsv:
    def test_crlf_and_column_count(self, iot_rows):
        text = render_comparison(iot_rows, ReportOptions(format=ReportFormat.CSV))
        assert "\r\n" in text
        lines = text.split("\r\n")
        assert lines[-1] == ""
        rows = [line for line in lines if line]
        assert len(rows) == 1 + len(iot_rows)
        assert rows[0].split(",")[0] == "Threat Code"

    def test_csv_never_embeds_a_summary(self, iot_rows):
        text = render_comparison(iot_rows, ReportOptions(format=ReportFormat.CSV),
                                 summary=summarize(iot_rows))
        assert "Summary" not in text and "reduction:" not in text

    def test_cells_with_commas_are_quoted(self):
        tree = AdTree("t", AdNode(id="a,b", label="x", kind=NodeKind.LEAF,
                                  leaf_attrs=LeafAttrs(0.5, 1, 5, 0.5)))
        text = render_comparison(compare_tree(tree), ReportOptions(format=ReportFormat.CSV))
        assert '"a,b"' in text


class TestJsonReport:
    def test_document_shape(self, iot_rows):
        doc = json.loads(render_comparison(iot_rows, ReportOptions(format=ReportFormat.JSON),
                                           summary=summarize(iot_rows)))
        assert doc["report"] == "comparison"
        assert doc["decimals"] == 2
        assert doc["columns"] == list(COMPARISON_COLUMNS)
        assert len(doc["rows"]) == len(iot_rows)
        assert doc["summary"]["persistent_threat"] is True
        assert doc["summary"]["root_reduction"] == pytest.approx(2.0, abs=1e-9)

    def test_rows_carry_full_precision_and_display(self, iot_rows):
        doc = json.loads(render_comparison(iot_rows, ReportOptions(format=ReportFormat.JSON)))
        by_node = {r["node"]: r for r in doc["rows"]}
        row = by_node["O_A.4"]
        assert row["inherent"]["risk"] == pytest.approx(3.8461538461538463, abs=1e-9)
        assert row["display"][6] == "3.85"
        assert row["kind"] == "Or"
        assert row["is_root"] is False
        source = {r.node_id: r for r in iot_rows}["O_A.4"]
        assert row["inherent"]["probability"] == source.inherent.probability.value
        assert row["residual"]["risk"] == source.residual.risk

    def test_display_matches_cell_strings(self, iot_rows):
        opts = ReportOptions(format=ReportFormat.JSON)
        doc = json.loads(render_comparison(iot_rows, opts))
        for row_obj, row in zip(doc["rows"], iot_rows):
            assert row_obj["display"] == comparison_cells(row, opts)

    def test_bands_included_on_request(self, iot_rows):
        opts = ReportOptions(format=ReportFormat.JSON, include_bands=True)
        doc = json.loads(render_comparison(iot_rows, opts))
        row = doc["rows"][0]
        assert set(row["inherent_bands"]) == {"probability_band", "impact_band"}
        assert len(doc["columns"]) == len(COMPARISON_COLUMNS) + 4


class TestEvaluationReport:
    def test_markdown_shape(self, iot_tree):
        ev = evaluate(iot_tree, EvalMode.INHERENT)
        text = render_evaluation(ev, ReportOptions())
        lines = text.splitlines()
        assert lines[0].count("|") == len(EVALUATION_COLUMNS) + 1
        assert len(lines) == 2 + 22

    def test_json_mode_and_attrs(self, iot_tree):
        ev = evaluate(iot_tree, EvalMode.RESIDUAL)
        doc = json.loads(render_evaluation(ev, ReportOptions(format=ReportFormat.JSON)))
        assert doc["report"] == "evaluation"
        assert doc["mode"] == "Residual"
        by_node = {r["node"]: r for r in doc["rows"]}
        assert by_node["O_B.2"]["attrs"]["risk"] == 1.52
        assert by_node["O_B.2"]["control_code"] is None
        assert by_node["H_A.3"]["control_code"] == "C4"
        assert by_node["O_T"]["is_root"] is True

    def test_csv_shape(self, iot_tree):
        ev = evaluate(iot_tree, EvalMode.INHERENT)
        text = render_evaluation(ev, ReportOptions(format=ReportFormat.CSV))
        rows = [line for line in text.split("\r\n") if line]
        assert rows[0] == "Threat Code,Node,Cost,Impact,Skill,Probability,Risk"
        assert len(rows) == 23


class TestSummarize:
    def test_case_study_summary(self, iot_rows):
        summary = summarize(iot_rows)
        assert summary.max_leaf_reduction == pytest.approx(80.0, abs=1e-9)
        assert summary.root_reduction == pytest.approx(2.0, abs=1e-9)
        assert summary.persistent_threat_flag is True

    def test_threshold_is_configurable(self, iot_rows):
        assert summarize(iot_rows, persistent_threshold=1.0).persistent_threat_flag is False

    def test_missing_root(self, iot_rows):
        leaves_only = [r for r in iot_rows if not r.is_root]
        with pytest.raises(MissingRootError):
            summarize(leaves_only)

    def test_single_leaf_tree(self, minimal_tree):
        rows = compare_tree(minimal_tree)
        summary = summarize(rows)
        assert summary.max_leaf_reduction == summary.root_reduction == 0.0
        assert summary.persistent_threat_flag is True

    def test_summary_text_exact(self, iot_rows):
        text = render_summary_text(summarize(iot_rows))
        assert text == ("max leaf risk reduction: 80.0%\n"
                        "root risk reduction: 2.0%\n"
                        "persistent threat at root: yes\n")

    def test_summary_markdown_form(self):
        summary = Summary(max_leaf_reduction=50.0, root_reduction=25.0,
                          persistent_threat_flag=False)
        text = render_summary_text(summary, markdown=True)
        assert text.startswith("## Summary\n\n- ")
        assert "persistent threat at root: no" in text
