"""Attack/defense tree risk assessment.

Parse a small tree description language, compute inherent risk by
bottom-up attribute propagation, apply countermeasures for residual risk,
and render inherent-vs-residual comparison reports. The riskctl console
command fronts the same functionality.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .model import (
    AdNode,
    AdTree,
    AggregateCost,
    ControlKind,
    Countermeasure,
    DomainError,
    EvalMode,
    Impact,
    ImpactBand,
    LeafAttrs,
    LeafCost,
    NodeAttrs,
    NodeKind,
    Probability,
    ProbabilityBand,
    Skill,
    Stride,
    ThreatEntry,
    Violation,
    round_half_up,
    validate_tree,
)
from .dsl import (
    CatalogueResult,
    JsonError,
    JsonResult,
    ParseError,
    ParseResult,
    SourceSpan,
    from_json,
    parse_catalogue_file,
    parse_tree_file,
    serialize_tree,
    to_json,
    tokenize,
)
from .engine import (
    ComparisonRow,
    DegenerateWeightsError,
    EvaluatedTree,
    EvaluationError,
    InvalidTreeError,
    TreeMismatchError,
    WrongControlKindError,
    apply_impact_control,
    apply_probability_control,
    classify_impact,
    classify_probability,
    compare,
    compare_tree,
    evaluate,
    propagate_and,
    propagate_or,
)
from .catalogue import (
    CategoryCoverage,
    ControlLibrary,
    CoverageReport,
    ThreatCatalogue,
    bundled_controls,
    bundled_fixture_path,
    bundled_threats,
    cross_reference,
    lint_controls,
)
from .report import (
    MissingRootError,
    ReportFormat,
    ReportOptions,
    Summary,
    format_number,
    format_percent,
    render_comparison,
    render_evaluation,
    render_summary_text,
    summarize,
)

__all__ = [
    "__version__",
    # model
    "AdNode", "AdTree", "AggregateCost", "ControlKind", "Countermeasure",
    "DomainError", "EvalMode", "Impact", "ImpactBand", "LeafAttrs", "LeafCost",
    "NodeAttrs", "NodeKind", "Probability", "ProbabilityBand", "Skill", "Stride",
    "ThreatEntry", "Violation", "round_half_up", "validate_tree",
    # dsl
    "CatalogueResult", "JsonError", "JsonResult", "ParseError", "ParseResult",
    "SourceSpan", "from_json", "parse_catalogue_file", "parse_tree_file",
    "serialize_tree", "to_json", "tokenize",
    # engine
    "ComparisonRow", "DegenerateWeightsError", "EvaluatedTree", "EvaluationError",
    "InvalidTreeError", "TreeMismatchError", "WrongControlKindError",
    "apply_impact_control", "apply_probability_control", "classify_impact",
    "classify_probability", "compare", "compare_tree", "evaluate",
    "propagate_and", "propagate_or",
    # catalogue
    "CategoryCoverage", "ControlLibrary", "CoverageReport", "ThreatCatalogue",
    "bundled_controls", "bundled_fixture_path", "bundled_threats",
    "cross_reference", "lint_controls",
    # report
    "MissingRootError", "ReportFormat", "ReportOptions", "Summary",
    "format_number", "format_percent", "render_comparison", "render_evaluation",
    "render_summary_text", "summarize",
]
