"""Threat catalogue and control library management.

Holds the bundled STRIDE threat catalogue and the ISO 27001/GDPR-aligned
probability control library used by the IoT case study, plus linting for
control data and coverage cross-referencing between a tree and its
catalogues.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterator, Mapping

from .model import (
    AdTree,
    ControlKind,
    Countermeasure,
    Stride,
    ThreatEntry,
    Violation,
)

FINAL_VALUE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ControlLibrary:
    """A code-keyed set of countermeasures."""

    controls: Mapping[str, Countermeasure]

    @classmethod
    def of(cls, *controls: Countermeasure) -> "ControlLibrary":
        by_code: dict[str, Countermeasure] = {}
        for cm in controls:
            if cm.code in by_code:
                raise ValueError(f"duplicate control code {cm.code!r}")
            by_code[cm.code] = cm
        return cls(controls=by_code)

    def __iter__(self) -> Iterator[Countermeasure]:
        return iter(self.controls.values())

    def __len__(self) -> int:
        return len(self.controls)

    def __getitem__(self, code: str) -> Countermeasure:
        return self.controls[code]


@dataclass(frozen=True)
class ThreatCatalogue:
    """A code-keyed set of threat entries."""

    threats: Mapping[str, ThreatEntry]

    @classmethod
    def of(cls, *threats: ThreatEntry) -> "ThreatCatalogue":
        by_code: dict[str, ThreatEntry] = {}
        for entry in threats:
            if entry.code in by_code:
                raise ValueError(f"duplicate threat code {entry.code!r}")
            by_code[entry.code] = entry
        return cls(threats=by_code)

    def __iter__(self) -> Iterator[ThreatEntry]:
        return iter(self.threats.values())

    def __len__(self) -> int:
        return len(self.threats)

    def __getitem__(self, code: str) -> ThreatEntry:
        return self.threats[code]

    def stubs(self) -> tuple[ThreatEntry, ...]:
        return tuple(t for t in self if t.is_stub)


def lint_controls(lib: ControlLibrary) -> list[Violation]:
    """Check control data for internal consistency.

    FinalValueMismatch findings are errors: the source restated a final
    value that is not value/cost. The Missing*Ref rules are advisory;
    command-line lint prints them as warnings without failing.
    """
    findings: list[Violation] = []
    for cm in lib:
        if cm.declared_final is not None and \
                abs(cm.declared_final - cm.final_value) > FINAL_VALUE_TOLERANCE:
            findings.append(Violation(cm.code, "FinalValueMismatch",
                                      f"declared final value {cm.declared_final!r} "
                                      f"but value/cost = {cm.final_value!r}"))
        if not cm.iso_sections:
            findings.append(Violation(cm.code, "MissingIsoRef",
                                      "no ISO 27001 section referenced"))
        if not cm.gdpr_articles:
            findings.append(Violation(cm.code, "MissingGdprRef",
                                      "no GDPR article referenced"))
    return findings


LINT_WARNING_RULES = frozenset({"MissingIsoRef", "MissingGdprRef"})


@dataclass(frozen=True)
class CategoryCoverage:
    """Leaves referencing one STRIDE category, split by control status."""

    category: Stride | None
    leaves: tuple[str, ...]
    controlled: tuple[str, ...]
    uncontrolled: tuple[str, ...]

    @property
    def count(self) -> int:
        return len(self.leaves)


@dataclass(frozen=True)
class CoverageReport:
    """How a tree's leaves map onto its catalogues.

    categories holds one entry per STRIDE category (zeros included, enum
    order); uncategorized collects leaves whose threat code resolves to a
    stub entry with no category. Unreferenced lists preserve catalogue
    declaration order.
    """

    categories: tuple[CategoryCoverage, ...]
    uncategorized: CategoryCoverage
    leaves_without_threat: tuple[str, ...]
    unreferenced_threats: tuple[str, ...]
    unreferenced_controls: tuple[str, ...]

    def category(self, stride: Stride) -> CategoryCoverage:
        for cov in self.categories:
            if cov.category is stride:
                return cov
        raise KeyError(stride)


def cross_reference(tree: AdTree) -> CoverageReport:
    """Cross-tabulate a tree's leaves against its threat/control catalogues."""
    buckets: dict[Stride | None, list[tuple[str, bool]]] = {s: [] for s in Stride}
    buckets[None] = []
    leaves_without_threat: list[str] = []
    used_threats: set[str] = set()
    used_controls: set[str] = set()

    for node in tree.walk():
        if not node.is_leaf:
            continue
        if node.countermeasure_code is not None:
            used_controls.add(node.countermeasure_code)
        if node.threat_code is None:
            leaves_without_threat.append(node.id)
            continue
        used_threats.add(node.threat_code)
        entry = tree.threats.get(node.threat_code)
        stride = entry.stride if entry is not None else None
        buckets[stride].append((node.id, node.countermeasure_code is not None))

    def coverage(category: Stride | None) -> CategoryCoverage:
        rows = buckets[category]
        return CategoryCoverage(
            category=category,
            leaves=tuple(node_id for node_id, _ in rows),
            controlled=tuple(node_id for node_id, has_cm in rows if has_cm),
            uncontrolled=tuple(node_id for node_id, has_cm in rows if not has_cm),
        )

    return CoverageReport(
        categories=tuple(coverage(s) for s in Stride),
        uncategorized=coverage(None),
        leaves_without_threat=tuple(leaves_without_threat),
        unreferenced_threats=tuple(code for code in tree.threats if code not in used_threats),
        unreferenced_controls=tuple(code for code in tree.controls if code not in used_controls),
    )


def catalogue_only_coverage(controls: Mapping[str, Countermeasure],
                            threats: Mapping[str, ThreatEntry]) -> CoverageReport:
    """Coverage for a catalogue with no tree: every entry is unreferenced."""
    empty = CategoryCoverage(category=None, leaves=(), controlled=(), uncontrolled=())
    return CoverageReport(
        categories=tuple(CategoryCoverage(category=s, leaves=(), controlled=(), uncontrolled=())
                         for s in Stride),
        uncategorized=empty,
        leaves_without_threat=(),
        unreferenced_threats=tuple(threats),
        unreferenced_controls=tuple(controls),
    )


# bundled data -------------------------------------------------------------

_OPEN_PORTS = "Private information exposed to the Internet through open ports."
_DEFAULT_PASSWORD = "Non-password protected interfaces, or default password used."


def bundled_controls() -> ControlLibrary:
    """The three probability controls of the IoT case study.

    Final values (value over cost) restate the source data and are checked
    by lint_controls: C3 0.40, C4 0.80, C5 0.75.
    """
    return ControlLibrary.of(
        Countermeasure(
            code="C3",
            name="Establish standards for secure configuration, development and updating of systems.",
            kind=ControlKind.PROBABILITY, value=0.80, cost=2, declared_final=0.40,
            iso_sections=("14.1.3", "14.2.1", "14.2.2"), gdpr_articles=("49",),
        ),
        Countermeasure(
            code="C4",
            name="Establish controls for protection against malicious code.",
            kind=ControlKind.PROBABILITY, value=0.80, cost=1, declared_final=0.80,
            iso_sections=("12.2.1", "12.6.2"), gdpr_articles=("49",),
        ),
        Countermeasure(
            code="C5",
            name="Establish access control",
            kind=ControlKind.PROBABILITY, value=0.75, cost=1, declared_final=0.75,
            iso_sections=("9.1.1", "9.1.2"), gdpr_articles=("39", "64", "83"),
        ),
    )


def bundled_threats() -> ThreatCatalogue:
    """The IoT case-study threat catalogue.

    Thirteen fully described entries plus three code-only stubs (B9, B10,
    B12) that the case study's result table references without cataloguing;
    stubs carry no STRIDE category and a placeholder description.
    """
    stub = "description unavailable"
    return ThreatCatalogue.of(
        ThreatEntry("B1", "Eavesdropping the communication between the device and the field gateway.",
                    "Gateway", Stride.INFORMATION_DISCLOSURE, _OPEN_PORTS),
        ThreatEntry("B2", "Gaining access to sensitive data from log files.",
                    "Gateway", Stride.INFORMATION_DISCLOSURE, _OPEN_PORTS),
        ThreatEntry("B3", "Obtaining access to sensitive data by sniffing traffic from Mobile client.",
                    "Gateway", Stride.INFORMATION_DISCLOSURE, _OPEN_PORTS),
        ThreatEntry("B4", "Reversing weakly encrypted or hashed content.",
                    "Device", Stride.INFORMATION_DISCLOSURE, _DEFAULT_PASSWORD),
        ThreatEntry("B5", "Exploiting unused services in Gateway.",
                    "Gateway", Stride.ELEVATION_OF_PRIVILEGE, _OPEN_PORTS),
        ThreatEntry("B6", "Unauthorized access to privileged features on Device.",
                    "Device", Stride.ELEVATION_OF_PRIVILEGE,
                    "Remote control of devices installed on vehicles."),
        ThreatEntry("B7", "Unauthorized access to privileged features on Gateway.",
                    "Gateway", Stride.ELEVATION_OF_PRIVILEGE, _OPEN_PORTS),
        ThreatEntry("B8", "Executing unknown code on device.",
                    "Device", Stride.TAMPERING, "The device allowed to execute external code."),
        ThreatEntry("B9", stub),
        ThreatEntry("B10", stub),
        ThreatEntry("B11", "Tampering with devices and extract cryptographic key material from it.",
                    "Device", Stride.TAMPERING, _DEFAULT_PASSWORD),
        ThreatEntry("B12", stub),
        ThreatEntry("B13", "Unauthorized access to IoT Field Gateway to tamper with its OS.",
                    "Gateway", Stride.TAMPERING, _OPEN_PORTS),
        ThreatEntry("B14", "Spoofing a device to connect to field gateway.",
                    "Gateway", Stride.SPOOFING, _OPEN_PORTS),
        ThreatEntry("B15", "Gaining access to the field gateway by using default login credentials.",
                    "Gateway", Stride.SPOOFING, _OPEN_PORTS),
        ThreatEntry("B16", "Reusing authentication tokens of Device",
                    "Device", Stride.SPOOFING, _DEFAULT_PASSWORD),
    )


def bundled_fixture_path(name: str = "iot_case_study.adt") -> Path:
    """Filesystem path of a fixture shipped inside the package."""
    return Path(str(resources.files(__package__).joinpath("fixtures", name)))
