"""Core data model for attack/defense tree risk assessment.

Trees are built from AND/OR gates over leaves that carry four attack
attributes (probability, cost, impact, skill). Leaves may reference a
threat catalogue entry and a countermeasure from the control library.
Value types enforce their domains at construction; tree containers are
deliberately permissive so that freshly parsed input can be inspected,
with validate_tree() reporting every domain or structural breach as data.

All types are frozen and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping, Union

SKILL_LEVELS = (0.25, 0.5, 1.0, 1.25)
LEAF_COSTS = (1, 2, 3)


class DomainError(ValueError):
    """Raised when a value type is constructed outside its domain."""


def round_half_up(value: float, decimals: int) -> float:
    """Round to `decimals` places, ties away from zero.

    Decimal midpoints that land just under .5 as binary doubles (for
    example (1.22 + 1.13) / 2 storing as 1.17499...) are still treated
    as midpoints, so the result matches pencil-and-paper arithmetic.
    """
    scale = 10.0 ** decimals
    scaled = abs(value) * scale
    rounded = math.floor(scaled + 0.5 + 1e-9) / scale
    return -rounded if value < 0 else rounded


class NodeKind(str, Enum):
    """Role of a tree node."""

    LEAF = "Leaf"
    AND = "And"
    OR = "Or"


class EvalMode(str, Enum):
    """Evaluation mode: before or after countermeasures are applied."""

    INHERENT = "Inherent"
    RESIDUAL = "Residual"


class Stride(str, Enum):
    """Threat categorisation axis used by the threat catalogue."""

    SPOOFING = "Spoofing"
    TAMPERING = "Tampering"
    REPUDIATION = "Repudiation"
    INFORMATION_DISCLOSURE = "InformationDisclosure"
    DENIAL_OF_SERVICE = "DenialOfService"
    ELEVATION_OF_PRIVILEGE = "ElevationOfPrivilege"


class ControlKind(str, Enum):
    """Which leaf attribute a countermeasure reduces."""

    PROBABILITY = "ProbabilityControl"
    IMPACT = "ImpactControl"


class ProbabilityBand(str, Enum):
    UNLIKELY = "Unlikely"
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"
    CERTAIN = "Certain"


class ImpactBand(str, Enum):
    MINOR = "Minor"
    MODERATE = "Moderate"
    SEVERE = "Severe"
    CATASTROPHIC = "Catastrophic"


@dataclass(frozen=True)
class Probability:
    """A probability in [0, 1]."""

    value: float

    def __post_init__(self) -> None:
        if not (isinstance(self.value, (int, float)) and 0.0 <= self.value <= 1.0):
            raise DomainError(f"probability must be in [0, 1], got {self.value!r}")


@dataclass(frozen=True)
class LeafCost:
    """Attack cost at a leaf: the discrete scale 1, 2 or 3."""

    value: int

    def __post_init__(self) -> None:
        if not (isinstance(self.value, (int, float)) and self.value in LEAF_COSTS):
            raise DomainError(f"leaf cost must be one of {LEAF_COSTS}, got {self.value!r}")
        object.__setattr__(self, "value", int(self.value))


@dataclass(frozen=True)
class AggregateCost:
    """Attack cost at a gate: a non-negative real from weighted aggregation."""

    value: float

    def __post_init__(self) -> None:
        if not (isinstance(self.value, (int, float)) and self.value >= 0.0 and math.isfinite(self.value)):
            raise DomainError(f"aggregate cost must be a finite non-negative real, got {self.value!r}")


@dataclass(frozen=True)
class Impact:
    """An impact magnitude in [0, 10]; integers 1..10 at leaves."""

    value: float

    def __post_init__(self) -> None:
        if not (isinstance(self.value, (int, float)) and 0.0 <= self.value <= 10.0):
            raise DomainError(f"impact must be in [0, 10], got {self.value!r}")


@dataclass(frozen=True)
class Skill:
    """Attacker skill weight: one of the four discrete levels."""

    value: float

    def __post_init__(self) -> None:
        if self.value not in SKILL_LEVELS:
            raise DomainError(f"skill must be one of {SKILL_LEVELS}, got {self.value!r}")
        object.__setattr__(self, "value", float(self.value))


Cost = Union[LeafCost, AggregateCost]


@dataclass(frozen=True)
class NodeAttrs:
    """The four propagated attributes of a node plus its derived risk.

    Risk is probability * skill * impact / cost, computed at construction,
    so a NodeAttrs can never carry a risk inconsistent with its attributes.
    """

    probability: Probability
    cost: Cost
    impact: Impact
    skill: Skill
    risk: float = field(init=False)

    def __post_init__(self) -> None:
        if self.cost.value <= 0:
            raise DomainError("cost must be positive to derive risk")
        risk = self.probability.value * self.skill.value * self.impact.value / self.cost.value
        object.__setattr__(self, "risk", risk)

    @classmethod
    def from_values(cls, probability: float, cost: float, impact: float,
                    skill: float, *, leaf: bool) -> "NodeAttrs":
        cost_type: Cost = LeafCost(cost) if leaf else AggregateCost(cost)  # type: ignore[arg-type]
        return cls(Probability(probability), cost_type, Impact(impact), Skill(skill))


@dataclass(frozen=True)
class LeafAttrs:
    """Raw leaf attributes as parsed, before domain validation.

    Kept as plain numbers so that out-of-domain input (say cost 4) can be
    represented and reported by validate_tree instead of crashing the parse.
    """

    probability: float
    cost: float
    impact: float
    skill: float


@dataclass(frozen=True)
class ThreatEntry:
    """A threat catalogue row; stubs carry only a code and placeholder text."""

    code: str
    description: str
    asset: str = ""
    stride: Stride | None = None
    vulnerability: str = ""

    @property
    def is_stub(self) -> bool:
        return self.stride is None


@dataclass(frozen=True)
class Countermeasure:
    """A control library entry.

    The applied strength is final_value = value / cost, always in (0, 1].
    declared_final is an optional value restated by the source document;
    the catalogue linter flags it when it disagrees with value / cost.
    """

    code: str
    name: str
    kind: ControlKind
    value: float
    cost: int
    effectiveness: float | None = None
    iso_sections: tuple[str, ...] = ()
    gdpr_articles: tuple[str, ...] = ()
    declared_final: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.value <= 1.0:
            raise DomainError(f"control {self.code}: value must be in (0, 1], got {self.value!r}")
        if self.cost not in LEAF_COSTS:
            raise DomainError(f"control {self.code}: cost must be one of {LEAF_COSTS}, got {self.cost!r}")
        if self.kind is ControlKind.IMPACT and self.effectiveness is None:
            raise DomainError(f"control {self.code}: impact controls require an effectiveness")
        if self.effectiveness is not None and not 0.0 <= self.effectiveness <= 1.0:
            raise DomainError(f"control {self.code}: effectiveness must be in [0, 1], got {self.effectiveness!r}")

    @property
    def final_value(self) -> float:
        """Strength actually applied at a leaf: declared value over control cost."""
        return self.value / self.cost


@dataclass(frozen=True)
class AdNode:
    """One attack/defense tree node.

    Structural invariants (leaf has attrs and no children, gates the
    reverse, ids unique) are checked by validate_tree, not the constructor,
    so parsed-but-broken trees remain representable.
    """

    id: str
    label: str
    kind: NodeKind
    children: tuple["AdNode", ...] = ()
    leaf_attrs: LeafAttrs | None = None
    threat_code: str | None = None
    countermeasure_code: str | None = None

    @property
    def is_leaf(self) -> bool:
        return self.kind is NodeKind.LEAF

    def walk(self) -> Iterator["AdNode"]:
        """Yield this node and all descendants, depth first, parents first."""
        yield self
        for child in self.children:
            yield from child.walk()

    def walk_postorder(self) -> Iterator["AdNode"]:
        """Yield all descendants and this node, children before parents."""
        for child in self.children:
            yield from child.walk_postorder()
        yield self


@dataclass(frozen=True)
class AdTree:
    """A named tree plus its attached catalogues."""

    name: str
    root: AdNode
    controls: Mapping[str, Countermeasure] = field(default_factory=dict)
    threats: Mapping[str, ThreatEntry] = field(default_factory=dict)

    def walk(self) -> Iterator[AdNode]:
        return self.root.walk()

    def node(self, node_id: str) -> AdNode:
        for n in self.walk():
            if n.id == node_id:
                return n
        raise KeyError(node_id)


@dataclass(frozen=True)
class Violation:
    """One validation finding: where, which rule, and a readable message."""

    node_id: str
    rule: str
    message: str


def _is_integral(x: float) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x) and float(x).is_integer()


def validate_tree(tree: AdTree) -> list[Violation]:
    """Check every structural and value-domain rule, returning findings as data.

    An empty list means the tree satisfies the full model contract and can
    be evaluated. Findings carry the offending node id and a stable rule
    name (for example LeafCostDomain, EmptyGate) for diagnostics.
    """
    violations: list[Violation] = []
    seen: set[str] = set()

    for node in tree.walk():
        if node.id in seen:
            violations.append(Violation(node.id, "DuplicateId", f"node id {node.id!r} declared more than once"))
            continue
        seen.add(node.id)

        if node.is_leaf:
            if node.children:
                violations.append(Violation(node.id, "LeafChildren", "leaf nodes cannot have children"))
            a = node.leaf_attrs
            if a is None:
                violations.append(Violation(node.id, "MissingLeafAttrs",
                                            "leaf must declare prob, cost, impact and skill"))
            else:
                if not (math.isfinite(a.probability) and 0.0 <= a.probability <= 1.0):
                    violations.append(Violation(node.id, "ProbabilityDomain",
                                                f"leaf probability must be in [0, 1], got {a.probability!r}"))
                if not (_is_integral(a.cost) and int(a.cost) in LEAF_COSTS):
                    violations.append(Violation(node.id, "LeafCostDomain",
                                                f"leaf cost must be 1, 2 or 3, got {a.cost!r}"))
                if not (_is_integral(a.impact) and 1 <= a.impact <= 10):
                    violations.append(Violation(node.id, "LeafImpactDomain",
                                                f"leaf impact must be an integer in [1, 10], got {a.impact!r}"))
                if a.skill not in SKILL_LEVELS:
                    violations.append(Violation(node.id, "SkillDomain",
                                                f"leaf skill must be one of {SKILL_LEVELS}, got {a.skill!r}"))
            if node.threat_code is not None and node.threat_code not in tree.threats:
                violations.append(Violation(node.id, "UnresolvedThreat",
                                            f"threat code {node.threat_code!r} is not in the threat catalogue"))
            if node.countermeasure_code is not None and node.countermeasure_code not in tree.controls:
                violations.append(Violation(node.id, "UnresolvedControl",
                                            f"control code {node.countermeasure_code!r} is not in the control library"))
        else:
            if not node.children:
                violations.append(Violation(node.id, "EmptyGate",
                                            f"{node.kind.value} gate must have at least one child"))
            if node.leaf_attrs is not None:
                violations.append(Violation(node.id, "GateAttrs", "gates cannot declare leaf attributes"))
            if node.threat_code is not None:
                violations.append(Violation(node.id, "ThreatOnGate", "threat codes attach to leaves only"))
            if node.countermeasure_code is not None:
                violations.append(Violation(node.id, "ControlOnGate", "countermeasures attach to leaves only"))

    return violations
