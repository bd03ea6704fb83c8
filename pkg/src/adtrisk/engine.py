"""Bottom-up risk evaluation over attack/defense trees.

Each node carries four attributes (probability, cost, impact, skill) whose
product/ratio yields risk. Leaves declare theirs; gates aggregate from
children:

    AND: prob = product,  cost = sum,  impact = joint scale-up,  skill = max
    OR:  prob = noisy-or, cost = probability-weighted mean, impact = max,
         skill = min

Residual evaluation first reduces a controlled leaf's probability or
impact, then propagates exactly as before; skill and leaf cost are never
touched by countermeasures.

Gate attributes are snapped to two decimals (half-up) as they are computed,
mirroring how assessments are worked through by hand on printed tables: a
gate's risk derives from its rounded attributes and parents aggregate the
rounded values. Pass gate_decimals=None to evaluate in full precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .model import (
    AdTree,
    AggregateCost,
    ControlKind,
    Countermeasure,
    EvalMode,
    Impact,
    ImpactBand,
    NodeAttrs,
    NodeKind,
    Probability,
    ProbabilityBand,
    Skill,
    Violation,
    round_half_up,
    validate_tree,
)


class EvaluationError(Exception):
    """Base for everything evaluate() and compare() can raise."""


class InvalidTreeError(EvaluationError):
    """The tree fails validation and cannot be evaluated."""

    def __init__(self, violations: Sequence[Violation]):
        self.violations = tuple(violations)
        first = f": {violations[0].message}" if violations else ""
        super().__init__(f"tree has {len(violations)} validation finding(s){first}")


class DegenerateWeightsError(EvaluationError):
    """OR cost aggregation is undefined when every child probability is zero."""

    def __init__(self, node_id: str | None = None):
        self.node_id = node_id
        where = f" at node {node_id!r}" if node_id else ""
        super().__init__(f"cannot aggregate cost{where}: child probabilities sum to zero")


class WrongControlKindError(EvaluationError):
    """A countermeasure was applied to the attribute it does not reduce."""


class TreeMismatchError(EvaluationError):
    """compare() was given evaluations of different trees."""


def classify_probability(p: float) -> ProbabilityBand:
    """Band a probability: Unlikely, Low, Medium, High or Certain."""
    if p < 0.05:
        return ProbabilityBand.UNLIKELY
    if p < 0.25:
        return ProbabilityBand.LOW
    if p < 0.75:
        return ProbabilityBand.MEDIUM
    if p < 0.99:
        return ProbabilityBand.HIGH
    return ProbabilityBand.CERTAIN


def classify_impact(value: float) -> ImpactBand:
    """Band an impact magnitude on the 1..10 scale.

    The bands are the literal 1-3 / 4-6 / 7-9 ranges; anything outside
    them (including fractional values between bands) is Catastrophic.
    """
    if 1 <= value <= 3:
        return ImpactBand.MINOR
    if 4 <= value <= 6:
        return ImpactBand.MODERATE
    if 7 <= value <= 9:
        return ImpactBand.SEVERE
    return ImpactBand.CATASTROPHIC


def propagate_and(children: Sequence[NodeAttrs]) -> NodeAttrs:
    """Aggregate child attributes across an AND gate, full precision.

    All children must succeed: probabilities multiply, costs add, the
    attacker needs the most demanding skill, and impacts reinforce on the
    shared 0..10 scale (the complement product keeps the result between
    the largest child impact and 10).
    """
    if not children:
        raise ValueError("propagate_and requires at least one child")
    prob = math.prod(c.probability.value for c in children)
    cost = sum(c.cost.value for c in children)
    n = len(children)
    impact = (10.0 ** n - math.prod(10.0 - c.impact.value for c in children)) / 10.0 ** (n - 1)
    impact = min(max(impact, 0.0), 10.0)
    skill = max(c.skill.value for c in children)
    return NodeAttrs(Probability(prob), AggregateCost(cost), Impact(impact), Skill(skill))


def propagate_or(children: Sequence[NodeAttrs]) -> NodeAttrs:
    """Aggregate child attributes across an OR gate, full precision.

    Any child may succeed: probability is the chance at least one does,
    cost is the probability-weighted mean of child costs (undefined when
    all probabilities are zero), impact is the worst child's, and skill
    is the least demanding entry path.
    """
    if not children:
        raise ValueError("propagate_or requires at least one child")
    prob = 1.0 - math.prod(1.0 - c.probability.value for c in children)
    weight = sum(c.probability.value for c in children)
    if weight == 0.0:
        raise DegenerateWeightsError()
    cost = sum(c.probability.value * c.cost.value for c in children) / weight
    impact = max(c.impact.value for c in children)
    skill = min(c.skill.value for c in children)
    return NodeAttrs(Probability(prob), AggregateCost(cost), Impact(impact), Skill(skill))


def apply_probability_control(leaf_prob: float, cm: Countermeasure) -> float:
    """Residual probability after a probability control: p x (1 - value/cost)."""
    if cm.kind is not ControlKind.PROBABILITY:
        raise WrongControlKindError(f"control {cm.code} does not reduce probability")
    residual = leaf_prob * (1.0 - cm.final_value)
    return min(max(residual, 0.0), 1.0)


def apply_impact_control(leaf_impact: float, cm: Countermeasure) -> float:
    """Residual impact after an impact control: imp x (imp x efc) / (cost x 10).

    Clamped into [0, leaf_impact] so a countermeasure can never make an
    impact worse, which the raw formula would allow for large values.
    """
    if cm.kind is not ControlKind.IMPACT:
        raise WrongControlKindError(f"control {cm.code} does not reduce impact")
    residual = leaf_impact * (leaf_impact * cm.effectiveness) / (cm.cost * 10.0)
    return min(max(residual, 0.0), leaf_impact)


def _quantize_gate(attrs: NodeAttrs, decimals: int | None) -> NodeAttrs:
    if decimals is None:
        return attrs
    # skill stays exact: it is a max/min over the discrete levels
    return NodeAttrs(Probability(round_half_up(attrs.probability.value, decimals)),
                     AggregateCost(round_half_up(attrs.cost.value, decimals)),
                     Impact(round_half_up(attrs.impact.value, decimals)),
                     attrs.skill)


@dataclass(frozen=True)
class EvaluatedTree:
    """Result of one evaluation pass: per-node attributes plus provenance."""

    tree: AdTree
    mode: EvalMode
    gate_decimals: int | None
    attrs: Mapping[str, NodeAttrs]

    @property
    def root_attrs(self) -> NodeAttrs:
        return self.attrs[self.tree.root.id]


def evaluate(tree: AdTree, mode: EvalMode = EvalMode.INHERENT, *,
             gate_decimals: int | None = 2) -> EvaluatedTree:
    """Compute attributes and risk for every node, children before parents.

    In Residual mode a leaf with an attached countermeasure has its
    probability or impact reduced before anything propagates. Gate
    attributes are snapped to gate_decimals places as described in the
    module docstring; None evaluates in pure full precision.

    Raises InvalidTreeError for trees that fail validate_tree and
    DegenerateWeightsError (tagged with the node id) from OR aggregation.
    """
    violations = validate_tree(tree)
    if violations:
        raise InvalidTreeError(violations)
    attrs: dict[str, NodeAttrs] = {}
    for node in tree.root.walk_postorder():
        if node.is_leaf:
            a = node.leaf_attrs
            prob, impact = a.probability, a.impact
            if mode is EvalMode.RESIDUAL and node.countermeasure_code is not None:
                cm = tree.controls[node.countermeasure_code]
                if cm.kind is ControlKind.PROBABILITY:
                    prob = apply_probability_control(prob, cm)
                else:
                    impact = apply_impact_control(impact, cm)
            attrs[node.id] = NodeAttrs.from_values(prob, a.cost, impact, a.skill, leaf=True)
        else:
            children = [attrs[c.id] for c in node.children]
            try:
                combined = propagate_and(children) if node.kind is NodeKind.AND \
                    else propagate_or(children)
            except DegenerateWeightsError:
                raise DegenerateWeightsError(node.id) from None
            attrs[node.id] = _quantize_gate(combined, gate_decimals)
    return EvaluatedTree(tree=tree, mode=mode, gate_decimals=gate_decimals, attrs=attrs)


@dataclass(frozen=True)
class ComparisonRow:
    """One node's inherent and residual results side by side."""

    node_id: str
    kind: NodeKind
    is_root: bool
    threat_code: str | None
    control_code: str | None
    control_final_value: float | None
    inherent: NodeAttrs
    residual: NodeAttrs
    reduction_percent: float


def compare(inherent: EvaluatedTree, residual: EvaluatedTree) -> tuple[ComparisonRow, ...]:
    """Pair up two evaluations node by node, children before parents.

    Rows come out in post-order (leaves before the gates above them) with
    reduction_percent = 100 x (inherent risk - residual risk) / inherent
    risk, taken as zero when the inherent risk is zero.
    """
    if inherent.mode is not EvalMode.INHERENT or residual.mode is not EvalMode.RESIDUAL:
        raise ValueError("compare expects (inherent, residual) evaluations in that order")
    if set(inherent.attrs) != set(residual.attrs):
        raise TreeMismatchError("evaluations cover different node sets")
    if inherent.tree != residual.tree:
        raise TreeMismatchError("evaluations come from different trees")
    tree = inherent.tree
    rows: list[ComparisonRow] = []
    for node in tree.root.walk_postorder():
        inh = inherent.attrs[node.id]
        res = residual.attrs[node.id]
        cm = tree.controls.get(node.countermeasure_code) if node.countermeasure_code else None
        if inh.risk == 0.0:
            reduction = 0.0
        else:
            reduction = 100.0 * (inh.risk - res.risk) / inh.risk
        rows.append(ComparisonRow(
            node_id=node.id,
            kind=node.kind,
            is_root=node.id == tree.root.id,
            threat_code=node.threat_code,
            control_code=node.countermeasure_code,
            control_final_value=cm.final_value if cm is not None else None,
            inherent=inh,
            residual=res,
            reduction_percent=reduction,
        ))
    return tuple(rows)


def compare_tree(tree: AdTree, *, gate_decimals: int | None = 2) -> tuple[ComparisonRow, ...]:
    """Evaluate both modes and compare, in one call."""
    return compare(evaluate(tree, EvalMode.INHERENT, gate_decimals=gate_decimals),
                   evaluate(tree, EvalMode.RESIDUAL, gate_decimals=gate_decimals))
