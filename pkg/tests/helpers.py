"""Test utilities: seeded random tree generation and a naive reference evaluator.

The naive evaluator re-implements the propagation rules with plain
recursion, independently of adtrisk.engine, so the two can be checked
against each other. It deliberately repeats the same arithmetic expression
shapes (operand order included) so agreement can be asserted to 1e-12.
"""

from __future__ import annotations

import math
import random

from adtrisk import (
    AdNode,
    AdTree,
    ControlKind,
    Countermeasure,
    DegenerateWeightsError,
    EvalMode,
    LeafAttrs,
    NodeKind,
    Stride,
    ThreatEntry,
    evaluate,
)

SKILLS = (0.25, 0.5, 1.0, 1.25)

# strings that exercise escaping, comment markers and table delimiters
TRICKY_LABELS = (
    'he said "stop"',
    "back\\slash and \\\" both",
    "pipe | pipe",
    "hash # not a comment",
    "braces { } inside",
    "comma, semicolon; tab\there",
    "plain words",
)


def make_rng(seed: int) -> random.Random:
    return random.Random(seed)


def frac6(rng: random.Random, lo_millionths: int, hi_millionths: int) -> float:
    """A float with at most six fractional digits, as the tree syntax allows."""
    return rng.randint(lo_millionths, hi_millionths) / 10 ** 6


def naive_round_half_up(value: float, decimals: int) -> float:
    scale = 10.0 ** decimals
    rounded = math.floor(abs(value) * scale + 0.5 + 1e-9) / scale
    return -rounded if value < 0 else rounded


def random_controls(rng: random.Random, count: int) -> dict[str, Countermeasure]:
    out: dict[str, Countermeasure] = {}
    for k in range(count):
        code = f"K{k + 1}"
        kind = ControlKind.PROBABILITY if rng.random() < 0.7 else ControlKind.IMPACT
        effectiveness = None
        if kind is ControlKind.IMPACT or rng.random() < 0.3:
            effectiveness = frac6(rng, 0, 10 ** 6)
        out[code] = Countermeasure(
            code=code,
            name=f"generated control {k + 1}",
            kind=kind,
            # strictly below 1 so residual leaf probabilities stay positive
            # and OR cost aggregation cannot degenerate
            value=frac6(rng, 1, 10 ** 6 - 1),
            cost=rng.choice((1, 2, 3)),
            effectiveness=effectiveness,
            iso_sections=("1.1",) if rng.random() < 0.5 else (),
            gdpr_articles=("5",) if rng.random() < 0.5 else (),
        )
    return out


def random_threats(rng: random.Random, count: int) -> dict[str, ThreatEntry]:
    out: dict[str, ThreatEntry] = {}
    for k in range(count):
        code = f"T{k + 1}"
        if rng.random() < 0.25:
            out[code] = ThreatEntry(code, "description unavailable")
        else:
            out[code] = ThreatEntry(
                code,
                rng.choice(TRICKY_LABELS),
                asset=rng.choice(("Device", "Gateway", "")),
                stride=rng.choice(tuple(Stride)),
            )
    return out


def random_tree(rng: random.Random, *, max_depth: int = 4, max_fanout: int = 4,
                uniform_cost: int | None = None, controlled: bool = True,
                max_leaves: int | None = None, with_threats: bool = False,
                tricky_labels: bool = False) -> AdTree:
    """A structurally valid tree with in-domain leaf attributes.

    Leaf probabilities stay at or above 1e-6 so OR cost aggregation is
    always defined. uniform_cost pins every leaf cost to one value, which
    keeps the cost of any gate directly over leaves stable across modes
    (deeper gates can still shift, since subtree costs differ).
    """
    controls = random_controls(rng, rng.randint(1, 4)) if controlled else {}
    threats = random_threats(rng, rng.randint(1, 4)) if with_threats else {}
    control_codes = tuple(controls)
    threat_codes = tuple(threats)
    budget = [max_leaves if max_leaves is not None else 10 ** 9]
    counter = [0]

    def label(noun: str, idx: int) -> str:
        if tricky_labels and rng.random() < 0.5:
            return rng.choice(TRICKY_LABELS)
        return f"{noun} {idx}"

    def make_leaf() -> AdNode:
        counter[0] += 1
        budget[0] -= 1
        idx = counter[0]
        attrs = LeafAttrs(
            probability=frac6(rng, 1, 10 ** 6),
            cost=uniform_cost if uniform_cost is not None else rng.choice((1, 2, 3)),
            impact=rng.randint(1, 10),
            skill=rng.choice(SKILLS),
        )
        threat = rng.choice(threat_codes) if threat_codes and rng.random() < 0.7 else None
        control = rng.choice(control_codes) if control_codes and rng.random() < 0.7 else None
        return AdNode(id=f"N{idx}", label=label("step", idx), kind=NodeKind.LEAF,
                      leaf_attrs=attrs, threat_code=threat, countermeasure_code=control)

    def build(depth: int) -> AdNode:
        if depth >= max_depth or budget[0] <= 1 or rng.random() < 0.35:
            return make_leaf()
        counter[0] += 1
        idx = counter[0]
        kind = rng.choice((NodeKind.AND, NodeKind.OR))
        fanout = rng.randint(1, max_fanout) if rng.random() < 0.15 else rng.randint(2, max_fanout)
        children = []
        for _ in range(fanout):
            if budget[0] <= 0 and children:
                break
            children.append(build(depth + 1))
        return AdNode(id=f"N{idx}", label=label("goal", idx), kind=kind,
                      children=tuple(children))

    root = build(0)
    return AdTree(name=label("generated", rng.randint(1, 99)), root=root,
                  controls=controls, threats=threats)


def naive_evaluate(tree: AdTree, mode: EvalMode,
                   gate_decimals: int | None = 2) -> dict[str, tuple[float, float, float, float, float]]:
    """Reference evaluation: {node id: (prob, cost, impact, skill, risk)}."""
    out: dict[str, tuple[float, float, float, float, float]] = {}

    def visit(node: AdNode) -> tuple[float, float, float, float]:
        if node.kind is NodeKind.LEAF:
            a = node.leaf_attrs
            p, c, i, s = a.probability, float(a.cost), float(a.impact), a.skill
            if mode is EvalMode.RESIDUAL and node.countermeasure_code is not None:
                cm = tree.controls[node.countermeasure_code]
                final = cm.value / cm.cost
                if cm.kind is ControlKind.PROBABILITY:
                    p = min(max(p * (1.0 - final), 0.0), 1.0)
                else:
                    reduced = i * (i * cm.effectiveness) / (cm.cost * 10.0)
                    i = min(max(reduced, 0.0), i)
        else:
            parts = [visit(child) for child in node.children]
            n = len(parts)
            if node.kind is NodeKind.AND:
                p = math.prod(x[0] for x in parts)
                c = sum(x[1] for x in parts)
                i = (10.0 ** n - math.prod(10.0 - x[2] for x in parts)) / 10.0 ** (n - 1)
                i = min(max(i, 0.0), 10.0)
                s = max(x[3] for x in parts)
            else:
                p = 1.0 - math.prod(1.0 - x[0] for x in parts)
                weight = sum(x[0] for x in parts)
                c = sum(x[0] * x[1] for x in parts) / weight
                i = max(x[2] for x in parts)
                s = min(x[3] for x in parts)
            if gate_decimals is not None:
                p = naive_round_half_up(p, gate_decimals)
                c = naive_round_half_up(c, gate_decimals)
                i = naive_round_half_up(i, gate_decimals)
        out[node.id] = (p, c, i, s, p * s * i / c)
        return p, c, i, s

    visit(tree.root)
    return out


def evaluate_modes(tree: AdTree):
    """Evaluate a generated tree in both modes, tolerating degenerate draws.

    Gate quantisation can round a probability down to zero, which makes the
    cost weights of a disjunction above it degenerate. Random tree loops
    skip those draws rather than fail on a documented error condition.
    """
    try:
        inherent = evaluate(tree, EvalMode.INHERENT)
        residual = evaluate(tree, EvalMode.RESIDUAL)
    except DegenerateWeightsError:
        return None
    return inherent, residual
