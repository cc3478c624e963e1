"""Core domain model: intentions, I-Trees, constraints, patterns, services.

Values are treated as immutable after construction; nothing in here mutates
its inputs.
"""
from __future__ import annotations

import re
import string
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .errors import InvalidTree, KindMismatch

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)
_WS_RE = re.compile(r"\s+")


def normalize_label(label: str) -> str:
    """Lowercase, strip punctuation, collapse whitespace."""
    out = label.translate(_PUNCT_TABLE).lower()
    return _WS_RE.sub(" ", out).strip()


class ConstraintKind(str, Enum):
    ENUMERATION = "Enumeration"
    BOOLEAN = "Boolean"
    INTERVAL = "Interval"


class DecompositionKind(str, Enum):
    AND = "AND"
    OR = "OR"


class Metric(str, Enum):
    COST = "Cost"
    TIME = "Time"
    QUALITY = "Quality"
    SATISFACTION = "Satisfaction"
    PROFIT = "Profit"
    RESOURCE_UTILIZATION = "ResourceUtilization"


class Direction(str, Enum):
    MINIMIZE = "Minimize"
    MAXIMIZE = "Maximize"


# Metrics whose natural direction is minimization.
_MINIMIZED = {Metric.COST, Metric.TIME}


class SupplyMode(str, Enum):
    RESERVED = "Reserved"
    ON_DEMAND = "OnDemand"
    SPOT = "Spot"


class ServiceLayer(str, Enum):
    ORGANIZATION = "Organization"
    INNER_DOMAIN = "InnerDomain"
    CROSS_DOMAIN = "CrossDomain"


class CooperativeKind(str, Enum):
    SYMBIOSIS = "Symbiosis"
    PARASITE = "Parasite"
    LOCATION_COMPLEMENTARITY = "LocationComplementarity"
    TEMPORAL_COMPLEMENTARITY = "TemporalComplementarity"


class GatewayKind(str, Enum):
    PARALLEL_SPLIT = "ParallelSplit"
    PARALLEL_JOIN = "ParallelJoin"
    EXCLUSIVE_SPLIT = "ExclusiveSplit"
    EXCLUSIVE_JOIN = "ExclusiveJoin"


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    unit: Optional[str] = None

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"interval lo {self.lo} > hi {self.hi}")

    @property
    def length(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class Constraint:
    name: str
    kind: ConstraintKind
    value: object  # frozenset[str] | bool | Interval

    def __post_init__(self):
        if not self.name.strip():
            raise ValueError("constraint name empty")
        object.__setattr__(self, "name", self.name.strip())
        if self.kind is ConstraintKind.ENUMERATION:
            vals = self.value
            if not isinstance(vals, frozenset):
                vals = frozenset(vals)
                object.__setattr__(self, "value", vals)
            if not vals:
                raise ValueError("enumeration constraint with empty value set")
        elif self.kind is ConstraintKind.BOOLEAN:
            if not isinstance(self.value, bool):
                raise ValueError("boolean constraint needs a bool value")
        elif self.kind is ConstraintKind.INTERVAL:
            if not isinstance(self.value, Interval):
                raise ValueError("interval constraint needs an Interval value")


def enum_constraint(name: str, values) -> Constraint:
    return Constraint(name, ConstraintKind.ENUMERATION, frozenset(values))


def bool_constraint(name: str, value: bool) -> Constraint:
    return Constraint(name, ConstraintKind.BOOLEAN, value)


def interval_constraint(name: str, lo: float, hi: float, unit: str | None = None) -> Constraint:
    return Constraint(name, ConstraintKind.INTERVAL, Interval(lo, hi, unit))


@dataclass(frozen=True)
class OptObjective:
    metric: Metric
    direction: Direction

    def __post_init__(self):
        natural = Direction.MINIMIZE if self.metric in _MINIMIZED else Direction.MAXIMIZE
        if self.direction is not natural:
            raise ValueError(f"{self.metric.value} must be {natural.value}d")


@dataclass(frozen=True)
class Intention:
    id: str
    label: str
    constraints: tuple[Constraint, ...] = ()
    opt_objective: Optional[OptObjective] = None

    def __post_init__(self):
        if not self.label.strip():
            raise ValueError(f"intention {self.id}: empty label")
        names = [c.name for c in self.constraints]
        if len(names) != len(set(names)):
            raise ValueError(f"intention {self.id}: duplicate constraint names")

    def constraint(self, name: str) -> Optional[Constraint]:
        for c in self.constraints:
            if c.name == name:
                return c
        return None


@dataclass(frozen=True)
class Decomposition:
    kind: DecompositionKind
    children: tuple[str, ...]


@dataclass
class ITree:
    root: str
    nodes: dict[str, Intention]
    decomposition: dict[str, Decomposition] = field(default_factory=dict)
    dependencies: frozenset[tuple[str, str]] = frozenset()
    owner: str = ""
    roles: frozenset[str] = frozenset()

    def children(self, node_id: str) -> tuple[str, ...]:
        dec = self.decomposition.get(node_id)
        return dec.children if dec else ()

    def kind(self, node_id: str) -> Optional[DecompositionKind]:
        dec = self.decomposition.get(node_id)
        return dec.kind if dec else None

    def labels(self) -> list[str]:
        return [n.label for n in self.nodes.values()]


@dataclass(frozen=True)
class Violation:
    node_id: str
    rule: str

    def __str__(self):
        return f"{self.rule}@{self.node_id}"


def validate_itree(tree: ITree) -> list[Violation]:
    """Check every structural invariant; violations are data, not faults."""
    out: list[Violation] = []
    if tree.root not in tree.nodes:
        out.append(Violation(tree.root, "missing-root"))
        return out

    parent_of: dict[str, str] = {}
    for parent, dec in tree.decomposition.items():
        if parent not in tree.nodes:
            out.append(Violation(parent, "unknown-parent"))
            continue
        if not dec.children:
            out.append(Violation(parent, "empty-decomposition"))
        for child in dec.children:
            if child not in tree.nodes:
                out.append(Violation(child, "unknown-child"))
                continue
            if child in parent_of:
                out.append(Violation(child, "multiple-parents"))
            else:
                parent_of[child] = parent

    if tree.root in parent_of:
        out.append(Violation(tree.root, "root-has-parent"))

    # reachability from root over decomposition edges
    seen = set()
    stack = [tree.root]
    while stack:
        cur = stack.pop()
        if cur in seen:
            out.append(Violation(cur, "cycle"))
            continue
        seen.add(cur)
        stack.extend(c for c in tree.children(cur) if c in tree.nodes)
    for node_id in tree.nodes:
        if node_id not in seen:
            out.append(Violation(node_id, "unreachable"))

    for frm, to in tree.dependencies:
        if frm not in tree.nodes or to not in tree.nodes:
            out.append(Violation(frm if frm not in tree.nodes else to, "dependency-unknown-node"))
        elif frm == to:
            out.append(Violation(frm, "dependency-self-loop"))
    return out


def covers(looser: Constraint, tighter: Constraint) -> bool:
    """True when `looser` admits every value `tighter` admits."""
    if looser.name != tighter.name or looser.kind != tighter.kind:
        raise KindMismatch(f"cannot compare {looser.name}/{looser.kind.value} with {tighter.name}/{tighter.kind.value}")
    if looser.kind is ConstraintKind.INTERVAL:
        return looser.value.lo <= tighter.value.lo and tighter.value.hi <= looser.value.hi
    if looser.kind is ConstraintKind.ENUMERATION:
        return looser.value >= tighter.value
    return looser.value == tighter.value


def constraint_similarity(a: Constraint, b: Constraint) -> float:
    """Jaccard-style similarity in [0, 1] between two same-name, same-kind constraints."""
    if a.name != b.name or a.kind != b.kind:
        raise KindMismatch(f"cannot compare {a.name}/{a.kind.value} with {b.name}/{b.kind.value}")
    if a.kind is ConstraintKind.ENUMERATION:
        return len(a.value & b.value) / len(a.value | b.value)
    if a.kind is ConstraintKind.BOOLEAN:
        return 1.0 if a.value == b.value else 0.0
    lo = max(a.value.lo, b.value.lo)
    hi = min(a.value.hi, b.value.hi)
    if lo > hi:
        return 0.0
    union = max(a.value.hi, b.value.hi) - min(a.value.lo, b.value.lo)
    if union == 0:
        return 1.0  # both degenerate and equal
    return (hi - lo) / union


def intention_covers(p: Intention, q: Intention) -> bool:
    """True when p is a looser-or-equal version of q (same label, covering constraints)."""
    if normalize_label(p.label) != normalize_label(q.label):
        return False
    for qc in q.constraints:
        pc = p.constraint(qc.name)
        if pc is None or pc.kind != qc.kind or not covers(pc, qc):
            return False
    return True


def _escape(label: str) -> str:
    return label.replace("\\", "\\\\").replace("$", "\\$").replace(" ", "\\ ")


def _encode(tree: ITree, node_id: str, with_kinds: bool) -> str:
    token = _escape(tree.nodes[node_id].label)
    kids = tree.children(node_id)
    if kids and with_kinds:
        token += "&" if tree.kind(node_id) is DecompositionKind.AND else "|"
    parts = sorted(_encode(tree, c, with_kinds) for c in kids)
    return " ".join([token] + parts) + "$"


def canonical_encode(tree: ITree, with_kinds: bool = False) -> str:
    """Pre-order encoding with "$" backtrack markers, children sorted canonically.

    Two trees get equal encodings iff they are isomorphic as labeled rooted
    trees. With `with_kinds` the AND/OR decomposition kind of internal nodes
    participates too (the form the pattern miners deduplicate on).
    """
    violations = validate_itree(tree)
    if violations:
        raise InvalidTree("; ".join(str(v) for v in violations))
    return _encode(tree, tree.root, with_kinds)


def subtree_encode(tree: ITree, node_id: str, with_kinds: bool = False) -> str:
    """Canonical encoding of the subtree rooted at `node_id` (no validation)."""
    return _encode(tree, node_id, with_kinds)


@dataclass(frozen=True)
class RpInfo:
    use_frequency: int
    domain: str = ""
    description: str = ""

    def __post_init__(self):
        if self.use_frequency < 0:
            raise ValueError("useFrequency must be non-negative")


@dataclass
class RequirementPattern:
    id: str
    info: RpInfo
    forest: list[ITree]

    def __post_init__(self):
        if not self.forest:
            raise ValueError(f"RP {self.id}: empty forest")
        for tree in self.forest:
            violations = validate_itree(tree)
            if violations:
                raise ValueError(f"RP {self.id}: invalid tree: {violations}")


def forest_encode(forest: list[ITree], with_kinds: bool = True) -> str:
    """Order-insensitive canonical encoding of an RP forest."""
    return " | ".join(sorted(canonical_encode(t, with_kinds=with_kinds) for t in forest))


@dataclass(frozen=True)
class QosVector:
    cost: float
    time: float
    availability: float
    rating: float

    def __post_init__(self):
        if self.cost < 0 or self.time < 0 or self.rating < 0:
            raise ValueError("QoS fields must be non-negative")
        if not 0.0 <= self.availability <= 1.0:
            raise ValueError("availability must be in [0,1]")
        if self.rating > 5:
            raise ValueError("rating must be in [0,5]")


@dataclass(frozen=True)
class ServiceSpec:
    id: str
    function: str
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    provider: str = ""
    user_group: str = ""
    qos: QosVector = QosVector(0, 0, 1.0, 0)
    supply_mode: SupplyMode = SupplyMode.ON_DEMAND
    layer: ServiceLayer = ServiceLayer.ORGANIZATION
    cooperative_rels: frozenset[tuple[str, CooperativeKind]] = frozenset()


@dataclass
class ProcessGraph:
    activities: dict[str, str]  # activity id -> serviceClass label
    edges: list[tuple[str, str]]
    gateways: dict[str, GatewayKind] = field(default_factory=dict)
    start: str = "start"
    end: str = "end"

    def successors(self, node_id: str) -> list[str]:
        return [b for a, b in self.edges if a == node_id]

    def node_ids(self) -> set[str]:
        return {self.start, self.end} | set(self.activities) | set(self.gateways)


@dataclass(frozen=True)
class SPInstance:
    binding: tuple[tuple[str, str], ...]  # (activity id, service id), sorted
    aggregate_qos: QosVector

    def binding_map(self) -> dict[str, str]:
        return dict(self.binding)


def make_instance(binding: dict[str, str], qos: QosVector) -> SPInstance:
    return SPInstance(tuple(sorted(binding.items())), qos)


@dataclass(frozen=True)
class SpInfo:
    description: str = ""
    domain: str = ""
    layer: ServiceLayer = ServiceLayer.INNER_DOMAIN


@dataclass
class ServicePattern:
    id: str
    info: SpInfo
    fr: str
    process: ProcessGraph
    qos: QosVector
    cons: list[Constraint]
    instances: list[SPInstance]
    support: int = 0
    verifying_degree: float = 0.0

    def __post_init__(self):
        if not self.instances:
            raise ValueError(f"SP {self.id}: needs at least one instance")
        if self.support < 0:
            raise ValueError(f"SP {self.id}: negative support")
        if not 0.0 <= self.verifying_degree <= 1.0:
            raise ValueError(f"SP {self.id}: verifyingDegree out of range")
        for inst in self.instances:
            if set(inst.binding_map()) != set(self.process.activities):
                raise ValueError(f"SP {self.id}: instance binding not total over activities")

    @property
    def granularity(self) -> int:
        return len(self.process.activities)


@dataclass(frozen=True)
class Context:
    user_class: str
    environment: str
    objective: Metric

    def key(self) -> str:
        return f"{self.user_class}|{self.environment}|{self.objective.value}"
