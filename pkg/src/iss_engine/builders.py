"""Small helpers for constructing I-Trees and processes by hand.

Used by fixtures and tests; nothing here is required at run time by the
mining or construction code.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    Constraint,
    Decomposition,
    DecompositionKind,
    GatewayKind,
    Intention,
    ITree,
    OptObjective,
    ProcessGraph,
    normalize_label,
)


@dataclass
class Node:
    label: str
    children: list["Node"] = field(default_factory=list)
    kind: DecompositionKind = DecompositionKind.AND
    constraints: tuple[Constraint, ...] = ()
    objective: OptObjective | None = None


def node(label: str, *children: Node, kind: str = "AND", cons=(), obj: OptObjective | None = None) -> Node:
    return Node(label, list(children), DecompositionKind(kind), tuple(cons), obj)


def build_tree(root: Node, owner: str = "", dependencies=(), roles=()) -> ITree:
    """Assign ids from normalized labels (deduplicated) and assemble an ITree."""
    nodes: dict[str, Intention] = {}
    decomposition: dict[str, Decomposition] = {}
    used: dict[str, int] = {}

    def fresh_id(label: str) -> str:
        base = normalize_label(label).replace(" ", "-") or "node"
        n = used.get(base, 0)
        used[base] = n + 1
        return base if n == 0 else f"{base}-{n}"

    def walk(n: Node) -> str:
        nid = fresh_id(n.label)
        nodes[nid] = Intention(nid, n.label, n.constraints, n.objective)
        if n.children:
            decomposition[nid] = Decomposition(n.kind, tuple(walk(c) for c in n.children))
        return nid

    root_id = walk(root)
    return ITree(
        root=root_id,
        nodes=nodes,
        decomposition=decomposition,
        dependencies=frozenset(dependencies),
        owner=owner,
        roles=frozenset(roles),
    )


def sequence_process(classes: list[str], prefix: str = "a") -> ProcessGraph:
    """start -> a0 -> a1 -> ... -> end"""
    activities = {f"{prefix}{i}": cls for i, cls in enumerate(classes)}
    ids = list(activities)
    edges = [("start", ids[0])] if ids else [("start", "end")]
    for a, b in zip(ids, ids[1:]):
        edges.append((a, b))
    if ids:
        edges.append((ids[-1], "end"))
    return ProcessGraph(activities=activities, edges=edges)


def parallel_process(branches: list[list[str]], prefix: str = "a") -> ProcessGraph:
    """start -> split -> (sequential branches) -> join -> end"""
    activities: dict[str, str] = {}
    edges: list[tuple[str, str]] = [("start", "split")]
    gateways = {"split": GatewayKind.PARALLEL_SPLIT, "join": GatewayKind.PARALLEL_JOIN}
    n = 0
    for branch in branches:
        prev = "split"
        for cls in branch:
            aid = f"{prefix}{n}"
            n += 1
            activities[aid] = cls
            edges.append((prev, aid))
            prev = aid
        edges.append((prev, "join"))
    edges.append(("join", "end"))
    return ProcessGraph(activities=activities, edges=edges, gateways=gateways)
