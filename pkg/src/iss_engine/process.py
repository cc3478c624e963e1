"""Block-structured process graphs: parsing, canonical codes, QoS aggregation.

A well-formed ProcessGraph decomposes into a nested block tree of activities,
sequences, parallel blocks, and exclusive blocks. Everything downstream
(segment mining, QoS aggregation, composition) works on that block tree.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import MalformedProcess, UnboundActivity
from .model import GatewayKind, ProcessGraph, QosVector

_SPLITS = {GatewayKind.PARALLEL_SPLIT: GatewayKind.PARALLEL_JOIN,
           GatewayKind.EXCLUSIVE_SPLIT: GatewayKind.EXCLUSIVE_JOIN}
_JOINS = set(_SPLITS.values())


@dataclass(frozen=True)
class Activity:
    id: str
    service_class: str


@dataclass(frozen=True)
class Seq:
    items: tuple = ()


@dataclass(frozen=True)
class Par:
    branches: tuple = ()


@dataclass(frozen=True)
class Exc:
    branches: tuple = ()


Block = object  # Activity | Seq | Par | Exc


def parse_blocks(graph: ProcessGraph) -> Block:
    """Decompose a graph into its block tree; raises MalformedProcess otherwise."""
    succ: dict[str, list[str]] = {}
    for a, b in graph.edges:
        succ.setdefault(a, []).append(b)
    known = graph.node_ids()
    for a, b in graph.edges:
        if a not in known or b not in known:
            raise MalformedProcess(f"edge ({a}, {b}) references unknown node")
    if graph.start in graph.activities or graph.end in graph.activities:
        raise MalformedProcess("start/end ids collide with activities")

    visited: set[str] = set()

    def single_succ(node: str) -> str:
        out = succ.get(node, [])
        if len(out) != 1:
            raise MalformedProcess(f"node {node} must have exactly one outgoing edge, has {len(out)}")
        return out[0]

    def parse_run(node: str):
        """Consume nodes until the end event or an unmatched join; returns (Seq items, terminator)."""
        items = []
        while True:
            if node == graph.end:
                return items, node
            if node == graph.start:
                raise MalformedProcess("edge back into start")
            visited.add(node)
            if node in graph.activities:
                items.append(Activity(node, graph.activities[node]))
                node = single_succ(node)
            elif node in graph.gateways:
                kind = graph.gateways[node]
                if kind in _JOINS:
                    return items, node
                join_kind = _SPLITS[kind]
                outs = succ.get(node, [])
                if len(outs) < 2:
                    raise MalformedProcess(f"split {node} needs >= 2 branches")
                branches = []
                join = None
                for out in outs:
                    blk, term = parse_run(out)
                    if term == graph.end or term not in graph.gateways:
                        raise MalformedProcess(f"branch from {node} does not reach a join")
                    if graph.gateways[term] is not join_kind:
                        raise MalformedProcess(f"split {node} paired with join {term} of wrong kind")
                    if join is None:
                        join = term
                    elif join != term:
                        raise MalformedProcess(f"branches of {node} converge at different joins")
                    branches.append(Seq(tuple(blk)))
                visited.add(join)
                items.append(Par(tuple(branches)) if kind is GatewayKind.PARALLEL_SPLIT else Exc(tuple(branches)))
                node = single_succ(join)
            else:
                raise MalformedProcess(f"unknown node {node}")

    items, term = parse_run(single_succ(graph.start))
    if term != graph.end:
        raise MalformedProcess(f"dangling join {term}")
    stray = (set(graph.activities) | set(graph.gateways)) - visited
    if stray:
        raise MalformedProcess(f"nodes off every start-end path: {sorted(stray)}")
    return Seq(tuple(items))


def block_activities(block: Block) -> list[Activity]:
    if isinstance(block, Activity):
        return [block]
    out = []
    children = block.items if isinstance(block, Seq) else block.branches
    for c in children:
        out.extend(block_activities(c))
    return out


def block_code(block: Block) -> str:
    """Canonical code over service-class labels; parallel/exclusive branches sorted."""
    if isinstance(block, Activity):
        return f"t:{block.service_class}"
    if isinstance(block, Seq):
        if len(block.items) == 1:
            return block_code(block.items[0])
        return "(" + ">".join(block_code(i) for i in block.items) + ")"
    tag = "P" if isinstance(block, Par) else "X"
    return tag + "{" + ",".join(sorted(block_code(b) for b in block.branches)) + "}"


class _IdGen:
    def __init__(self, prefix: str):
        self.prefix = prefix
        self.n = 0

    def __call__(self) -> str:
        self.n += 1
        return f"{self.prefix}{self.n}"


def graph_from_block(block: Block, prefix: str = "n") -> ProcessGraph:
    """Materialize a block tree back into a ProcessGraph with generated ids."""
    activities: dict[str, str] = {}
    gateways: dict[str, GatewayKind] = {}
    edges: list[tuple[str, str]] = []
    gen = _IdGen(prefix)

    def emit(blk: Block, entry: str) -> str:
        """Wire blk after `entry`; returns the exit node id."""
        if isinstance(blk, Activity):
            aid = gen()
            activities[aid] = blk.service_class
            edges.append((entry, aid))
            return aid
        if isinstance(blk, Seq):
            cur = entry
            for item in blk.items:
                cur = emit(item, cur)
            return cur
        split_kind = GatewayKind.PARALLEL_SPLIT if isinstance(blk, Par) else GatewayKind.EXCLUSIVE_SPLIT
        join_kind = _SPLITS[split_kind]
        split, join = gen(), gen()
        gateways[split] = split_kind
        gateways[join] = join_kind
        edges.append((entry, split))
        for branch in blk.branches:
            exit_node = emit(branch, split)
            if exit_node == split:  # empty branch
                raise MalformedProcess("empty branch in block")
            edges.append((exit_node, join))
        return join

    exit_node = emit(block, "start")
    edges.append((exit_node, "end"))
    return ProcessGraph(activities=activities, edges=edges, gateways=gateways)


@dataclass
class _Agg:
    cost: float
    time: float
    availability: float


def aggregate_qos(graph: ProcessGraph, qos_of: dict[str, QosVector]) -> QosVector:
    """Sequence: sum cost/time; parallel: max time; exclusive: worst case;
    availability multiplies along executed paths; rating is the activity-weighted mean."""
    block = parse_blocks(graph)
    for aid in graph.activities:
        if aid not in qos_of:
            raise UnboundActivity(f"activity {aid} has no bound service")

    def agg(blk: Block) -> _Agg:
        if isinstance(blk, Activity):
            q = qos_of[blk.id]
            return _Agg(q.cost, q.time, q.availability)
        if isinstance(blk, Seq):
            acc = _Agg(0.0, 0.0, 1.0)
            for item in blk.items:
                a = agg(item)
                acc.cost += a.cost
                acc.time += a.time
                acc.availability *= a.availability
            return acc
        parts = [agg(b) for b in blk.branches]
        if isinstance(blk, Par):
            return _Agg(sum(p.cost for p in parts),
                        max(p.time for p in parts),
                        _prod(p.availability for p in parts))
        # exclusive: conservative worst case on every axis
        return _Agg(max(p.cost for p in parts),
                    max(p.time for p in parts),
                    min(p.availability for p in parts))

    total = agg(block)
    acts = list(graph.activities)
    rating = sum(qos_of[a].rating for a in acts) / len(acts) if acts else 0.0
    return QosVector(total.cost, total.time, total.availability, rating)


def _prod(xs) -> float:
    out = 1.0
    for x in xs:
        out *= x
    return out
