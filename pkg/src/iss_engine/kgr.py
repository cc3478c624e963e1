"""Knowledge graph of requirements: label co-occurrence counts feeding
prefix/context intention recommendation, plus RP-driven revision proposals."""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from enum import Enum

from .errors import EmptyCorpus, UnknownFocusNode
from .model import (
    Constraint,
    Decomposition,
    Intention,
    ITree,
    RequirementPattern,
    covers,
    normalize_label,
)
from .rp_selection import embed_tree, rp_covers, _label_matches


class EdgeKind(str, Enum):
    PARENT_CHILD = "ParentChild"
    SIBLING = "Sibling"


@dataclass
class KGRGraph:
    nodes: dict[str, int] = field(default_factory=dict)  # label -> tree frequency
    edges: dict[tuple[str, str, EdgeKind], int] = field(default_factory=dict)

    def edge_count(self, a: str, b: str, kind: EdgeKind) -> int:
        if kind is EdgeKind.SIBLING:
            a, b = sorted((a, b))
        return self.edges.get((a, b, kind), 0)


class Provenance(str, Enum):
    PREFIX_MATCH = "PrefixMatch"
    CONTEXT_EDGE = "ContextEdge"


@dataclass(frozen=True)
class Recommendation:
    label: str
    score: float
    provenance: Provenance


def build_kgr(corpus: list[ITree]) -> KGRGraph:
    """Per-tree presence counts for labels, parent/child pairs, and sibling pairs."""
    if not corpus:
        raise EmptyCorpus("cannot build a KGR from an empty corpus")
    graph = KGRGraph()
    for tree in corpus:
        labels = {normalize_label(n.label) for n in tree.nodes.values()}
        for lab in labels:
            graph.nodes[lab] = graph.nodes.get(lab, 0) + 1
        pc_pairs, sib_pairs = set(), set()
        for parent, dec in tree.decomposition.items():
            plab = normalize_label(tree.nodes[parent].label)
            child_labels = [normalize_label(tree.nodes[c].label) for c in dec.children]
            for cl in child_labels:
                pc_pairs.add((plab, cl))
            for i, a in enumerate(child_labels):
                for b in child_labels[i + 1:]:
                    if a != b:
                        sib_pairs.add(tuple(sorted((a, b))))
        for pair in pc_pairs:
            key = (*pair, EdgeKind.PARENT_CHILD)
            graph.edges[key] = graph.edges.get(key, 0) + 1
        for pair in sib_pairs:
            key = (*pair, EdgeKind.SIBLING)
            graph.edges[key] = graph.edges.get(key, 0) + 1
    return graph


DEFAULT_WEIGHTS = {"frequency": 0.3, "edge": 0.5, "prefix": 0.2}


def recommend(graph: KGRGraph, partial: ITree, focus_node: str, input_prefix: str,
              limit: int, weights: dict[str, float] | None = None) -> list[Recommendation]:
    """Prefix and context-edge candidates, scored by normalized frequency, edge
    strength, and prefix coverage. Labels already present in the tree are
    excluded; scores stay strictly positive (min-max normalization floors at 0.05)."""
    if focus_node not in partial.nodes:
        raise UnknownFocusNode(focus_node)
    w = weights or DEFAULT_WEIGHTS
    prefix = normalize_label(input_prefix)
    present = {normalize_label(n.label) for n in partial.nodes.values()}
    focus_label = normalize_label(partial.nodes[focus_node].label)
    child_labels = [normalize_label(partial.nodes[c].label)
                    for c in partial.children(focus_node)]

    def edge_strength(label: str) -> int:
        total = graph.edge_count(focus_label, label, EdgeKind.PARENT_CHILD)
        for cl in child_labels:
            total += graph.edge_count(cl, label, EdgeKind.SIBLING)
        return total

    candidates = []
    for label in graph.nodes:
        if label in present:
            continue
        from_prefix = label.startswith(prefix)
        strength = edge_strength(label)
        if not from_prefix and strength == 0:
            continue
        candidates.append((label, strength))

    if not candidates or limit <= 0:
        return []

    freqs = [graph.nodes[lab] for lab, _ in candidates]
    strengths = [s for _, s in candidates]
    out = []
    for (label, strength), freq in zip(candidates, freqs):
        prefix_ratio = len(prefix) / len(label) if prefix and label.startswith(prefix) else 0.0
        score = (w["frequency"] * _minmax(freq, freqs)
                 + w["edge"] * _minmax(strength, strengths)
                 + w["prefix"] * prefix_ratio)
        provenance = Provenance.CONTEXT_EDGE if strength > 0 else Provenance.PREFIX_MATCH
        out.append(Recommendation(label, score, provenance))
    out.sort(key=lambda r: (-r.score, r.label))
    return out[:limit]


def _minmax(x: float, xs: list) -> float:
    lo, hi = min(xs), max(xs)
    if hi == lo:
        return 1.0
    return 0.05 + 0.95 * (x - lo) / (hi - lo)


@dataclass
class Revision:
    tree: ITree
    rationale: str
    rp_id: str


def propose_revisions(partial: ITree, rp_repo: list[RequirementPattern],
                      k: int) -> list[Revision]:
    """Up to k single-edit revisions: relax one constraint toward a popular
    near-miss RP, or add the one intention completing a partial RP match."""
    out: list[Revision] = []
    for rp in sorted(rp_repo, key=lambda r: (-r.info.use_frequency, r.id)):
        if len(out) >= k:
            break
        if rp_covers(rp, partial):
            continue  # already fully usable; nothing to fix
        revision = _relax_constraint(partial, rp) or _complete_match(partial, rp)
        if revision is not None:
            out.append(revision)
    return out[:k]


def _relax_constraint(tree: ITree, rp: RequirementPattern) -> Revision | None:
    """If an RP tree embeds structurally but one user constraint is too tight,
    widen that constraint to the hull of both."""
    for ptree in rp.forest:
        m = embed_tree(ptree, tree, pred=_label_matches)
        if m is None:
            return None  # structural miss; not a constraint problem
        for pid, cid in m.items():
            rp_node = ptree.nodes[pid]
            user_node = tree.nodes[cid]
            for uc in user_node.constraints:
                rc = rp_node.constraint(uc.name)
                if rc is None or rc.kind != uc.kind or covers(rc, uc):
                    continue
                from .rp_mining import _hull

                hull = _hull([uc, rc])
                if hull is None or hull == uc:
                    continue
                revised = _replace_constraint(tree, cid, hull)
                return Revision(
                    revised,
                    f"relaxed '{uc.name}' on '{user_node.label}' to match pattern "
                    f"{rp.id} ({rp.info.description or 'popular pattern'})",
                    rp.id,
                )
    return None


def _complete_match(tree: ITree, rp: RequirementPattern) -> Revision | None:
    """If the RP matches all but one intention, propose adding the missing one."""
    missing: tuple[ITree, str] | None = None  # (forest tree, missing node id)
    anchors: list[str] = []  # tree node ids where other forest trees landed
    for ptree in rp.forest:
        m = embed_tree(ptree, tree, pred=_label_matches)
        if m is not None:
            anchors.extend(m.values())
            continue
        if missing is not None:
            return None  # more than one miss; too big for a single edit
        hole = _single_hole(ptree, tree)
        if hole is None:
            return None
        missing = (ptree, hole)
    if missing is None:
        return None
    ptree, hole_id = missing
    new_intention = ptree.nodes[hole_id]

    if len(ptree.nodes) == 1:
        # whole single-node forest tree is missing: attach beside an anchor, else under root
        parent = _parent_of(tree, anchors[0]) if anchors else tree.root
        parent = parent or tree.root
    else:
        reduced = _drop_node(ptree, hole_id)
        m = embed_tree(reduced, tree, pred=_label_matches)
        if m is None:
            return None
        parent = m[_parent_of(ptree, hole_id)]
    revised = _add_child(tree, parent, new_intention, ptree.kind(_parent_of(ptree, hole_id) or ptree.root))
    if revised is None:
        return None
    return Revision(
        revised,
        f"added intention '{new_intention.label}' to complete pattern "
        f"{rp.id} ({rp.info.description or 'popular pattern'})",
        rp.id,
    )


def _single_hole(ptree: ITree, tree: ITree) -> str | None:
    """The one leaf whose removal makes ptree embed, or the root for 1-node trees."""
    if len(ptree.nodes) == 1:
        return ptree.root
    for nid in ptree.nodes:
        if nid == ptree.root or ptree.children(nid):
            continue
        if embed_tree(_drop_node(ptree, nid), tree, pred=_label_matches) is not None:
            return nid
    return None


def _parent_of(tree: ITree, nid: str) -> str | None:
    for parent, dec in tree.decomposition.items():
        if nid in dec.children:
            return parent
    return None


def _drop_node(tree: ITree, nid: str) -> ITree:
    nodes = {k: v for k, v in tree.nodes.items() if k != nid}
    decomposition = {}
    for parent, dec in tree.decomposition.items():
        if parent == nid:
            continue
        children = tuple(c for c in dec.children if c != nid)
        if children:
            decomposition[parent] = Decomposition(dec.kind, children)
    return ITree(root=tree.root, nodes=nodes, decomposition=decomposition)


def _replace_constraint(tree: ITree, nid: str, new_c: Constraint) -> ITree:
    node = tree.nodes[nid]
    constraints = tuple(new_c if c.name == new_c.name else c for c in node.constraints)
    nodes = dict(tree.nodes)
    nodes[nid] = Intention(node.id, node.label, constraints, node.opt_objective)
    return ITree(root=tree.root, nodes=nodes, decomposition=dict(tree.decomposition),
                 dependencies=tree.dependencies, owner=tree.owner, roles=tree.roles)


def _add_child(tree: ITree, parent: str, intention: Intention, kind) -> ITree | None:
    from .model import DecompositionKind

    new_id = intention.id
    n = 0
    while new_id in tree.nodes:
        n += 1
        new_id = f"{intention.id}-{n}"
    nodes = dict(tree.nodes)
    nodes[new_id] = Intention(new_id, intention.label, intention.constraints)
    decomposition = dict(tree.decomposition)
    existing = decomposition.get(parent)
    use_kind = existing.kind if existing else (kind or DecompositionKind.AND)
    children = (existing.children if existing else ()) + (new_id,)
    decomposition[parent] = Decomposition(use_kind, children)
    return ITree(root=tree.root, nodes=nodes, decomposition=decomposition,
                 dependencies=tree.dependencies, owner=tree.owner, roles=tree.roles)
