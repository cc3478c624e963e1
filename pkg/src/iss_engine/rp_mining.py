"""Requirement-pattern mining: frequent rooted subtrees over an I-Tree corpus,
functional grouping, constraint clustering, and abstraction into reusable RPs.

The miner grows labeled rooted patterns one node at a time, deduplicates by
canonical code, and prunes by transaction support (anti-monotone), which is
exact for the desk-scale corpora this engine targets.
"""
from __future__ import annotations

import hashlib
from collections import defaultdict
from dataclasses import dataclass, field, replace

from .errors import EmptyCluster, EmptyCorpus
from .model import (
    Constraint,
    ConstraintKind,
    Decomposition,
    DecompositionKind,
    Intention,
    Interval,
    ITree,
    RequirementPattern,
    RpInfo,
    constraint_similarity,
    forest_encode,
    normalize_label,
    subtree_encode,
)


@dataclass
class MiningConfig:
    min_support: int = 2
    max_pattern_nodes: int = 8
    constraint_similarity_threshold: float = 0.7
    common_constraint_quorum: float = 0.5

    def __post_init__(self):
        if self.min_support < 1:
            raise ValueError("minSupport must be >= 1")
        if self.max_pattern_nodes < 1:
            raise ValueError("maxPatternNodes must be >= 1")
        if not 0.0 <= self.constraint_similarity_threshold <= 1.0:
            raise ValueError("constraintSimilarityThreshold must be in [0,1]")
        if not 0.0 < self.common_constraint_quorum <= 1.0:
            raise ValueError("commonConstraintQuorum must be in (0,1]")


@dataclass
class Occurrence:
    tree_id: int
    mapping: dict[str, str]  # pattern node id -> corpus node id


@dataclass
class FrequentSubtree:
    shape: ITree  # normalized labels, no constraints
    support: int
    occurrences: list[Occurrence]

    @property
    def code(self) -> str:
        return subtree_encode(self.shape, self.shape.root, with_kinds=True)

    def labels_key(self) -> tuple[str, ...]:
        return tuple(sorted(n.label for n in self.shape.nodes.values()))


def _normalized(tree: ITree) -> ITree:
    nodes = {nid: replace(n, label=normalize_label(n.label)) for nid, n in tree.nodes.items()}
    return ITree(root=tree.root, nodes=nodes, decomposition=tree.decomposition,
                 dependencies=tree.dependencies, owner=tree.owner, roles=tree.roles)


def _match(pattern: ITree, pnode: str, tree: ITree, cnode: str) -> dict[str, str] | None:
    """Try to embed the pattern subtree at pnode onto the corpus subtree at cnode."""
    if pattern.nodes[pnode].label != tree.nodes[cnode].label:
        return None
    pkids = pattern.children(pnode)
    if not pkids:
        return {pnode: cnode}
    if pattern.kind(pnode) != tree.kind(cnode):
        return None
    ckids = tree.children(cnode)
    if len(pkids) > len(ckids):
        return None

    def assign(i: int, used: set[str], acc: dict[str, str]) -> dict[str, str] | None:
        if i == len(pkids):
            return acc
        for ck in ckids:
            if ck in used:
                continue
            sub = _match(pattern, pkids[i], tree, ck)
            if sub is not None:
                out = assign(i + 1, used | {ck}, {**acc, **sub})
                if out is not None:
                    return out
        return None

    return assign(0, set(), {pnode: cnode})


def _first_embedding(pattern: ITree, tree: ITree) -> dict[str, str] | None:
    for cnode in _preorder(tree):
        m = _match(pattern, pattern.root, tree, cnode)
        if m is not None:
            return m
    return None


def _preorder(tree: ITree) -> list[str]:
    out, stack = [], [tree.root]
    while stack:
        cur = stack.pop()
        out.append(cur)
        stack.extend(reversed(tree.children(cur)))
    return out


def canonical_order(tree: ITree) -> list[str]:
    """Node ids in canonical preorder (children sorted by subtree code).

    Position indices align across isomorphic trees, which is what the
    constraint clustering uses to compare occurrences of the same shape.
    """
    out: list[str] = []

    def walk(nid: str):
        out.append(nid)
        kids = sorted(tree.children(nid),
                      key=lambda c: (subtree_encode(tree, c, with_kinds=True), c))
        for c in kids:
            walk(c)

    walk(tree.root)
    return out


def _extend(pattern: ITree, pnode: str, label: str, kind: DecompositionKind) -> ITree:
    """New pattern with a fresh leaf labeled `label` under `pnode`."""
    new_id = f"p{len(pattern.nodes)}"
    nodes = dict(pattern.nodes)
    nodes[new_id] = Intention(new_id, label)
    decomposition = dict(pattern.decomposition)
    old = decomposition.get(pnode)
    children = (old.children if old else ()) + (new_id,)
    decomposition[pnode] = Decomposition(kind, children)
    return ITree(root=pattern.root, nodes=nodes, decomposition=decomposition)


def mine_frequent_subtrees(corpus: list[ITree], cfg: MiningConfig) -> list[FrequentSubtree]:
    """All rooted connected subtrees with transaction support >= minSupport and
    at most maxPatternNodes nodes, deduplicated by canonical code."""
    if not corpus:
        raise EmptyCorpus("cannot mine an empty corpus")
    trees = [_normalized(t) for t in corpus]

    def evaluate(pattern: ITree) -> list[Occurrence]:
        occs = []
        for tid, tree in enumerate(trees):
            m = _first_embedding(pattern, tree)
            if m is not None:
                occs.append(Occurrence(tid, m))
        return occs

    # frequent single labels
    results: dict[str, FrequentSubtree] = {}
    frontier: list[FrequentSubtree] = []
    labels = sorted({n.label for t in trees for n in t.nodes.values()})
    for label in labels:
        pattern = ITree(root="p0", nodes={"p0": Intention("p0", label)})
        occs = evaluate(pattern)
        if len(occs) >= cfg.min_support:
            fst = FrequentSubtree(pattern, len(occs), occs)
            results[fst.code] = fst
            frontier.append(fst)

    while frontier:
        next_frontier = []
        for fst in frontier:
            if len(fst.shape.nodes) >= cfg.max_pattern_nodes:
                continue
            for candidate in _candidate_extensions(fst, labels):
                code = subtree_encode(candidate, candidate.root, with_kinds=True)
                if code in results:
                    continue
                occs = evaluate(candidate)
                if len(occs) >= cfg.min_support:
                    new = FrequentSubtree(candidate, len(occs), occs)
                    results[code] = new
                    next_frontier.append(new)
                else:
                    results[code] = FrequentSubtree(candidate, len(occs), occs)  # mark seen
        frontier = next_frontier

    return sorted((f for f in results.values() if f.support >= cfg.min_support),
                  key=lambda f: f.code)


def _candidate_extensions(fst: FrequentSubtree, labels: list[str]):
    """Every one-new-leaf extension: any pattern node gets any corpus label as a
    new child. Exhaustive, so every frequent (n+1)-node pattern is reachable from
    one of its frequent n-node subtrees (anti-monotonicity guarantees one exists)."""
    for pnode in fst.shape.nodes:
        existing = fst.shape.kind(pnode)
        kinds = [existing] if existing is not None else list(DecompositionKind)
        for label in labels:
            for kind in kinds:
                yield _extend(fst.shape, pnode, label, kind)


def group_by_function(patterns: list[FrequentSubtree]) -> list[list[FrequentSubtree]]:
    """Partition by the multiset of normalized node labels."""
    groups: dict[tuple[str, ...], list[FrequentSubtree]] = defaultdict(list)
    for p in patterns:
        groups[p.labels_key()].append(p)
    return [groups[k] for k in sorted(groups)]


@dataclass
class OccurrenceRef:
    """One occurrence of one pattern, with constraints read off the corpus."""
    subtree: FrequentSubtree
    occurrence: Occurrence
    shape_code: str
    # canonical position index -> constraints on the mapped corpus node
    constraints: dict[int, tuple[Constraint, ...]]
    maps_corpus_root: bool


def _occurrence_refs(group: list[FrequentSubtree], corpus: list[ITree]) -> list[OccurrenceRef]:
    refs = []
    for fst in group:
        order = canonical_order(fst.shape)
        code = fst.code
        for occ in fst.occurrences:
            tree = corpus[occ.tree_id]
            cons = {i: tree.nodes[occ.mapping[pid]].constraints
                    for i, pid in enumerate(order)}
            refs.append(OccurrenceRef(fst, occ, code, cons,
                                      occ.mapping[fst.shape.root] == tree.root))
    return refs


def _occurrence_similarity(a: OccurrenceRef, b: OccurrenceRef) -> float:
    if a.shape_code != b.shape_code:
        return 0.0
    keys = set()
    for pos in a.constraints:
        for c in a.constraints[pos]:
            keys.add((pos, c.name))
        for c in b.constraints[pos]:
            keys.add((pos, c.name))
    if not keys:
        return 1.0
    total = 0.0
    for pos, name in keys:
        ca = next((c for c in a.constraints[pos] if c.name == name), None)
        cb = next((c for c in b.constraints[pos] if c.name == name), None)
        if ca is None or cb is None or ca.kind != cb.kind:
            continue  # contributes 0
        total += constraint_similarity(ca, cb)
    return total / len(keys)


def cluster_by_constraints(group: list[FrequentSubtree], cfg: MiningConfig,
                           corpus: list[ITree]) -> list[list[OccurrenceRef]]:
    """Single-linkage clustering of occurrences; merging while linkage similarity
    stays at or above the threshold equals connected components of the
    similarity->=threshold graph, which is what this computes (order-insensitive)."""
    refs = _occurrence_refs(group, [_normalized(t) for t in corpus])
    n = len(refs)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            if _occurrence_similarity(refs[i], refs[j]) >= cfg.constraint_similarity_threshold:
                parent[find(i)] = find(j)

    clusters: dict[int, list[OccurrenceRef]] = defaultdict(list)
    for i, ref in enumerate(refs):
        clusters[find(i)].append(ref)
    return sorted(clusters.values(),
                  key=lambda c: (c[0].shape_code, -len(c)))


def abstract_rp(cluster: list[OccurrenceRef], cfg: MiningConfig,
                domain: str = "") -> RequirementPattern:
    """Keep constraints meeting the quorum, widened to their union hull; drop
    personalized ones. The forest is the shared shape; a pattern that always
    sits at the corpus root is split into its child subtrees (the root intent
    itself is the whole requirement, not a reusable fragment)."""
    if not cluster:
        raise EmptyCluster("cannot abstract an empty cluster")
    shape = cluster[0].subtree.shape
    order = canonical_order(shape)
    n = len(cluster)

    kept: dict[str, tuple[Constraint, ...]] = {}
    for pos, pid in enumerate(order):
        by_key: dict[tuple, list[Constraint]] = defaultdict(list)
        for ref in cluster:
            for c in ref.constraints[pos]:
                by_key[(c.name, c.kind)].append(c)
        out = []
        for (name, kind), cs in sorted(by_key.items()):
            if len(cs) / n < cfg.common_constraint_quorum:
                continue
            if kind is ConstraintKind.BOOLEAN and len(cs) < n:
                continue  # booleans must be unanimous across the cluster
            hull = _hull(cs)
            if hull is not None:
                out.append(hull)
        kept[pid] = tuple(out)

    nodes = {pid: replace(shape.nodes[pid], constraints=kept[pid]) for pid in shape.nodes}
    tree = ITree(root=shape.root, nodes=nodes, decomposition=shape.decomposition)

    if all(ref.maps_corpus_root for ref in cluster) and tree.children(tree.root):
        forest = [_detach(tree, child) for child in tree.children(tree.root)]
    else:
        forest = [tree]

    code = forest_encode(forest)
    rp_id = "rp-" + hashlib.sha1(code.encode()).hexdigest()[:10]
    labels = sorted({n.label for t in forest for n in t.nodes.values()})
    return RequirementPattern(
        rp_id,
        RpInfo(use_frequency=n, domain=domain, description=" + ".join(labels)),
        forest,
    )


def _detach(tree: ITree, root: str) -> ITree:
    keep = set()
    stack = [root]
    while stack:
        cur = stack.pop()
        keep.add(cur)
        stack.extend(tree.children(cur))
    return ITree(
        root=root,
        nodes={nid: tree.nodes[nid] for nid in keep},
        decomposition={nid: dec for nid, dec in tree.decomposition.items() if nid in keep},
    )


def _hull(cs: list[Constraint]) -> Constraint | None:
    first = cs[0]
    if first.kind is ConstraintKind.INTERVAL:
        lo = min(c.value.lo for c in cs)
        hi = max(c.value.hi for c in cs)
        return Constraint(first.name, first.kind, Interval(lo, hi, first.value.unit))
    if first.kind is ConstraintKind.ENUMERATION:
        vals = frozenset().union(*(c.value for c in cs))
        return Constraint(first.name, first.kind, vals)
    # boolean: only unanimous values survive
    if all(c.value == first.value for c in cs):
        return first
    return None


def derive_rps(corpus: list[ITree], cfg: MiningConfig | None = None,
               domain: str = "") -> list[RequirementPattern]:
    """Full pipeline: mine -> group -> cluster -> abstract, deduplicated by
    canonical forest encoding (highest use frequency wins)."""
    cfg = cfg or MiningConfig()
    patterns = mine_frequent_subtrees(corpus, cfg)
    best: dict[str, RequirementPattern] = {}
    for group in group_by_function(patterns):
        for cluster in cluster_by_constraints(group, cfg, corpus):
            rp = abstract_rp(cluster, cfg, domain=domain)
            code = forest_encode(rp.forest)
            prev = best.get(code)
            if prev is None or rp.info.use_frequency > prev.info.use_frequency:
                best[code] = rp
    return sorted(best.values(), key=lambda r: (-r.info.use_frequency, r.id))
