"""Selecting requirement patterns to cover a final I-Tree: per-intention
coverage, greedy iteration, and an exhaustive optimum used as its oracle."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import RepoTooLarge
from .model import (
    DecompositionKind,
    Intention,
    ITree,
    RequirementPattern,
    intention_covers,
)
from .rp_mining import canonical_order


def _label_matches(p: Intention, q: Intention) -> bool:
    from .model import normalize_label

    return normalize_label(p.label) == normalize_label(q.label)


def _embed(ptree: ITree, pnode: str, tree: ITree, cnode: str,
           blocked: set[str], pred: Callable[[Intention, Intention], bool]) -> Optional[dict]:
    if cnode in blocked or not pred(ptree.nodes[pnode], tree.nodes[cnode]):
        return None
    pkids = ptree.children(pnode)
    if not pkids:
        return {pnode: cnode}
    if ptree.kind(pnode) != tree.kind(cnode):
        return None
    ckids = tree.children(cnode)

    def assign(i, used, acc):
        if i == len(pkids):
            return acc
        for ck in ckids:
            if ck in used:
                continue
            sub = _embed(ptree, pkids[i], tree, ck, blocked, pred)
            if sub is not None:
                out = assign(i + 1, used | {ck}, {**acc, **sub})
                if out is not None:
                    return out
        return None

    return assign(0, set(), {pnode: cnode})


def embed_tree(ptree: ITree, tree: ITree, blocked: set[str] | None = None,
               pred: Callable[[Intention, Intention], bool] = intention_covers) -> Optional[dict]:
    """First embedding of the pattern tree into `tree` in canonical node order,
    avoiding `blocked` target nodes."""
    blocked = blocked or set()
    for cnode in canonical_order(tree):
        m = _embed(ptree, ptree.root, tree, cnode, blocked, pred)
        if m is not None:
            return m
    return None


def rp_covers(rp: RequirementPattern, tree: ITree) -> frozenset[str]:
    """Intention ids of `tree` matched when every forest tree embeds (disjointly,
    first embedding in canonical node order); empty if any forest tree fails."""
    matched: set[str] = set()
    for ptree in sorted(rp.forest, key=lambda t: -len(t.nodes)):
        m = embed_tree(ptree, tree, blocked=matched)
        if m is None:
            return frozenset()
        matched.update(m.values())
    return frozenset(matched)


@dataclass
class SelectionResult:
    chosen: list[str]
    coverage_map: dict[str, str]  # intention id -> rp id
    uncovered: frozenset[str]
    coverage_ratio: float
    or_achievable: frozenset[str] = frozenset()  # OR-parents achievable via a covered child

    @property
    def covered(self) -> frozenset[str]:
        return frozenset(self.coverage_map)


def _result(tree: ITree, picks: list[tuple[RequirementPattern, frozenset[str]]]) -> SelectionResult:
    coverage_map: dict[str, str] = {}
    for rp, matched in picks:
        for nid in matched:
            coverage_map[nid] = rp.id
    all_ids = set(tree.nodes)
    uncovered = frozenset(all_ids - set(coverage_map))
    or_ok = frozenset(
        pid for pid, dec in tree.decomposition.items()
        if dec.kind is DecompositionKind.OR and any(c in coverage_map for c in dec.children)
    )
    return SelectionResult(
        chosen=[rp.id for rp, _ in picks],
        coverage_map=coverage_map,
        uncovered=uncovered,
        coverage_ratio=len(coverage_map) / len(all_ids),
        or_achievable=or_ok,
    )


def _matched_sets(tree: ITree, repo: list[RequirementPattern]):
    return [(rp, rp_covers(rp, tree)) for rp in repo]


def select_rps_greedy(tree: ITree, repo: list[RequirementPattern]) -> SelectionResult:
    """Iteratively take the RP covering the most still-uncovered intentions;
    RPs overlapping anything already covered are skipped."""
    candidates = [(rp, m) for rp, m in _matched_sets(tree, repo) if m]
    covered: set[str] = set()
    picks: list[tuple[RequirementPattern, frozenset[str]]] = []
    while True:
        eligible = [(rp, m) for rp, m in candidates if m and not (m & covered)]
        if not eligible:
            break
        rp, matched = max(
            eligible, key=lambda rm: (len(rm[1]), rm[0].info.use_frequency,
                                      _neg_id(rm[0].id)))
        picks.append((rp, matched))
        covered |= matched
        candidates = [(r, m) for r, m in candidates if r.id != rp.id]
    return _result(tree, picks)


class _neg_id(str):
    """Reverses lexicographic comparison so max() breaks ties by smallest id."""

    def __lt__(self, other):
        return str.__gt__(self, other)

    def __gt__(self, other):
        return str.__lt__(self, other)


def select_rps_exact(tree: ITree, repo: list[RequirementPattern],
                     max_repo: int = 20) -> SelectionResult:
    """Exhaustive search over disjoint RP subsets; lexicographically optimal by
    (coverage desc, count asc, summed id-rank asc). Oracle for the greedy."""
    if len(repo) > max_repo:
        raise RepoTooLarge(f"{len(repo)} RPs > limit {max_repo}")
    ranked = sorted(_matched_sets(tree, repo), key=lambda rm: rm[0].id)
    ranked = [(i, rp, m) for i, (rp, m) in enumerate(ranked) if m]

    best_key = (-1, 0, 0)
    best_picks: list = []

    def dfs(idx: int, covered: frozenset[str], picks: list, rank_sum: int):
        nonlocal best_key, best_picks
        key = (len(covered), -len(picks), -rank_sum)
        if key > best_key:
            best_key = key
            best_picks = list(picks)
        for j in range(idx, len(ranked)):
            rank, rp, m = ranked[j]
            if m & covered:
                continue
            picks.append((rp, m))
            dfs(j + 1, covered | m, picks, rank_sum + rank)
            picks.pop()

    dfs(0, frozenset(), [], 0)
    return _result(tree, best_picks)
