import itertools

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from conftest import itrees, simple_tree
from iss_engine.builders import build_tree, node
from iss_engine.errors import EmptyCluster, EmptyCorpus
from iss_engine.fixtures import wedding_corpus
from iss_engine.model import (
    Decomposition,
    DecompositionKind,
    Intention,
    Interval,
    ITree,
    covers,
    enum_constraint,
    forest_encode,
    intention_covers,
    interval_constraint,
    normalize_label,
    subtree_encode,
)
from iss_engine.rp_mining import (
    MiningConfig,
    abstract_rp,
    cluster_by_constraints,
    derive_rps,
    group_by_function,
    mine_frequent_subtrees,
)


# --- independent oracle: enumerate every rooted connected subtree directly ---

def _sub_itree(tree: ITree, root: str, keep: frozenset[str]) -> ITree:
    nodes = {nid: Intention(nid, normalize_label(tree.nodes[nid].label))
             for nid in keep}
    decomposition = {}
    for nid in keep:
        kids = tuple(c for c in tree.children(nid) if c in keep)
        if kids:
            decomposition[nid] = Decomposition(tree.kind(nid), kids)
    return ITree(root=root, nodes=nodes, decomposition=decomposition)


def _connected_subtree_codes(tree: ITree, max_nodes: int) -> set[str]:
    """All canonical (label+kind) codes of rooted connected subtrees, brute force."""
    def node_sets(nid: str) -> list[frozenset[str]]:
        kid_choices = []
        for c in tree.children(nid):
            kid_choices.append([frozenset()] + node_sets(c))
        out = []
        for combo in itertools.product(*kid_choices) if kid_choices else [()]:
            s = frozenset({nid}).union(*combo) if combo else frozenset({nid})
            if len(s) <= max_nodes:
                out.append(s)
        return out

    codes = set()
    for start in tree.nodes:
        for keep in node_sets(start):
            sub = _sub_itree(tree, start, keep)
            codes.add(subtree_encode(sub, start, with_kinds=True))
    return codes


def brute_force_frequent(corpus, cfg: MiningConfig) -> dict[str, int]:
    support: dict[str, int] = {}
    for tree in corpus:
        for code in _connected_subtree_codes(tree, cfg.max_pattern_nodes):
            support[code] = support.get(code, 0) + 1
    return {c: s for c, s in support.items() if s >= cfg.min_support}


class TestMineFrequentSubtrees:
    def test_wedding_banquet_edge(self):
        corpus = [simple_tree("wedding", "banquet", extra)
                  for extra in ("planning", "inviting", "pick-up")]
        out = mine_frequent_subtrees(corpus, MiningConfig(min_support=2))
        pattern = build_tree(node("wedding", node("banquet")))
        code = subtree_encode(pattern, pattern.root, with_kinds=True)
        by_code = {f.code: f for f in out}
        assert code in by_code
        assert by_code[code].support == 3

    def test_min_support_above_corpus_size(self):
        corpus = [simple_tree("a", "b")]
        assert mine_frequent_subtrees(corpus, MiningConfig(min_support=5)) == []

    def test_single_tree_all_subtrees(self):
        tree = build_tree(node("a", node("b", node("c")), node("d")))
        cfg = MiningConfig(min_support=1, max_pattern_nodes=4)
        out = mine_frequent_subtrees([tree], cfg)
        assert {f.code for f in out} == _connected_subtree_codes(tree, 4)

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            mine_frequent_subtrees([], MiningConfig())

    def test_and_or_kinds_not_conflated(self):
        t_and = build_tree(node("a", node("b"), kind="AND"))
        t_or = build_tree(node("a", node("b"), kind="OR"))
        out = mine_frequent_subtrees([t_and, t_or], MiningConfig(min_support=2))
        # only the single-node patterns are shared between the two trees
        assert all(len(f.shape.nodes) == 1 for f in out)

    @given(st.lists(itrees(max_nodes=6, labels=["a", "b", "c"]), min_size=1, max_size=5),
           st.integers(1, 3))
    @settings(max_examples=40)
    def test_matches_brute_force(self, corpus, min_support):
        cfg = MiningConfig(min_support=min_support, max_pattern_nodes=5)
        mined = {f.code: f.support for f in mine_frequent_subtrees(corpus, cfg)}
        assert mined == brute_force_frequent(corpus, cfg)

    @given(st.lists(itrees(max_nodes=6, labels=["a", "b", "c"]), min_size=2, max_size=5))
    @settings(max_examples=25)
    def test_anti_monotone(self, corpus):
        cfg = MiningConfig(min_support=2, max_pattern_nodes=5)
        out = mine_frequent_subtrees(corpus, cfg)
        emitted = {f.code for f in out}
        for fst in out:
            shape = fst.shape
            for leaf in [n for n in shape.nodes if not shape.children(n)]:
                if leaf == shape.root:
                    continue
                keep = frozenset(shape.nodes) - {leaf}
                sub = _sub_itree(shape, shape.root, keep)
                assert subtree_encode(sub, sub.root, with_kinds=True) in emitted


class TestGroupByFunction:
    def test_equal_label_multisets_group_together(self):
        t1 = [simple_tree("banquet", "food"), simple_tree("banquet", "food")]
        t2 = build_tree(node("food", node("banquet")))
        out = mine_frequent_subtrees(t1 + [t2], MiningConfig(min_support=1))
        groups = group_by_function(out)
        for group in groups:
            keys = {f.labels_key() for f in group}
            assert len(keys) == 1
        two_label = [g for g in groups if g[0].labels_key() == ("banquet", "food")]
        assert len(two_label) == 1
        assert len(two_label[0]) >= 2  # both shapes land in one group

    def test_different_labels_split(self):
        out = mine_frequent_subtrees(
            [simple_tree("banquet"), simple_tree("planning")], MiningConfig(min_support=1))
        groups = group_by_function(out)
        assert len(groups) == 2

    def test_empty(self):
        assert group_by_function([]) == []


def _single_label_corpus(constraint_lists):
    return [build_tree(node("banquet", cons=cons)) for cons in constraint_lists]


class TestClusterByConstraints:
    def _clusters(self, corpus, threshold):
        cfg = MiningConfig(min_support=1, constraint_similarity_threshold=threshold)
        patterns = mine_frequent_subtrees(corpus, cfg)
        (group,) = group_by_function(patterns)
        return cluster_by_constraints(group, cfg, corpus), cfg

    def test_identical_constraints_one_cluster(self):
        corpus = _single_label_corpus([
            [interval_constraint("tables", 5, 10)],
            [interval_constraint("tables", 5, 10)],
        ])
        clusters, _ = self._clusters(corpus, 0.8)
        assert len(clusters) == 1

    def test_disjoint_enums_separate(self):
        corpus = _single_label_corpus([
            [enum_constraint("vehicle", {"car"})],
            [enum_constraint("vehicle", {"bus"})],
        ])
        clusters, _ = self._clusters(corpus, 0.8)
        assert len(clusters) == 2

    def test_single_linkage_chains(self):
        # pairwise sims: (a,b)=85/95, (b,c)=85/95, (a,c)=80/100 -> chain at 0.85
        corpus = _single_label_corpus([
            [interval_constraint("t", 0, 90)],
            [interval_constraint("t", 5, 95)],
            [interval_constraint("t", 10, 100)],
        ])
        clusters, _ = self._clusters(corpus, 0.85)
        assert len(clusters) == 1
        clusters, _ = self._clusters(corpus, 0.93)
        assert len(clusters) == 3


class TestAbstractRp:
    def test_interval_union_hull(self):
        corpus = _single_label_corpus([
            [interval_constraint("tables", 10, 20)],
            [interval_constraint("tables", 15, 30)],
        ])
        cfg = MiningConfig(min_support=2, constraint_similarity_threshold=0.2)
        patterns = mine_frequent_subtrees(corpus, cfg)
        (group,) = group_by_function(patterns)
        (cluster,) = cluster_by_constraints(group, cfg, corpus)
        rp = abstract_rp(cluster, cfg)
        (tree,) = rp.forest
        c = tree.nodes[tree.root].constraint("tables")
        assert c.value == Interval(10.0, 30.0)
        assert rp.info.use_frequency == 2

    def test_below_quorum_dropped(self):
        corpus = _single_label_corpus([
            [interval_constraint("tables", 10, 20)], [], [], [],
        ])
        cfg = MiningConfig(min_support=4, constraint_similarity_threshold=0.0)
        patterns = mine_frequent_subtrees(corpus, cfg)
        (group,) = group_by_function(patterns)
        (cluster,) = cluster_by_constraints(group, cfg, corpus)
        rp = abstract_rp(cluster, cfg)
        (tree,) = rp.forest
        assert tree.nodes[tree.root].constraints == ()

    def test_empty_cluster(self):
        with pytest.raises(EmptyCluster):
            abstract_rp([], MiningConfig())

    def test_hull_covers_present_constraints(self):
        corpus = wedding_corpus(seed=3, n=8)
        cfg = MiningConfig(min_support=2)
        patterns = mine_frequent_subtrees(corpus, cfg)
        for group in group_by_function(patterns):
            for cluster in cluster_by_constraints(group, cfg, corpus):
                rp = abstract_rp(cluster, cfg)
                for tree in rp.forest:
                    for n_id in tree.nodes:
                        for kept in tree.nodes[n_id].constraints:
                            for ref in cluster:
                                for pos_cons in ref.constraints.values():
                                    for c in pos_cons:
                                        if c.name == kept.name and c.kind == kept.kind:
                                            assert covers(kept, c)


class TestDeriveRps:
    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            derive_rps([])

    def test_wedding_corpus_contains_fig3_rps(self):
        rps = derive_rps(wedding_corpus(seed=0, n=12), MiningConfig(min_support=3))
        forests = {tuple(sorted(n.label for t in rp.forest for n in t.nodes.values()))
                   for rp in rps}
        assert ("inviting", "pickup") in forests
        assert any(f[0] == "banquet" for f in forests)

    def test_permutation_invariant(self):
        corpus = wedding_corpus(seed=1, n=8)
        a = derive_rps(corpus, MiningConfig(min_support=2))
        b = derive_rps(list(reversed(corpus)), MiningConfig(min_support=2))
        key = lambda rps: {forest_encode(rp.forest): rp.info.use_frequency for rp in rps}
        assert key(a) == key(b)

    def test_identical_trees_full_support(self):
        tree = build_tree(node("a", node("b"), node("c")))
        rps = derive_rps([tree, tree, tree], MiningConfig(min_support=3, constraint_similarity_threshold=0.0))
        assert rps  # maximal families survive at full support
        for rp in rps:
            assert rp.info.use_frequency == 3
