import itertools
import random

import pytest

from conftest import simple_tree
from iss_engine.builders import build_tree, node
from iss_engine.errors import RepoTooLarge
from iss_engine.fixtures import fig3_rps, fig3_wedding_tree
from iss_engine.model import (
    RequirementPattern,
    RpInfo,
    intention_covers,
    interval_constraint,
)
from iss_engine.rp_selection import rp_covers, select_rps_exact, select_rps_greedy


def rp_of(rp_id, *trees, freq=1):
    return RequirementPattern(rp_id, RpInfo(freq), list(trees))


def leaf_rp(rp_id, *labels, freq=1):
    return rp_of(rp_id, *[build_tree(node(lab)) for lab in labels], freq=freq)


class TestRpCovers:
    def test_single_intention(self):
        tree = fig3_wedding_tree()
        rp = rp_of("rp-b", build_tree(node("banquet", cons=[interval_constraint("tables", 5, 30)])))
        matched = rp_covers(rp, tree)
        assert matched == {"banquet"}

    def test_absent_label(self):
        tree = fig3_wedding_tree()
        assert rp_covers(leaf_rp("rp-x", "honeymoon"), tree) == frozenset()

    def test_whole_tree_self_cover(self):
        tree = fig3_wedding_tree()
        rp = rp_of("rp-all", tree)
        assert rp_covers(rp, tree) == frozenset(tree.nodes)

    def test_forest_must_fully_embed(self):
        tree = fig3_wedding_tree()
        rp = leaf_rp("rp-mixed", "banquet", "honeymoon")
        assert rp_covers(rp, tree) == frozenset()

    def test_too_tight_constraint_blocks(self):
        tree = fig3_wedding_tree()  # banquet has tables in [16,16]
        tight = build_tree(node("banquet", cons=[interval_constraint("tables", 20, 25)]))
        assert rp_covers(rp_of("rp-t", tight), tree) == frozenset()

    def test_fig3_rps_cover(self):
        tree = fig3_wedding_tree()
        rp_pair, rp_banquet = fig3_rps()
        assert rp_covers(rp_pair, tree) == {"inviting", "pickup"}
        assert rp_covers(rp_banquet, tree) == {"banquet", "venue-layout", "food"}


class TestGreedy:
    def test_fig3_two_rp_decomposition(self):
        tree = fig3_wedding_tree()
        result = select_rps_greedy(tree, fig3_rps())
        assert set(result.chosen) == {"rp-inviting-pickup", "rp-banquet"}
        assert result.uncovered == {"wedding", "planning"}
        assert result.coverage_ratio == pytest.approx(5 / 7)

    def test_empty_repo(self):
        result = select_rps_greedy(fig3_wedding_tree(), [])
        assert result.chosen == []
        assert result.coverage_ratio == 0.0

    def test_tree_as_its_own_rp(self):
        tree = fig3_wedding_tree()
        result = select_rps_greedy(tree, [rp_of("rp-self", tree)] + fig3_rps())
        assert result.chosen == ["rp-self"]
        assert result.coverage_ratio == 1.0

    def test_no_double_assignment(self):
        tree = simple_tree("a", "b", "c")
        repo = [leaf_rp("rp-1", "b"), leaf_rp("rp-2", "b", "c")]
        result = select_rps_greedy(tree, repo)
        seen = list(result.coverage_map.values())
        for nid, rp_id in result.coverage_map.items():
            assert rp_id in result.chosen
        assert len(result.coverage_map) == len(set(result.coverage_map))

    def test_every_mapped_intention_actually_covered(self):
        tree = fig3_wedding_tree()
        repo = fig3_rps()
        result = select_rps_greedy(tree, repo)
        by_id = {rp.id: rp for rp in repo}
        for nid, rp_id in result.coverage_map.items():
            rp = by_id[rp_id]
            assert any(
                intention_covers(pn, tree.nodes[nid])
                for t in rp.forest for pn in t.nodes.values()
            )


class TestExact:
    def test_matches_greedy_when_greedy_optimal(self):
        tree = fig3_wedding_tree()
        g = select_rps_greedy(tree, fig3_rps())
        e = select_rps_exact(tree, fig3_rps())
        assert set(g.chosen) == set(e.chosen)
        assert g.coverage_ratio == e.coverage_ratio

    def test_adversarial_instance_exact_beats_greedy(self):
        # big RP covers 3 of 5 leaves but blocks the two 2-leaf RPs that cover 4
        tree = simple_tree("root", "a", "b", "c", "d")
        big = leaf_rp("rp-big", "a", "b", "c", freq=9)
        left = leaf_rp("rp-left", "a", "b")
        right = leaf_rp("rp-right", "c", "d")
        repo = [big, left, right]
        g = select_rps_greedy(tree, repo)
        e = select_rps_exact(tree, repo)
        assert g.chosen[0] == "rp-big"
        assert len(e.covered) > len(g.covered)
        assert set(e.chosen) == {"rp-left", "rp-right"}

    def test_single_node_tree_no_match(self):
        tree = simple_tree("alone")
        result = select_rps_exact(tree, [leaf_rp("rp-x", "other")])
        assert result.coverage_ratio == 0.0

    def test_repo_too_large(self):
        tree = simple_tree("a")
        repo = [leaf_rp(f"rp-{i}", "a") for i in range(25)]
        with pytest.raises(RepoTooLarge):
            select_rps_exact(tree, repo)

    def test_prefers_fewer_rps_at_equal_coverage(self):
        tree = simple_tree("root", "a", "b")
        repo = [leaf_rp("rp-ab", "a", "b"), leaf_rp("rp-a", "a"), leaf_rp("rp-b", "b")]
        e = select_rps_exact(tree, repo)
        assert e.chosen == ["rp-ab"]


def random_selection_instance(rng: random.Random):
    """Random requirement tree plus a repo of full-subtree RPs (the shape mined
    patterns actually take; their matched sets form a laminar family)."""
    n = rng.randint(5, 12)
    tree = _random_labeled_tree(rng, n)
    repo = []
    for i in range(rng.randint(1, 15)):
        root = rng.choice(sorted(tree.nodes))
        repo.append(rp_of(f"rp-{i:02d}", _full_subtree(tree, root),
                          freq=rng.randint(1, 50)))
    return tree, repo


def _random_labeled_tree(rng, n):
    spec_nodes = [node(f"task{i}") for i in range(n)]
    for i in range(1, n):
        parent = spec_nodes[rng.randrange(i)]
        parent.children.append(spec_nodes[i])
    return build_tree(spec_nodes[0])


def _full_subtree(tree, root):
    from iss_engine.rp_mining import _detach

    return _detach(tree, root)


class TestGreedyVsExactRandomized:
    def test_exact_dominates_and_greedy_bound_holds(self):
        rng = random.Random(2024)
        for _ in range(50):
            tree, repo = random_selection_instance(rng)
            g = select_rps_greedy(tree, repo)
            e = select_rps_exact(tree, repo)
            assert (len(e.covered), -len(e.chosen)) >= (len(g.covered), -len(g.chosen))
            assert len(g.covered) >= (1 - 1 / 2.718281828459045) * len(e.covered) - 1e-9
