import hypothesis.strategies as st
import pytest
from hypothesis import settings

from iss_engine.builders import build_tree, node
from iss_engine.model import (
    Constraint,
    ConstraintKind,
    Decomposition,
    DecompositionKind,
    Direction,
    Intention,
    Interval,
    ITree,
    Metric,
    OptObjective,
    enum_constraint,
    interval_constraint,
)

settings.register_profile("ci", deadline=None)
settings.load_profile("ci")

LABELS = ["alpha", "beta", "gamma", "delta", "epsilon"]


@st.composite
def constraints(draw, name="c"):
    kind = draw(st.sampled_from(list(ConstraintKind)))
    if kind is ConstraintKind.ENUMERATION:
        vals = draw(st.frozensets(st.sampled_from("abcdef"), min_size=1, max_size=4))
        return Constraint(name, kind, vals)
    if kind is ConstraintKind.BOOLEAN:
        return Constraint(name, kind, draw(st.booleans()))
    lo = draw(st.integers(-5, 5))
    hi = draw(st.integers(lo, 8))
    return Constraint(name, kind, Interval(float(lo), float(hi)))


@st.composite
def itrees(draw, max_nodes=8, labels=LABELS, with_constraints=False):
    n = draw(st.integers(1, max_nodes))
    parents = [draw(st.integers(0, i - 1)) for i in range(1, n)]
    labs = [draw(st.sampled_from(labels)) for _ in range(n)]
    kinds = [draw(st.sampled_from(list(DecompositionKind))) for _ in range(n)]
    nodes = {}
    children: dict[int, list[int]] = {}
    for i, p in enumerate(parents, start=1):
        children.setdefault(p, []).append(i)
    for i in range(n):
        cons = ()
        if with_constraints and draw(st.booleans()):
            cons = (draw(constraints(name=draw(st.sampled_from(["c1", "c2"])))),)
        nodes[f"n{i}"] = Intention(f"n{i}", labs[i], cons)
    decomposition = {
        f"n{p}": Decomposition(kinds[p], tuple(f"n{c}" for c in kids))
        for p, kids in children.items()
    }
    return ITree(root="n0", nodes=nodes, decomposition=decomposition)


@pytest.fixture
def wedding_tree():
    from iss_engine.fixtures import fig3_wedding_tree

    return fig3_wedding_tree()


def simple_tree(*labels_and_shape):
    """One-liner AND tree: simple_tree('a', 'b', 'c') -> a with children b, c."""
    root, *kids = labels_and_shape
    return build_tree(node(root, *[node(k) for k in kids]))
