import pytest
from hypothesis import given, settings, strategies as st

from haxc.errors import StructureError
from haxc.hierarchy import HierarchyTree, Node, path_to_leaf, validate_two_level


def test_path_to_leaf_fig1(fig1_tree):
    assert path_to_leaf(fig1_tree, 1) == ["W0*", "W2*", "W21*", "W2"]
    assert path_to_leaf(fig1_tree, 6) == ["W0*", "W3*", "W32*", "W323*", "W7"]


def test_path_to_leaf_flat():
    tree = HierarchyTree.flat(3)
    assert path_to_leaf(tree, 1) == ["root", "leaf1"]


@pytest.mark.parametrize("j", [-1, 3, 1.5, "a"])
def test_path_to_leaf_bad_index(j):
    with pytest.raises(IndexError):
        path_to_leaf(HierarchyTree.flat(3), j)


def test_paths_are_parent_child_chains(fig1_tree):
    for j in range(fig1_tree.d):
        path = path_to_leaf(fig1_tree, j)
        assert path[0] == fig1_tree.root
        assert fig1_tree.coordinate(path[-1]) == j
        for a, b in zip(path, path[1:]):
            assert fig1_tree.parent(b) == a


def test_validate_two_level():
    assert validate_two_level(HierarchyTree.two_level([2, 3])) == (2, 3)
    with pytest.raises(StructureError):
        validate_two_level(HierarchyTree.flat(4))


def test_validate_two_level_rejects_fig1(fig1_tree):
    with pytest.raises(StructureError):
        validate_two_level(fig1_tree)


def test_validate_two_level_noncontiguous():
    nodes = [Node("r", None), Node("a", "r"), Node("b", "r"),
             Node("x", "a"), Node("y", "b"), Node("z", "a")]
    with pytest.raises(StructureError):
        validate_two_level(HierarchyTree(nodes, ["x", "y", "z"]))


@pytest.mark.parametrize("nodes,leaves", [
    ([("r", None), ("s", None), ("a", "r")], ["a"]),        # two roots
    ([("r", None), ("a", "q")], ["a"]),                      # dangling parent
    ([("r", None), ("a", "b"), ("b", "a"), ("c", "r")], ["c"]),  # cycle off the root
    ([("r", None), ("a", "r"), ("b", "r")], ["a"]),          # leaf missing from order
    ([("r", None), ("a", "r")], ["a", "a"]),                 # duplicate leaf
    ([("r", None), ("r", "r")], []),                         # duplicate id
])
def test_invalid_trees(nodes, leaves):
    with pytest.raises(StructureError):
        HierarchyTree(nodes, leaves)


def test_json_roundtrip(fig1_tree):
    assert HierarchyTree.from_json(fig1_tree.to_json()) == fig1_tree


@st.composite
def random_trees(draw):
    n_internal = draw(st.integers(1, 6))
    nodes = [("n0", None, {"alpha": 0.9})]
    for i in range(1, n_internal):
        parent = f"n{draw(st.integers(0, i - 1))}"
        nodes.append((f"n{i}", parent, {"alpha": draw(st.floats(0.1, 0.9))}))
    childless = {f"n{i}" for i in range(n_internal)} - {p for _, p, _ in nodes}
    leaves = []
    for i in range(n_internal):
        extra = 1 if f"n{i}" in childless else draw(st.integers(0, 2))
        for k in range(extra):
            leaves.append(f"l{i}_{k}")
            nodes.append((f"l{i}_{k}", f"n{i}", {}))
    order = draw(st.permutations(leaves))
    return HierarchyTree(nodes, order)


@settings(max_examples=50, deadline=None)
@given(random_trees())
def test_roundtrip_and_paths_property(tree):
    assert HierarchyTree.from_dict(tree.to_dict()) == tree
    for j in range(tree.d):
        path = path_to_leaf(tree, j)
        assert tree.is_leaf(path[-1])
        assert all(tree.parent(b) == a for a, b in zip(path, path[1:]))
