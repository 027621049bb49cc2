import numpy as np
import pytest

from haxc.hierarchy import HierarchyTree, Node


@pytest.fixture
def rng():
    return np.random.default_rng(20181016)


@pytest.fixture
def fig1_tree():
    """Seven-leaf hierarchical generator tree with three nesting levels."""
    nodes = [
        Node("W0*", None), Node("W1*", "W0*"), Node("W2*", "W0*"), Node("W3*", "W0*"),
        Node("W21*", "W2*"), Node("W22*", "W2*"), Node("W31*", "W3*"), Node("W32*", "W3*"),
        Node("W321*", "W32*"), Node("W322*", "W32*"), Node("W323*", "W32*"),
        Node("W1", "W1*"), Node("W2", "W21*"), Node("W3", "W22*"), Node("W4", "W31*"),
        Node("W5", "W321*"), Node("W6", "W322*"), Node("W7", "W323*"),
    ]
    return HierarchyTree(nodes, [f"W{j}" for j in range(1, 8)])


# alpha per internal node of the seven-leaf tree, non-increasing along paths
FIG1_ALPHAS = {"W0*": 0.8, "W1*": 0.6, "W2*": 0.7, "W3*": 0.6, "W21*": 0.5, "W22*": 0.4,
               "W31*": 0.5, "W32*": 0.45, "W321*": 0.3, "W322*": 0.35, "W323*": 0.2}


def with_alphas(tree, alphas):
    """Copy of ``tree`` with ``{"alpha": ...}`` attached to the listed nodes."""
    nodes = [Node(nd.id, nd.parent, {"alpha": alphas[nd.id]} if nd.id in alphas else {})
             for nd in tree.nodes]
    return HierarchyTree(nodes, tree.leaf_order)


@pytest.fixture
def fig1_gumbel_tree(fig1_tree):
    return with_alphas(fig1_tree, FIG1_ALPHAS)


# -- acceptance reporting ---------------------------------------------------
_ACCEPTANCE = {}


@pytest.fixture
def report():
    """Record one pass/fail line per acceptance criterion, then assert."""
    def _report(number, title, failures):
        _ACCEPTANCE[number] = (title, list(failures))
        status = "PASS" if not failures else "FAIL"
        print(f"criterion {number:2d} {status}: {title}")
        assert not failures, "; ".join(failures)
    return _report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, failures = _ACCEPTANCE[number]
        status = "PASS" if not failures else "FAIL"
        line = f"criterion {number:2d} {status}: {title}"
        if failures:
            line += " [" + "; ".join(failures) + "]"
        terminalreporter.write_line(line)
