"""Rooted trees describing hierarchical (nested) structures.

The same tree type backs hierarchical frailties, nested Gumbel d-norm
generators and nested stable tail dependence functions.  Node parameters are
kept as plain mappings; consumers interpret them.

Coordinates are 0-based: ``leaf_order[j]`` is the node id of coordinate ``j``.
"""
import json
import operator
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Hashable, Mapping, Sequence

from .errors import StructureError


@dataclass(frozen=True)
class Node:
    id: Hashable
    parent: Hashable | None
    params: Mapping[str, Any] = field(default_factory=dict)


class HierarchyTree:
    """Immutable rooted tree whose leaves index copula coordinates.

    Parameters
    ----------
    nodes : sequence of Node or (id, parent, params) tuples
        Exactly one node has ``parent=None``.
    leaf_order : sequence
        Leaf node ids in coordinate order.  Must list every leaf exactly once.
    """

    def __init__(self, nodes, leaf_order: Sequence[Hashable]):
        built = []
        for nd in nodes:
            if not isinstance(nd, Node):
                nid, parent, *rest = nd
                params = rest[0] if rest else {}
                nd = Node(nid, parent, params)
            built.append(Node(nd.id, nd.parent, MappingProxyType(dict(nd.params))))
        self._nodes = {}
        for nd in built:
            if nd.id in self._nodes:
                raise StructureError(f"duplicate node id {nd.id!r}")
            self._nodes[nd.id] = nd

        roots = [nd.id for nd in built if nd.parent is None]
        if len(roots) != 1:
            raise StructureError(f"expected exactly one root, found {len(roots)}")
        self._root = roots[0]

        children = {nid: [] for nid in self._nodes}
        for nd in built:
            if nd.parent is None:
                continue
            if nd.parent not in self._nodes:
                raise StructureError(f"node {nd.id!r} has unknown parent {nd.parent!r}")
            children[nd.parent].append(nd.id)
        self._children = {k: tuple(v) for k, v in children.items()}

        # reachability also rules out cycles: a cycle cannot hang off the root
        seen = set()
        stack = [self._root]
        while stack:
            nid = stack.pop()
            if nid in seen:
                raise StructureError("tree contains a cycle")
            seen.add(nid)
            stack.extend(self._children[nid])
        if len(seen) != len(self._nodes):
            missing = sorted(map(repr, set(self._nodes) - seen))
            raise StructureError(f"nodes not reachable from root: {', '.join(missing)}")

        leaves = {nid for nid, ch in self._children.items() if not ch}
        leaf_order = tuple(leaf_order)
        if len(set(leaf_order)) != len(leaf_order):
            raise StructureError("leaf_order contains duplicates")
        if set(leaf_order) != leaves:
            raise StructureError(
                "leaf_order must list every leaf exactly once "
                f"(leaves: {len(leaves)}, listed: {len(leaf_order)})")
        if self._root in leaves and len(self._nodes) > 1:
            raise StructureError("root cannot be a leaf")
        self._leaf_order = leaf_order
        self._coord = {nid: j for j, nid in enumerate(leaf_order)}

    # -- basic accessors ---------------------------------------------------
    @property
    def root(self):
        return self._root

    @property
    def d(self) -> int:
        return len(self._leaf_order)

    @property
    def leaf_order(self):
        return self._leaf_order

    @property
    def nodes(self):
        return tuple(self._nodes.values())

    def node(self, nid) -> Node:
        return self._nodes[nid]

    def params(self, nid) -> Mapping[str, Any]:
        return self._nodes[nid].params

    def parent(self, nid):
        return self._nodes[nid].parent

    def children(self, nid):
        return self._children[nid]

    def is_leaf(self, nid) -> bool:
        return not self._children[nid]

    def internal_nodes(self):
        """Internal node ids in breadth-first order (parents before children)."""
        out, queue = [], [self._root]
        while queue:
            nid = queue.pop(0)
            if not self.is_leaf(nid):
                out.append(nid)
                queue.extend(self._children[nid])
        return out

    def coordinate(self, leaf_id) -> int:
        return self._coord[leaf_id]

    def leaves_under(self, nid):
        """Coordinates of all leaves below ``nid``, sorted."""
        if self.is_leaf(nid):
            return [self._coord[nid]]
        out = []
        for ch in self._children[nid]:
            out.extend(self.leaves_under(ch))
        return sorted(out)

    def leaf_parent(self, j: int):
        """Deepest internal ancestor of coordinate ``j``."""
        return self.parent(self._leaf_id(j))

    def _leaf_id(self, j):
        try:
            j = operator.index(j)
        except TypeError:
            raise IndexError(f"coordinate index must be an integer, got {j!r}") from None
        if not 0 <= j < self.d:
            raise IndexError(f"coordinate index {j} out of range for d={self.d}")
        return self._leaf_order[j]

    # -- serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "nodes": [{"id": nd.id, "parent": nd.parent, "params": dict(nd.params)}
                      for nd in self._nodes.values()],
            "leaf_order": list(self._leaf_order),
        }

    @classmethod
    def from_dict(cls, obj: Mapping) -> "HierarchyTree":
        try:
            nodes = [Node(n["id"], n.get("parent"), n.get("params", {}) or {})
                     for n in obj["nodes"]]
            leaf_order = obj["leaf_order"]
        except (KeyError, TypeError) as exc:
            raise StructureError(f"malformed tree object: {exc}") from exc
        return cls(nodes, leaf_order)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "HierarchyTree":
        return cls.from_dict(json.loads(text))

    def __eq__(self, other):
        if not isinstance(other, HierarchyTree):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(self.to_json())

    def __repr__(self):
        return f"HierarchyTree(d={self.d}, internal={len(self.internal_nodes())})"

    # -- constructors --------------------------------------------------------
    @classmethod
    def flat(cls, d: int, root_params=None) -> "HierarchyTree":
        """Star tree: root with ``d`` leaf children."""
        nodes = [Node("root", None, root_params or {})]
        nodes += [Node(f"leaf{j}", "root", {}) for j in range(d)]
        return cls(nodes, [f"leaf{j}" for j in range(d)])

    @classmethod
    def two_level(cls, sizes: Sequence[int], root_params=None,
                  sector_params: Sequence[Mapping] | None = None) -> "HierarchyTree":
        """Root -> ``len(sizes)`` sector nodes -> leaves, in contiguous blocks."""
        if sector_params is None:
            sector_params = [{}] * len(sizes)
        if len(sector_params) != len(sizes):
            raise StructureError("one parameter record per sector is required")
        nodes = [Node("root", None, root_params or {})]
        leaf_order = []
        for s, (size, par) in enumerate(zip(sizes, sector_params)):
            if size < 1:
                raise StructureError("sector sizes must be positive")
            nodes.append(Node(f"s{s}", "root", par))
            for j in range(size):
                lid = f"s{s}_{j}"
                nodes.append(Node(lid, f"s{s}", {}))
                leaf_order.append(lid)
        return cls(nodes, leaf_order)


def path_to_leaf(tree: HierarchyTree, j: int) -> list:
    """Node ids from the root down to the leaf of coordinate ``j``."""
    nid = tree._leaf_id(j)
    path = [nid]
    while tree.parent(nid) is not None:
        nid = tree.parent(nid)
        path.append(nid)
    return path[::-1]


def validate_two_level(tree: HierarchyTree) -> tuple:
    """Sector sizes of a root -> sectors -> leaves tree, in leaf order.

    Raises StructureError for flat, deeper or irregular trees, and when the
    sectors do not occupy contiguous coordinate blocks.
    """
    sectors = tree.children(tree.root)
    if any(tree.is_leaf(s) for s in sectors):
        raise StructureError("two-level tree: every child of the root must be a sector node")
    for s in sectors:
        if not all(tree.is_leaf(c) for c in tree.children(s)):
            raise StructureError("two-level tree: sector nodes may only have leaf children")
    sector_of = [tree.leaf_parent(j) for j in range(tree.d)]
    sizes, order = [], []
    for s in sector_of:
        if order and order[-1] == s:
            sizes[-1] += 1
        else:
            if s in order:
                raise StructureError("two-level tree: sector coordinates are not contiguous")
            order.append(s)
            sizes.append(1)
    return tuple(sizes)


def sector_labels(tree: HierarchyTree) -> list:
    """Deepest internal ancestor of every coordinate."""
    return [tree.leaf_parent(j) for j in range(tree.d)]
