"""Reeb tree of a PL field on S^2.

On the sphere every level-set component separates, so the Reeb graph is the
contour tree. It is built from the join tree (ascending sweep over sublevel
components) and the split tree (descending sweep over superlevel
components), merged by repeatedly peeling leaves. Every vertex stays a node;
regular vertices become degree-2 nodes subdividing the arcs of the collapsed
tree.
"""

from __future__ import annotations

import logging
import time
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence

import networkx as nx
import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from field.pl import ScalarField
from field.union_find import UnionFind
from sphere.errors import InvariantViolation
from sphere.icosa import IcosaTriangulation

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ReebTree:
    """Augmented contour tree rooted at the global minimum; node id == vertex id."""

    field: Optional[ScalarField]
    parent: np.ndarray  # -1 at the root
    depth: np.ndarray
    bfs_order: np.ndarray
    arcs: np.ndarray  # (V - 1, 2), undirected

    @classmethod
    def from_arcs(cls, arcs: np.ndarray, root: int, field: Optional[ScalarField] = None) -> "ReebTree":
        """Orient an undirected tree on nodes 0..len(arcs) by breadth-first search from root."""
        arcs = np.asarray(arcs, dtype=np.int64).reshape(-1, 2)
        V = len(arcs) + 1
        graph = sparse.coo_matrix((np.ones(len(arcs)), (arcs[:, 0], arcs[:, 1])), shape=(V, V))
        bfs_order, predecessors = csgraph.breadth_first_order(graph, root, directed=False)
        if len(bfs_order) != V:
            raise InvariantViolation(f"tree reaches {len(bfs_order)} of {V} nodes from {root}")
        parent = np.where(predecessors < 0, -1, predecessors).astype(np.int64)
        parent[root] = -1
        depth = np.zeros(V, dtype=np.int64)
        for v in bfs_order[1:]:
            depth[v] = depth[parent[v]] + 1
        return cls(field, parent, depth, bfs_order.astype(np.int64), arcs)

    @property
    def root(self) -> int:
        return int(self.bfs_order[0])

    @property
    def node_count(self) -> int:
        return len(self.parent)

    @property
    def value(self) -> np.ndarray:
        if self.field is None:
            raise InvariantViolation("tree carries no field values")
        return self.field.values

    @property
    def rank(self) -> np.ndarray:
        if self.field is None:
            raise InvariantViolation("tree carries no field order")
        return self.field.rank

    @cached_property
    def _child_index(self) -> tuple[np.ndarray, np.ndarray]:
        nonroot = np.flatnonzero(self.parent >= 0)
        by_parent = nonroot[np.argsort(self.parent[nonroot], kind="stable")]
        counts = np.bincount(self.parent[nonroot], minlength=self.node_count)
        return np.concatenate([[0], np.cumsum(counts)]), by_parent

    def children(self, v: int) -> np.ndarray:
        ptr, idx = self._child_index
        return idx[ptr[v] : ptr[v + 1]]

    @cached_property
    def child_counts(self) -> np.ndarray:
        return np.diff(self._child_index[0])

    @cached_property
    def degree(self) -> np.ndarray:
        return np.bincount(self.arcs.ravel(), minlength=self.node_count)

    @cached_property
    def levels(self) -> List[np.ndarray]:
        """Nodes grouped by depth, root level first."""
        depths = self.depth[self.bfs_order]
        return np.split(self.bfs_order, np.flatnonzero(np.diff(depths)) + 1)

    def accumulate(self, weights: np.ndarray) -> np.ndarray:
        """Per-node sum of weights over the subtree rooted at that node (post-order)."""
        total = np.array(weights, copy=True)
        for level in reversed(self.levels[1:]):
            np.add.at(total, self.parent[level], total[level])
        return total


def check_closed_surface(tri: IcosaTriangulation) -> None:
    """Raise unless the complex is a closed 2-manifold of Euler characteristic 2."""
    f = tri.faces
    pairs = np.sort(np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]]), axis=1)
    _, per_edge = np.unique(pairs, axis=0, return_counts=True)
    if np.any(per_edge != 2):
        raise InvariantViolation(f"{int(np.sum(per_edge != 2))} edges not shared by exactly two faces")
    euler = tri.vertex_count - len(per_edge) + tri.face_count
    if euler != 2:
        raise InvariantViolation(f"Euler characteristic {euler}, expected 2 for a sphere")


def _sweep(order: Sequence[int], key: Sequence[int], ptr: Sequence[int], nbrs: Sequence[int]) -> List[int]:
    """Merge tree of the sweep visiting vertices in `order`; key[v] is v's position in it."""
    uf = UnionFind(len(order))
    head = list(range(len(order)))  # most recently swept vertex of each component
    parent = [-1] * len(order)
    for v in order:
        kv = key[v]
        for u in nbrs[ptr[v] : ptr[v + 1]]:
            if key[u] < kv:
                a = uf.find(u)
                b = uf.find(v)
                if a != b:
                    parent[head[a]] = v
                    head[uf.union(a, b)] = v
    return parent


def _merge(join_up: List[int], split_down: List[int]) -> List[tuple[int, int]]:
    """Peel leaves off the join and split trees into contour-tree arcs."""
    V = len(join_up)
    up, down = list(join_up), list(split_down)
    join_n, join_sum = [0] * V, [0] * V
    split_n, split_sum = [0] * V, [0] * V
    for v in range(V):
        if up[v] >= 0:
            join_n[up[v]] += 1
            join_sum[up[v]] += v
        if down[v] >= 0:
            split_n[down[v]] += 1
            split_sum[down[v]] += v

    removed = [False] * V
    queue = deque(v for v in range(V) if join_n[v] + split_n[v] == 1)
    arcs: List[tuple[int, int]] = []
    while queue and len(arcs) < V - 1:
        v = queue.popleft()
        if removed[v] or join_n[v] + split_n[v] != 1:
            continue
        if split_n[v] == 0:
            # upper leaf: arc runs down to its split-tree parent
            target = down[v]
            split_n[target] -= 1
            split_sum[target] -= v
            child, above = join_sum[v], up[v]
            up[child] = above
            if above >= 0:
                join_sum[above] += child - v
        else:
            target = up[v]
            join_n[target] -= 1
            join_sum[target] -= v
            child, below = split_sum[v], down[v]
            down[child] = below
            if below >= 0:
                split_sum[below] += child - v
        removed[v] = True
        arcs.append((v, target))
        if join_n[target] + split_n[target] == 1:
            queue.append(target)
    if len(arcs) != V - 1:
        raise InvariantViolation(f"contour tree merge produced {len(arcs)} arcs for {V} vertices")
    return arcs


def build_reeb(field: ScalarField) -> ReebTree:
    """Contour tree of F with every vertex as a node, rooted at the global minimum."""
    tri = field.tri
    check_closed_surface(tri)
    started = time.perf_counter()
    V = tri.vertex_count
    adj = tri.adjacency
    ptr = adj.indptr.tolist()
    nbrs = adj.indices.tolist()
    order = field.order.tolist()
    rank = field.rank.tolist()

    join_up = _sweep(order, rank, ptr, nbrs)
    split_down = _sweep(order[::-1], [V - 1 - r for r in rank], ptr, nbrs)
    arcs = np.array(_merge(join_up, split_down), dtype=np.int64).reshape(-1, 2)

    tree = ReebTree.from_arcs(arcs, field.min_vertex, field)
    logger.debug(
        "reeb tree N=%d: %d nodes, max depth %d, %.1f ms",
        tri.N,
        V,
        int(tree.depth.max()),
        1000.0 * (time.perf_counter() - started),
    )
    return tree


def _regular(tree: ReebTree) -> np.ndarray:
    """Degree-2 nodes with one lower and one higher tree neighbour."""
    rank = tree.rank
    lower = np.zeros(tree.node_count, dtype=np.int64)
    a, b = tree.arcs[:, 0], tree.arcs[:, 1]
    np.add.at(lower, np.where(rank[a] < rank[b], b, a), 1)
    return (tree.degree == 2) & (lower == 1)


def collapse(tree: ReebTree) -> nx.Graph:
    """Tree of critical nodes; regular nodes are suppressed into their arcs."""
    keep = ~_regular(tree)
    keep[tree.root] = True
    anchor = np.empty(tree.node_count, dtype=np.int64)
    for v in tree.bfs_order:
        anchor[v] = v if keep[v] else anchor[tree.parent[v]]

    graph = nx.Graph()
    for v in np.flatnonzero(keep):
        graph.add_node(int(v), value=float(tree.value[v]))
    for v in np.flatnonzero(keep):
        if v != tree.root:
            graph.add_edge(int(v), int(anchor[tree.parent[v]]))
    return graph


def critical_vertices(tree: ReebTree) -> Dict[str, List[int]]:
    """Minima, maxima and saddles read off the augmented tree."""
    rank = tree.rank
    a, b = tree.arcs[:, 0], tree.arcs[:, 1]
    low_end = np.where(rank[a] < rank[b], a, b)
    high_end = np.where(rank[a] < rank[b], b, a)
    up = np.bincount(low_end, minlength=tree.node_count)
    down = np.bincount(high_end, minlength=tree.node_count)
    return {
        "minima": np.flatnonzero(down == 0).tolist(),
        "maxima": np.flatnonzero(up == 0).tolist(),
        "saddles": np.flatnonzero((up > 1) | (down > 1)).tolist(),
    }


def superlevel_component_indicator(tree: ReebTree, field: ScalarField, s: float, median_node: int) -> int:
    """1 iff the median's level component lies in {F >= s}."""
    return int(field.values[median_node] >= s)


def tree_to_json(graph: nx.Graph) -> Dict[str, Any]:
    nodes = [
        {"id": int(v), "value": float(data["value"]), "degree": int(graph.degree[v])}
        for v, data in sorted(graph.nodes(data=True))
    ]
    edges = sorted([sorted((int(u), int(v))) for u, v in graph.edges()])
    return {"nodes": nodes, "edges": edges}
