"""Disjoint-set forest over the integers 0..n-1."""

from __future__ import annotations


class UnionFind:
    """Union by rank with path compression; every element starts as a singleton."""

    def __init__(self, n: int) -> None:
        self._parents = list(range(n))
        self._ranks = [0] * n

    def find(self, a: int) -> int:
        parents = self._parents
        root = a
        while parents[root] != root:
            root = parents[root]
        while parents[a] != root:
            parents[a], a = root, parents[a]
        return root

    def union(self, a: int, b: int) -> int:
        """Merge the sets of a and b and return the new representative."""
        root_a = self.find(a)
        root_b = self.find(b)
        if root_a == root_b:
            return root_a
        rank_a = self._ranks[root_a]
        rank_b = self._ranks[root_b]
        if rank_a < rank_b:
            root_a, root_b = root_b, root_a
        self._parents[root_b] = root_a
        if rank_a == rank_b:
            self._ranks[root_a] += 1
        return root_a

    def same(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)
