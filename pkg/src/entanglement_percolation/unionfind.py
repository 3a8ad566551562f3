"""Disjoint-set forest with per-node displacement tracking.

Each node stores its cell displacement relative to its parent, so a bond
closing a loop inside one cluster reveals the loop's winding vector. A
nonzero winding component means the cluster wraps that periodic axis.
"""

from __future__ import annotations

from collections import defaultdict

import numpy as np
from numba import njit


class PercolationError(ValueError):
    """Raised for invalid percolation parameters or unsupported queries."""


@njit(nogil=True, cache=True)
def _find(parent, shift, i):
    root = i
    tx = 0
    ty = 0
    while parent[root] != root:
        tx += shift[root, 0]
        ty += shift[root, 1]
        root = parent[root]

    # path compression; shift[node] becomes the displacement to the root
    node = i
    cx = tx
    cy = ty
    while node != root:
        nxt = parent[node]
        sx = shift[node, 0]
        sy = shift[node, 1]
        parent[node] = root
        shift[node, 0] = cx
        shift[node, 1] = cy
        cx -= sx
        cy -= sy
        node = nxt
    return root, tx, ty


@njit(nogil=True, cache=True)
def _union(parent, size, shift, u, v, dx, dy):
    ru, ux, uy = _find(parent, shift, u)
    rv, vx, vy = _find(parent, shift, v)
    ox = ux + dx - vx
    oy = uy + dy - vy
    if ru == rv:
        return False, ox, oy
    if size[ru] < size[rv]:
        parent[ru] = rv
        shift[ru, 0] = -ox
        shift[ru, 1] = -oy
        size[rv] += size[ru]
    else:
        parent[rv] = ru
        shift[rv, 0] = ox
        shift[rv, 1] = oy
        size[ru] += size[rv]
    return True, 0, 0


@njit(nogil=True, cache=True)
def _union_open_edges(parent, size, shift, eu, ev, es, is_open):
    wrap_x = False
    wrap_y = False
    for e in range(eu.shape[0]):
        if is_open[e]:
            merged, wx, wy = _union(parent, size, shift, eu[e], ev[e], es[e, 0], es[e, 1])
            if not merged:
                if wx != 0:
                    wrap_x = True
                if wy != 0:
                    wrap_y = True
    return wrap_x, wrap_y


@njit(nogil=True, cache=True)
def _all_roots(parent, shift):
    n = parent.shape[0]
    roots = np.empty(n, dtype=np.int64)
    for i in range(n):
        r, _, _ = _find(parent, shift, i)
        roots[i] = r
    return roots


class UnionFind:
    """Union by size with path compression over nodes ``0..n-1``."""

    def __init__(self, n: int) -> None:
        if n < 0:
            raise PercolationError(f"UnionFind size must be >= 0, got {n}.")
        self.parent = np.arange(n, dtype=np.int64)
        self.size = np.ones(n, dtype=np.int64)
        self.shift = np.zeros((n, 2), dtype=np.int64)
        self.wraps = [False, False]

    def __len__(self) -> int:
        return int(self.parent.shape[0])

    def find(self, i: int) -> int:
        root, _, _ = _find(self.parent, self.shift, int(i))
        return int(root)

    def offset(self, i: int) -> tuple[int, int]:
        """Displacement of `i` relative to its root, in cell units."""
        _, tx, ty = _find(self.parent, self.shift, int(i))
        return int(tx), int(ty)

    def union(self, a: int, b: int, shift: tuple[int, int] = (0, 0)) -> bool:
        """Join the sets of `a` and `b`; `shift` is the displacement from a to b.

        Returns False when both were already in one set.
        """
        merged, wx, wy = _union(
            self.parent, self.size, self.shift, int(a), int(b), int(shift[0]), int(shift[1])
        )
        if not merged:
            self.wraps[0] = self.wraps[0] or wx != 0
            self.wraps[1] = self.wraps[1] or wy != 0
        return bool(merged)

    def union_edges(
        self,
        edge_u: np.ndarray,
        edge_v: np.ndarray,
        edge_shift: np.ndarray,
        is_open: np.ndarray,
    ) -> None:
        wx, wy = _union_open_edges(
            self.parent,
            self.size,
            self.shift,
            np.ascontiguousarray(edge_u, dtype=np.int64),
            np.ascontiguousarray(edge_v, dtype=np.int64),
            np.ascontiguousarray(edge_shift, dtype=np.int64).reshape(-1, 2),
            np.ascontiguousarray(is_open, dtype=np.bool_),
        )
        self.wraps[0] = self.wraps[0] or bool(wx)
        self.wraps[1] = self.wraps[1] or bool(wy)

    def roots(self) -> np.ndarray:
        return _all_roots(self.parent, self.shift)

    def component_sizes(self) -> np.ndarray:
        """Sizes of all components, largest first."""
        if len(self) == 0:
            return np.zeros(0, dtype=np.int64)
        counts = np.bincount(self.roots(), minlength=len(self))
        return np.sort(counts[counts > 0])[::-1]

    def components(self) -> list[list[int]]:
        groups: dict[int, list[int]] = defaultdict(list)
        for node, root in enumerate(self.roots()):
            groups[int(root)].append(node)
        return sorted(groups.values())
