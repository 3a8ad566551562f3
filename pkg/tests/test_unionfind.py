from __future__ import annotations

import networkx as nx
import numpy as np
import pytest

from entanglement_percolation.percolation import PercolationError as PublicPercolationError
from entanglement_percolation.unionfind import PercolationError, UnionFind


def test_components_match_bfs_on_random_graphs():
    rng = np.random.default_rng(11)
    for _ in range(200):
        n = int(rng.integers(1, 51))
        m = int(rng.integers(0, 2 * n + 1))
        edges = [tuple(int(x) for x in rng.integers(0, n, size=2)) for _ in range(m)]

        uf = UnionFind(n)
        graph = nx.Graph()
        graph.add_nodes_from(range(n))
        for u, v in edges:
            uf.union(u, v)
            graph.add_edge(u, v)

        expected = sorted(sorted(c) for c in nx.connected_components(graph))
        assert uf.components() == expected
        assert sorted(uf.component_sizes().tolist()) == sorted(len(c) for c in expected)


def test_union_reports_merges():
    uf = UnionFind(4)
    assert uf.union(0, 1)
    assert uf.union(2, 3)
    assert not uf.union(1, 0)
    assert uf.union(1, 3)
    assert uf.find(0) == uf.find(2)
    assert uf.component_sizes().tolist() == [4]


def test_offsets_follow_shifts():
    uf = UnionFind(3)
    uf.union(0, 1, (1, 0))
    uf.union(1, 2, (0, 1))
    root = uf.find(0)
    ox, oy = uf.offset(2)
    rx, ry = uf.offset(root)
    assert (rx, ry) == (0, 0)
    ax, ay = uf.offset(0)
    assert (ox - ax, oy - ay) == (1, 1)


def test_ring_closure_detects_winding():
    n = 6
    uf = UnionFind(n)
    for i in range(n - 1):
        uf.union(i, i + 1, (1, 0))
    assert uf.wraps == [False, False]
    uf.union(n - 1, 0, (1, 0))
    assert uf.wraps == [True, False]


def test_contractible_loop_does_not_wrap():
    uf = UnionFind(4)
    # unit square: right, up, left, down
    uf.union(0, 1, (1, 0))
    uf.union(1, 2, (0, 1))
    uf.union(2, 3, (-1, 0))
    uf.union(3, 0, (0, -1))
    assert uf.wraps == [False, False]


def test_union_edges_only_uses_open_edges():
    uf = UnionFind(4)
    eu = np.array([0, 1, 2])
    ev = np.array([1, 2, 3])
    shifts = np.zeros((3, 2), dtype=np.int64)
    uf.union_edges(eu, ev, shifts, np.array([True, False, True]))
    assert uf.components() == [[0, 1], [2, 3]]


def test_empty_union_find():
    uf = UnionFind(0)
    assert len(uf) == 0
    assert uf.component_sizes().size == 0
    assert uf.components() == []


def test_negative_size_raises_percolation_error():
    with pytest.raises(PercolationError):
        UnionFind(-1)
    assert PublicPercolationError is PercolationError
