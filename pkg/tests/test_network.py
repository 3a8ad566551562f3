from __future__ import annotations

import json
import math
from collections import Counter

import numpy as np
import pytest

from entanglement_percolation.models import SchmidtVector
from entanglement_percolation.network import (
    Edge,
    LatticeSpec,
    Network,
    NetworkError,
    build_lattice,
    custom_network,
    cycle_network,
    dump_network,
    graph_distance,
    honeycomb_to_triangular,
    load_network,
    network_from_dict,
    network_to_dict,
    pairs_at_distances,
)
from entanglement_percolation.state_algebra import scp

BELL = SchmidtVector.bell()


@pytest.mark.parametrize(
    "kind,boundary,L,n_nodes,n_edges",
    [
        ("chain", "open", 10, 10, 9),
        ("square", "periodic", 6, 36, 72),
        ("square", "open", 6, 36, 60),
        ("triangular", "periodic", 6, 36, 108),
        ("triangular", "open", 6, 36, 85),
        ("honeycomb", "periodic", 6, 72, 108),
        ("honeycomb", "open", 6, 72, 96),
    ],
)
def test_lattice_sizes(kind, boundary, L, n_nodes, n_edges):
    net = build_lattice(LatticeSpec(kind, L, boundary), BELL)
    assert net.n_nodes == n_nodes
    assert net.n_edges == n_edges


@pytest.mark.parametrize("kind,degree", [("square", 4), ("triangular", 6), ("honeycomb", 3)])
def test_periodic_lattices_are_regular(kind, degree):
    for L in (2, 3, 8):
        net = build_lattice(LatticeSpec(kind, L, "periodic"), BELL)
        assert set(net.degrees().tolist()) == {degree}


def test_periodic_l2_keeps_parallel_wrap_bonds():
    net = build_lattice(LatticeSpec("square", 2, "periodic"), BELL)
    assert net.n_edges == 8
    assert net.to_networkx().number_of_edges() == 8


def test_lattice_spec_validation():
    with pytest.raises(NetworkError):
        LatticeSpec("kagome", 4)
    with pytest.raises(NetworkError):
        LatticeSpec("square", 1)
    with pytest.raises(NetworkError):
        LatticeSpec("chain", 5, "periodic")
    with pytest.raises(NetworkError):
        LatticeSpec("square", 4, "twisted")


def test_edges_reject_self_loops_and_duplicates():
    with pytest.raises(NetworkError):
        Edge(1, 1, (BELL,))
    with pytest.raises(NetworkError):
        Edge(0, 1, ())
    with pytest.raises(NetworkError):
        custom_network(3, [(0, 1, [BELL]), (1, 0, [BELL])])
    with pytest.raises(NetworkError):
        custom_network(2, [(0, 2, [BELL])])


def test_copies_per_edge_and_effective_state():
    bond = SchmidtVector.qubit(0.823)
    net = build_lattice(LatticeSpec("honeycomb", 4, "periodic"), bond, copies_per_edge=2)
    assert all(len(e.copies) == 2 for e in net.edges)
    effective = net.edges[0].effective_state()
    assert effective.dim == 4
    assert scp(effective) == pytest.approx(2.0 * (1.0 - 0.823**2), abs=1e-12)
    with pytest.raises(NetworkError):
        build_lattice(LatticeSpec("square", 4), bond, copies_per_edge=0)


def test_node_numbering():
    sq = build_lattice(LatticeSpec("square", 5, "periodic"), BELL)
    assert sq.node_at((2, 3)) == 3 * 5 + 2
    assert sq.node_at((-1, 0)) == 4
    hc = build_lattice(LatticeSpec("honeycomb", 5, "periodic"), BELL)
    assert hc.node_at((2, 3), "A") == 2 * (3 * 5 + 2)
    assert hc.node_at((2, 3), "B") == 2 * (3 * 5 + 2) + 1
    assert hc.sublattice[hc.node_at((2, 3), "B")] == "B"
    with pytest.raises(NetworkError):
        hc.node_at((0, 0))
    open_sq = build_lattice(LatticeSpec("square", 5, "open"), BELL)
    with pytest.raises(NetworkError):
        open_sq.node_at((5, 0))


def test_honeycomb_open_bonds_have_unit_length():
    net = build_lattice(LatticeSpec("honeycomb", 5, "open"), BELL)
    lengths = np.linalg.norm(net.coords[net.edge_u] - net.coords[net.edge_v], axis=1)
    assert np.allclose(lengths, 1.0)


def test_graph_distance():
    chain = build_lattice(LatticeSpec("chain", 8, "open"), BELL)
    assert graph_distance(chain, 0, 5) == 5
    sq = build_lattice(LatticeSpec("square", 8, "periodic"), BELL)
    assert graph_distance(sq, sq.node_at((0, 0)), sq.node_at((4, 4))) == 8
    assert graph_distance(sq, 0, sq.node_at((7, 0))) == 1
    split = custom_network(4, [(0, 1, [BELL]), (2, 3, [BELL])])
    assert graph_distance(split, 0, 3) is None


def test_pairs_at_distances_on_chain():
    chain = build_lattice(LatticeSpec("chain", 10, "open"), BELL)
    pairs = pairs_at_distances(chain, [1, 3, 20], sources=[0])
    assert pairs[1] == [(0, 1)]
    assert pairs[3] == [(0, 3)]
    assert pairs[20] == []


def test_honeycomb_to_triangular_structure():
    bond = SchmidtVector.qubit(0.823)
    hc = build_lattice(LatticeSpec("honeycomb", 4, "periodic"), bond, copies_per_edge=2)
    tri, p_edges = honeycomb_to_triangular(hc)

    reference = build_lattice(LatticeSpec("triangular", 4, "periodic"), BELL)
    assert tri.kind == "triangular"
    assert tri.n_nodes == 16
    assert tri.n_edges == 3 * 16
    assert Counter(e.key() for e in tri.edges) == Counter(e.key() for e in reference.edges)
    assert set(tri.degrees().tolist()) == {6}

    assert len(p_edges) == tri.n_edges
    assert all(p == pytest.approx(2.0 * (1.0 - 0.823), abs=1e-12) for p in p_edges)
    assert all(scp(e.bond) == pytest.approx(p, abs=1e-12) for e, p in zip(tri.edges, p_edges))


def test_honeycomb_to_triangular_preconditions():
    bond = SchmidtVector.qubit(0.8)
    with pytest.raises(NetworkError):
        honeycomb_to_triangular(build_lattice(LatticeSpec("honeycomb", 4, "open"), bond, 2))
    with pytest.raises(NetworkError):
        honeycomb_to_triangular(build_lattice(LatticeSpec("honeycomb", 4, "periodic"), bond, 1))
    with pytest.raises(NetworkError):
        honeycomb_to_triangular(build_lattice(LatticeSpec("square", 4, "periodic"), bond, 2))


def test_network_document_round_trip(tmp_path):
    net = build_lattice(LatticeSpec("triangular", 3, "periodic"), SchmidtVector.qubit(0.7), 2)
    path = dump_network(net, tmp_path / "tri.json")
    loaded = load_network(path)

    assert loaded.kind == "triangular"
    assert loaded.n_edges == net.n_edges
    assert [e.key() for e in loaded.edges] == [e.key() for e in net.edges]
    assert loaded.edges[0].copies == net.edges[0].copies
    assert loaded.has_geometry


def test_custom_network_document():
    doc = {"kind": "custom", "nodes": 3, "edges": [[0, 1, [[0.8, 0.2]]], [1, 2, [[0.5, 0.5]]]]}
    net = network_from_dict(doc)
    assert net.kind == "custom"
    assert not net.has_geometry
    assert net.edges[0].bond == SchmidtVector.qubit(0.8)
    assert network_to_dict(net)["nodes"] == 3


def test_invalid_network_documents(tmp_path):
    with pytest.raises(NetworkError):
        network_from_dict({"kind": "custom", "nodes": 2, "edges": [[0, 1]]})
    with pytest.raises(NetworkError):
        network_from_dict({"kind": "custom", "nodes": 2, "edges": [[0, 1, [[0.9, 0.3]]]]})
    with pytest.raises(NetworkError):
        network_from_dict({"kind": "square", "L": 3, "nodes": 4, "edges": []})

    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(NetworkError):
        load_network(bad)
    with pytest.raises(NetworkError):
        load_network(tmp_path / "missing.json")
    assert json.loads(json.dumps(network_to_dict(cycle_network(4, BELL))))["nodes"] == 4


def test_cycle_network():
    net = cycle_network(4, BELL)
    assert isinstance(net, Network)
    assert net.n_edges == 4
    assert graph_distance(net, 0, 2) == 2
    assert math.isclose(float(net.degrees().mean()), 2.0)
    with pytest.raises(NetworkError):
        cycle_network(2, BELL)
