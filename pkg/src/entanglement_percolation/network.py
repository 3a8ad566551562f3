"""Chains and 2D lattices whose edges carry copies of pure bond states.

Node numbering is dense and deterministic: chain node ``i``; square and
triangular cell ``(i, j)`` is node ``j * L + i``; honeycomb cell ``(i, j)``
holds node ``2 * (j * L + i)`` on sublattice A and the next index on B.
Every edge records the integer cell displacement ``shift`` from ``u`` to ``v``
as measured across the boundary, which is what winding detection needs.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

import networkx as nx
import numpy as np

from .models import SchmidtVector, StateError
from .schemas import validate_document
from .state_algebra import average_scp, bell_swap, tensor

logger = logging.getLogger(__name__)

LATTICE_KINDS = ("chain", "square", "triangular", "honeycomb")
BOUNDARIES = ("open", "periodic")

_SQRT3 = math.sqrt(3.0)
# nearest-neighbour cell steps emitted per node, in this order
_STEPS = {
    "chain": ((1, 0),),
    "square": ((1, 0), (0, 1)),
    "triangular": ((1, 0), (0, 1), (1, -1)),
}
# honeycomb A(i, j) bonds to B(i, j), B(i - 1, j), B(i, j - 1), in cyclic order
_HONEYCOMB_STEPS = ((0, 0), (-1, 0), (0, -1))


class NetworkError(ValueError):
    """Raised when a lattice spec, edge list or network document is invalid."""


@dataclass(frozen=True, slots=True)
class LatticeSpec:
    kind: str
    L: int
    boundary: str = "periodic"

    def __post_init__(self) -> None:
        if self.kind not in LATTICE_KINDS:
            raise NetworkError(
                f"Unsupported lattice kind '{self.kind}'. Expected one of: {', '.join(LATTICE_KINDS)}."
            )
        if self.boundary not in BOUNDARIES:
            raise NetworkError(f"Unsupported boundary '{self.boundary}'. Expected open or periodic.")
        if isinstance(self.L, bool) or not isinstance(self.L, (int, np.integer)) or self.L < 2:
            raise NetworkError(f"Lattice size L must be an integer >= 2, got {self.L!r}.")
        if self.kind == "chain" and self.boundary == "periodic":
            raise NetworkError("Chains only support open boundaries.")
        object.__setattr__(self, "L", int(self.L))

    @property
    def n_nodes(self) -> int:
        if self.kind == "chain":
            return self.L
        if self.kind == "honeycomb":
            return 2 * self.L * self.L
        return self.L * self.L


@dataclass(frozen=True, slots=True)
class Edge:
    u: int
    v: int
    copies: tuple[SchmidtVector, ...]
    shift: tuple[int, int] = (0, 0)

    def __post_init__(self) -> None:
        if self.u == self.v:
            raise NetworkError(f"Self-loop on node {self.u} is not allowed.")
        if self.u < 0 or self.v < 0:
            raise NetworkError(f"Node ids must be non-negative, got ({self.u}, {self.v}).")
        copies = tuple(self.copies)
        if not copies:
            raise NetworkError(f"Edge ({self.u}, {self.v}) needs at least one bond copy.")
        if not all(isinstance(c, SchmidtVector) for c in copies):
            raise NetworkError(f"Edge ({self.u}, {self.v}) copies must be SchmidtVectors.")
        object.__setattr__(self, "copies", copies)
        object.__setattr__(self, "shift", (int(self.shift[0]), int(self.shift[1])))

    @property
    def bond(self) -> SchmidtVector:
        return self.copies[0]

    def effective_state(self) -> SchmidtVector:
        """Tensor product of all copies: the single connection CEP converts."""
        state = self.copies[0]
        for copy in self.copies[1:]:
            state = tensor(state, copy)
        return state

    def key(self) -> tuple[int, int, tuple[int, int]]:
        if self.u < self.v:
            return (self.u, self.v, self.shift)
        return (self.v, self.u, (-self.shift[0], -self.shift[1]))


@dataclass(frozen=True, eq=False)
class Network:
    """Immutable network. ``spec`` is None for custom (imported) networks."""

    spec: Optional[LatticeSpec]
    n_nodes: int
    edges: tuple[Edge, ...]
    cells: Optional[np.ndarray] = None
    coords: Optional[np.ndarray] = None
    sublattice: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        seen: set[tuple[int, int, tuple[int, int]]] = set()
        for edge in self.edges:
            if edge.u >= self.n_nodes or edge.v >= self.n_nodes:
                raise NetworkError(
                    f"Edge ({edge.u}, {edge.v}) references a node outside 0..{self.n_nodes - 1}."
                )
            key = edge.key()
            if key in seen:
                raise NetworkError(f"Duplicate edge ({edge.u}, {edge.v}) with shift {edge.shift}.")
            seen.add(key)
        if not self.sublattice:
            object.__setattr__(self, "sublattice", ("",) * self.n_nodes)

    @property
    def kind(self) -> str:
        return self.spec.kind if self.spec is not None else "custom"

    @property
    def L(self) -> Optional[int]:
        return self.spec.L if self.spec is not None else None

    @property
    def boundary(self) -> Optional[str]:
        return self.spec.boundary if self.spec is not None else None

    @property
    def has_geometry(self) -> bool:
        return self.cells is not None

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_u(self) -> np.ndarray:
        return np.asarray([e.u for e in self.edges], dtype=np.int64)

    @cached_property
    def edge_v(self) -> np.ndarray:
        return np.asarray([e.v for e in self.edges], dtype=np.int64)

    @cached_property
    def edge_shift(self) -> np.ndarray:
        return np.asarray([e.shift for e in self.edges], dtype=np.int64).reshape(-1, 2)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_nodes, dtype=np.int64)
        np.add.at(deg, self.edge_u, 1)
        np.add.at(deg, self.edge_v, 1)
        return deg

    @cached_property
    def _adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n_nodes)]
        for edge in self.edges:
            adj[edge.u].append(edge.v)
            adj[edge.v].append(edge.u)
        return tuple(tuple(row) for row in adj)

    def neighbours(self, node: int) -> tuple[int, ...]:
        self.check_node(node)
        return self._adjacency[node]

    @cached_property
    def _graph(self) -> nx.MultiGraph:
        graph = nx.MultiGraph()
        graph.add_nodes_from(range(self.n_nodes))
        graph.add_edges_from((e.u, e.v) for e in self.edges)
        return graph

    def to_networkx(self) -> nx.MultiGraph:
        """Multigraph view; parallel wrap bonds stay separate edges."""
        return self._graph.copy()

    def check_node(self, node: int) -> None:
        if not 0 <= int(node) < self.n_nodes:
            raise NetworkError(f"Node {node} is outside 0..{self.n_nodes - 1}.")

    def node_at(self, cell: tuple[int, int], sublattice: str = "") -> int:
        if self.spec is None:
            raise NetworkError("Custom networks have no cell coordinates.")
        L = self.spec.L
        i, j = int(cell[0]), int(cell[1])
        if self.spec.kind == "chain":
            return _wrap_or_raise(i, L, self.spec.boundary)
        i = _wrap_or_raise(i, L, self.spec.boundary)
        j = _wrap_or_raise(j, L, self.spec.boundary)
        base = j * L + i
        if self.spec.kind == "honeycomb":
            if sublattice not in ("A", "B"):
                raise NetworkError("Honeycomb nodes need sublattice 'A' or 'B'.")
            return 2 * base + (1 if sublattice == "B" else 0)
        return base


def _wrap_or_raise(i: int, L: int, boundary: str) -> int:
    if boundary == "periodic":
        return i % L
    if not 0 <= i < L:
        raise NetworkError(f"Cell index {i} outside 0..{L - 1} on an open lattice.")
    return i


def _geometry(spec: LatticeSpec) -> tuple[np.ndarray, np.ndarray, tuple[str, ...]]:
    L = spec.L
    if spec.kind == "chain":
        cells = np.stack([np.arange(L), np.zeros(L, dtype=np.int64)], axis=1).astype(np.int64)
        return cells, cells.astype(np.float64), ("",) * L

    jj, ii = np.divmod(np.arange(L * L), L)
    base = np.stack([ii, jj], axis=1).astype(np.int64)
    if spec.kind == "square":
        return base, base.astype(np.float64), ("",) * (L * L)
    if spec.kind == "triangular":
        coords = np.stack([ii + 0.5 * jj, jj * (_SQRT3 / 2.0)], axis=1)
        return base, coords, ("",) * (L * L)

    # honeycomb: cell origin i*a1 + j*a2, B displaced to the centre of the A triangle
    origin = np.stack([_SQRT3 * ii + (_SQRT3 / 2.0) * jj, 1.5 * jj], axis=1)
    cells = np.repeat(base, 2, axis=0)
    coords = np.empty((2 * L * L, 2), dtype=np.float64)
    coords[0::2] = origin
    coords[1::2] = origin + np.array([_SQRT3 / 2.0, 0.5])
    return cells, coords, ("A", "B") * (L * L)


def _lattice_links(spec: LatticeSpec) -> list[tuple[int, int, tuple[int, int]]]:
    L = spec.L
    periodic = spec.boundary == "periodic"
    links: list[tuple[int, int, tuple[int, int]]] = []

    if spec.kind == "chain":
        return [(i, i + 1, (1, 0)) for i in range(L - 1)]

    if spec.kind == "honeycomb":
        for j in range(L):
            for i in range(L):
                a = 2 * (j * L + i)
                for di, dj in _HONEYCOMB_STEPS:
                    ni, nj = i + di, j + dj
                    if not periodic and (ni < 0 or nj < 0):
                        continue
                    b = 2 * ((nj % L) * L + (ni % L)) + 1
                    links.append((a, b, (di, dj)))
        return links

    for j in range(L):
        for i in range(L):
            node = j * L + i
            for di, dj in _STEPS[spec.kind]:
                ni, nj = i + di, j + dj
                if not periodic and not (0 <= ni < L and 0 <= nj < L):
                    continue
                links.append((node, (nj % L) * L + (ni % L), (di, dj)))
    return links


def build_lattice(spec: LatticeSpec, bond: SchmidtVector, copies_per_edge: int = 1) -> Network:
    """Build `spec` with every edge carrying `copies_per_edge` copies of `bond`."""
    if copies_per_edge < 1:
        raise NetworkError(f"copies_per_edge must be >= 1, got {copies_per_edge}.")
    copies = (bond,) * int(copies_per_edge)
    edges = tuple(Edge(u, v, copies, shift) for u, v, shift in _lattice_links(spec))
    cells, coords, sublattice = _geometry(spec)
    logger.debug("built %s L=%d (%s): %d nodes, %d edges", spec.kind, spec.L, spec.boundary,
                 spec.n_nodes, len(edges))
    return Network(spec, spec.n_nodes, edges, cells, coords, sublattice)


def custom_network(
    n_nodes: int,
    edges: Iterable[tuple[int, int, Sequence[SchmidtVector]]],
) -> Network:
    """Explicit edge-list network without lattice geometry."""
    if n_nodes < 1:
        raise NetworkError(f"Custom networks need at least one node, got {n_nodes}.")
    built = tuple(Edge(int(u), int(v), tuple(copies)) for u, v, copies in edges)
    return Network(None, int(n_nodes), built)


def cycle_network(n: int, bond: SchmidtVector) -> Network:
    if n < 3:
        raise NetworkError(f"A cycle needs at least 3 nodes, got {n}.")
    return custom_network(n, ((i, (i + 1) % n, (bond,)) for i in range(n)))


def graph_distance(net: Network, a: int, b: int) -> Optional[int]:
    """Shortest path length in edge hops, or None when `b` is unreachable."""
    net.check_node(a)
    net.check_node(b)
    try:
        return int(nx.shortest_path_length(net._graph, int(a), int(b)))
    except nx.NetworkXNoPath:
        return None


def pairs_at_distances(
    net: Network,
    distances: Sequence[int],
    sources: Optional[Sequence[int]] = None,
    max_sources: int = 16,
) -> dict[int, list[tuple[int, int]]]:
    """Deterministic (source, target) pairs grouped by graph distance.

    For each source the target is the lowest-numbered node at that distance.
    Distances no source reaches map to an empty list.
    """
    if sources is None:
        count = min(max_sources, net.n_nodes)
        sources = sorted({int(x) for x in np.linspace(0, net.n_nodes - 1, count).round()})
    wanted = sorted({int(d) for d in distances})
    if any(d < 0 for d in wanted):
        raise NetworkError("Distances must be non-negative.")
    cutoff = max(wanted) if wanted else 0

    pairs: dict[int, list[tuple[int, int]]] = {d: [] for d in wanted}
    for src in sources:
        net.check_node(src)
        lengths = nx.single_source_shortest_path_length(net._graph, int(src), cutoff=cutoff)
        first: dict[int, int] = {}
        for node, dist in lengths.items():
            if dist not in first or node < first[dist]:
                first[dist] = node
        for d in wanted:
            if d in first:
                pairs[d].append((int(src), first[d]))
    return pairs


def honeycomb_to_triangular(net: Network) -> tuple[Network, list[float]]:
    """Swap at every A node of a doubled-bond honeycomb to get a triangular lattice.

    Each A node pairs its three incident edges cyclically, (e1, e2), (e2, e3),
    (e3, e1), and Bell-swaps one copy from each edge of a pair, bonding the two
    B neighbours. Every copy is consumed exactly once. New edges carry the
    qubit state whose SCP equals the averaged SCP of the swap; the returned
    list holds that SCP per new edge, in edge order.
    """
    if net.spec is None or net.spec.kind != "honeycomb":
        raise NetworkError(f"honeycomb_to_triangular needs a honeycomb network, got '{net.kind}'.")
    if net.spec.boundary != "periodic":
        raise NetworkError("honeycomb_to_triangular needs periodic boundaries.")
    for edge in net.edges:
        if len(edge.copies) != 2:
            raise NetworkError(
                f"Edge ({edge.u}, {edge.v}) carries {len(edge.copies)} copies, expected exactly 2."
            )
        if edge.copies[0] != edge.copies[1]:
            raise NetworkError(f"Edge ({edge.u}, {edge.v}) carries heterogeneous copies.")
        if edge.copies[0].dim != 2:
            raise NetworkError(f"Edge ({edge.u}, {edge.v}) bond is not a qubit state.")

    L = net.spec.L
    incident: dict[int, list[int]] = {}
    for idx, edge in enumerate(net.edges):
        for node in (edge.u, edge.v):
            if net.sublattice[node] == "A":
                incident.setdefault(node, []).append(idx)

    used = [0] * net.n_edges
    new_edges: list[Edge] = []
    p_edges: list[float] = []
    for a_node in sorted(incident):
        ring = incident[a_node]
        if len(ring) != 3:
            raise NetworkError(f"Node {a_node} has {len(ring)} incident edges, expected 3.")
        arms = [_arm(net, a_node, idx) for idx in ring]
        for k in range(3):
            (ex, bx, sx), (ey, by, sy) = arms[k], arms[(k + 1) % 3]
            copy_x = net.edges[ex].copies[used[ex]]
            copy_y = net.edges[ey].copies[used[ey]]
            used[ex] += 1
            used[ey] += 1

            p = average_scp(bell_swap(copy_x, copy_y))
            u = _b_to_triangular(net, bx, L)
            v = _b_to_triangular(net, by, L)
            shift = (sy[0] - sx[0], sy[1] - sx[1])
            new_edges.append(Edge(u, v, (SchmidtVector.qubit(1.0 - p / 2.0),), shift))
            p_edges.append(p)

    if any(count != 2 for count in used):
        raise NetworkError("Swap pairing left bond copies unconsumed.")

    spec = LatticeSpec("triangular", L, "periodic")
    cells, coords, sublattice = _geometry(spec)
    tri = Network(spec, spec.n_nodes, tuple(new_edges), cells, coords, sublattice)
    logger.info("honeycomb L=%d -> triangular: %d swaps, %d new edges", L, len(new_edges),
                tri.n_edges)
    return tri, p_edges


def _arm(net: Network, a_node: int, idx: int) -> tuple[int, int, tuple[int, int]]:
    edge = net.edges[idx]
    if edge.u == a_node:
        return idx, edge.v, edge.shift
    return idx, edge.u, (-edge.shift[0], -edge.shift[1])


def _b_to_triangular(net: Network, b_node: int, L: int) -> int:
    i, j = (int(x) for x in net.cells[b_node])
    return j * L + i


def network_to_dict(net: Network) -> dict[str, Any]:
    return {
        "kind": net.kind,
        "L": net.L,
        "boundary": net.boundary,
        "nodes": net.n_nodes,
        "edges": [[e.u, e.v, [list(c.coeffs) for c in e.copies]] for e in net.edges],
        "shifts": [list(e.shift) for e in net.edges],
    }


def network_from_dict(doc: Mapping[str, Any]) -> Network:
    validate_document(doc, "network", NetworkError)
    shifts = doc.get("shifts") or [[0, 0]] * len(doc["edges"])
    if len(shifts) != len(doc["edges"]):
        raise NetworkError("Network document has a shifts list of the wrong length.")
    try:
        edges = tuple(
            Edge(int(u), int(v), tuple(SchmidtVector(tuple(c)) for c in copies), tuple(shift))
            for (u, v, copies), shift in zip(doc["edges"], shifts)
        )
    except StateError as exc:
        raise NetworkError(f"Invalid bond state in network document: {exc}") from exc

    if doc["kind"] == "custom" or doc.get("L") is None:
        return Network(None, int(doc["nodes"]), edges)

    spec = LatticeSpec(doc["kind"], int(doc["L"]), doc.get("boundary") or "periodic")
    if spec.n_nodes != int(doc["nodes"]):
        raise NetworkError(
            f"Network document declares {doc['nodes']} nodes but {spec.kind} L={spec.L} has "
            f"{spec.n_nodes}."
        )
    cells, coords, sublattice = _geometry(spec)
    return Network(spec, spec.n_nodes, edges, cells, coords, sublattice)


def dump_network(net: Network, path: str | Path) -> Path:
    out = Path(path).expanduser().resolve()
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(network_to_dict(net), indent=2) + "\n", encoding="utf-8")
    return out


def load_network(path: str | Path) -> Network:
    src = Path(path).expanduser().resolve()
    if not src.exists():
        raise NetworkError(f"Network file not found: {src}")
    try:
        raw = json.loads(src.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise NetworkError(f"Failed to parse network JSON: {src}") from exc
    return network_from_dict(raw)
