"""Connectivity graphs for the reference compiler."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import networkx as nx

from ..generators import GeometrySpec

GRAPH_KINDS = ("heavy-hexagon", "grid", "line", "complete")
_ALIASES = {"heavyhex": "heavy-hexagon", "heavy-hex": "heavy-hexagon", "all-to-all": "complete"}


@dataclass(frozen=True)
class ConnectivityGraph:
    name: str
    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        norm = frozenset(tuple(sorted(e)) for e in self.edges)
        object.__setattr__(self, "edges", norm)
        if self.n > 1 and not nx.is_connected(self.graph):
            raise ValueError(f"{self.name} graph on {self.n} nodes is disconnected")

    @cached_property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g

    @cached_property
    def _paths(self) -> dict:
        return dict(nx.all_pairs_shortest_path(self.graph))

    def adjacent(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def shortest_path(self, a: int, b: int) -> list[int]:
        return self._paths[a][b]

    def distance(self, a: int, b: int) -> int:
        return len(self._paths[a][b]) - 1

    @classmethod
    def line(cls, n: int) -> ConnectivityGraph:
        return cls("line", n, frozenset((i, i + 1) for i in range(n - 1)))

    @classmethod
    def complete(cls, n: int) -> ConnectivityGraph:
        return cls("complete", n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))

    @classmethod
    def grid(cls, n: int) -> ConnectivityGraph:
        return cls("grid", n, frozenset(GeometrySpec.grid_for(n).edges(n)))

    @classmethod
    def heavy_hex(cls, n: int) -> ConnectivityGraph:
        """Connected ``n``-node patch of a heavy-hexagon lattice."""
        lattice = heavy_hex_lattice(rows=max(3, n // 8 + 2), row_len=max(11, n // 2 + 3))
        order = list(nx.bfs_tree(lattice, source=(0, 1, 4)))[:n]
        if len(order) < n:
            raise ValueError(f"heavy-hex lattice too small for {n} qubits")
        index = {node: i for i, node in enumerate(order)}
        sub = lattice.subgraph(order)
        return cls("heavy-hexagon", n, frozenset((index[a], index[b]) for a, b in sub.edges))

    @classmethod
    def from_name(cls, name: str, n: int) -> ConnectivityGraph:
        name = _ALIASES.get(name, name)
        if name == "heavy-hexagon":
            return cls.heavy_hex(n)
        if name == "grid":
            return cls.grid(n)
        if name == "line":
            return cls.line(n)
        if name == "complete":
            return cls.complete(n)
        raise ValueError(f"unknown connectivity {name!r}; choose from {GRAPH_KINDS}")


def heavy_hex_lattice(rows: int, row_len: int) -> nx.Graph:
    """Rows of degree-2 qubits joined by bridge qubits every fourth column.

    Nodes are ``(0, r, c)`` for row qubits and ``(1, r, c)`` for the bridge
    between rows ``r`` and ``r + 1`` at column ``c``.
    """
    g = nx.Graph()
    for r in range(rows):
        for c in range(row_len - 1):
            g.add_edge((0, r, c), (0, r, c + 1))
    for r in range(rows - 1):
        for c in range(0 if r % 2 == 0 else 2, row_len, 4):
            g.add_edge((0, r, c), (1, r, c))
            g.add_edge((1, r, c), (0, r + 1, c))
    return g
