"""Greedy SWAP routing and permutation networks."""
from __future__ import annotations

from collections.abc import Iterable

import networkx as nx
import numpy as np

from ..circuit import GateOp, QubitPermutation, tq
from .graphs import ConnectivityGraph


class RoutingError(ValueError):
    pass


def route_gates(
    gates: Iterable[GateOp],
    graph: ConnectivityGraph,
    layout: list[int],
) -> tuple[list[GateOp], list[int], int]:
    """Map logical gates onto ``graph``, inserting SWAP gates.

    ``layout[i]`` is the physical home of logical qubit ``i`` and is updated
    in place.  Returns the physical gate list, the final layout, and the
    number of SWAPs added.
    """
    inv = [0] * graph.n
    for logical, phys in enumerate(layout):
        inv[phys] = logical
    out: list[GateOp] = []
    swaps = 0
    for g in gates:
        if len(g.qubits) == 2:
            a, b = g.qubits
            pa, pb = layout[a], layout[b]
            if not graph.adjacent(pa, pb):
                path = graph.shortest_path(pa, pb)
                if len(path) < 2:
                    raise RoutingError(f"no path between physical qubits {pa} and {pb}")
                for u, v in zip(path[:-2], path[1:-1]):
                    out.append(tq("SWAP", u, v))
                    lu, lv = inv[u], inv[v]
                    inv[u], inv[v] = lv, lu
                    layout[lu], layout[lv] = v, u
                    swaps += 1
        out.append(g.relabel(layout))
    return out, layout, swaps


def permutation_swaps(graph: ConnectivityGraph, current: QubitPermutation, target: QubitPermutation) -> list[tuple[int, int]]:
    """SWAP edges moving each token from ``current`` to ``target`` position.

    Leaf-elimination on a spanning tree, so every SWAP lies on an edge.
    """
    n = graph.n
    pos = list(current.image)
    dest = list(target.image)
    occupant = [0] * n
    for t, p in enumerate(pos):
        occupant[p] = t
    tree = nx.bfs_tree(graph.graph, 0).to_undirected()
    remaining = set(range(n))
    out: list[tuple[int, int]] = []
    while len(remaining) > 1:
        sub = tree.subgraph(remaining)
        leaf = next(v for v in sorted(remaining) if sub.degree(v) <= 1)
        token = dest.index(leaf)
        path = nx.shortest_path(sub, pos[token], leaf)
        for u, v in zip(path[:-1], path[1:]):
            tu, tv = occupant[u], occupant[v]
            occupant[u], occupant[v] = tv, tu
            pos[tu], pos[tv] = v, u
            out.append((u, v))
        remaining.discard(leaf)
    return out


def random_layout(n_logical: int, graph: ConnectivityGraph, rng: np.random.Generator) -> list[int]:
    return [int(i) for i in rng.permutation(graph.n)[:n_logical]]
