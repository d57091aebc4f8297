"""Graph normalisation and edge-list parsing shared by the graph problems."""

from __future__ import annotations

from typing import Iterable, Union

import networkx as nx

from qubo_approx.errors import InstanceError
from qubo_approx.problems._base import header_value

GraphLike = Union[nx.Graph, Iterable[tuple[int, int]]]


def normalize_graph(g: GraphLike, n_nodes: int | None = None) -> nx.Graph:
    """Return a simple undirected graph labelled 0..n-1 (sorted original order)."""
    if isinstance(g, nx.Graph):
        if g.is_directed() or g.is_multigraph():
            raise InstanceError("Graphs must be simple and undirected")
        src = g
    else:
        src = nx.Graph()
        src.add_edges_from((int(u), int(v)) for u, v in g)
        if n_nodes is not None:
            src.add_nodes_from(range(n_nodes))
    if nx.number_of_selfloops(src):
        raise InstanceError("Graphs must not contain self-loops")
    mapping = {node: idx for idx, node in enumerate(sorted(src.nodes))}
    out = nx.Graph()
    out.add_nodes_from(range(len(mapping)))
    out.add_edges_from((mapping[u], mapping[v]) for u, v in src.edges)
    return out


def parse_edge_list(rows: list[list[str]]) -> nx.Graph:
    """Rows of ``u v`` plus an optional ``nodes N`` line for isolated nodes."""
    g = nx.Graph()
    for parts in rows:
        if parts[0].lower() == "nodes":
            g.add_nodes_from(range(header_value(parts)))
            continue
        if len(parts) != 2:
            raise InstanceError(f"Edge lines need exactly two node ids, got {' '.join(parts)!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as e:
            raise InstanceError(f"Node ids must be integers: {' '.join(parts)!r}") from e
        if u == v:
            raise InstanceError(f"Self-loop on node {u}")
        g.add_edge(u, v)
    return g


def edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)
