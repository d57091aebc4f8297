from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np

from qubo_approx.errors import InstanceError, ParameterError
from qubo_approx.problems._base import (
    BaseProblem,
    DecodedSolution,
    ProblemInstance,
    ProblemKind,
    ProblemSpec,
    content_lines,
    header_value,
    positive_weight,
)
from qubo_approx.problems._graphs import GraphLike, normalize_graph, parse_edge_list
from qubo_approx.problems._penalties import add_squared_one_hot
from qubo_approx.qubo import ConstraintTag, QuboMatrix


@dataclass(frozen=True)
class GraphColoringData:
    graph: nx.Graph
    n_colors: int
    A: float
    B: float

    def edge_array(self) -> np.ndarray:
        return np.array(sorted(self.graph.edges), dtype=np.int64).reshape(-1, 2)


class GraphColoringProblem(BaseProblem):
    """Fixed-palette coloring; ``x_{v,i}`` (node v has color i) is index ``v*K + i``."""

    @property
    def spec(self) -> ProblemSpec:
        return ProblemSpec(
            kind=ProblemKind.GRAPH_COLORING,
            description="Color every node with one of K colors so that no edge is monochromatic.",
            metric="monochromatic edges",
            reference="|V|",
            size_notion="number of nodes |V| (K = 3)",
            has_hard_constraints=True,
            higher_is_better=False,
            optimum_reference=False,
        )

    def build(
        self, graph: GraphLike, n_colors: int, A: float | None = None, B: float = 1
    ) -> tuple[ProblemInstance, QuboMatrix]:
        K = int(n_colors)
        if K < 1:
            raise InstanceError(f"Graph coloring needs at least one color, got {n_colors}")
        g = normalize_graph(graph)
        V = g.number_of_nodes()
        if V == 0:
            raise InstanceError("Graph coloring needs at least one node")
        B = positive_weight("B", B)
        A = positive_weight("A", 1 + g.number_of_edges() * B if A is None else A)
        max_degree = max((deg for _, deg in g.degree), default=0)
        if not A > B * max_degree:
            raise ParameterError(f"Penalty A={A} must exceed B*max_degree={B * max_degree}")

        q = QuboMatrix(V * K)
        for v in range(V):
            add_squared_one_hot(q, [v * K + i for i in range(K)], A)
        for u, v in sorted(g.edges):
            for i in range(K):
                q.add_entry(u * K + i, v * K + i, B, ConstraintTag.SOFT)

        data = GraphColoringData(g, K, A, B)
        inst = ProblemInstance(kind=ProblemKind.GRAPH_COLORING, payload=data, n_variables=V * K, penalty_weights=(A, B))
        return inst, q

    def _grid(self, inst: ProblemInstance, bits: np.ndarray) -> np.ndarray:
        data: GraphColoringData = inst.payload
        return bits.astype(np.int64).reshape(data.graph.number_of_nodes(), data.n_colors)

    def _clashes(self, data: GraphColoringData, X: np.ndarray) -> int:
        edges = data.edge_array()
        if not len(edges):
            return 0
        return int((X[edges[:, 0]] * X[edges[:, 1]]).sum())

    def decode_bits(self, inst: ProblemInstance, bits: np.ndarray) -> DecodedSolution:
        data: GraphColoringData = inst.payload
        X = self._grid(inst, bits)
        rows = X.sum(axis=1)
        colors = tuple(int(np.argmax(X[v])) if rows[v] == 1 else None for v in range(len(rows)))
        return DecodedSolution(
            kind=inst.kind,
            value=colors,
            valid=bool((rows == 1).all()),
            metric=float(self._clashes(data, X)),
            details={"uncolored": int((rows == 0).sum()), "multicolored": int((rows > 1).sum())},
        )

    def combinatorial_energy(self, inst: ProblemInstance, bits: np.ndarray) -> float:
        data: GraphColoringData = inst.payload
        X = self._grid(inst, bits)
        return data.B * self._clashes(data, X) + data.A * float(((X.sum(axis=1) - 1) ** 2).sum())

    def search_space(self, inst: ProblemInstance) -> int:
        data: GraphColoringData = inst.payload
        return data.n_colors ** data.graph.number_of_nodes()

    def exhaustive_optimum(self, inst: ProblemInstance) -> float:
        self.check_search(inst)
        data: GraphColoringData = inst.payload
        V, K = data.graph.number_of_nodes(), data.n_colors
        edges = data.edge_array()
        if not len(edges):
            return 0.0
        colorings = np.indices((K,) * V).reshape(V, -1).T
        clashes = (colorings[:, edges[:, 0]] == colorings[:, edges[:, 1]]).sum(axis=1)
        return float(clashes.min())

    def caption_reference(self, inst: ProblemInstance) -> float:
        return float(inst.payload.graph.number_of_nodes())

    def n_variables(self, size: int) -> int:
        return 3 * int(size)

    def generate(self, size: int, seed: int) -> tuple[ProblemInstance, QuboMatrix]:
        """G(n, 0.3) with a 3-color palette."""
        return self.build(nx.gnp_random_graph(int(size), 0.3, seed=int(seed)), 3)

    def parse(self, text: str) -> tuple[ProblemInstance, QuboMatrix]:
        """Edge list with a mandatory ``colors K`` line."""
        rows = content_lines(text)
        colors = [r for r in rows if r[0].lower() == "colors"]
        if len(colors) != 1:
            raise InstanceError("Graph-coloring files need exactly one 'colors K' line")
        graph = parse_edge_list([r for r in rows if r[0].lower() != "colors"])
        return self.build(graph, header_value(colors[0]))
