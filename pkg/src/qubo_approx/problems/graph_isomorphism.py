from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, permutations

import networkx as nx
import numpy as np

from qubo_approx.errors import InstanceError
from qubo_approx.problems._base import (
    BaseProblem,
    DecodedSolution,
    ProblemInstance,
    ProblemKind,
    ProblemSpec,
    content_lines,
    positive_weight,
)
from qubo_approx.problems._graphs import GraphLike, normalize_graph, parse_edge_list
from qubo_approx.problems._penalties import add_squared_one_hot
from qubo_approx.qubo import ConstraintTag, QuboMatrix


@dataclass(frozen=True)
class GraphIsomorphismData:
    g1: nx.Graph
    g2: nx.Graph
    A: float
    B: float

    @property
    def n_nodes(self) -> int:
        return self.g1.number_of_nodes()

    def adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(A1, N1, A2, N2): adjacency and non-adjacency matrices, zero diagonals."""
        N = self.n_nodes
        nodes = range(N)
        a1 = nx.to_numpy_array(self.g1, nodelist=nodes, dtype=np.int64)
        a2 = nx.to_numpy_array(self.g2, nodelist=nodes, dtype=np.int64)
        off = 1 - np.eye(N, dtype=np.int64)
        return a1, off - a1, a2, off - a2


class GraphIsomorphismProblem(BaseProblem):
    """Vertex bijection G1 -> G2; ``x_{v,i}`` (v maps to i) is index ``v*N + i``."""

    @property
    def spec(self) -> ProblemSpec:
        return ProblemSpec(
            kind=ProblemKind.GRAPH_ISOMORPHISM,
            description="Find a vertex bijection mapping the edges of G1 exactly onto the edges of G2.",
            metric="mismatched edges",
            reference="|V|",
            size_notion="number of nodes per graph |V|",
            has_hard_constraints=True,
            higher_is_better=False,
            optimum_reference=False,
        )

    def build(
        self, g1: GraphLike, g2: GraphLike, A: float | None = None, B: float = 1
    ) -> tuple[ProblemInstance, QuboMatrix]:
        G1, G2 = normalize_graph(g1), normalize_graph(g2)
        N = G1.number_of_nodes()
        if N != G2.number_of_nodes():
            raise InstanceError(f"Graphs differ in size: {N} vs {G2.number_of_nodes()} nodes")
        if N == 0:
            raise InstanceError("Graph isomorphism needs non-empty graphs")
        B = positive_weight("B", B)
        A = positive_weight("A", 1 + (G1.number_of_edges() + G2.number_of_edges()) * B if A is None else A)

        q = QuboMatrix(N * N)
        for v in range(N):
            add_squared_one_hot(q, [v * N + i for i in range(N)], A)
        for i in range(N):
            add_squared_one_hot(q, [v * N + i for v in range(N)], A)

        pairs = list(combinations(range(N), 2))
        for u, v in pairs:
            e1 = G1.has_edge(u, v)
            for i, j in pairs:
                if e1 == G2.has_edge(i, j):
                    continue
                # edge of one graph landing on a non-edge of the other, both orientations
                q.add_entry(u * N + i, v * N + j, B, ConstraintTag.SOFT)
                q.add_entry(u * N + j, v * N + i, B, ConstraintTag.SOFT)

        data = GraphIsomorphismData(G1, G2, A, B)
        inst = ProblemInstance(
            kind=ProblemKind.GRAPH_ISOMORPHISM, payload=data, n_variables=N * N, penalty_weights=(A, B)
        )
        return inst, q

    def _grid(self, inst: ProblemInstance, bits: np.ndarray) -> np.ndarray:
        N = inst.payload.n_nodes
        return bits.astype(np.int64).reshape(N, N)

    def _mismatches(self, data: GraphIsomorphismData, X: np.ndarray) -> float:
        a1, n1, a2, n2 = data.adjacency()
        return 0.5 * float((a1 * (X @ n2 @ X.T)).sum() + (n1 * (X @ a2 @ X.T)).sum())

    def decode_bits(self, inst: ProblemInstance, bits: np.ndarray) -> DecodedSolution:
        data: GraphIsomorphismData = inst.payload
        X = self._grid(inst, bits)
        valid = bool((X.sum(axis=0) == 1).all() and (X.sum(axis=1) == 1).all())
        mapping = tuple(int(np.argmax(X[v])) for v in range(data.n_nodes)) if valid else None
        return DecodedSolution(kind=inst.kind, value=mapping, valid=valid, metric=self._mismatches(data, X))

    def combinatorial_energy(self, inst: ProblemInstance, bits: np.ndarray) -> float:
        data: GraphIsomorphismData = inst.payload
        X = self._grid(inst, bits)
        penalty = float(((X.sum(axis=1) - 1) ** 2).sum() + ((X.sum(axis=0) - 1) ** 2).sum())
        return data.B * self._mismatches(data, X) + data.A * penalty

    def search_space(self, inst: ProblemInstance) -> int:
        return math.factorial(inst.payload.n_nodes)

    def exhaustive_optimum(self, inst: ProblemInstance) -> float:
        self.check_search(inst)
        data: GraphIsomorphismData = inst.payload
        N = data.n_nodes
        eye = np.eye(N, dtype=np.int64)
        return min(self._mismatches(data, eye[list(perm)]) for perm in permutations(range(N)))

    def caption_reference(self, inst: ProblemInstance) -> float:
        return float(inst.payload.n_nodes)

    def n_variables(self, size: int) -> int:
        return int(size) ** 2

    def generate(self, size: int, seed: int) -> tuple[ProblemInstance, QuboMatrix]:
        """G1 = G(n, 1/2); G2 is a random relabelling of G1, so an isomorphism exists."""
        N = int(size)
        rng = np.random.default_rng(seed)
        g1 = nx.gnp_random_graph(N, 0.5, seed=int(seed))
        perm = rng.permutation(N)
        g2 = nx.relabel_nodes(g1, {v: int(perm[v]) for v in range(N)})
        return self.build(g1, g2)

    def parse(self, text: str) -> tuple[ProblemInstance, QuboMatrix]:
        """Two edge-list sections introduced by ``graph1`` and ``graph2`` lines."""
        sections: dict[str, list[list[str]]] = {}
        current: list[list[str]] | None = None
        for parts in content_lines(text):
            head = parts[0].lower()
            if head in ("graph1", "graph2"):
                current = sections.setdefault(head, [])
            elif current is None:
                raise InstanceError("Edge lines must follow a 'graph1' or 'graph2' header")
            else:
                current.append(parts)
        if set(sections) != {"graph1", "graph2"}:
            raise InstanceError("Graph-isomorphism files need both 'graph1' and 'graph2' sections")
        return self.build(parse_edge_list(sections["graph1"]), parse_edge_list(sections["graph2"]))
