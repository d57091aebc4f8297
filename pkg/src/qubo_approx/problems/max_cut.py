from __future__ import annotations

from dataclasses import dataclass

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
)
from qubo_approx.problems._graphs import GraphLike, normalize_graph, parse_edge_list
from qubo_approx.qubo import ConstraintTag, QuboMatrix, all_assignments


@dataclass(frozen=True)
class MaxCutData:
    graph: nx.Graph

    def edge_array(self) -> np.ndarray:
        return np.array(sorted(self.graph.edges), dtype=np.int64).reshape(-1, 2)


class MaxCutProblem(BaseProblem):
    @property
    def spec(self) -> ProblemSpec:
        return ProblemSpec(
            kind=ProblemKind.MAX_CUT,
            description="Split the nodes in two sets maximising the edges between them.",
            metric="cut size",
            reference="optimum cut",
            size_notion="number of nodes |V|",
            has_hard_constraints=False,
            higher_is_better=True,
            optimum_reference=True,
        )

    def build(self, graph: GraphLike) -> tuple[ProblemInstance, QuboMatrix]:
        g = normalize_graph(graph)
        if g.number_of_nodes() == 0:
            raise InstanceError("Max-cut needs at least one node")
        q = QuboMatrix(g.number_of_nodes())
        # 2 x_u x_v - x_u - x_v per edge
        for u, v in sorted(g.edges):
            q.add_entry(u, v, 2, ConstraintTag.SOFT)
            q.add_entry(u, u, -1, ConstraintTag.SOFT)
            q.add_entry(v, v, -1, ConstraintTag.SOFT)
        return ProblemInstance(kind=ProblemKind.MAX_CUT, payload=MaxCutData(g), n_variables=g.number_of_nodes()), q

    def decode_bits(self, inst: ProblemInstance, bits: np.ndarray) -> DecodedSolution:
        edges = inst.payload.edge_array()
        cut = int((bits[edges[:, 0]] != bits[edges[:, 1]]).sum()) if len(edges) else 0
        side = frozenset(int(v) for v in np.flatnonzero(bits))
        other = frozenset(range(inst.n_variables)) - side
        return DecodedSolution(kind=inst.kind, value=(side, other), valid=True, metric=float(cut))

    def combinatorial_energy(self, inst: ProblemInstance, bits: np.ndarray) -> float:
        return -self.decode_bits(inst, bits).metric

    def search_space(self, inst: ProblemInstance) -> int:
        return 1 << max(inst.n_variables - 1, 0)

    def exhaustive_optimum(self, inst: ProblemInstance) -> float:
        self.check_search(inst)
        n = inst.n_variables
        edges = inst.payload.edge_array()
        if n == 1 or not len(edges):
            return 0.0
        # node 0 stays on side 0; every bipartition appears once
        sides = np.hstack([np.zeros((1 << (n - 1), 1), dtype=np.uint8), all_assignments(n - 1)])
        cuts = (sides[:, edges[:, 0]] != sides[:, edges[:, 1]]).sum(axis=1)
        return float(cuts.max())

    def n_variables(self, size: int) -> int:
        return int(size)

    def generate(self, size: int, seed: int) -> tuple[ProblemInstance, QuboMatrix]:
        """G(n, 1/2) random graph."""
        return self.build(nx.gnp_random_graph(int(size), 0.5, seed=int(seed)))

    def parse(self, text: str) -> tuple[ProblemInstance, QuboMatrix]:
        return self.build(parse_edge_list(content_lines(text)))
