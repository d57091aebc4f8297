from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Sequence

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
from qubo_approx.problems._penalties import add_squared_one_hot
from qubo_approx.qubo import ConstraintTag, QuboMatrix


@dataclass(frozen=True)
class TspData:
    weights: np.ndarray  # (N, N), zero diagonal
    start: int
    A: float
    B: float

    @property
    def n_nodes(self) -> int:
        return int(self.weights.shape[0])

    def tour_weight(self, tour: Sequence[int]) -> float:
        return float(sum(self.weights[u, v] for u, v in zip(tour, list(tour[1:]) + [tour[0]])))


class TspProblem(BaseProblem):
    """Travelling salesperson on a complete graph; ``x_{v,j}`` (node v at position j) is index ``v*N + j``."""

    @property
    def spec(self) -> ProblemSpec:
        return ProblemSpec(
            kind=ProblemKind.TSP,
            description="Shortest closed tour visiting every node once, starting at s.",
            metric="tour weight",
            reference="optimum",
            size_notion="number of nodes N",
            has_hard_constraints=True,
            higher_is_better=False,
            optimum_reference=True,
        )

    def build(
        self,
        W: Sequence[Sequence[float]],
        A: float | None = None,
        B: float = 1,
        start: int = 0,
    ) -> tuple[ProblemInstance, QuboMatrix]:
        try:
            weights = np.array(W, dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise InstanceError("TSP weights must form a numeric matrix") from e
        if weights.ndim != 2 or weights.shape[0] != weights.shape[1]:
            raise InstanceError(f"TSP weights must be a square matrix, got shape {weights.shape}")
        N = weights.shape[0]
        if N < 2:
            raise InstanceError("TSP needs at least two nodes")
        if not 0 <= int(start) < N:
            raise InstanceError(f"Start node {start} out of range for N={N}")
        off = ~np.eye(N, dtype=bool)
        if not (np.isfinite(weights).all() and (weights[off] > 0).all()):
            raise InstanceError("TSP edge weights must be finite and positive")
        np.fill_diagonal(weights, 0)

        B = positive_weight("B", B)
        top = B * float(weights.max())
        A = positive_weight("A", math.floor(top) + 1 if A is None else A)
        if not 0 < top < A:
            raise ParameterError(f"Penalty A={A} must exceed B*max(W)={top}")

        q = QuboMatrix(N * N)
        for v in range(N):
            add_squared_one_hot(q, [v * N + j for j in range(N)], A)
        for j in range(N):
            add_squared_one_hot(q, [v * N + j for v in range(N)], A)
        for u in range(N):
            for v in range(N):
                if u == v:
                    continue
                for j in range(N):
                    a, b = sorted((u * N + j, v * N + (j + 1) % N))
                    q.add_entry(a, b, B * weights[u, v], ConstraintTag.SOFT)

        data = TspData(weights=weights, start=int(start), A=A, B=B)
        return ProblemInstance(kind=ProblemKind.TSP, payload=data, n_variables=N * N, penalty_weights=(A, B)), q

    def _grid(self, inst: ProblemInstance, bits: np.ndarray) -> np.ndarray:
        N = inst.payload.n_nodes
        return bits.astype(np.int64).reshape(N, N)

    def _raw_weight(self, data: TspData, X: np.ndarray) -> float:
        # sum_j X[:, j]^T W X[:, j+1], positions cyclic
        return float(np.einsum("uj,uv,vj->", X, data.weights, np.roll(X, -1, axis=1)))

    def decode_bits(self, inst: ProblemInstance, bits: np.ndarray) -> DecodedSolution:
        data: TspData = inst.payload
        X = self._grid(inst, bits)
        valid = bool((X.sum(axis=0) == 1).all() and (X.sum(axis=1) == 1).all())
        tour: tuple[int, ...] | None = None
        if valid:
            order = [int(np.argmax(X[:, j])) for j in range(data.n_nodes)]
            k = order.index(data.start)
            tour = tuple(order[k:] + order[:k])
        return DecodedSolution(kind=inst.kind, value=tour, valid=valid, metric=self._raw_weight(data, X))

    def combinatorial_energy(self, inst: ProblemInstance, bits: np.ndarray) -> float:
        data: TspData = inst.payload
        X = self._grid(inst, bits)
        penalty = float(((X.sum(axis=1) - 1) ** 2).sum() + ((X.sum(axis=0) - 1) ** 2).sum())
        return data.B * self._raw_weight(data, X) + data.A * penalty

    def search_space(self, inst: ProblemInstance) -> int:
        return math.factorial(max(inst.payload.n_nodes - 1, 0))

    def exhaustive_optimum(self, inst: ProblemInstance) -> float:
        self.check_search(inst)
        data: TspData = inst.payload
        rest = [v for v in range(data.n_nodes) if v != data.start]
        return min(data.tour_weight([data.start, *perm]) for perm in permutations(rest))

    def n_variables(self, size: int) -> int:
        return int(size) ** 2

    def generate(self, size: int, seed: int) -> tuple[ProblemInstance, QuboMatrix]:
        """Distinct points on a 10x10 integer grid; W = round(10 * euclidean distance)."""
        N = int(size)
        if N < 2:
            raise InstanceError("TSP instances need at least two nodes")
        rng = np.random.default_rng(seed)
        cells = rng.choice(100, size=N, replace=False)
        pts = np.stack([cells // 10, cells % 10], axis=1).astype(np.float64)
        dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
        W = np.maximum(np.rint(10 * dist), 1)
        np.fill_diagonal(W, 0)
        return self.build(W.astype(np.int64).tolist())

    def parse(self, text: str) -> tuple[ProblemInstance, QuboMatrix]:
        """Whitespace weight matrix, one row per line, with an optional ``start s`` line."""
        start = 0
        rows: list[list[float]] = []
        for parts in content_lines(text):
            if parts[0].lower() == "start":
                start = header_value(parts)
                continue
            try:
                rows.append([float(x) for x in parts])
            except ValueError as e:
                raise InstanceError(f"Bad TSP matrix row {' '.join(parts)!r}") from e
        if any(len(r) != len(rows) for r in rows):
            raise InstanceError("TSP weight matrix must be square")
        return self.build(rows, start=start)
