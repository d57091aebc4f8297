"""Airport gate assignment (a quadratic assignment specialisation).

Planes are numbered 1..n and gates 1..m; row/column 0 and n+1 (m+1) of the
passenger and distance matrices are the dummy entrance and exit. Variable
``x_{i,k}`` (plane i at gate k) lives at index ``(i-1)*m + (k-1)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import permutations
from typing import Sequence

import numpy as np

from qubo_approx.config import get_settings
from qubo_approx.errors import InstanceError, ParameterError
from qubo_approx.problems._base import (
    BaseProblem,
    DecodedSolution,
    ProblemInstance,
    ProblemKind,
    ProblemSpec,
    positive_weight,
)
from qubo_approx.problems._penalties import add_squared_one_hot
from qubo_approx.qubo import ConstraintTag, QuboMatrix

Matrix = Sequence[Sequence[float]]


@dataclass(frozen=True)
class AgapData:
    n_planes: int
    m_gates: int
    passengers: np.ndarray  # (n+2, n+2)
    distances: np.ndarray  # (m+2, m+2)
    costs: np.ndarray  # (n, m)
    A: float
    B: float

    @property
    def hard_linear(self) -> float:
        """Penalty share of every diagonal: one row and one column one-hot term."""
        return self.A + self.B

    def linear_costs(self) -> np.ndarray:
        """Per-variable cost: entry walk, exit walk and n * a_{i,k}, shape (n, m)."""
        n, m = self.n_planes, self.m_gates
        p, d = self.passengers, self.distances
        entry = np.outer(p[0, 1 : n + 1], d[0, 1 : m + 1])
        exit_ = np.outer(p[1 : n + 1, n + 1], d[1 : m + 1, m + 1])
        return entry + exit_ + n * self.costs

    def transfer_tensor(self) -> np.ndarray:
        """T[i, k, j, l] = p_ij d_kl for distinct planes at distinct gates."""
        n, m = self.n_planes, self.m_gates
        p = self.passengers[1 : n + 1, 1 : n + 1].copy()
        d = self.distances[1 : m + 1, 1 : m + 1].copy()
        np.fill_diagonal(p, 0)
        np.fill_diagonal(d, 0)
        return np.einsum("ij,kl->ikjl", p, d)


def _as_matrix(name: str, value: Matrix, shape: tuple[int, int]) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise InstanceError(f"{name} must be a numeric matrix") from e
    if arr.shape != shape:
        raise InstanceError(f"{name} must have shape {shape}, got {arr.shape}")
    if not np.isfinite(arr).all() or (arr < 0).any():
        raise InstanceError(f"{name} entries must be finite and non-negative")
    return arr


def _costs(value: Matrix | None, n: int, m: int) -> np.ndarray:
    if value is None:
        return np.zeros((n, m))
    arr = np.asarray(value, dtype=np.float64)
    if arr.shape == (n + 2, m + 2):
        arr = arr[1 : n + 1, 1 : m + 1]
    return _as_matrix("a_cost", arr, (n, m))


class AgapProblem(BaseProblem):
    @property
    def spec(self) -> ProblemSpec:
        return ProblemSpec(
            kind=ProblemKind.AGAP,
            description="Assign planes to gates minimising passenger walking distance.",
            metric="walking distance plus assignment cost",
            reference="optimum",
            size_notion="planes = gates = size",
            has_hard_constraints=True,
            higher_is_better=False,
            optimum_reference=True,
        )

    @property
    def default_runs(self) -> int:
        return get_settings().agap_runs

    def build(
        self,
        n_planes: int,
        m_gates: int,
        p: Matrix,
        d: Matrix,
        a_cost: Matrix | None = None,
        A: float | None = None,
        B: float | None = None,
    ) -> tuple[ProblemInstance, QuboMatrix]:
        n, m = int(n_planes), int(m_gates)
        if n < 1 or m < 1:
            raise InstanceError(f"AGAP needs at least one plane and one gate, got n={n}, m={m}")
        passengers = _as_matrix("p", p, (n + 2, n + 2))
        distances = _as_matrix("d", d, (m + 2, m + 2))
        costs = _costs(a_cost, n, m)

        bound = passengers.sum() * distances.max() + n * costs.sum()
        default = 1 + math.ceil(bound)
        B = positive_weight("B", default if B is None else B)
        # spare gates leave B*(m-n) on every valid assignment; A must outweigh one more empty gate
        A = positive_weight("A", (default if m <= n else 2 * B) if A is None else A)

        data = AgapData(n, m, passengers, distances, costs, A, B)
        q = QuboMatrix(n * m)

        # each diagonal holds a soft cost plus the one-hot linear share, see hard_energy
        for (i, k), c in np.ndenumerate(data.linear_costs()):
            q.add_entry(i * m + k, i * m + k, float(c) - data.hard_linear, ConstraintTag.SOFT)
        for i in range(n):
            add_squared_one_hot(q, [i * m + k for k in range(m)], A, linear_tag=None)
        for k in range(m):
            add_squared_one_hot(q, [i * m + k for i in range(n)], B, linear_tag=None)

        T = data.transfer_tensor()
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(m):
                    for l in range(m):
                        c = T[i, k, j, l] + T[j, l, i, k]
                        if c:
                            a, b = sorted((i * m + k, j * m + l))
                            q.add_entry(a, b, float(c), ConstraintTag.SOFT)

        inst = ProblemInstance(kind=ProblemKind.AGAP, payload=data, n_variables=n * m, penalty_weights=(A, B))
        return inst, q

    def _grid(self, inst: ProblemInstance, bits: np.ndarray) -> np.ndarray:
        data: AgapData = inst.payload
        return bits.astype(np.int64).reshape(data.n_planes, data.m_gates)

    def _raw_objective(self, data: AgapData, X: np.ndarray) -> float:
        linear = float((data.linear_costs() * X).sum())
        transfer = float(np.einsum("ik,ikjl,jl->", X, data.transfer_tensor(), X))
        return linear + transfer

    def decode_bits(self, inst: ProblemInstance, bits: np.ndarray) -> DecodedSolution:
        data: AgapData = inst.payload
        X = self._grid(inst, bits)
        rows, cols = X.sum(axis=1), X.sum(axis=0)
        valid = bool((rows == 1).all() and (cols <= 1).all())
        gates = tuple(int(np.argmax(X[i])) + 1 if rows[i] == 1 else None for i in range(data.n_planes))
        return DecodedSolution(
            kind=inst.kind,
            value=gates,
            valid=valid,
            metric=self._raw_objective(data, X),
            details={"unassigned": int((rows == 0).sum()), "shared_gates": int((cols > 1).sum())},
        )

    def combinatorial_energy(self, inst: ProblemInstance, bits: np.ndarray) -> float:
        data: AgapData = inst.payload
        X = self._grid(inst, bits)
        rows, cols = X.sum(axis=1), X.sum(axis=0)
        penalty = data.A * float(((rows - 1) ** 2).sum()) + data.B * float(((cols - 1) ** 2).sum())
        return self._raw_objective(data, X) + penalty

    def hard_floor(self, inst: ProblemInstance) -> float:
        data: AgapData = inst.payload
        return data.B * max(data.m_gates - data.n_planes, 0)

    def hard_energy(self, inst: ProblemInstance, q: QuboMatrix, a: Sequence[int] | np.ndarray) -> float:
        data: AgapData = inst.payload
        return super().hard_energy(inst, q, a) - data.hard_linear * float(np.sum(a))

    def search_space(self, inst: ProblemInstance) -> int:
        data: AgapData = inst.payload
        return math.perm(data.m_gates, data.n_planes)

    def exhaustive_optimum(self, inst: ProblemInstance) -> float:
        data: AgapData = inst.payload
        n, m = data.n_planes, data.m_gates
        if n > m:
            raise ParameterError(f"No valid gate assignment exists for {n} planes and {m} gates")
        self.check_search(inst)
        best = math.inf
        for gates in permutations(range(m), n):
            X = np.zeros((n, m), dtype=np.int64)
            X[np.arange(n), list(gates)] = 1
            best = min(best, self._raw_objective(data, X))
        return float(best)

    def n_variables(self, size: int) -> int:
        return int(size) ** 2

    def generate(self, size: int, seed: int) -> tuple[ProblemInstance, QuboMatrix]:
        """Square instance: gates on a line, 0-5 transfers per plane pair, positive entry/exit walks."""
        n = int(size)
        if n < 1:
            raise InstanceError("AGAP instances need at least one plane")
        rng = np.random.default_rng(seed)
        p = np.zeros((n + 2, n + 2), dtype=np.int64)
        p[1 : n + 1, 1 : n + 1] = rng.integers(0, 6, size=(n, n))
        np.fill_diagonal(p, 0)
        p[0, 1 : n + 1] = rng.integers(1, 6, size=n)
        p[1 : n + 1, n + 1] = rng.integers(1, 6, size=n)

        pos = np.sort(rng.choice(np.arange(1, 3 * n + 1), size=n, replace=False))
        d = np.zeros((n + 2, n + 2), dtype=np.int64)
        d[1 : n + 1, 1 : n + 1] = np.abs(pos[:, None] - pos[None, :])
        d[0, 1 : n + 1] = rng.integers(1, 6, size=n)
        d[1 : n + 1, n + 1] = rng.integers(1, 6, size=n)
        costs = rng.integers(0, 4, size=(n, n))
        return self.build(n, n, p.tolist(), d.tolist(), costs.tolist())

    def parse(self, text: str) -> tuple[ProblemInstance, QuboMatrix]:
        """JSON object with ``passengers``, ``distances`` and optional ``costs``, ``A``, ``B``."""
        try:
            doc = json.loads(text)
            passengers = doc["passengers"]
            distances = doc["distances"]
        except (ValueError, KeyError, TypeError) as e:
            raise InstanceError(f"AGAP files are JSON objects with 'passengers' and 'distances': {e}") from e
        n, m = len(passengers) - 2, len(distances) - 2
        return self.build(n, m, passengers, distances, doc.get("costs"), doc.get("A"), doc.get("B"))
