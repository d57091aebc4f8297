from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

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
from qubo_approx.qubo import ConstraintTag, QuboMatrix, all_assignments


@dataclass(frozen=True)
class NumberPartitioningData:
    numbers: tuple[int, ...]
    weight: float


class NumberPartitioningProblem(BaseProblem):
    @property
    def spec(self) -> ProblemSpec:
        return ProblemSpec(
            kind=ProblemKind.NUMBER_PARTITIONING,
            description="Split a multiset of positive integers into two sets with equal sums.",
            metric="|sum(S1) - sum(S2)|",
            reference="half the sum of S",
            size_notion="number of integers |S|",
            has_hard_constraints=False,
            higher_is_better=False,
            optimum_reference=False,
        )

    def build(self, numbers: Iterable[int], A: float = 1) -> tuple[ProblemInstance, QuboMatrix]:
        A = positive_weight("A", A)
        raw = list(numbers)
        if not raw:
            raise InstanceError("Number partitioning needs a non-empty set")
        values: list[int] = []
        for x in raw:
            if int(x) != x or int(x) <= 0:
                raise InstanceError(f"Numbers must be positive integers, got {x!r}")
            values.append(int(x))

        # A (2 sum_S1 - k)^2 with k = sum S
        k = sum(values)
        q = QuboMatrix(len(values), offset=A * k * k)
        for i, n_i in enumerate(values):
            q.add_entry(i, i, 4 * A * n_i * n_i - 4 * A * k * n_i, ConstraintTag.SOFT)
        for (i, n_i), (j, n_j) in combinations(enumerate(values), 2):
            q.add_entry(i, j, 8 * A * n_i * n_j, ConstraintTag.SOFT)
        inst = ProblemInstance(
            kind=ProblemKind.NUMBER_PARTITIONING,
            payload=NumberPartitioningData(tuple(values), A),
            n_variables=len(values),
            penalty_weights=(A, 0.0),
        )
        return inst, q

    def decode_bits(self, inst: ProblemInstance, bits: np.ndarray) -> DecodedSolution:
        numbers = np.asarray(inst.payload.numbers, dtype=np.int64)
        s1 = int(numbers[bits == 1].sum())
        s2 = int(numbers[bits == 0].sum())
        return DecodedSolution(
            kind=inst.kind,
            value=(tuple(int(i) for i in np.flatnonzero(bits)), tuple(int(i) for i in np.flatnonzero(bits == 0))),
            valid=True,
            metric=float(abs(s1 - s2)),
            details={"sum_s1": s1, "sum_s2": s2},
        )

    def combinatorial_energy(self, inst: ProblemInstance, bits: np.ndarray) -> float:
        diff = self.decode_bits(inst, bits).metric
        return inst.payload.weight * diff * diff

    def search_space(self, inst: ProblemInstance) -> int:
        return 1 << max(inst.n_variables - 1, 0)

    def exhaustive_optimum(self, inst: ProblemInstance) -> float:
        self.check_search(inst)
        numbers = np.asarray(inst.payload.numbers, dtype=np.int64)
        if len(numbers) == 1:
            return float(numbers[0])
        # element 0 stays in S2
        splits = all_assignments(len(numbers) - 1).astype(np.int64)
        s1 = splits @ numbers[1:]
        return float(np.abs(2 * s1 - numbers.sum()).min())

    def caption_reference(self, inst: ProblemInstance) -> float:
        return sum(inst.payload.numbers) / 2

    def n_variables(self, size: int) -> int:
        return int(size)

    def generate(self, size: int, seed: int) -> tuple[ProblemInstance, QuboMatrix]:
        """Integers drawn uniformly from 1..50."""
        rng = np.random.default_rng(seed)
        return self.build([int(x) for x in rng.integers(1, 51, size=int(size))])

    def parse(self, text: str) -> tuple[ProblemInstance, QuboMatrix]:
        try:
            numbers = [int(tok) for parts in content_lines(text) for tok in parts]
        except ValueError as e:
            raise InstanceError(f"Number-partitioning files hold integers only: {e}") from e
        return self.build(numbers)
