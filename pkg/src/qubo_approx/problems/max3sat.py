"""Max-3SAT through a weighted maximum independent set.

Each clause contributes three nodes, one per literal occurrence (node
``3c + t``). Selecting a node rewards -1; two selected nodes of the same
clause, or two selected nodes carrying complementary literals, pay ``J``.
With ``J > 1`` every ground state is an independent set whose size is the
number of satisfiable clauses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

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
from qubo_approx.qubo import ConstraintTag, QuboMatrix, all_assignments

CONFLICT_WEIGHT = 2


@dataclass(frozen=True)
class Max3SatData:
    clauses: tuple[tuple[int, int, int], ...]
    n_vars: int
    J: float

    @property
    def literals(self) -> tuple[int, ...]:
        return tuple(lit for clause in self.clauses for lit in clause)

    def conflict_edges(self) -> list[tuple[int, int]]:
        lits = self.literals
        intra = [(3 * c + s, 3 * c + t) for c in range(len(self.clauses)) for s, t in ((0, 1), (0, 2), (1, 2))]
        complement = [(a, b) for a, b in combinations(range(len(lits)), 2) if lits[a] == -lits[b]]
        return intra + complement

    def satisfied(self, truth: np.ndarray) -> np.ndarray:
        """Satisfied-clause counts for a (k, n_vars) batch of truth assignments."""
        lits = np.asarray(self.clauses, dtype=np.int64)
        values = truth[:, np.abs(lits) - 1].astype(bool)
        values = np.where(lits > 0, values, ~values)
        return values.any(axis=2).sum(axis=1)


def _normalise(formula: Iterable[Sequence[int]], n_vars: int | None) -> tuple[tuple[tuple[int, int, int], ...], int]:
    clauses: list[tuple[int, int, int]] = []
    for idx, clause in enumerate(formula):
        lits = tuple(int(x) for x in clause)
        if len(lits) != 3:
            raise InstanceError(f"Clause {idx} has {len(lits)} literals, Max-3SAT needs exactly 3")
        if 0 in lits:
            raise InstanceError(f"Clause {idx} contains literal 0")
        clauses.append(lits)  # type: ignore[arg-type]
    if not clauses:
        raise InstanceError("Max-3SAT needs at least one clause")
    used = max(abs(lit) for c in clauses for lit in c)
    if n_vars is None:
        n_vars = used
    elif used > n_vars:
        raise InstanceError(f"Literal {used} exceeds the declared {n_vars} variables")
    return tuple(clauses), int(n_vars)


class Max3SatProblem(BaseProblem):
    @property
    def spec(self) -> ProblemSpec:
        return ProblemSpec(
            kind=ProblemKind.MAX3SAT,
            description="Satisfy as many 3-literal clauses as possible.",
            metric="satisfied clauses",
            reference="number of clauses m",
            size_notion="number of clauses m",
            has_hard_constraints=True,
            higher_is_better=True,
            optimum_reference=False,
        )

    def build(
        self, formula: Iterable[Sequence[int]], n_vars: int | None = None, J: float = CONFLICT_WEIGHT
    ) -> tuple[ProblemInstance, QuboMatrix]:
        clauses, n_vars = _normalise(formula, n_vars)
        if not J > 1:
            raise InstanceError(f"Conflict weight J must exceed the node weight 1, got {J}")
        data = Max3SatData(clauses, n_vars, float(J))

        q = QuboMatrix(3 * len(clauses))
        for node in range(q.n):
            q.add_entry(node, node, -1, ConstraintTag.SOFT)
        # a clause like (x, -x, y) yields both edge kinds on one pair; they add up
        for a, b in data.conflict_edges():
            q.add_entry(a, b, data.J, ConstraintTag.HARD)
        inst = ProblemInstance(
            kind=ProblemKind.MAX3SAT, payload=data, n_variables=q.n, penalty_weights=(data.J, 1.0)
        )
        return inst, q

    def truth_assignment(self, data: Max3SatData, bits: np.ndarray) -> np.ndarray:
        """The lowest-index selected node mentioning a variable fixes it; the rest are false."""
        truth = np.zeros(data.n_vars, dtype=np.uint8)
        fixed = np.zeros(data.n_vars, dtype=bool)
        for node in np.flatnonzero(bits):
            lit = data.literals[node]
            var = abs(lit) - 1
            if not fixed[var]:
                truth[var] = 1 if lit > 0 else 0
                fixed[var] = True
        return truth

    def decode_bits(self, inst: ProblemInstance, bits: np.ndarray) -> DecodedSolution:
        data: Max3SatData = inst.payload
        truth = self.truth_assignment(data, bits)
        sat = int(data.satisfied(truth[None, :])[0])
        broken = sum(1 for a, b in data.conflict_edges() if bits[a] and bits[b])
        return DecodedSolution(
            kind=inst.kind,
            value=tuple(bool(t) for t in truth),
            valid=True,
            metric=float(sat),
            details={"selected": int(bits.sum()), "conflicts": broken},
        )

    def combinatorial_energy(self, inst: ProblemInstance, bits: np.ndarray) -> float:
        data: Max3SatData = inst.payload
        broken = sum(1 for a, b in data.conflict_edges() if bits[a] and bits[b])
        return -float(bits.sum()) + data.J * broken

    def search_space(self, inst: ProblemInstance) -> int:
        return 1 << inst.payload.n_vars

    def exhaustive_optimum(self, inst: ProblemInstance) -> float:
        self.check_search(inst)
        data: Max3SatData = inst.payload
        return float(data.satisfied(all_assignments(data.n_vars)).max())

    def caption_reference(self, inst: ProblemInstance) -> float:
        return float(len(inst.payload.clauses))

    def n_variables(self, size: int) -> int:
        return 3 * int(size)

    def generate(self, size: int, seed: int) -> tuple[ProblemInstance, QuboMatrix]:
        """``size`` clauses over max(3, ceil(size/3)) variables, three distinct variables per clause."""
        m = int(size)
        if m < 1:
            raise InstanceError("Max-3SAT instances need at least one clause")
        rng = np.random.default_rng(seed)
        n_vars = max(3, math.ceil(m / 3))
        clauses = []
        for _ in range(m):
            chosen = rng.choice(np.arange(1, n_vars + 1), size=3, replace=False)
            signs = rng.choice((-1, 1), size=3)
            clauses.append(tuple(int(v * s) for v, s in zip(chosen, signs)))
        return self.build(clauses, n_vars)

    def parse(self, text: str) -> tuple[ProblemInstance, QuboMatrix]:
        """DIMACS CNF: optional ``p cnf <vars> <clauses>`` header, clauses terminated by 0."""
        n_vars: int | None = None
        clauses: list[list[int]] = []
        current: list[int] = []
        for parts in content_lines(text):
            if parts[0] == "p":
                if len(parts) != 4 or parts[1].lower() != "cnf":
                    raise InstanceError(f"Bad DIMACS header {' '.join(parts)!r}")
                n_vars = int(parts[2])
                continue
            if parts[0].startswith("%"):
                break
            for tok in parts:
                try:
                    lit = int(tok)
                except ValueError as e:
                    raise InstanceError(f"Bad DIMACS literal {tok!r}") from e
                if lit == 0:
                    clauses.append(current)
                    current = []
                else:
                    current.append(lit)
        if current:
            clauses.append(current)
        return self.build(clauses, n_vars)
