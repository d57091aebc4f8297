from __future__ import annotations

import math
from dataclasses import dataclass
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
)
from qubo_approx.problems._penalties import add_squared_one_hot
from qubo_approx.qubo import ConstraintTag, QuboMatrix, all_assignments


@dataclass(frozen=True)
class ExactCoverData:
    universe: tuple[int, ...]
    subsets: tuple[frozenset[int], ...]

    def incidence(self) -> np.ndarray:
        """|V| x |U| 0/1 matrix, columns in universe order."""
        col = {u: c for c, u in enumerate(self.universe)}
        m = np.zeros((len(self.subsets), len(self.universe)), dtype=np.int64)
        for i, s in enumerate(self.subsets):
            for u in s:
                m[i, col[u]] = 1
        return m


class ExactCoverProblem(BaseProblem):
    @property
    def spec(self) -> ProblemSpec:
        return ProblemSpec(
            kind=ProblemKind.EXACT_COVER,
            description="Select subsets so every element of U is covered exactly once.",
            metric="cover errors: sum over u of (1 - times u is covered)^2",
            reference="|U|",
            size_notion="number of subsets |V|",
            has_hard_constraints=False,
            higher_is_better=False,
            optimum_reference=False,
        )

    def build(
        self, universe: Iterable[int], subsets: Iterable[Iterable[int]]
    ) -> tuple[ProblemInstance, QuboMatrix]:
        U = frozenset(int(u) for u in universe)
        V = tuple(frozenset(int(x) for x in s) for s in subsets)
        if not U:
            raise InstanceError("Exact cover needs a non-empty universe")
        if not V:
            raise InstanceError("Exact cover needs at least one subset")
        for idx, s in enumerate(V):
            if not s <= U:
                raise InstanceError(f"Subset {idx} has elements outside U: {sorted(s - U)}")

        q = QuboMatrix(len(V))
        for u in sorted(U):
            members = [i for i, s in enumerate(V) if u in s]
            # co-occurrence couplings carry the cover information and may be pruned
            add_squared_one_hot(q, members, 1, linear_tag=ConstraintTag.HARD, pair_tag=ConstraintTag.SOFT)
        data = ExactCoverData(universe=tuple(sorted(U)), subsets=V)
        return ProblemInstance(kind=ProblemKind.EXACT_COVER, payload=data, n_variables=len(V)), q

    def decode_bits(self, inst: ProblemInstance, bits: np.ndarray) -> DecodedSolution:
        data: ExactCoverData = inst.payload
        counts = bits.astype(np.int64) @ data.incidence()
        errors = int(((1 - counts) ** 2).sum())
        return DecodedSolution(
            kind=inst.kind,
            value=tuple(int(i) for i in np.flatnonzero(bits)),
            valid=True,
            metric=float(errors),
            details={"uncovered": int((counts == 0).sum()), "overcovered": int((counts > 1).sum())},
        )

    def combinatorial_energy(self, inst: ProblemInstance, bits: np.ndarray) -> float:
        return self.decode_bits(inst, bits).metric

    def exhaustive_optimum(self, inst: ProblemInstance) -> float:
        self.check_search(inst)
        data: ExactCoverData = inst.payload
        selections = all_assignments(len(data.subsets)).astype(np.int64)
        counts = selections @ data.incidence()
        return float(((1 - counts) ** 2).sum(axis=1).min())

    def caption_reference(self, inst: ProblemInstance) -> float:
        return float(len(inst.payload.universe))

    def n_variables(self, size: int) -> int:
        return int(size)

    def generate(self, size: int, seed: int) -> tuple[ProblemInstance, QuboMatrix]:
        """Planted exact cover over |U| = max(3, ceil(0.6 |V|)) elements plus random 1-3 element subsets."""
        size = int(size)
        if size < 1:
            raise InstanceError("Exact cover instances need at least one subset")
        rng = np.random.default_rng(seed)
        n_elements = max(3, math.ceil(0.6 * size))
        universe = list(range(1, n_elements + 1))

        rest = [int(u) for u in rng.permutation(universe)]
        planted: list[list[int]] = []
        while rest:
            k = int(rng.integers(1, 4))
            planted.append(rest[:k])
            rest = rest[k:]
        while len(planted) > size:
            tail = planted.pop()
            planted[-1].extend(tail)

        subsets = [frozenset(s) for s in planted]
        while len(subsets) < size:
            k = int(rng.integers(1, 4))
            subsets.append(frozenset(int(u) for u in rng.choice(universe, size=min(k, n_elements), replace=False)))
        order = rng.permutation(len(subsets))
        return self.build(universe, [subsets[i] for i in order])

    def parse(self, text: str) -> tuple[ProblemInstance, QuboMatrix]:
        """``universe 1 2 3`` once, then one ``subset ...`` line per subset."""
        universe: list[int] | None = None
        subsets: list[list[int]] = []
        for parts in content_lines(text):
            head, values = parts[0].lower(), parts[1:]
            try:
                ints = [int(v) for v in values]
            except ValueError as e:
                raise InstanceError(f"Element ids must be integers: {' '.join(parts)!r}") from e
            if head == "universe":
                universe = ints
            elif head == "subset":
                subsets.append(ints)
            else:
                raise InstanceError(f"Unknown exact-cover line {parts[0]!r}")
        if universe is None:
            raise InstanceError("Exact-cover file has no 'universe' line")
        return self.build(universe, subsets)
