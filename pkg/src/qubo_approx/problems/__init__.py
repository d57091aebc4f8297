"""Problem encoders.

- Problem modules define *only* problem classes (no import-time side effects).
- `_PROBLEM_CLASSES` is the single source of truth; instances are created lazily.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, List, Sequence, Type

import numpy as np

from qubo_approx.errors import ParameterError
from qubo_approx.problems._base import (
    BaseProblem,
    DecodedSolution,
    ProblemInstance,
    ProblemKind,
    ProblemSpec,
    QualityRatio,
    RefMode,
)
from qubo_approx.problems.agap import AgapProblem
from qubo_approx.problems.exact_cover import ExactCoverProblem
from qubo_approx.problems.graph_coloring import GraphColoringProblem
from qubo_approx.problems.graph_isomorphism import GraphIsomorphismProblem
from qubo_approx.problems.max3sat import Max3SatProblem
from qubo_approx.problems.max_cut import MaxCutProblem
from qubo_approx.problems.number_partitioning import NumberPartitioningProblem
from qubo_approx.problems.tsp import TspProblem
from qubo_approx.qubo import QuboMatrix

_PROBLEM_CLASSES: tuple[Type[BaseProblem], ...] = (
    ExactCoverProblem,
    MaxCutProblem,
    NumberPartitioningProblem,
    AgapProblem,
    Max3SatProblem,
    TspProblem,
    GraphColoringProblem,
    GraphIsomorphismProblem,
)

_PROBLEMS: List[BaseProblem] = []
_PROBLEM_BY_KIND: Dict[ProblemKind, BaseProblem] = {}


def register_all_problems() -> None:
    """Instantiate every problem exactly once."""
    if _PROBLEMS:
        return
    for cls in _PROBLEM_CLASSES:
        problem = cls()
        _PROBLEMS.append(problem)
        _PROBLEM_BY_KIND[problem.spec.kind] = problem


def list_problem_specs() -> list[ProblemSpec]:
    register_all_problems()
    return [p.spec for p in _PROBLEMS]


def get_problem(kind: ProblemKind | str) -> BaseProblem:
    register_all_problems()
    try:
        return _PROBLEM_BY_KIND[ProblemKind(kind)]
    except ValueError as e:
        names = ", ".join(k.value for k in ProblemKind)
        raise ParameterError(f"Unknown problem {kind!r}; expected one of: {names}") from e


# ---------------------------
# Functional surface
# ---------------------------
def build_exact_cover(U: Any, V: Any) -> tuple[ProblemInstance, QuboMatrix]:
    return get_problem(ProblemKind.EXACT_COVER).build(U, V)


def build_max_cut(G: Any) -> tuple[ProblemInstance, QuboMatrix]:
    return get_problem(ProblemKind.MAX_CUT).build(G)


def build_number_partitioning(S: Any, A: float = 1) -> tuple[ProblemInstance, QuboMatrix]:
    return get_problem(ProblemKind.NUMBER_PARTITIONING).build(S, A)


def build_agap(
    n_planes: int,
    m_gates: int,
    p: Any,
    d: Any,
    a_cost: Any = None,
    A: float | None = None,
    B: float | None = None,
) -> tuple[ProblemInstance, QuboMatrix]:
    return get_problem(ProblemKind.AGAP).build(n_planes, m_gates, p, d, a_cost, A, B)


def build_max3sat(formula: Any, n_vars: int | None = None) -> tuple[ProblemInstance, QuboMatrix]:
    return get_problem(ProblemKind.MAX3SAT).build(formula, n_vars)


def build_tsp(W: Any, A: float | None = None, B: float = 1, start: int = 0) -> tuple[ProblemInstance, QuboMatrix]:
    return get_problem(ProblemKind.TSP).build(W, A, B, start)


def build_graph_coloring(
    G: Any, n_colors: int, A: float | None = None, B: float = 1
) -> tuple[ProblemInstance, QuboMatrix]:
    return get_problem(ProblemKind.GRAPH_COLORING).build(G, n_colors, A, B)


def build_graph_isomorphism(
    G1: Any, G2: Any, A: float | None = None, B: float = 1
) -> tuple[ProblemInstance, QuboMatrix]:
    return get_problem(ProblemKind.GRAPH_ISOMORPHISM).build(G1, G2, A, B)


def decode(inst: ProblemInstance, a: Sequence[int] | np.ndarray) -> DecodedSolution:
    return get_problem(inst.kind).decode(inst, a)


def quality(
    inst: ProblemInstance,
    sol: DecodedSolution,
    v_ref_mode: RefMode | str = RefMode.CAPTION,
    optimum: float | None = None,
) -> QualityRatio:
    return get_problem(inst.kind).quality(inst, sol, RefMode(v_ref_mode), optimum)


def load_instance(kind: ProblemKind | str, path: str | Path) -> tuple[ProblemInstance, QuboMatrix]:
    return get_problem(kind).load(path)


def generate_instance(kind: ProblemKind | str, size: int, seed: int) -> tuple[ProblemInstance, QuboMatrix]:
    return get_problem(kind).generate(size, seed)


__all__ = [
    "BaseProblem",
    "DecodedSolution",
    "ProblemInstance",
    "ProblemKind",
    "ProblemSpec",
    "QualityRatio",
    "RefMode",
    "build_agap",
    "build_exact_cover",
    "build_graph_coloring",
    "build_graph_isomorphism",
    "build_max3sat",
    "build_max_cut",
    "build_number_partitioning",
    "build_tsp",
    "decode",
    "generate_instance",
    "get_problem",
    "list_problem_specs",
    "load_instance",
    "quality",
    "register_all_problems",
]
