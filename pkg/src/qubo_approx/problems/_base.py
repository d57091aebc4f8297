from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from qubo_approx.config import get_settings
from qubo_approx.errors import DimensionError, InstanceError, ParameterError, RefusalError
from qubo_approx.qubo import ConstraintTag, QuboMatrix, as_assignment, tagged_energy

logger = logging.getLogger(__name__)


class ProblemKind(str, Enum):
    EXACT_COVER = "exact-cover"
    MAX_CUT = "max-cut"
    NUMBER_PARTITIONING = "number-partitioning"
    AGAP = "agap"
    MAX3SAT = "max3sat"
    TSP = "tsp"
    GRAPH_COLORING = "graph-coloring"
    GRAPH_ISOMORPHISM = "graph-isomorphism"


class RefMode(str, Enum):
    """Which reference value divides the observed metric.

    CAPTION uses the per-problem convention (|U|, optimum, half sum, clause
    count, node count); OPTIMUM always divides by the exhaustive optimum.
    """

    CAPTION = "caption"
    OPTIMUM = "optimum"


@dataclass(frozen=True)
class ProblemSpec:
    """Static metadata for one problem family (for discovery endpoints and the harness)."""

    kind: ProblemKind
    description: str
    metric: str
    reference: str
    size_notion: str
    has_hard_constraints: bool
    higher_is_better: bool
    optimum_reference: bool


@dataclass(frozen=True)
class ProblemInstance:
    kind: ProblemKind
    payload: Any
    n_variables: int
    penalty_weights: tuple[float, float] | None = None


@dataclass(frozen=True)
class DecodedSolution:
    kind: ProblemKind
    value: Any
    valid: bool
    metric: float
    details: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class QualityRatio:
    v: float
    v_ref: float
    ratio: float
    valid: bool = True

    def __post_init__(self) -> None:
        if not self.v_ref > 0:
            raise ParameterError(f"Reference value must be positive, got {self.v_ref}")
        if not math.isfinite(self.ratio):
            raise ParameterError(f"Quality ratio must be finite, got {self.ratio}")


class BaseProblem(ABC):
    """Base class for problem encoders.

    Each problem:
      - exposes a ProblemSpec via `spec`
      - builds a tagged QUBO together with its ProblemInstance
      - decodes assignments and scores them on the combinatorial objective
      - knows an exhaustive optimum and a seeded desk-scale generator
    """

    @property
    @abstractmethod
    def spec(self) -> ProblemSpec:  # pragma: no cover
        raise NotImplementedError

    @abstractmethod
    def build(self, *args: Any, **kwargs: Any) -> tuple[ProblemInstance, QuboMatrix]:  # pragma: no cover
        raise NotImplementedError

    @abstractmethod
    def decode_bits(self, inst: ProblemInstance, bits: np.ndarray) -> DecodedSolution:  # pragma: no cover
        raise NotImplementedError

    @abstractmethod
    def combinatorial_energy(self, inst: ProblemInstance, bits: np.ndarray) -> float:  # pragma: no cover
        """The QUBO energy recomputed from the problem structure, not from the matrix."""
        raise NotImplementedError

    @abstractmethod
    def exhaustive_optimum(self, inst: ProblemInstance) -> float:  # pragma: no cover
        """Best metric value by enumerating the solution space."""
        raise NotImplementedError

    @abstractmethod
    def generate(self, size: int, seed: int) -> tuple[ProblemInstance, QuboMatrix]:  # pragma: no cover
        raise NotImplementedError

    @abstractmethod
    def n_variables(self, size: int) -> int:  # pragma: no cover
        raise NotImplementedError

    @abstractmethod
    def parse(self, text: str) -> tuple[ProblemInstance, QuboMatrix]:  # pragma: no cover
        raise NotImplementedError

    def caption_reference(self, inst: ProblemInstance) -> float:
        raise ParameterError(f"{self.spec.kind.value} is scored relative to its optimum")

    def hard_floor(self, inst: ProblemInstance) -> float:
        """Hard-penalty energy of every valid assignment (offset included)."""
        return 0.0

    def hard_energy(self, inst: ProblemInstance, q: QuboMatrix, a: Sequence[int] | np.ndarray) -> float:
        """Hard-penalty energy of ``a``: Hard-tagged entries plus the offset.

        Valid assignments are exactly those where this equals `hard_floor`.
        """
        return tagged_energy(q, a, ConstraintTag.HARD) + q.offset

    def search_space(self, inst: ProblemInstance) -> int:
        """Candidates `exhaustive_optimum` enumerates; one per bit string by default."""
        return 1 << inst.n_variables

    def check_search(self, inst: ProblemInstance, cap: int | None = None) -> None:
        """Refuse searches larger than 2^cap candidates, the brute-force oracle's own limit."""
        cap = get_settings().brute_force_cap if cap is None else int(cap)
        size = self.search_space(inst)
        if size > 1 << cap:
            raise RefusalError(
                f"Refusing an exhaustive {self.spec.kind.value} search over {size} candidates (cap is 2^{cap})"
            )

    @property
    def default_runs(self) -> int:
        return get_settings().runs

    # ---------------------------
    # Shared plumbing
    # ---------------------------
    def _check(self, inst: ProblemInstance) -> None:
        if inst.kind is not self.spec.kind:
            raise ParameterError(f"Instance of kind {inst.kind.value} given to {self.spec.kind.value}")

    def decode(self, inst: ProblemInstance, a: Sequence[int] | np.ndarray) -> DecodedSolution:
        self._check(inst)
        bits = np.asarray(a).reshape(-1)
        if bits.shape[0] != inst.n_variables:
            raise DimensionError(f"Assignment has length {bits.shape[0]}, instance has {inst.n_variables} variables")
        return self.decode_bits(inst, as_assignment(bits, inst.n_variables))

    def quality(
        self,
        inst: ProblemInstance,
        sol: DecodedSolution,
        v_ref_mode: RefMode = RefMode.CAPTION,
        optimum: float | None = None,
    ) -> QualityRatio:
        self._check(inst)
        if sol.kind is not inst.kind:
            raise ParameterError("Solution was decoded from a different problem kind")
        if RefMode(v_ref_mode) is RefMode.OPTIMUM or self.spec.optimum_reference:
            v_ref = float(optimum) if optimum is not None else self.exhaustive_optimum(inst)
        else:
            v_ref = self.caption_reference(inst)
        v = float(sol.metric)
        return QualityRatio(v=v, v_ref=v_ref, ratio=v / v_ref if v_ref > 0 else math.nan, valid=sol.valid)

    def load(self, path: str | Path) -> tuple[ProblemInstance, QuboMatrix]:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise InstanceError(f"Cannot read instance file {path}: {e}") from e
        inst, q = self.parse(text)
        logger.info("Loaded %s instance from %s (%d variables)", self.spec.kind.value, path, inst.n_variables)
        return inst, q


def positive_weight(name: str, value: float) -> float:
    v = float(value)
    if not (math.isfinite(v) and v > 0):
        raise ParameterError(f"Penalty weight {name} must be positive, got {value!r}")
    return v


def content_lines(text: str) -> list[list[str]]:
    """Tokenised non-empty lines with '#' and DIMACS 'c' comments removed."""
    out: list[list[str]] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line or line.split()[0] == "c":
            continue
        out.append(line.split())
    return out


def header_value(parts: list[str]) -> int:
    """The non-negative integer of a ``keyword N`` header line."""
    if len(parts) != 2:
        raise InstanceError(f"Header {' '.join(parts)!r} needs exactly one value")
    try:
        value = int(parts[1])
    except ValueError as e:
        raise InstanceError(f"Header {' '.join(parts)!r} needs an integer value") from e
    if value < 0:
        raise InstanceError(f"Header {' '.join(parts)!r} must not be negative")
    return value
