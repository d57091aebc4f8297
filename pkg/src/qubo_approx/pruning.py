"""Approximation by pruning: deleting soft off-diagonal QUBO entries.

Three strategies share one contract. Only entries tagged SOFT with ``i < j``
are candidates; hard entries and the whole diagonal always survive. Every
strategy is a pure function of ``(q, p)`` (plus the seed for ``random``).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

import numpy as np

from qubo_approx.config import get_settings
from qubo_approx.errors import ParameterError
from qubo_approx.qubo import ConstraintTag, Key, QuboMatrix

logger = logging.getLogger(__name__)

# absorbs float noise in p*m and p*max (e.g. 0.35 * 20 = 6.999999...)
_EPS = 1e-9


class PruneKind(str, Enum):
    FRACTION = "fraction"
    THRESHOLD = "threshold"
    RANDOM = "random"


@dataclass(frozen=True)
class PruneStrategy:
    kind: PruneKind
    seed: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", PruneKind(self.kind))
        if self.kind is PruneKind.RANDOM and self.seed is None:
            raise ParameterError("The random strategy needs an explicit seed")
        if self.kind is not PruneKind.RANDOM and self.seed is not None:
            raise ParameterError(f"The {self.kind.value} strategy is deterministic and takes no seed")

    @classmethod
    def parse(cls, text: str, seed: int | None = None) -> PruneStrategy:
        """``fraction``, ``threshold``, ``random`` (with ``seed``) or ``random:<seed>``."""
        name, _, tail = str(text).strip().lower().partition(":")
        try:
            kind = PruneKind(name)
        except ValueError as e:
            raise ParameterError(f"Unknown pruning strategy {text!r}") from e
        if tail:
            try:
                seed = int(tail)
            except ValueError as e:
                raise ParameterError(f"Bad seed in strategy {text!r}") from e
        return cls(kind, seed if kind is PruneKind.RANDOM else None)

    @property
    def label(self) -> str:
        return f"random:{self.seed}" if self.kind is PruneKind.RANDOM else self.kind.value

    def apply(self, q: QuboMatrix, p: float) -> QuboMatrix:
        return self.apply_with_count(q, p)[0]

    def apply_with_count(self, q: QuboMatrix, p: float) -> tuple[QuboMatrix, int]:
        doomed = _SELECTORS[self.kind](q, _check_p(p), self.seed)
        return q.without_entries(doomed), len(doomed)


@dataclass(frozen=True)
class PruneStep:
    p: float
    qubo: QuboMatrix
    deleted: int


@dataclass(frozen=True)
class PruneSchedule:
    strategy: PruneStrategy
    steps: tuple[PruneStep, ...]

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self) -> Iterator[PruneStep]:
        return iter(self.steps)

    def __getitem__(self, idx: int) -> PruneStep:
        return self.steps[idx]

    @property
    def ps(self) -> list[float]:
        return [s.p for s in self.steps]


def _check_p(p: float) -> float:
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise ParameterError(f"Pruning fraction must lie in [0, 1], got {p}")
    return p


def soft_offdiagonal(q: QuboMatrix) -> list[tuple[Key, float]]:
    """Pruning candidates in canonical (i, j) order."""
    return [(k, e.value) for k, e in q.items() if k[0] != k[1] and e.tag is ConstraintTag.SOFT]


def _count(p: float, m: int) -> int:
    return min(m, math.floor(p * m + _EPS))


def _select_fraction(q: QuboMatrix, p: float, _seed: int | None) -> list[Key]:
    candidates = soft_offdiagonal(q)
    ranked = sorted(candidates, key=lambda kv: (abs(kv[1]), kv[0]))
    return [k for k, _ in ranked[: _count(p, len(candidates))]]


def _select_threshold(q: QuboMatrix, p: float, _seed: int | None) -> list[Key]:
    candidates = soft_offdiagonal(q)
    if not candidates:
        return []
    top = max(abs(v) for _, v in candidates)
    t = p * top
    return [k for k, v in candidates if abs(v) <= t + _EPS * top]


def _select_random(q: QuboMatrix, p: float, seed: int | None) -> list[Key]:
    candidates = soft_offdiagonal(q)
    # a fixed permutation per seed; a larger p deletes a longer prefix of it
    order = np.random.default_rng(seed).permutation(len(candidates))
    return [candidates[i][0] for i in order[: _count(p, len(candidates))]]


_SELECTORS = {
    PruneKind.FRACTION: _select_fraction,
    PruneKind.THRESHOLD: _select_threshold,
    PruneKind.RANDOM: _select_random,
}


# ---------------------------
# Operations
# ---------------------------
def prune_fraction(q: QuboMatrix, p: float) -> QuboMatrix:
    return PruneStrategy(PruneKind.FRACTION).apply(q, p)


def prune_threshold(q: QuboMatrix, p: float) -> QuboMatrix:
    return PruneStrategy(PruneKind.THRESHOLD).apply(q, p)


def prune_random(q: QuboMatrix, p: float, seed: int) -> QuboMatrix:
    return PruneStrategy(PruneKind.RANDOM, int(seed)).apply(q, p)


def schedule_fractions(granularity: float | None = None) -> list[float]:
    """0, g, 2g, ..., 1 for a granularity g that divides 1."""
    g = get_settings().granularity if granularity is None else float(granularity)
    if not (0.0 < g <= 1.0):
        raise ParameterError(f"Granularity must lie in (0, 1], got {g}")
    steps = round(1.0 / g)
    if abs(steps * g - 1.0) > 1e-9:
        raise ParameterError(f"Granularity {g} does not divide 1 evenly")
    return [round(k / steps, 10) for k in range(steps + 1)]


def make_schedule(q: QuboMatrix, s: PruneStrategy, granularity: float | None = None) -> PruneSchedule:
    steps = []
    for p in schedule_fractions(granularity):
        pruned, deleted = s.apply_with_count(q, p)
        steps.append(PruneStep(p=p, qubo=pruned, deleted=deleted))
    logger.debug("Schedule %s: %d steps, %d prunable entries", s.label, len(steps), steps[-1].deleted)
    return PruneSchedule(strategy=s, steps=tuple(steps))
