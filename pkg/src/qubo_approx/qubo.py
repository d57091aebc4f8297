"""Sparse upper-triangular QUBO matrices with per-entry constraint tags.

A QUBO over ``n`` binary variables is stored as a map ``(i, j) -> Entry`` with
``i <= j``; diagonal keys hold the linear coefficients ``c_i`` and off-diagonal
keys the couplings ``c_ij``. The constant ``offset`` keeps the energy equal to
the encoded objective rather than shifted by it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from qubo_approx.errors import (
    DimensionError,
    EntryIndexError,
    EntryValueError,
    InstanceError,
    TagConflictError,
)

logger = logging.getLogger(__name__)

Key = tuple[int, int]


class ConstraintTag(str, Enum):
    HARD = "hard"
    SOFT = "soft"


@dataclass(frozen=True)
class Entry:
    value: float
    tag: ConstraintTag


class EntryStats(NamedTuple):
    total: int
    hard: int
    soft: int
    soft_offdiagonal: int


class QuboMatrix:
    """Sparse QUBO with constraint tags.

    Builders mutate a fresh matrix through ``set_entry``/``add_entry``; every
    transformation that consumers use (pruning, merging) returns a new matrix.
    """

    __slots__ = ("_n", "_entries", "_offset")

    def __init__(self, n: int, offset: float = 0.0) -> None:
        if int(n) < 1:
            raise DimensionError(f"A QUBO needs at least one variable, got n={n}")
        self._n = int(n)
        self._entries: dict[Key, Entry] = {}
        self._offset = _finite(offset)

    # ---------------------------
    # Read access
    # ---------------------------
    @property
    def n(self) -> int:
        return self._n

    @property
    def offset(self) -> float:
        return self._offset

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: object) -> bool:
        return key in self._entries

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QuboMatrix):
            return NotImplemented
        return self._n == other._n and self._offset == other._offset and self._entries == other._entries

    def __repr__(self) -> str:
        return f"QuboMatrix(n={self._n}, entries={len(self._entries)}, offset={self._offset})"

    def get(self, i: int, j: int) -> Entry | None:
        return self._entries.get((i, j))

    def items(self) -> Iterator[tuple[Key, Entry]]:
        """Entries in canonical (i, j) order."""
        for key in sorted(self._entries):
            yield key, self._entries[key]

    def keys(self) -> list[Key]:
        return sorted(self._entries)

    def offdiagonal_keys(self, tag: ConstraintTag | None = None) -> list[Key]:
        return [
            k for k, e in self.items()
            if k[0] != k[1] and (tag is None or e.tag is tag)
        ]

    # ---------------------------
    # Construction
    # ---------------------------
    def _check_key(self, i: int, j: int) -> Key:
        i, j = int(i), int(j)
        if i > j:
            raise EntryIndexError(f"Only upper-triangular entries are stored; got ({i}, {j})")
        if i < 0 or j >= self._n:
            raise EntryIndexError(f"Index ({i}, {j}) out of range for n={self._n}")
        return i, j

    def set_entry(self, i: int, j: int, value: float, tag: ConstraintTag) -> QuboMatrix:
        key = self._check_key(i, j)
        value = _finite(value)
        if value == 0.0:
            self._entries.pop(key, None)
        else:
            self._entries[key] = Entry(value, ConstraintTag(tag))
        return self

    def add_entry(self, i: int, j: int, delta: float, tag: ConstraintTag) -> QuboMatrix:
        """Accumulate ``delta`` into entry (i, j), keeping a single tag per entry."""
        key = self._check_key(i, j)
        tag = ConstraintTag(tag)
        current = self._entries.get(key)
        if current is not None and current.tag is not tag:
            raise TagConflictError(f"Entry {key} is tagged {current.tag.value}, cannot add a {tag.value} term")
        base = current.value if current is not None else 0.0
        return self.set_entry(key[0], key[1], base + _finite(delta), tag)

    def add_offset(self, delta: float) -> QuboMatrix:
        self._offset = _finite(self._offset + _finite(delta))
        return self

    def copy(self) -> QuboMatrix:
        out = QuboMatrix(self._n, self._offset)
        out._entries = dict(self._entries)
        return out

    def without_entries(self, keys: Iterable[Key]) -> QuboMatrix:
        """New matrix with the given entries deleted."""
        out = self.copy()
        for key in keys:
            out._entries.pop(tuple(key), None)
        return out

    def merge(self, other: QuboMatrix) -> QuboMatrix:
        """Entry-disjoint sum of two QUBOs over the same variables."""
        if other.n != self._n:
            raise DimensionError(f"Cannot merge QUBOs with n={self._n} and n={other.n}")
        overlap = self._entries.keys() & other._entries.keys()
        if overlap:
            raise EntryIndexError(f"QUBOs share entries {sorted(overlap)[:3]}")
        out = self.copy()
        out._entries.update(other._entries)
        out._offset = self._offset + other._offset
        return out

    # ---------------------------
    # Numeric views
    # ---------------------------
    def to_dense(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(linear, coupling)`` with ``coupling`` symmetric and zero on the diagonal."""
        linear = np.zeros(self._n, dtype=np.float64)
        coupling = np.zeros((self._n, self._n), dtype=np.float64)
        for (i, j), e in self._entries.items():
            if i == j:
                linear[i] = e.value
            else:
                coupling[i, j] = e.value
                coupling[j, i] = e.value
        return linear, coupling


def _finite(value: float) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError) as e:
        raise EntryValueError(f"QUBO values must be real numbers, got {value!r}") from e
    if not math.isfinite(v):
        raise EntryValueError(f"QUBO values must be finite, got {value!r}")
    return v


def as_assignment(a: Sequence[int] | np.ndarray, n: int) -> np.ndarray:
    """Validate a binary assignment of length ``n`` and return it as uint8."""
    bits = np.asarray(a).reshape(-1)
    if bits.shape[0] != n:
        raise DimensionError(f"Assignment has length {bits.shape[0]}, QUBO has n={n}")
    if bits.size and not np.isin(bits, (0, 1)).all():
        raise EntryValueError("Assignments must contain only 0 and 1")
    return bits.astype(np.uint8)


# ---------------------------
# Operations
# ---------------------------
def new_qubo(n: int) -> QuboMatrix:
    return QuboMatrix(n)


def set_entry(q: QuboMatrix, i: int, j: int, value: float, tag: ConstraintTag) -> QuboMatrix:
    return q.set_entry(i, j, value, tag)


def energy(q: QuboMatrix, a: Sequence[int] | np.ndarray) -> float:
    """offset + sum c_i a_i + sum c_ij a_i a_j, summed exactly (order independent)."""
    bits = as_assignment(a, q.n)
    terms = [q.offset]
    for (i, j), e in q.items():
        if bits[i] and bits[j]:
            terms.append(e.value)
    return math.fsum(terms)


def tagged_energy(q: QuboMatrix, a: Sequence[int] | np.ndarray, tag: ConstraintTag) -> float:
    """Contribution of the entries carrying ``tag`` (offset excluded)."""
    bits = as_assignment(a, q.n)
    return math.fsum(e.value for (i, j), e in q.items() if e.tag is tag and bits[i] and bits[j])


def entry_stats(q: QuboMatrix) -> EntryStats:
    hard = soft = soft_off = 0
    for (i, j), e in q.items():
        if e.tag is ConstraintTag.HARD:
            hard += 1
        else:
            soft += 1
            if i != j:
                soft_off += 1
    return EntryStats(total=hard + soft, hard=hard, soft=soft, soft_offdiagonal=soft_off)


# ---------------------------
# Plain-text format: header "n offset", then "i j value tag" per entry
# ---------------------------
def _fmt(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def dumps(q: QuboMatrix) -> str:
    lines = [f"{q.n} {_fmt(q.offset)}"]
    lines.extend(f"{i} {j} {_fmt(e.value)} {e.tag.value}" for (i, j), e in q.items())
    return "\n".join(lines) + "\n"


def loads(text: str) -> QuboMatrix:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 2:
        raise InstanceError("QUBO text must start with a 'n offset' header line")
    try:
        q = QuboMatrix(int(rows[0][0]), float(rows[0][1]))
        for lineno, parts in enumerate(rows[1:], start=2):
            if len(parts) != 4:
                raise InstanceError(f"Line {lineno}: expected 'i j value tag', got {' '.join(parts)!r}")
            i, j, value, tag = parts
            q.set_entry(int(i), int(j), float(value), ConstraintTag(tag.lower()))
    except ValueError as e:
        if isinstance(e, InstanceError):
            raise
        raise InstanceError(f"Malformed QUBO text: {e}") from e
    return q


def save(q: QuboMatrix, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(q), encoding="utf-8")
    logger.debug("Wrote QUBO n=%d entries=%d to %s", q.n, len(q), path)
    return path


def load(path: str | Path) -> QuboMatrix:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InstanceError(f"Cannot read QUBO file {path}: {e}") from e
    return loads(text)


def all_assignments(n: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Assignments start..stop-1 in lexicographic order (a_0 is the most significant bit)."""
    stop = (1 << n) if stop is None else stop
    idx = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8)
