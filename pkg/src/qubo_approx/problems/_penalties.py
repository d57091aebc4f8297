"""Expansion of squared one-hot penalties into QUBO entries."""

from __future__ import annotations

from itertools import combinations
from typing import Sequence

from qubo_approx.qubo import ConstraintTag, QuboMatrix


def add_squared_one_hot(
    q: QuboMatrix,
    variables: Sequence[int],
    weight: float,
    *,
    linear_tag: ConstraintTag | None = ConstraintTag.HARD,
    pair_tag: ConstraintTag = ConstraintTag.HARD,
) -> QuboMatrix:
    """Add ``weight * (1 - sum_v x_v)^2``.

    With x_v^2 = x_v the square expands to ``1 - sum x_v + 2 sum_{v<w} x_v x_w``.
    ``linear_tag=None`` leaves the ``-weight`` diagonal share to the caller.
    """
    if linear_tag is not None:
        for v in variables:
            q.add_entry(v, v, -weight, linear_tag)
    for v, w in combinations(sorted(variables), 2):
        q.add_entry(v, w, 2 * weight, pair_tag)
    q.add_offset(weight)
    return q


def squared_one_hot_violation(counts) -> int:
    """sum (1 - c)^2 over the given per-constraint counts."""
    return int(sum((1 - int(c)) ** 2 for c in counts))
