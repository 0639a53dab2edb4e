"""Questionnaire score transforms and multiple-comparison adjustment."""
from __future__ import annotations

from typing import Sequence

from ..errors import InvalidInputError


def normalize_likert(responses: Sequence[float]) -> float:
    """Mean of 7-point responses mapped onto [0, 1]."""
    if not responses:
        raise InvalidInputError("empty response list")
    for r in responses:
        if not 1 <= r <= 7:
            raise InvalidInputError(f"likert response out of range: {r}")
    return (sum(responses) / len(responses) - 1.0) / 6.0


def loc_transform(raw: float) -> float:
    """Raw 0..23 control score onto [-1, 1]; -1 internal, +1 external."""
    if not 0 <= raw <= 23:
        raise InvalidInputError(f"raw score out of range: {raw}")
    return 2.0 * raw / 23.0 - 1.0


def holm_adjust(p_values: Sequence[float]) -> list[float]:
    """Stepdown adjustment, returned in the original order.

    Sorted ascending, q_(i) = max over j<=i of min(1, (m-j+1) * p_(j)).
    """
    for p in p_values:
        if not 0.0 <= p <= 1.0:
            raise InvalidInputError(f"p-value out of range: {p}")
    m = len(p_values)
    order = sorted(range(m), key=lambda i: p_values[i])
    adjusted = [0.0] * m
    running = 0.0
    for rank, idx in enumerate(order):
        running = max(running, min(1.0, (m - rank) * p_values[idx]))
        adjusted[idx] = running
    return adjusted
