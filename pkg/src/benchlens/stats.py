"""Small shared statistics helpers: geometric means and order statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


def geometric_mean(values: Sequence[float]) -> float:
    """Geometric mean of strictly positive values.

    Uses the plain product when it stays in range (exact for small hand
    cases), falling back to the log-domain mean otherwise.
    """
    if not values:
        raise ValueError("geometric_mean of empty sequence")
    if any(v <= 0 for v in values):
        raise ValueError("geometric_mean requires strictly positive values")
    product = 1.0
    for v in values:
        product *= v
    if 0.0 < product < math.inf:
        return product ** (1.0 / len(values))
    return math.exp(sum(math.log(v) for v in values) / len(values))


def positive_geomean(values: Sequence[float]) -> tuple[float | None, int]:
    """Geomean over the positive entries, plus how many zeros were excluded.

    Zeros are dropped rather than epsilon-substituted so the exclusion stays
    auditable. Returns (None, excluded) when nothing positive remains.
    """
    positives = [v for v in values if v > 0]
    excluded = len(values) - len(positives)
    if not positives:
        return None, excluded
    return geometric_mean(positives), excluded


@dataclass(frozen=True)
class BoxStats:
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float

    @classmethod
    def of(cls, values: Sequence[float]) -> "BoxStats":
        if not values:
            raise ValueError("BoxStats of empty sequence")
        arr = np.asarray(values, dtype=float)
        q1, med, q3 = np.percentile(arr, [25.0, 50.0, 75.0], method="linear")
        return cls(float(arr.min()), float(q1), float(med), float(q3), float(arr.max()))
