"""Paired comparisons of simulation variants run on shared seeds."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats


@dataclass(frozen=True)
class PairedComparison:
    """One-sided test that variant ``a`` beats variant ``b`` rep by rep."""

    mean_diff: float
    stderr: float
    n: int
    confidence: float
    lower_bound: float
    p_value: float

    @property
    def significant(self) -> bool:
        return self.lower_bound > 0.0


def paired_compare(a, b, confidence: float = 0.95) -> PairedComparison:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise ValueError("need two equally long samples of at least 2 paired values")
    diff = a - b
    n = diff.size
    mean = float(np.mean(diff))
    se = float(np.std(diff, ddof=1) / math.sqrt(n))
    t_crit = float(stats.t.ppf(confidence, n - 1))
    if se == 0.0:
        p = 0.0 if mean > 0 else 1.0
    else:
        p = float(stats.t.sf(mean / se, n - 1))
    return PairedComparison(mean, se, n, confidence, mean - t_crit * se, p)
