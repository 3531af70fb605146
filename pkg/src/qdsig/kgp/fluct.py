"""Finite-size deviation bound for random sampling without replacement.

gamma_u(n, k, lam, eps) bounds how much the fraction of marked items
can differ between two disjoint random parts of sizes n and k drawn
from one population whose observed fraction in the k-part is lam,
except with probability eps.  The same closed form is used throughout
the estimation chains, including for converting between expected and
observed counts (symmetric split), which matches Chernoff scaling
sqrt(2 * count * ln(1/eps)) in the regimes of interest.
"""

from __future__ import annotations

import math

__all__ = ["gamma_u", "count_dev", "upper_expected", "lower_expected"]


def gamma_u(n: float, k: float, lam: float, eps: float) -> float:
    """Deviation bound; symmetric in n and k.

    Raises on lam in {0, 1} (logarithmic singularity) and on
    non-positive part sizes.  Returns 0 when the confidence is so loose
    that the closed form yields a non-positive log factor.
    """
    if n < 1 or k < 1:
        raise ValueError("part sizes must be >= 1")
    if not 0.0 < lam < 1.0:
        raise ValueError("lambda must lie strictly inside (0, 1)")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie strictly inside (0, 1)")
    total = n + k
    g = (total / (n * k)) * math.log(total / (2 * math.pi * n * k * lam * (1 - lam) * eps * eps))
    if g <= 0.0:
        return 0.0
    a = max(n, k)
    ag = a * g / total
    num = (1 - 2 * lam) * ag + math.sqrt(ag * ag + 4 * lam * (1 - lam) * g)
    den = 2 + 2 * ag * a / total
    return num / den


def count_dev(count: float, trials: float, eps: float) -> float:
    """Deviation allowance for a count observed among `trials` tries."""
    if trials < 2:
        return float(count)
    lam = min(max(count / trials, 0.5 / trials), 1 - 0.5 / trials)
    return trials * gamma_u(trials, trials, lam, eps)


def upper_expected(count: float, trials: float, eps: float) -> float:
    return count + count_dev(count, trials, eps)


def lower_expected(count: float, trials: float, eps: float) -> float:
    return max(0.0, count - count_dev(count, trials, eps))
