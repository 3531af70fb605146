"""Analytic security calculators for the signature protocol.

Everything here is a pure function of channel estimates: the
min-entropy of an n-bit key group, the attacker's guessing
probability, the forgery bounds of the two hash families, the
robustness/repudiation budget, and the smallest group size meeting a
target failure probability.  Probabilities are tracked in log2 domain
where underflow is a risk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "LFSR",
    "GDH",
    "binary_entropy",
    "LeakageParams",
    "min_entropy",
    "guess_probability",
    "guess_probability_log2",
    "ForgeryBound",
    "epsilon_forgery",
    "EpsilonBudget",
    "epsilon_budget",
    "required_group_size",
    "InfeasibleTargetError",
]

LFSR = "lfsr"
GDH = "gdh"

DEFAULT_EPS_PRIME = 1e-11
DEFAULT_EPS_COR = 1e-11
# share of the total failure budget given to each statistical-fluctuation
# bound inside the channel estimators (documented knob, see kgp.rates)
STAT_BUDGET_SPLIT = 20


class InfeasibleTargetError(ValueError):
    """No group size up to the available key length meets the target."""


def binary_entropy(x: float) -> float:
    """H(x) = -x log2 x - (1-x) log2(1-x), with H(0) = H(1) = 0."""
    if x < 0.0 or x > 1.0:
        raise ValueError("argument outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -(x * math.log2(x) + (1.0 - x) * math.log2(1.0 - x))


@dataclass(frozen=True)
class LeakageParams:
    """Group-level channel estimates feeding the min-entropy bound."""

    s0_zn: float   # lower bound, vacuum events inside the group
    s11_zn: float  # lower bound, single-photon-pair events inside the group
    phi11_zn: float  # upper bound, phase error rate of those pairs
    n: int         # group size in bits
    f: float       # error-correction efficiency
    Ez: float      # whole-string bit error rate

    def __post_init__(self):
        if not (0.0 <= self.phi11_zn <= 0.5 and 0.0 <= self.Ez <= 0.5):
            raise ValueError("rates must lie in [0, 1/2]")
        if self.s0_zn < 0 or self.s11_zn < 0 or self.s0_zn + self.s11_zn > self.n:
            raise ValueError("event counts must be nonnegative and fit in the group")
        if self.f < 1.0:
            raise ValueError("error-correction efficiency must be >= 1")


def min_entropy(params: LeakageParams) -> float:
    """Unknown information (bits) an attacker has about one key group.

    Clamped at zero from below: channels bad enough to drive the bound
    negative simply give the attacker guessing probability 1.
    """
    raw = (
        params.s0_zn
        + params.s11_zn * (1.0 - binary_entropy(params.phi11_zn))
        - params.n * params.f * binary_entropy(params.Ez)
    )
    return max(0.0, raw)


def guess_probability(hn: float) -> float:
    """2^-Hn as a float (0.0 on underflow; use the log2 form instead)."""
    if hn < 0:
        raise ValueError("min-entropy must be nonnegative")
    try:
        return 2.0 ** (-hn)
    except OverflowError:
        return 0.0


def guess_probability_log2(hn: float) -> float:
    if hn < 0:
        raise ValueError("min-entropy must be nonnegative")
    return -hn


@dataclass(frozen=True)
class ForgeryBound:
    scheme: str
    log2_eps: float        # scheme-specific key-guessing bound
    log2_floor: float | None  # random-forgery floor 2^-n when n is known
    log2_max: float        # max of the two (what the protocol must budget)

    @property
    def eps(self) -> float:
        return _exp2_clamped(self.log2_eps)

    @property
    def eps_max(self) -> float:
        return _exp2_clamped(self.log2_max)


def _exp2_clamped(l2: float) -> float:
    if l2 >= 0.0:
        return 1.0
    try:
        return 2.0 ** l2
    except OverflowError:
        return 0.0


def epsilon_forgery(m_bits: int, hn: float, scheme: str, n: int | None = None) -> ForgeryBound:
    """Forgery success bound for an m-bit message.

    LFSR-based Toeplitz hashing: m * 2^(1 - Hn).
    Generalized division hashing: m * 2^(-2 - Hn).
    The two differ by a constant factor 8 for every (m, Hn).
    """
    if m_bits < 1:
        raise ValueError("message must have at least one bit")
    if hn < 0:
        raise ValueError("min-entropy must be nonnegative")
    lm = math.log2(m_bits)
    if scheme == LFSR:
        l2 = lm + 1.0 - hn
    elif scheme == GDH:
        l2 = lm - 2.0 - hn
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    floor = -float(n) if n is not None else None
    l2max = max(l2, floor) if floor is not None else l2
    return ForgeryBound(scheme, l2, floor, l2max)


@dataclass(frozen=True)
class EpsilonBudget:
    eps_cor: float
    eps_prime: float
    eps_for: float
    eps_rob: float = field(init=False)
    eps_rep: float = field(init=False)
    eps_total: float = field(init=False)

    def __post_init__(self):
        for v in (self.eps_cor, self.eps_prime, self.eps_for):
            if not 0.0 <= v <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")
        object.__setattr__(self, "eps_rob", 2 * self.eps_cor + 2 * self.eps_prime)
        object.__setattr__(self, "eps_rep", 2 * self.eps_prime)
        object.__setattr__(
            self, "eps_total", max(self.eps_rob, self.eps_rep, self.eps_for)
        )


def epsilon_budget(
    eps_for: float,
    eps_cor: float = DEFAULT_EPS_COR,
    eps_prime: float = DEFAULT_EPS_PRIME,
) -> EpsilonBudget:
    """Combine the three failure modes; the protocol bound is their max."""
    return EpsilonBudget(eps_cor=eps_cor, eps_prime=eps_prime, eps_for=eps_for)


def required_group_size(
    m_bits: int,
    target_eps: float,
    hn_of_n,
    scheme: str,
    n_max: int,
    n_min: int = 2,
) -> int:
    """Smallest group size n with forgery bound <= target_eps.

    hn_of_n maps a candidate group size to the min-entropy of such a
    group (pass `float` for perfect keys).  The forgery bound decreases
    in n because the group min-entropy grows with n; bisection over
    [n_min, n_max] exploits that.  Raises InfeasibleTargetError when
    even n_max misses the target.
    """
    if not 0.0 < target_eps < 1.0:
        raise ValueError("target must lie in (0, 1)")
    if n_max < n_min:
        raise InfeasibleTargetError("no admissible group size")
    l2_target = math.log2(target_eps)

    def feasible(n: int) -> bool:
        b = epsilon_forgery(m_bits, hn_of_n(n), scheme, n=n)
        return b.log2_max <= l2_target

    if not feasible(n_max):
        raise InfeasibleTargetError(
            f"target {target_eps:g} unreachable for any group size <= {n_max}"
        )
    lo, hi = n_min, n_max
    if feasible(lo):
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi
