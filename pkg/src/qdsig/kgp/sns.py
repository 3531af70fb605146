"""Sending-or-not-sending twin-field chain, with the random-pairing booster.

Z windows encode bits in whether a user sends; X windows (two decoy
intensities mu1 < mu2) estimate the untagged-photon counting rate and
its phase-flip error.  p_vac is the probability of emitting vacuum
inside a Z window, so signal events come from exactly one sender.
Random pairing XORs the Z string pairwise, trading length for a higher
untagged fraction per signed bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.special import i0

from ..bounds import binary_entropy
from .fluct import gamma_u, lower_expected, upper_expected
from .tptf import ChannelParams, KgpEstimates

__all__ = [
    "SnsSourceParams",
    "sns_simulate",
    "sns_random_pairing",
    "SnsEstimates",
    "sns_single_bit_entropy",
]


@dataclass(frozen=True)
class SnsSourceParams:
    p_z: float = 0.75     # probability of a Z window
    p_vac: float = 0.75   # probability of sending vacuum inside a Z window
    p_0: float = 0.5      # X-window probability of vacuum
    p_1: float = 0.35     # X-window probability of intensity mu1
    mu1: float = 0.1
    mu2: float = 0.4
    mu_z: float = 0.42
    big_delta: float = 0.35  # accepted phase-slice width (radians)

    def __post_init__(self):
        if not 0 < self.mu1 < self.mu2:
            raise ValueError("need 0 < mu1 < mu2")
        for v in (self.p_z, self.p_vac, self.p_0, self.p_1):
            if not 0 < v < 1:
                raise ValueError("probabilities must lie in (0, 1)")
        if self.p_0 + self.p_1 >= 1:
            raise ValueError("X-window probabilities leave no room for mu2")
        if not 0 < self.big_delta < 2 * math.pi:
            raise ValueError("big_delta out of range")


@dataclass
class SnsEstimates:
    """SNS-specific outputs on top of the generic estimate container."""

    base: KgpEstimates
    n_t: float          # Z-string length
    E_z: float
    untagged: float     # lower bound on untagged bits in the Z string
    e1_ph: float        # upper bound on their phase-flip error rate
    h_total: float | None = None  # set by random pairing: entropy, precombined
    p_same: float | None = None   # pairing diagnostics
    e1_paired: float | None = None


def sns_simulate(channel: ChannelParams, src: SnsSourceParams) -> SnsEstimates:
    N = channel.N
    pd = channel.p_d
    ed = channel.e_d
    eps = channel.eps_stat
    eta = channel.arm_eta()
    pz, pv = src.p_z, src.p_vac
    p0, p1 = src.p_0, src.p_1
    p2 = 1.0 - p0 - p1
    mu1, mu2, muz = src.mu1, src.mu2, src.mu_z
    delta = src.big_delta
    flags: list[str] = []

    n_win = {
        "00": ((1 - pz) ** 2 * p0**2 + 2 * (1 - pz) * pz * p0 * pv) * N,
        "01": ((1 - pz) ** 2 * p0 * p1 + (1 - pz) * pz * pv * p1) * N,
        "02": ((1 - pz) ** 2 * p2 * p0 + (1 - pz) * pz * pv * p2) * N,
    }
    n_win["10"] = n_win["01"]
    n_win["20"] = n_win["02"]
    n_delta = (delta / (2 * math.pi)) * (1 - pz) ** 2 * p1**2 * N

    def one_sided_clicks(mu: float) -> float:
        return 2 * ((1 - pd) * math.exp(-eta * mu / 2) - (1 - pd) ** 2 * math.exp(-eta * mu))

    clicks = {
        "00": 2 * pd * (1 - pd),
        "01": one_sided_clicks(mu1),
        "10": one_sided_clicks(mu1),
        "02": one_sided_clicks(mu2),
        "20": one_sided_clicks(mu2),
    }

    def rate_lo(key: str) -> float:
        return lower_expected(clicks[key] * n_win[key], n_win[key], eps) / n_win[key]

    def rate_hi(key: str) -> float:
        return upper_expected(clicks[key] * n_win[key], n_win[key], eps) / n_win[key]

    s1_lo = (
        mu2**2 * math.exp(mu1) * (rate_lo("01") + rate_lo("10"))
        - mu1**2 * math.exp(mu2) * (rate_hi("02") + rate_hi("20"))
        - 2 * (mu2**2 - mu1**2) * rate_hi("00")
    ) / (2 * mu1 * mu2 * (mu2 - mu1))
    if s1_lo < 0:
        flags.append("untagged-rate-clamped")
        s1_lo = 0.0

    n_signal = 4 * N * pz**2 * pv * (1 - pv) * (
        (1 - pd) * math.exp(-eta * muz / 2) - (1 - pd) ** 2 * math.exp(-2 * eta * muz)
    )
    n_error = 2 * N * pz**2 * (1 - pv) ** 2 * (
        (1 - pd) * math.exp(-eta * muz) * float(i0(eta * muz))
        - (1 - pd) ** 2 * math.exp(-2 * eta * muz)
    ) + 2 * N * pz**2 * pv**2 * pd * (1 - pd)
    n_t = n_signal + n_error
    E_z = n_error / n_t if n_t > 0 else 0.5

    grid = np.linspace(-delta / 2, delta / 2, 1 << 10 | 1)
    t_x = (1 / delta) * simpson(
        (1 - pd) * np.exp(-2 * eta * mu1 * np.cos(grid / 2) ** 2), x=grid
    ) - (1 - pd) ** 2 * math.exp(-2 * eta * mu1)
    s_x = (
        (1 / delta)
        * simpson((1 - pd) * np.exp(-2 * eta * mu1 * np.sin(grid / 2) ** 2), x=grid)
        - (1 - pd) ** 2 * math.exp(-2 * eta * mu1)
        + t_x
    )
    t_delta_rate = t_x * (1 - 2 * ed) + ed * s_x
    t_delta_hi = (
        upper_expected(t_delta_rate * 2 * n_delta, 2 * n_delta, eps) / (2 * n_delta)
        if n_delta > 1
        else 0.5
    )

    denom = 2 * mu1 * math.exp(-2 * mu1) * s1_lo
    if denom <= 0:
        flags.append("no-untagged-statistics")
        e1 = 0.5
    else:
        e1 = (t_delta_hi - 0.5 * math.exp(-2 * mu1) * rate_lo("00")) / denom
        e1 = min(max(e1, 0.0), 0.5)

    untagged = N * pz**2 * pv * (1 - pv) * s1_lo
    untagged = min(untagged, n_t)

    base = KgpEstimates(
        n_z=n_t,
        E_z=E_z,
        n_x=2 * n_delta,
        m_x=t_delta_rate * 2 * n_delta,
        s0_z=0.0,
        s11_z=untagged,
        s11_x=0.0,
        e11_x=e1,
        phi11_z=e1,
        f_ec=channel.f_ec,
        eps_stat=eps,
        flags=flags,
    )
    return SnsEstimates(base=base, n_t=n_t, E_z=E_z, untagged=untagged, e1_ph=e1)


def sns_single_bit_entropy(est: SnsEstimates) -> float:
    """Unknown information of the whole Z string (no reconciliation)."""
    if est.h_total is not None:
        return est.h_total
    return max(0.0, est.untagged * (1 - binary_entropy(min(est.e1_ph, 0.5))))


def sns_group_entropy(est: SnsEstimates, n: int, eps_stat: float | None = None) -> float:
    """Group min-entropy for the signature protocol on an SNS source."""
    eps = est.base.eps_stat if eps_stat is None else eps_stat
    n_t = est.n_t
    if n < 1 or n > n_t:
        raise ValueError("group size must satisfy 1 <= n <= n_t")
    frac = min(max(est.untagged / n_t, 0.0), 1.0)
    k = n_t - n
    if k < 1:
        s1n = n * frac
    elif frac <= 0:
        s1n = 0.0
    else:
        lam = min(max(frac, 0.5 / n_t), 1 - 0.5 / n_t)
        s1n = min(max(n * (frac - gamma_u(n, k, lam, eps)), 0.0), float(n))
    if s1n >= 1 and est.untagged - s1n >= 1:
        lam = min(max(est.e1_ph, 1.0 / est.untagged), 1 - 1.0 / est.untagged)
        e1n = min(est.e1_ph + gamma_u(s1n, est.untagged - s1n, lam, eps), 0.5)
    elif est.untagged - s1n < 1:
        e1n = est.e1_ph
    else:
        e1n = 0.5
    raw = s1n * (1 - binary_entropy(e1n)) - n * binary_entropy(min(est.E_z, 0.5))
    return max(0.0, raw)


def sns_random_pairing(est: SnsEstimates) -> SnsEstimates:
    """Pairwise-XOR postprocessing: new error model and untagged share.

    Pairs with exactly one untagged member keep the single-photon error
    rate; doubly-untagged pairs split into a low-error component (both
    errors or neither) and a coin-flip component.  The paired string
    has half the length and error rate 2 E (1 - E).
    """
    e1 = min(est.e1_ph, 0.5)
    ez = est.E_z
    d_un = est.untagged / est.n_t if est.n_t > 0 else 0.0
    d_un = min(max(d_un, 0.0), 1.0)
    p_same = e1 * e1 + (1 - e1) * (1 - e1)
    e1_paired = (e1 * e1) / p_same if p_same > 0 else 0.5
    d_un_paired = d_un * d_un + 2 * d_un * (1 - d_un)
    pairs = est.n_t / 2
    h_frac = (
        d_un_paired
        - d_un * d_un * (p_same * binary_entropy(e1_paired) + (1 - p_same) * 1.0)
        - 2 * d_un * (1 - d_un) * binary_entropy(e1)
    )
    h_frac = max(0.0, h_frac)
    e_paired = 2 * ez * (1 - ez)
    base = KgpEstimates(
        n_z=pairs,
        E_z=e_paired,
        n_x=est.base.n_x,
        m_x=est.base.m_x,
        s0_z=0.0,
        s11_z=d_un_paired * pairs,
        s11_x=0.0,
        e11_x=e1_paired,
        phi11_z=e1_paired,
        f_ec=est.base.f_ec,
        eps_stat=est.base.eps_stat,
        flags=list(est.base.flags) + ["random-pairing"],
    )
    return SnsEstimates(
        base=base,
        n_t=pairs,
        E_z=e_paired,
        untagged=d_un_paired * pairs,
        e1_ph=e1_paired,
        h_total=h_frac * pairs,
        p_same=p_same,
        e1_paired=e1_paired,
    )
