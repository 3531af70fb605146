"""Decoy-state BB84 chain (three intensities, asymmetric basis choice).

Used both for the single-bit baseline (unknown information of the
whole sifted string, no error correction) and as an alternative key
source for the group-based protocol (group projections plus the
reconciliation cost).  The link is direct sender-to-receiver, so the
full fiber length attenuates, unlike the twin-field chains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..bounds import binary_entropy
from .fluct import gamma_u
from .tptf import ChannelParams, KgpEstimates

__all__ = ["Bb84SourceParams", "bb84_simulate", "bb84_single_bit_entropy"]


@dataclass(frozen=True)
class Bb84SourceParams:
    mu1: float = 0.45
    mu2: float = 0.10
    mu3: float = 0.0
    p1: float = 0.7
    p2: float = 0.2
    q_key: float = 0.9  # probability of the key basis

    def __post_init__(self):
        if not self.mu1 > self.mu2 > self.mu3 >= 0:
            raise ValueError("need mu1 > mu2 > mu3 >= 0")
        if not (0 < self.p1 < 1 and 0 < self.p2 < 1 and self.p1 + self.p2 < 1):
            raise ValueError("invalid intensity probabilities")
        if not 0 < self.q_key < 1:
            raise ValueError("invalid basis probability")

    @property
    def p3(self) -> float:
        return 1.0 - self.p1 - self.p2


def _tau(n: int, mus, ps) -> float:
    return sum(math.exp(-k) * k**n * p / math.factorial(n) for k, p in zip(mus, ps))


def bb84_simulate(channel: ChannelParams, src: Bb84SourceParams) -> KgpEstimates:
    """Vacuum/single-photon bounds and phase error for decoy BB84.

    The KgpEstimates fields are reused with the obvious meanings:
    n_z/E_z describe the sifted key-basis string, s0_z/s11_z are the
    vacuum and single-photon lower bounds inside it, phi11_z the phase
    error upper bound, and n_x/m_x the check-basis statistics.
    """
    eta = channel.direct_eta()
    pd = channel.p_d
    ed = channel.e_d
    N = channel.N
    eps = channel.eps_stat
    mus = (src.mu1, src.mu2, src.mu3)
    ps = (src.p1, src.p2, src.p3)
    qk = src.q_key
    qc = 1.0 - qk
    flags: list[str] = []

    def click(k: float) -> float:
        return 1.0 - (1.0 - 2 * pd) * math.exp(-eta * k)

    def err(k: float) -> float:
        return pd * math.exp(-eta * k) + ed * (1.0 - math.exp(-eta * k))

    n_key_k = [N * p * qk * qk * click(k) for k, p in zip(mus, ps)]
    m_key_k = [N * p * qk * qk * err(k) for k, p in zip(mus, ps)]
    n_chk_k = [N * p * qc * qc * click(k) for k, p in zip(mus, ps)]
    m_chk_k = [N * p * qc * qc * err(k) for k, p in zip(mus, ps)]
    n_key = sum(n_key_k)
    m_key = sum(m_key_k)
    n_chk = sum(n_chk_k)
    m_chk = sum(m_chk_k)

    dev_n_key = math.sqrt(n_key / 2 * math.log(21 / eps)) if n_key > 0 else 0.0
    dev_n_chk = math.sqrt(n_chk / 2 * math.log(21 / eps)) if n_chk > 0 else 0.0
    dev_m_chk = math.sqrt(m_chk / 2 * math.log(21 / eps)) if m_chk > 0 else 0.0

    def n_pm(nk, k, p, dev, sign):
        return math.exp(k) / p * (nk + sign * dev)

    def bounds_pair(nks, dev):
        lo = [n_pm(nk, k, p, dev, -1) for nk, k, p in zip(nks, mus, ps)]
        hi = [n_pm(nk, k, p, dev, +1) for nk, k, p in zip(nks, mus, ps)]
        return lo, hi

    def s01_bounds(nks, dev):
        mu1, mu2, mu3 = mus
        lo, hi = bounds_pair(nks, dev)
        tau0 = _tau(0, mus, ps)
        tau1 = _tau(1, mus, ps)
        s0 = tau0 * (mu2 * lo[2] - mu3 * hi[1]) / (mu2 - mu3)
        s0 = max(0.0, s0)
        s1 = (
            tau1
            * mu1
            * (lo[1] - hi[2] - (mu2**2 - mu3**2) / mu1**2 * (hi[0] - s0 / tau0))
            / (mu1 * (mu2 - mu3) - mu2**2 + mu3**2)
        )
        s1 = max(0.0, s1)
        return s0, s1

    s_key0, s_key1 = s01_bounds(n_key_k, dev_n_key)
    s_chk0, s_chk1 = s01_bounds(n_chk_k, dev_n_chk)

    mu1, mu2, mu3 = mus
    tau1 = _tau(1, mus, ps)
    m_hi = [math.exp(k) / p * (mk + dev_m_chk) for mk, k, p in zip(m_chk_k, mus, ps)]
    m_lo = [math.exp(k) / p * (mk - dev_m_chk) for mk, k, p in zip(m_chk_k, mus, ps)]
    v_chk1 = max(0.0, tau1 * (m_hi[1] - m_lo[2]) / (mu2 - mu3))

    if s_key1 >= 1 and s_chk1 >= 1:
        lam = v_chk1 / s_chk1 if s_chk1 > 0 else 0.5
        lam = min(max(lam, 1.0 / (s_key1 + s_chk1)), 1 - 1.0 / (s_key1 + s_chk1))
        phi = v_chk1 / s_chk1 + gamma_u(s_chk1, s_key1, lam, eps)
    else:
        flags.append("no-single-photon-statistics")
        phi = 0.5
    phi = min(max(phi, 0.0), 0.5)

    return KgpEstimates(
        n_z=n_key,
        E_z=m_key / n_key if n_key > 0 else 0.5,
        n_x=n_chk,
        m_x=m_chk,
        s0_z=s_key0,
        s11_z=s_key1,
        s11_x=s_chk1,
        e11_x=v_chk1 / s_chk1 if s_chk1 > 0 else 0.5,
        phi11_z=phi,
        f_ec=channel.f_ec,
        eps_stat=eps,
        flags=flags,
    )


def bb84_single_bit_entropy(est: KgpEstimates) -> float:
    """Unknown information of the whole sifted string, no reconciliation."""
    return max(
        0.0, est.s0_z + est.s11_z * (1 - binary_entropy(min(est.phi11_z, 0.5)))
    )


def hn_for_group_bb84(est: KgpEstimates, n: int, eps_stat: float | None = None) -> float:
    """Group min-entropy on a BB84 source.

    Same sampling projections as the twin-field chain; the
    reconciliation cost here is the plain Shannon term n*H(E) of the
    sifted key string.
    """
    from .tptf import group_level_bounds

    s0_zn, s11_zn, phi_zn = group_level_bounds(est, n, eps_stat)
    raw = (
        s0_zn
        + s11_zn * (1 - binary_entropy(phi_zn))
        - n * binary_entropy(min(est.E_z, 0.5))
    )
    return max(0.0, raw)
