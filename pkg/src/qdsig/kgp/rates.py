"""Signature-rate computation: source optimization, group sizing, sweeps.

Rates are reported in signatures per second (tps) at a given laser
repetition rate: one dataset of N pulses takes N/rep seconds to
collect and yields n_z/(c*n) signatures, c = 3 strings per act for
LFSR-based Toeplitz hashing and 2 for generalized division hashing.

The single-bit baselines sign message bits one at a time.  Their
per-bit key consumption is modeled from the KGP's entropy rate: a
length-L threshold test separating the honest mismatch rate E from
the best mismatch rate an attacker can force (the binary-entropy
inverse of the per-bit unknown information) fails with probability
about exp(-gap^2 L / 4), so L = 4 ln(1/eps) / gap^2 key bits per
check, four independent strings per signed bit.  Precise constants of
the cited single-bit protocols are out of scope; this is an
order-of-magnitude model and is only used for cross-scheme gaps.

Source-parameter optimization is a deterministic bounded coordinate
descent with shrinking steps, from a small set of fixed starts, so
sweeps reproduce bit-identically.  Results are cached per setting.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, replace

from ..bounds import (
    GDH,
    LFSR,
    InfeasibleTargetError,
    binary_entropy,
    required_group_size,
)
from .bb84 import Bb84SourceParams, bb84_simulate, bb84_single_bit_entropy, hn_for_group_bb84
from .sns import (
    SnsSourceParams,
    sns_group_entropy,
    sns_random_pairing,
    sns_simulate,
    sns_single_bit_entropy,
)
from .tptf import (
    ChannelParams,
    TptfSourceParams,
    hn_for_group,
    otuh_key_length,
    tptf_simulate,
)

__all__ = [
    "SINGLE_BIT",
    "RateResult",
    "signature_rate",
    "otuh_baseline_rate",
    "optimize_tptf_source",
    "optimize_bb84_source",
    "optimize_sns_source",
    "sweep_rates",
    "figure_preset",
    "clear_cache",
]

SINGLE_BIT = "single-bit"
_STRINGS_PER_ACT = {LFSR: 3, GDH: 2}

_cache: dict = {}


def clear_cache():
    _cache.clear()


def _cache_file():
    return os.environ.get("QDSIG_CACHE_FILE")


def _cache_get(key):
    if not _cache and _cache_file() and os.path.exists(_cache_file()):
        try:
            _cache.update(json.load(open(_cache_file())))
        except (OSError, ValueError):
            pass
    return _cache.get(key)


def _cache_put(key, value):
    _cache[key] = value
    path = _cache_file()
    if path:
        try:
            json.dump(_cache, open(path, "w"))
        except OSError:
            pass


# ---------------------------------------------------------------------------
# generic bounded coordinate descent (deterministic)

def _descend(objective, start: dict, bounds: dict, rounds: int = 4) -> tuple[dict, float]:
    x = dict(start)
    best = objective(x)
    step = 0.30
    for _ in range(rounds):
        improved = True
        while improved:
            improved = False
            for key in x:
                lo, hi = bounds[key]
                for factor in (1 + step, 1 / (1 + step)):
                    cand = dict(x)
                    cand[key] = min(max(x[key] * factor, lo), hi)
                    if cand[key] == x[key]:
                        continue
                    val = objective(cand)
                    if val > best:
                        best, x = val, cand
                        improved = True
        step /= 2.5
    return x, best


def _h2_inv(y: float) -> float:
    """Inverse of the binary entropy on [0, 1/2]."""
    if y <= 0:
        return 0.0
    if y >= 1:
        return 0.5
    lo, hi = 0.0, 0.5
    for _ in range(60):
        mid = (lo + hi) / 2
        if binary_entropy(mid) < y:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


# ---------------------------------------------------------------------------
# TP-TF source optimization

# decoupled parameterization, one set per user: zshare = p_mu + p_o,
# split = p_mu / zshare, so single coordinate moves trade mass cleanly;
# the pairing bottleneck makes asymmetric optima the norm
_TPTF_BOUNDS = {
    "mu": (0.02, 1.0),
    "nu": (0.002, 0.5),
    "za": (0.30, 0.992), "sa": (0.05, 0.26), "na": (0.004, 0.45),
    "zb": (0.30, 0.992), "sb": (0.05, 0.26), "nb": (0.004, 0.45),
}
_TPTF_STARTS = (
    {"mu": 0.33, "nu": 0.10, "za": 0.92, "sa": 0.25, "na": 0.04,
     "zb": 0.92, "sb": 0.25, "nb": 0.04},
    {"mu": 0.33, "nu": 0.08, "za": 0.88, "sa": 0.21, "na": 0.07,
     "zb": 0.88, "sb": 0.21, "nb": 0.07},
    {"mu": 0.28, "nu": 0.08, "za": 0.74, "sa": 0.25, "na": 0.18,
     "zb": 0.74, "sb": 0.25, "nb": 0.18},
    {"mu": 0.45, "nu": 0.12, "za": 0.70, "sa": 0.25, "na": 0.22,
     "zb": 0.70, "sb": 0.25, "nb": 0.22},
)
_MIN_P_OHAT = 0.003


def _tptf_from_vars(v: dict) -> TptfSourceParams | None:
    if v["nu"] >= 0.8 * v["mu"]:
        return None
    probs = {}
    for side, z, s, nn in (("a", "za", "sa", "na"), ("b", "zb", "sb", "nb")):
        p_ohat = 1.0 - v[z] - v[nn]
        if p_ohat < _MIN_P_OHAT:
            return None
        probs[f"p_mu_{side}"] = v[z] * v[s]
        probs[f"p_o_{side}"] = v[z] * (1.0 - v[s])
        probs[f"p_nu_{side}"] = v[nn]
        probs[f"p_ohat_{side}"] = p_ohat
    return TptfSourceParams(mu=v["mu"], nu=v["nu"], **probs)


def group_rate_for_estimates(hn_of_n, n_raw: float, scheme: str, m_bits: int,
                             channel: ChannelParams, rep_hz: float):
    """(n, hn, tps) for the best admissible group size, or an infeasible stub."""
    c = _STRINGS_PER_ACT[scheme]
    n_max = int(n_raw // c)
    if n_max < 2:
        return None
    try:
        n = required_group_size(m_bits, channel.eps, hn_of_n, scheme, n_max=n_max)
    except InfeasibleTargetError:
        return None
    tps = (n_raw / (c * n)) * rep_hz / channel.N
    return n, hn_of_n(n), tps


def _infeasible_surrogate(hn_of_n, n_raw: float, scheme: str, m_bits: int,
                          eps: float) -> float:
    """Graded score for infeasible settings so descent can climb out.

    Best achievable group min-entropy over a geometric grid, minus the
    entropy the target would need; always far below any feasible rate.
    """
    c = _STRINGS_PER_ACT[scheme]
    n_max = int(n_raw // c)
    if n_max < 2:
        return -1e12
    need = math.log2(m_bits) + (1.0 if scheme == LFSR else -2.0) - math.log2(eps)
    best = 0.0
    n = 64
    while n <= n_max:
        best = max(best, hn_of_n(n))
        n *= 2
    best = max(best, hn_of_n(n_max))
    return -1e9 + (best - need)


def optimize_tptf_source(
    channel: ChannelParams,
    objective: str = "group-rate",
    scheme: str = GDH,
    m_bits: int = 10**6,
    rep_hz: float = 1e9,
    rounds: int = 4,
) -> TptfSourceParams:
    """Optimized intensities/probabilities at one channel setting.

    objective "group-rate" maximizes the proposed scheme's signature
    rate; "otuh-l" maximizes the distillable key length of the
    privacy-amplified baseline (used for the postprocessing-scale
    anchors and the ratio figure denominator).
    """
    key = (
        "tptf", objective, scheme if objective == "group-rate" else "-",
        m_bits if objective == "group-rate" else 0,
        round(channel.distance_km, 3), channel.N, channel.eps,
        channel.eta_d, channel.p_d, channel.e_d, channel.alpha_db_km,
        channel.f_ec, rounds,
    )
    skey = json.dumps(key)
    hit = _cache_get(skey)
    if hit is not None:
        return TptfSourceParams(**hit)

    def evaluate(v: dict) -> float:
        src = _tptf_from_vars(v)
        if src is None:
            return -math.inf
        est = tptf_simulate(channel, src)
        if est.n_z <= 0:
            return -math.inf
        if objective == "otuh-l":
            return otuh_key_length(est)
        hn_of_n = lambda n: hn_for_group(est, n)
        out = group_rate_for_estimates(hn_of_n, est.n_z, scheme, m_bits, channel, rep_hz)
        if out is None:
            return _infeasible_surrogate(hn_of_n, est.n_z, scheme, m_bits, channel.eps)
        return out[2]

    best_v, best_val = None, -math.inf
    for start in _TPTF_STARTS:
        v, val = _descend(evaluate, start, _TPTF_BOUNDS, rounds)
        if val > best_val:
            best_v, best_val = v, val
    src = _tptf_from_vars(best_v) if best_v else None
    if src is None or best_val <= 0 or best_val == -math.inf:
        src = _tptf_from_vars(_TPTF_STARTS[0])
    _cache_put(skey, src.__dict__ | {})
    return src


_BB84_BOUNDS = {
    "mu1": (0.05, 1.0),
    "mu2": (0.005, 0.5),
    "p1": (0.05, 0.9),
    "p2": (0.02, 0.9),
    "q_key": (0.3, 0.98),
}
_BB84_STARTS = (
    {"mu1": 0.45, "mu2": 0.10, "p1": 0.6, "p2": 0.25, "q_key": 0.9},
    {"mu1": 0.60, "mu2": 0.05, "p1": 0.5, "p2": 0.3, "q_key": 0.7},
)


def _bb84_from_vars(v: dict) -> Bb84SourceParams | None:
    if v["mu2"] >= 0.8 * v["mu1"] or v["p1"] + v["p2"] > 0.97:
        return None
    return Bb84SourceParams(
        mu1=v["mu1"], mu2=v["mu2"], mu3=0.0, p1=v["p1"], p2=v["p2"], q_key=v["q_key"]
    )


def optimize_bb84_source(channel: ChannelParams, mode: str, scheme: str = GDH,
                         m_bits: int = 10**6, rep_hz: float = 1e9,
                         rounds: int = 3) -> Bb84SourceParams:
    key = ("bb84", mode, scheme, m_bits, round(channel.distance_km, 3), channel.N,
           channel.eps, channel.eta_d, channel.p_d, channel.e_d,
           channel.alpha_db_km, channel.f_ec, rounds)
    skey = json.dumps(key)
    hit = _cache_get(skey)
    if hit is not None:
        return Bb84SourceParams(**hit)

    def evaluate(v):
        src = _bb84_from_vars(v)
        if src is None:
            return -math.inf
        est = bb84_simulate(channel, src)
        if est.n_z <= 0:
            return -math.inf
        if mode == SINGLE_BIT:
            return _single_bit_tps(
                bb84_single_bit_entropy(est), est.n_z, est.E_z, channel, m_bits, rep_hz
            )
        hn_of_n = lambda n: hn_for_group_bb84(est, n)
        out = group_rate_for_estimates(hn_of_n, est.n_z, scheme, m_bits, channel, rep_hz)
        if out is None:
            return _infeasible_surrogate(hn_of_n, est.n_z, scheme, m_bits, channel.eps)
        return out[2]

    best_v, best_val = None, -math.inf
    for start in _BB84_STARTS:
        v, val = _descend(evaluate, start, _BB84_BOUNDS, rounds)
        if val > best_val:
            best_v, best_val = v, val
    src = _bb84_from_vars(best_v) if best_v else None
    if src is None:
        src = _bb84_from_vars(_BB84_STARTS[0])
    _cache_put(skey, src.__dict__ | {})
    return src


_SNS_BOUNDS = {
    "p_z": (0.2, 0.95),
    "p_vac": (0.3, 0.95),
    "p_1": (0.05, 0.7),
    "mu1": (0.01, 0.4),
    "mu2": (0.05, 1.0),
    "mu_z": (0.05, 1.0),
}
_SNS_STARTS = (
    {"p_z": 0.7, "p_vac": 0.75, "p_1": 0.35, "mu1": 0.1, "mu2": 0.4, "mu_z": 0.45},
    {"p_z": 0.5, "p_vac": 0.6, "p_1": 0.25, "mu1": 0.05, "mu2": 0.3, "mu_z": 0.3},
)


def _sns_from_vars(v: dict) -> SnsSourceParams | None:
    if v["mu1"] >= 0.8 * v["mu2"]:
        return None
    p0 = max(0.05, 1.0 - v["p_1"] - 0.25)  # leave a fixed share for mu2
    if p0 + v["p_1"] >= 0.99:
        return None
    return SnsSourceParams(
        p_z=v["p_z"], p_vac=v["p_vac"], p_0=p0, p_1=v["p_1"],
        mu1=v["mu1"], mu2=v["mu2"], mu_z=v["mu_z"],
    )


def optimize_sns_source(channel: ChannelParams, mode: str, scheme: str = GDH,
                        m_bits: int = 10**6, rep_hz: float = 1e9,
                        random_pairing: bool = False,
                        rounds: int = 3) -> SnsSourceParams:
    key = ("sns", mode, scheme, m_bits, random_pairing,
           round(channel.distance_km, 3), channel.N, channel.eps, channel.eta_d,
           channel.p_d, channel.e_d, channel.alpha_db_km, channel.f_ec, rounds)
    skey = json.dumps(key)
    hit = _cache_get(skey)
    if hit is not None:
        return SnsSourceParams(**hit)

    def evaluate(v):
        src = _sns_from_vars(v)
        if src is None:
            return -math.inf
        est = sns_simulate(channel, src)
        if est.n_t <= 0:
            return -math.inf
        if random_pairing:
            est = sns_random_pairing(est)
        if mode == SINGLE_BIT:
            return _single_bit_tps(
                sns_single_bit_entropy(est), est.n_t, est.E_z, channel, m_bits, rep_hz
            )
        hn_of_n = lambda n: sns_group_entropy(est, n)
        out = group_rate_for_estimates(hn_of_n, est.n_t, scheme, m_bits, channel, rep_hz)
        if out is None:
            return _infeasible_surrogate(hn_of_n, est.n_t, scheme, m_bits, channel.eps)
        return out[2]

    best_v, best_val = None, -math.inf
    for start in _SNS_STARTS:
        v, val = _descend(evaluate, start, _SNS_BOUNDS, rounds)
        if val > best_val:
            best_v, best_val = v, val
    src = _sns_from_vars(best_v) if best_v else None
    if src is None:
        src = _sns_from_vars(_SNS_STARTS[0])
    _cache_put(skey, src.__dict__ | {})
    return src


# ---------------------------------------------------------------------------
# rate entry points

@dataclass(frozen=True)
class RateResult:
    kgp: str
    scheme: str
    distance_km: float
    m_bits: int
    n_group: int | None
    hn: float
    rate_tps: float
    eps: float
    n_raw: float
    feasible: bool


def _single_bit_tps(h_total: float, n_raw: float, e_honest: float,
                    channel: ChannelParams, m_bits: int, rep_hz: float) -> float:
    if n_raw <= 0 or h_total <= 0:
        return 0.0
    kappa = min(h_total / n_raw, 1.0)
    gap = _h2_inv(kappa) - e_honest
    if gap <= 1e-4:
        return 0.0
    per_check = 4 * math.log(1 / channel.eps) / gap**2
    per_message = 4 * per_check * m_bits  # two futures x two receivers
    return (n_raw / per_message) * rep_hz / channel.N


def signature_rate(
    kgp: str,
    scheme: str,
    channel: ChannelParams,
    m_bits: int,
    rep_hz: float = 1e9,
    src=None,
) -> RateResult:
    """Signature rate of one (key source, messaging scheme) combination.

    kgp is one of "tptf", "bb84", "sns", "sns-rp"; scheme is "lfsr",
    "gdh", or "single-bit" (the bitwise baseline, only meaningful with
    bb84/sns/sns-rp sources).  Sources are optimized per setting when
    not supplied (cached).  Infeasible settings come back with rate 0.
    """
    if scheme in (LFSR, GDH):
        if kgp == "tptf":
            if src is None:
                src = optimize_tptf_source(channel, "group-rate", scheme, m_bits, rep_hz)
            est = tptf_simulate(channel, src)
            hn_of_n, n_raw = (lambda n: hn_for_group(est, n)), est.n_z
        elif kgp == "bb84":
            if src is None:
                src = optimize_bb84_source(channel, "group", scheme, m_bits, rep_hz)
            est = bb84_simulate(channel, src)
            hn_of_n, n_raw = (lambda n: hn_for_group_bb84(est, n)), est.n_z
        elif kgp in ("sns", "sns-rp"):
            if src is None:
                src = optimize_sns_source(
                    channel, "group", scheme, m_bits, rep_hz, random_pairing=(kgp == "sns-rp")
                )
            est = sns_simulate(channel, src)
            if kgp == "sns-rp":
                est = sns_random_pairing(est)
            hn_of_n, n_raw = (lambda n: sns_group_entropy(est, n)), est.n_t
        else:
            raise ValueError(f"unknown key source {kgp!r}")
        out = group_rate_for_estimates(hn_of_n, n_raw, scheme, m_bits, channel, rep_hz)
        if out is None:
            return RateResult(kgp, scheme, channel.distance_km, m_bits, None, 0.0,
                              0.0, channel.eps, n_raw, False)
        n, hn, tps = out
        return RateResult(kgp, scheme, channel.distance_km, m_bits, n, hn, tps,
                          channel.eps, n_raw, True)

    if scheme != SINGLE_BIT:
        raise ValueError(f"unknown scheme {scheme!r}")
    if kgp == "bb84":
        if src is None:
            src = optimize_bb84_source(channel, SINGLE_BIT, m_bits=m_bits, rep_hz=rep_hz)
        est = bb84_simulate(channel, src)
        tps = _single_bit_tps(bb84_single_bit_entropy(est), est.n_z, est.E_z,
                              channel, m_bits, rep_hz)
        n_raw = est.n_z
    elif kgp in ("sns", "sns-rp"):
        if src is None:
            src = optimize_sns_source(channel, SINGLE_BIT, m_bits=m_bits, rep_hz=rep_hz,
                                      random_pairing=(kgp == "sns-rp"))
        est = sns_simulate(channel, src)
        if kgp == "sns-rp":
            est = sns_random_pairing(est)
        tps = _single_bit_tps(sns_single_bit_entropy(est), est.n_t, est.E_z,
                              channel, m_bits, rep_hz)
        n_raw = est.n_t
    else:
        raise ValueError(f"single-bit baseline not defined for {kgp!r}")
    return RateResult(kgp, SINGLE_BIT, channel.distance_km, m_bits, None, 0.0,
                      tps, channel.eps, n_raw, tps > 0)


def otuh_baseline_rate(
    channel: ChannelParams,
    scheme: str = GDH,
    m_bits: int = 10**3,
    rep_hz: float = 1e9,
    src: TptfSourceParams | None = None,
) -> RateResult:
    """Rate of the privacy-amplified baseline on the same TP-TF source.

    Perfect keys make the group min-entropy equal the group size, so
    the group size solves in closed form; the distillable length l
    replaces the raw string length in the consumption accounting.
    """
    if src is None:
        src = optimize_tptf_source(channel, "otuh-l")
    est = tptf_simulate(channel, src)
    l_key = otuh_key_length(est)
    c = _STRINGS_PER_ACT[scheme]
    if l_key < 2 * c:
        return RateResult("tptf-otuh", scheme, channel.distance_km, m_bits, None,
                          0.0, 0.0, channel.eps, l_key, False)
    n = required_group_size(m_bits, channel.eps, float, scheme,
                            n_max=int(l_key // c))
    tps = (l_key / (c * n)) * rep_hz / channel.N
    return RateResult("tptf-otuh", scheme, channel.distance_km, m_bits, n, float(n),
                      tps, channel.eps, l_key, True)


def sweep_rates(kgp: str, scheme: str, channel: ChannelParams, distances,
                m_bits: int, rep_hz: float = 1e9) -> list[RateResult]:
    out = []
    for d in distances:
        ch = replace(channel, distance_km=float(d))
        out.append(signature_rate(kgp, scheme, ch, m_bits, rep_hz))
    return out


_FIGURE_CURVES = {
    3: [("tptf", GDH), ("bb84", GDH), ("sns", GDH),
        ("bb84", SINGLE_BIT), ("sns", SINGLE_BIT), ("sns-rp", SINGLE_BIT)],
    4: [("tptf", GDH), ("bb84", GDH), ("sns", GDH),
        ("bb84", SINGLE_BIT), ("sns", SINGLE_BIT), ("sns-rp", SINGLE_BIT)],
}


def figure_preset(figure: int, channel: ChannelParams, distances,
                  rep_hz: float = 1e9) -> tuple[list[str], list[list]]:
    """Rows for the paper-style figures; returns (header, rows).

    3: all six curves at 1 Kb.  4: the same at 1 Mb.  5: the TP-TF
    curve at 1 Mb for three dataset sizes, rates below one signature
    per dataset dropped.  6: proposed/baseline ratio at 1 Kb for two
    dataset sizes.
    """
    if figure in (3, 4):
        m_bits = 10**3 if figure == 3 else 10**6
        curves = _FIGURE_CURVES[figure]
        header = ["distance_km"] + [f"{k}:{s}" for k, s in curves]
        rows = []
        for d in distances:
            ch = replace(channel, distance_km=float(d))
            row = [d]
            for k, s in curves:
                row.append(signature_rate(k, s, ch, m_bits, rep_hz).rate_tps)
            rows.append(row)
        return header, rows
    if figure == 5:
        header = ["distance_km", "N=1e9", "N=1e11", "N=1e13"]
        rows = []
        for d in distances:
            row = [d]
            for N in (1e9, 1e11, 1e13):
                ch = replace(channel, distance_km=float(d), N=N)
                r = signature_rate("tptf", GDH, ch, 10**6, rep_hz)
                dataset_time = ch.N / rep_hz
                row.append(r.rate_tps if r.rate_tps * dataset_time >= 1.0 else 0.0)
            rows.append(row)
        return header, rows
    if figure == 6:
        header = ["distance_km", "ratio_N=1e13", "ratio_N=1e11"]
        rows = []
        for d in distances:
            row = [d]
            for N in (1e13, 1e11):
                ch = replace(channel, distance_km=float(d), N=N)
                prop = signature_rate("tptf", GDH, ch, 10**3, rep_hz)
                base = otuh_baseline_rate(ch, GDH, 10**3, rep_hz)
                row.append(prop.rate_tps / base.rate_tps if base.rate_tps > 0 else 0.0)
            rows.append(row)
        return header, rows
    raise ValueError("figure must be one of 3, 4, 5, 6")
