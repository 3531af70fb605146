"""Key-generation-protocol simulators and signature-rate computation.

Submodules:
  fluct  - finite-size deviation bound for sampling without replacement
           and the expected/observed count conversions built on it
  tptf   - two-photon twin-field chain (the headline protocol)
  bb84   - decoy-state BB84 chain
  sns    - sending-or-not-sending chain, with the random-pairing booster
  rates  - source optimization, group-size solving, signature rates,
           figure sweeps
"""

from .fluct import gamma_u, lower_expected, upper_expected, count_dev
from .tptf import (
    ChannelParams,
    TptfSourceParams,
    KgpEstimates,
    tptf_simulate,
    group_level_bounds,
    hn_for_group,
    otuh_key_length,
)
from .bb84 import Bb84SourceParams, bb84_simulate
from .sns import SnsSourceParams, sns_simulate, sns_random_pairing
from .rates import (
    RateResult,
    signature_rate,
    optimize_tptf_source,
    sweep_rates,
    figure_preset,
)

__all__ = [
    "gamma_u",
    "lower_expected",
    "upper_expected",
    "count_dev",
    "ChannelParams",
    "TptfSourceParams",
    "KgpEstimates",
    "tptf_simulate",
    "group_level_bounds",
    "hn_for_group",
    "otuh_key_length",
    "Bb84SourceParams",
    "bb84_simulate",
    "SnsSourceParams",
    "sns_simulate",
    "sns_random_pairing",
    "RateResult",
    "signature_rate",
    "optimize_tptf_source",
    "sweep_rates",
    "figure_preset",
]
