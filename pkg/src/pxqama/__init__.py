"""Hierarchical QAM with joint shared and private precoding for two users.

Modules
-------
hqam
    Gray-labeled hierarchical PAM/QAM and bit-to-symbol mapping.
geometry
    Channel pair, precoders and equivalent per-user channels.
demapper
    Per-user max-log and exact soft demapping.
inforate
    Bit-channel mutual information and user rates.
region
    Mode sweeps, achievable rate region and mode selection.
"""

__version__ = "0.1.0"

from .geometry import ChannelPair, make_channels, make_precoders, equivalent_channels
from .hqam import DistanceProfile, ModeConfig, build_hier_pam
from .inforate import user_rates
from .region import SweepGrid, build_region, select_modes, sweep

__all__ = [
    "ChannelPair",
    "DistanceProfile",
    "ModeConfig",
    "SweepGrid",
    "build_hier_pam",
    "build_region",
    "equivalent_channels",
    "make_channels",
    "make_precoders",
    "select_modes",
    "sweep",
    "user_rates",
    "__version__",
]
