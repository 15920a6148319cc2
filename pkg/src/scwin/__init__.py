"""Spatially coupled LDPC codes with sliding-window decoding.

Construction of (doped) coupled chains from protographs, permutation
lifting to full Tanner graphs, an AWGN LLR channel, a sliding-window
belief-propagation decoder with adaptive window extension, and seeded
Monte Carlo campaigns with error-propagation diagnostics.
"""

from .channel import (
    ChannelConfig,
    DEFAULT_LLR_SAT,
    channel_supplier,
    sigma_from_ebn0,
    transmit_block,
)
from .decoder import (
    BlockDecision,
    WindowConfig,
    WindowState,
    block_avg_llr,
    bp_round,
    decode_chain,
    decode_chain_with_extension,
    decode_target,
    extension_triggered,
    init_window,
    shift_window,
)
from .errors import (
    BlockNotInWindow,
    ConfigError,
    DopingOutOfRange,
    DopingTooDense,
    EndOfChain,
    InvalidRate,
    LiftFailure,
    NoMatchingFrames,
    ShapeMismatch,
    SumConstraintViolated,
)
from .lifting import (
    LiftReport,
    LiftSpec,
    TannerGraph,
    export_alist,
    lift,
    verify_lift,
)
from .protograph import (
    BaseMatrix,
    CoupledChain,
    DopingSpec,
    EdgeSpreading,
    RateReport,
    build_chain,
    chain_listing,
    degree_profile,
    design_rate,
    validate_edge_spreading,
)
from .simulator import (
    BurstSpec,
    CampaignConfig,
    FrameResult,
    Metrics,
    PointMetrics,
    detect_error_propagation,
    errdist_csv,
    errdist_report,
    frame_seed,
    metrics_csv,
    run_campaign,
    run_frame,
    trace_csv,
)

__all__ = [
    "BaseMatrix",
    "BlockDecision",
    "BlockNotInWindow",
    "BurstSpec",
    "CampaignConfig",
    "ChannelConfig",
    "ConfigError",
    "CoupledChain",
    "DEFAULT_LLR_SAT",
    "DopingOutOfRange",
    "DopingSpec",
    "DopingTooDense",
    "EdgeSpreading",
    "EndOfChain",
    "FrameResult",
    "InvalidRate",
    "LiftFailure",
    "LiftReport",
    "LiftSpec",
    "Metrics",
    "NoMatchingFrames",
    "PointMetrics",
    "RateReport",
    "ShapeMismatch",
    "SumConstraintViolated",
    "TannerGraph",
    "WindowConfig",
    "WindowState",
    "block_avg_llr",
    "bp_round",
    "build_chain",
    "chain_listing",
    "channel_supplier",
    "decode_chain",
    "decode_chain_with_extension",
    "decode_target",
    "degree_profile",
    "design_rate",
    "detect_error_propagation",
    "errdist_csv",
    "errdist_report",
    "export_alist",
    "extension_triggered",
    "frame_seed",
    "init_window",
    "lift",
    "metrics_csv",
    "run_campaign",
    "run_frame",
    "shift_window",
    "sigma_from_ebn0",
    "trace_csv",
    "transmit_block",
    "validate_edge_spreading",
    "verify_lift",
]
