"""Seeded Monte Carlo campaigns over independent frames.

Every frame is a pure function of (campaign config, SNR index, frame
index): its seed is derived by hashing those three, so results never
depend on worker count, scheduling, or how many other frames ran.
Early exit at max_block_errors uses a prefix rule: frames are counted
in index order and the point closes at the first frame reaching the
budget, discarding any later frames a parallel wave happened to
compute.  Doped blocks carry no transmitted bits and are excluded from
bit/block error counters (window-size latency stats still cover them,
since the decoder visits every block).
"""

from __future__ import annotations

import hashlib
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import ChannelConfig, channel_supplier
from .decoder import WindowConfig, decode_chain_with_extension
from .errors import NoMatchingFrames
from .lifting import LiftSpec, TannerGraph, lift
from .protograph import DopingSpec, EdgeSpreading, build_chain, design_rate

_BURST_MODES = ("erase", "flip")


@dataclass(frozen=True)
class BurstSpec:
    """Deterministic channel corruption over a span of blocks.

    `erase` zeroes the span's LLRs, `flip` negates them.  The burst is
    the controlled stand-in for rare natural error-propagation
    triggers.
    """

    start_block: int
    length: int
    mode: str = "erase"

    def __post_init__(self):
        if self.start_block < 0 or self.length < 1:
            raise ValueError("burst needs start_block >= 0 and length >= 1")
        if self.mode not in _BURST_MODES:
            raise ValueError(f"burst mode must be one of {_BURST_MODES}")

    @property
    def end_block(self) -> int:
        return self.start_block + self.length


@dataclass(frozen=True)
class CampaignConfig:
    """Everything a worker needs to rebuild the graph and run frames."""

    spreading: EdgeSpreading
    frame_len: int
    lift: LiftSpec
    window: WindowConfig
    snr_points_db: tuple
    frames_per_point: int
    master_seed: int = 0
    doping: DopingSpec = DopingSpec()
    terminated: bool = True
    max_block_errors: Optional[int] = 200
    burst: Optional[BurstSpec] = None
    ep_run_threshold: int = 5
    rate_override: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(
            self, "snr_points_db", tuple(float(s) for s in self.snr_points_db)
        )
        if not self.snr_points_db:
            raise ValueError("need at least one SNR point")
        if self.frames_per_point < 1:
            raise ValueError("frames_per_point must be >= 1")
        if self.ep_run_threshold < 2:
            raise ValueError("ep_run_threshold must be >= 2")
        if self.max_block_errors is not None and self.max_block_errors < 1:
            raise ValueError("max_block_errors must be >= 1 or None")
        if self.burst is not None and self.burst.end_block > self.frame_len:
            raise ValueError("burst must lie within the frame")

    def energy_rate(self) -> float:
        """Code rate used for E_b/N_0 normalization (doped design rate
        unless overridden)."""
        if self.rate_override is not None:
            return self.rate_override
        chain = build_chain(
            self.spreading, self.frame_len,
            doping=self.doping, terminated=self.terminated,
        )
        return float(design_rate(chain).doped)


def frame_seed(master_seed: int, snr_index: int, frame_index: int) -> int:
    """Stable 64-bit per-frame seed; no dependency on execution order."""
    text = f"{master_seed}:{snr_index}:{frame_index}".encode()
    return int.from_bytes(hashlib.sha256(text).digest()[:8], "big")


@dataclass(eq=False)
class FrameResult:
    """Per-block outcome of one decoded frame."""

    frame_seed: int
    per_block_bit_errors: np.ndarray
    block_error_flags: np.ndarray
    avg_window_sizes: np.ndarray
    avg_llrs: np.ndarray
    is_error_propagation: bool


_GRAPH_CACHE: dict = {}


def _graph_key(config: CampaignConfig):
    sp = config.spreading
    return (
        sp.base.entries.tobytes(),
        sp.base.entries.shape,
        tuple(c.tobytes() for c in sp.components),
        config.frame_len,
        config.doping.kind,
        config.doping.positions,
        config.terminated,
        config.lift.factor,
        config.lift.method,
        config.lift.seed,
    )


def campaign_graph(config: CampaignConfig) -> TannerGraph:
    """Build (or fetch from the per-process cache) the campaign graph."""
    key = _graph_key(config)
    graph = _GRAPH_CACHE.get(key)
    if graph is None:
        chain = build_chain(
            config.spreading, config.frame_len,
            doping=config.doping, terminated=config.terminated,
        )
        graph = lift(chain, config.lift)
        _GRAPH_CACHE.clear()
        _GRAPH_CACHE[key] = graph
    return graph


def _frame_supplier(config: CampaignConfig, graph, snr_db: float, seed: int):
    if config.rate_override is not None:
        rate = config.rate_override
    else:
        rate = float(design_rate(graph.chain).doped)
    chan = ChannelConfig(
        ebn0_db=snr_db, rate=rate, seed=seed,
        llr_sat=config.window.llr_sat,
    )
    base = channel_supplier(chan, graph)
    burst = config.burst
    if burst is None:
        return base

    def supply(t: int) -> np.ndarray:
        values = base(t)
        if burst.start_block <= t < burst.end_block:
            if burst.mode == "erase":
                return np.zeros_like(values)
            return -values
        return values

    return supply


def detect_error_propagation(result: FrameResult, run_threshold: int = 5) -> bool:
    """True iff the frame has >= run_threshold consecutive block errors."""
    if run_threshold < 2:
        raise ValueError("run_threshold must be >= 2")
    for erroneous, group in itertools.groupby(result.block_error_flags):
        if erroneous and sum(1 for _ in group) >= run_threshold:
            return True
    return False


def run_frame(config: CampaignConfig, snr_db: float, seed: int) -> FrameResult:
    """Transmit and window-decode one frame, counting errors per block.

    Errors are counted against the all-zero codeword; doped blocks
    decode to zero by pinning and contribute no errors.
    """
    graph = campaign_graph(config)
    supplier = _frame_supplier(config, graph, snr_db, seed)
    decisions = decode_chain_with_extension(
        graph, graph.chain, config.window, supplier
    )
    per_block = np.array([int(d.bits.sum()) for d in decisions], dtype=np.int64)
    result = FrameResult(
        frame_seed=seed,
        per_block_bit_errors=per_block,
        block_error_flags=per_block > 0,
        avg_window_sizes=np.array(
            [d.window_size_at_decode for d in decisions], dtype=np.int64
        ),
        avg_llrs=np.array([d.avg_llr for d in decisions]),
        is_error_propagation=False,
    )
    result.is_error_propagation = detect_error_propagation(
        result, config.ep_run_threshold
    )
    return result


@dataclass
class PointMetrics:
    """Exact counters and derived rates for one SNR point."""

    snr_db: float
    frames: int = 0
    bits: int = 0
    bit_errors: int = 0
    blocks: int = 0
    block_errors: int = 0
    frame_errors: int = 0
    ep_frames: int = 0
    window_size_sum: int = 0
    decoded_blocks: int = 0

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else 0.0

    @property
    def bler(self) -> float:
        return self.block_errors / self.blocks if self.blocks else 0.0

    @property
    def frame_error_rate(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    @property
    def mean_window_size(self) -> float:
        return self.window_size_sum / self.decoded_blocks if self.decoded_blocks else 0.0


@dataclass
class Metrics:
    """Campaign result: one PointMetrics per SNR point, in grid order."""

    points: list
    frame_results: Optional[dict] = None


def _accumulate(point: PointMetrics, result: FrameResult, counted: np.ndarray) -> None:
    errors = result.per_block_bit_errors[counted]
    point.frames += 1
    point.bit_errors += int(errors.sum())
    point.blocks += int(counted.sum())
    point.block_errors += int((errors > 0).sum())
    point.frame_errors += int((errors > 0).any())
    point.ep_frames += int(result.is_error_propagation)
    point.window_size_sum += int(result.avg_window_sizes.sum())
    point.decoded_blocks += len(result.avg_window_sizes)


def _run_frame_task(args):
    config, snr_db, seed = args
    return run_frame(config, snr_db, seed)


def run_campaign(
    config: CampaignConfig, workers: int = 1, collect_frames: bool = False
) -> Metrics:
    """Execute the campaign, aggregating deterministically by frame index.

    `workers` only sets the process pool size; metrics are a pure
    function of the config.  With `collect_frames`, every counted
    FrameResult is kept under (snr_index, frame_index).
    """
    graph = campaign_graph(config)
    counted = ~graph.known_time_mask
    bits_per_frame = int(counted.sum()) * graph.vn_block_size
    points = []
    kept: dict = {}
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for snr_index, snr_db in enumerate(config.snr_points_db):
            point = PointMetrics(snr_db=snr_db)
            budget = config.max_block_errors
            n = config.frames_per_point
            wave = max(1, workers) * 4
            start = 0
            stopped = False
            while start < n and not stopped:
                indices = range(start, min(start + wave, n))
                tasks = [
                    (config, snr_db, frame_seed(config.master_seed, snr_index, i))
                    for i in indices
                ]
                if pool is None:
                    results = map(_run_frame_task, tasks)
                else:
                    results = pool.map(_run_frame_task, tasks)
                for i, result in zip(indices, results):
                    _accumulate(point, result, counted)
                    point.bits += bits_per_frame
                    if collect_frames:
                        kept[(snr_index, i)] = result
                    if budget is not None and point.block_errors >= budget:
                        stopped = True
                        break
                start = indices.stop
            points.append(point)
    finally:
        if pool is not None:
            pool.shutdown()
    return Metrics(points=points, frame_results=kept if collect_frames else None)


def errdist_report(results, propagation_only: bool = True) -> dict:
    """Per-frame histograms of nonzero bit-error counts by block.

    Returns {frame_key: [(block, bit_errors), ...]} for the selected
    frames, skipping zero rows.

    Raises
    ------
    NoMatchingFrames
        The filter selected nothing.
    """
    if isinstance(results, dict):
        items = results.items()
    else:
        items = enumerate(results)
    report = {}
    for key, result in items:
        if propagation_only and not result.is_error_propagation:
            continue
        rows = [
            (block, int(count))
            for block, count in enumerate(result.per_block_bit_errors)
            if count > 0
        ]
        report[key] = rows
    if not report:
        raise NoMatchingFrames("no frames matched the error-propagation filter")
    return report


def _fmt(x: float) -> str:
    return format(x, ".12g")


def metrics_csv(metrics: Metrics) -> str:
    """metrics.csv body: one row per SNR point."""
    lines = [
        "snr_db,ber,bler,fer,mean_window,ep_frames,bits,bit_errors,blocks,block_errors"
    ]
    for p in metrics.points:
        lines.append(
            f"{_fmt(p.snr_db)},{_fmt(p.ber)},{_fmt(p.bler)},"
            f"{_fmt(p.frame_error_rate)},{_fmt(p.mean_window_size)},"
            f"{p.ep_frames},{p.bits},{p.bit_errors},{p.blocks},{p.block_errors}"
        )
    return "\n".join(lines) + "\n"


def errdist_csv(rows) -> str:
    """errdist_<frame>.csv body for one frame's rows."""
    lines = ["block,bit_errors"]
    lines += [f"{block},{count}" for block, count in rows]
    return "\n".join(lines) + "\n"


def trace_csv(frame_key, result: FrameResult) -> str:
    """Optional per-block decoder trace for one frame."""
    lines = ["frame,block,window_size_at_decode,avg_llr,bit_errors"]
    for block in range(len(result.per_block_bit_errors)):
        lines.append(
            f"{frame_key},{block},{result.avg_window_sizes[block]},"
            f"{_fmt(result.avg_llrs[block])},{result.per_block_bit_errors[block]}"
        )
    return "\n".join(lines) + "\n"
