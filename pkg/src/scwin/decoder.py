"""Sliding-window BP decoding over lifted coupled chains.

Window geometry: a window at target time t with size w covers VN times
t..t+w-1 (clipped at the chain end) and a span of w+m consecutive CN
times starting at t plus the cumulative doping offset at t, so a shift
whose outgoing target is a doping point advances the span by two CN
times while keeping its size constant.  BP runs on the covered prefix
of the span: the CN times whose latest source block has entered the
window.  A CN coupled to a block that has not entered yet keeps zero
outgoing messages, which is exact (a parity constraint with an
unobserved participant is uninformative).  Doping points inside the
window can defer a span-tail CN to a later position; every CN is
covered no later than the position where its last source block is the
target.

Retired blocks (the m most recent) keep contributing: at retire time
each edge of the block is loaded with the block's clipped final LLR as
a frozen VN-to-CN message, and the block is never updated again.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import DEFAULT_LLR_SAT, LlrSupplier
from .errors import BlockNotInWindow, EndOfChain
from .lifting import TannerGraph
from .protograph import CoupledChain

_UPDATE_RULES = ("sum_product", "min_sum")
_TANH_LIM = 1.0 - 1e-15
_TANH_TINY = 1e-30


@dataclass(frozen=True)
class WindowConfig:
    """Decoder parameters.

    `w_max`, `tau` and `theta` only matter to the extension driver;
    with theta = 0 the extension path reduces to plain sliding-window
    decoding.  `llr_sat` is the pinning constant for known (doped)
    symbols; pinned messages enter CN updates clamped to +llr_clamp.
    """

    w_init: int
    w_max: Optional[int] = None
    tau: int = 1
    theta: float = 0.0
    i_max: int = 100
    update_rule: str = "sum_product"
    min_sum_scale: float = 0.75
    early_stop: bool = True
    llr_clamp: float = 50.0
    llr_sat: float = DEFAULT_LLR_SAT

    def __post_init__(self):
        if self.w_max is None:
            object.__setattr__(self, "w_max", self.w_init)
        if not 1 <= self.tau <= self.w_init <= self.w_max:
            raise ValueError(
                f"need 1 <= tau <= w_init <= w_max, got "
                f"tau={self.tau} w_init={self.w_init} w_max={self.w_max}"
            )
        if self.theta < 0:
            raise ValueError("theta must be >= 0")
        if self.i_max < 1:
            raise ValueError("i_max must be >= 1")
        if self.update_rule not in _UPDATE_RULES:
            raise ValueError(f"update_rule must be one of {_UPDATE_RULES}")
        if self.llr_clamp <= 0 or self.llr_sat <= 0:
            raise ValueError("llr_clamp and llr_sat must be positive")


@dataclass
class BlockDecision:
    """Outcome of decoding one VN time unit."""

    time: int
    bits: np.ndarray
    final_llrs: np.ndarray
    avg_llr: float
    window_size_at_decode: int


class _Bundle:
    """Precomputed index arrays for one (target, window size) position."""

    __slots__ = (
        "w_eff", "win_end", "v0", "v1", "n_vn_local", "local_vn", "eglob",
        "known_nodes", "known_edges", "any_known", "span_lo", "span_hi",
        "cov_hi", "c0", "e_lo", "e_hi", "edge_count", "local_cn",
        "n_cn_local", "nonempty", "ne_starts", "edge_vn_can",
    )


class WindowState:
    """Mutable decoding state for one frame.

    Message arrays cover the whole frame; the bundle for the current
    position restricts every update to in-window slices.  `dec_llr`
    doubles as the posterior store for retired blocks (their final
    LLRs), which is what the syndrome check and past pinning read.
    """

    def __init__(self, graph: TannerGraph, config: WindowConfig):
        self.graph = graph
        self.config = config
        self.t = 0
        self.w = config.w_init
        self.entered = 0
        self.chan_llr = np.zeros(graph.vn_count)
        self.v2c = np.zeros(graph.edge_count)
        self.c2v = np.zeros(graph.edge_count)
        self.dec_llr = np.zeros(graph.vn_count)
        self.final_llr = np.zeros(graph.vn_count)
        self._bundles: dict[tuple[int, int], _Bundle] = {}

    @property
    def w_eff(self) -> int:
        return min(self.w, self.graph.vn_time_count - self.t)

    @property
    def win_end(self) -> int:
        return self.t + self.w_eff

    @property
    def cn_window_span(self) -> range:
        g = self.graph
        lo = self.t + int(g.cn_offsets[self.t])
        hi = min(lo + self.w + g.chain.coupling_width, g.cn_time_count)
        return range(lo, hi)

    @property
    def past_llrs(self) -> dict[int, np.ndarray]:
        bs = self.graph.vn_block_size
        lo = max(0, self.t - self.graph.chain.coupling_width)
        return {
            i: self.final_llr[i * bs : (i + 1) * bs] for i in range(lo, self.t)
        }

    def _ingest_through(self, block: int, supplier: LlrSupplier) -> None:
        g = self.graph
        bs = g.vn_block_size
        last = min(block, g.vn_time_count - 1)
        while self.entered <= last:
            tb = self.entered
            values = np.asarray(supplier(tb), dtype=float)
            if values.shape != (bs,):
                raise ValueError(
                    f"supplier returned shape {values.shape} for block {tb}, "
                    f"expected ({bs},)"
                )
            if g.known_time_mask[tb]:
                values = np.full(bs, self.config.llr_sat)
            self.chan_llr[tb * bs : (tb + 1) * bs] = values
            if g.known_time_mask[tb]:
                self.dec_llr[tb * bs : (tb + 1) * bs] = self.config.llr_sat
            self.entered = tb + 1

    def _bundle(self) -> _Bundle:
        key = (self.t, self.w)
        b = self._bundles.get(key)
        if b is None:
            b = self._build_bundle()
            self._bundles[key] = b
        return b

    def _build_bundle(self) -> _Bundle:
        g = self.graph
        b = _Bundle()
        b.w_eff = self.w_eff
        b.win_end = self.t + b.w_eff
        b.v0 = self.t * g.vn_block_size
        b.v1 = b.win_end * g.vn_block_size
        b.n_vn_local = b.v1 - b.v0
        a0 = g.vn_time_edge_ptr[self.t]
        a1 = g.vn_time_edge_ptr[b.win_end]
        b.local_vn = g.edge_vn_sorted[a0:a1] - b.v0
        b.eglob = g.vn_order[a0:a1]
        b.known_nodes = g.known_vn_mask[b.v0 : b.v1]
        b.any_known = bool(g.known_time_mask[self.t : b.win_end].any())
        b.known_edges = (
            g.known_vn_mask[g.edge_vn_sorted[a0:a1]] if b.any_known else None
        )

        b.span_lo = self.t + int(g.cn_offsets[self.t])
        b.span_hi = min(
            b.span_lo + self.w + g.chain.coupling_width, g.cn_time_count
        )
        covered = int(
            np.searchsorted(g.max_source_time, b.win_end - 1, side="right")
        )
        b.cov_hi = max(min(b.span_hi, covered), b.span_lo)
        b.c0 = b.span_lo * g.cn_block_size
        c1 = b.cov_hi * g.cn_block_size
        b.e_lo = int(g.cn_time_edge_ptr[b.span_lo])
        b.e_hi = int(g.cn_time_edge_ptr[b.cov_hi])
        b.edge_count = b.e_hi - b.e_lo
        b.local_cn = g.edge_cn[b.e_lo : b.e_hi] - b.c0
        b.n_cn_local = c1 - b.c0
        starts = g.cn_edge_ptr[b.c0 : c1] - b.e_lo
        lengths = np.diff(g.cn_edge_ptr[b.c0 : c1 + 1])
        b.nonempty = lengths > 0
        b.ne_starts = starts[b.nonempty]
        b.edge_vn_can = g.edge_vn[b.e_lo : b.e_hi]
        return b


def init_window(
    graph: TannerGraph, config: WindowConfig, first_blocks: LlrSupplier
) -> WindowState:
    """Fresh window at target time 0 with w_init blocks ingested.

    All messages start at zero; doped blocks are pinned to +llr_sat on
    ingest regardless of what the supplier returned for them.
    """
    state = WindowState(graph, config)
    state._ingest_through(config.w_init - 1, first_blocks)
    return state


def _cn_update_sum_product(state: WindowState, b: _Bundle) -> None:
    clamp = state.config.llr_clamp
    tv = np.tanh(0.5 * state.v2c[b.e_lo : b.e_hi])
    np.clip(tv, -_TANH_LIM, _TANH_LIM, out=tv)
    tv[tv == 0.0] = _TANH_TINY
    prods = np.ones(b.n_cn_local)
    prods[b.nonempty] = np.multiply.reduceat(tv, b.ne_starts)
    q = prods[b.local_cn] / tv
    np.clip(q, -_TANH_LIM, _TANH_LIM, out=q)
    out = np.arctanh(q)
    out *= 2.0
    np.clip(out, -clamp, clamp, out=out)
    state.c2v[b.e_lo : b.e_hi] = out


def _cn_update_min_sum(state: WindowState, b: _Bundle) -> None:
    config = state.config
    v = state.v2c[b.e_lo : b.e_hi]
    a = np.abs(v)
    m1 = np.full(b.n_cn_local, np.inf)
    m1[b.nonempty] = np.minimum.reduceat(a, b.ne_starts)
    m1e = m1[b.local_cn]
    is_min = a == m1e
    min_count = np.bincount(b.local_cn[is_min], minlength=b.n_cn_local)
    a2 = np.where(is_min, np.inf, a)
    m2 = np.full(b.n_cn_local, np.inf)
    m2[b.nonempty] = np.minimum.reduceat(a2, b.ne_starts)
    mag = np.where(
        is_min & (min_count[b.local_cn] == 1), m2[b.local_cn], m1e
    )
    neg = v < 0.0
    neg_count = np.bincount(b.local_cn[neg], minlength=b.n_cn_local)
    other_parity = (neg_count[b.local_cn] - neg) & 1
    out = config.min_sum_scale * mag * (1.0 - 2.0 * other_parity)
    np.clip(out, -config.llr_clamp, config.llr_clamp, out=out)
    state.c2v[b.e_lo : b.e_hi] = out


def _store_decisions(state: WindowState, b: _Bundle, total: np.ndarray) -> None:
    dec = state.dec_llr[b.v0 : b.v1]
    dec[:] = total
    if b.any_known:
        dec[b.known_nodes] = state.config.llr_sat


def _update_decisions(state: WindowState, b: _Bundle) -> None:
    inc = np.bincount(
        b.local_vn, weights=state.c2v[b.eglob], minlength=b.n_vn_local
    )
    _store_decisions(state, b, inc + state.chan_llr[b.v0 : b.v1])


def _syndrome_clear(state: WindowState, b: _Bundle) -> bool:
    if b.edge_count == 0:
        return True
    bits = state.dec_llr[b.edge_vn_can] < 0.0
    ones = np.bincount(b.local_cn[bits], minlength=b.n_cn_local)
    return not (ones & 1).any()


def bp_round(
    state: WindowState, iterations: int, early_stop: Optional[bool] = None
) -> WindowState:
    """Run flooding iterations on the current window position.

    `early_stop` overrides the config flag for this round (the
    extension driver suppresses it so the trigger statistic always
    sees a full round).  Decision LLRs are current when this returns.
    """
    config = state.config
    if early_stop is None:
        early_stop = config.early_stop
    b = state._bundle()
    clamp = config.llr_clamp
    chan = state.chan_llr[b.v0 : b.v1]
    sum_product = config.update_rule == "sum_product"
    for it in range(iterations):
        c2v_win = state.c2v[b.eglob]
        total = np.bincount(b.local_vn, weights=c2v_win, minlength=b.n_vn_local)
        total += chan
        if early_stop and it > 0:
            # total doubles as the previous iteration's decision LLRs.
            _store_decisions(state, b, total)
            if _syndrome_clear(state, b):
                return state
        v2c_new = total[b.local_vn]
        v2c_new -= c2v_win
        np.clip(v2c_new, -clamp, clamp, out=v2c_new)
        if b.any_known:
            v2c_new[b.known_edges] = clamp
        state.v2c[b.eglob] = v2c_new
        if b.edge_count:
            if sum_product:
                _cn_update_sum_product(state, b)
            else:
                _cn_update_min_sum(state, b)
    _update_decisions(state, b)
    return state


def block_avg_llr(state: WindowState, i: int) -> float:
    """Mean decision-LLR magnitude of in-window block i."""
    if not state.t <= i < state.win_end:
        raise BlockNotInWindow(
            f"block {i} not in window [{state.t}, {state.win_end})"
        )
    bs = state.graph.vn_block_size
    return float(np.abs(state.dec_llr[i * bs : (i + 1) * bs]).mean())


def extension_triggered(state: WindowState, config: WindowConfig) -> bool:
    """True iff any of the first tau blocks averages below theta."""
    span = min(config.tau, state.w_eff)
    return any(
        block_avg_llr(state, state.t + k) < config.theta for k in range(span)
    )


def decode_target(state: WindowState) -> BlockDecision:
    """Hard-decide the target block and retire it into the past.

    The block's final LLRs are frozen and, clipped to the message
    clamp, written onto all of its edges as fixed VN-to-CN messages.
    """
    g = state.graph
    t = state.t
    bs = g.vn_block_size
    lo = t * bs
    final = state.dec_llr[lo : lo + bs].copy()
    state.final_llr[lo : lo + bs] = final
    bits = (final < 0.0).astype(np.uint8)
    a0, a1 = g.vn_time_edge_ptr[t], g.vn_time_edge_ptr[t + 1]
    pinned = np.clip(final, -state.config.llr_clamp, state.config.llr_clamp)
    state.v2c[g.vn_order[a0:a1]] = pinned[g.edge_vn_sorted[a0:a1] - lo]
    return BlockDecision(
        time=t,
        bits=bits,
        final_llrs=final,
        avg_llr=float(np.abs(final).mean()),
        window_size_at_decode=state.w,
    )


def shift_window(
    state: WindowState, chain: CoupledChain, supplier: LlrSupplier
) -> WindowState:
    """Advance the target by one block, ingesting what newly fits.

    The CN span follows the target's doping offset, so it advances by
    two CN times when the outgoing target was a CN-doping point and by
    one otherwise, always containing the same number of CN times.  At
    the chain's end the window shrinks instead of ingesting.

    Raises
    ------
    EndOfChain
        No target blocks remain.
    """
    if state.t + 1 >= state.graph.vn_time_count:
        raise EndOfChain("no target blocks remain")
    state.t += 1
    state._bundles.clear()
    state._ingest_through(state.t + state.w - 1, supplier)
    return state


def decode_chain(
    graph: TannerGraph, config: WindowConfig, supplier: LlrSupplier
) -> list[BlockDecision]:
    """Plain sliding-window decoding of a whole frame."""
    state = init_window(graph, config, supplier)
    decisions = []
    while True:
        bp_round(state, config.i_max)
        decisions.append(decode_target(state))
        try:
            shift_window(state, graph.chain, supplier)
        except EndOfChain:
            break
    return decisions


def _can_extend(state: WindowState, config: WindowConfig) -> bool:
    return (
        state.w + 2 <= config.w_max
        and state.t + state.w + 1 <= state.graph.vn_time_count - 1
    )


def decode_chain_with_extension(
    graph: TannerGraph,
    chain: CoupledChain,
    config: WindowConfig,
    supplier: LlrSupplier,
) -> list[BlockDecision]:
    """Sliding-window decoding with threshold-triggered window growth.

    After each full round the first tau blocks' average LLR magnitudes
    are tested against theta; a trip grows the window by two blocks
    (keeping all existing messages, only the new blocks start from
    zero) and reruns the round, until no further +2 step fits within
    w_max or the chain end, in which case the target is decoded
    anyway.  After every decode the window size resets to w_init.
    With theta = 0 this is exactly plain sliding-window decoding.
    """
    state = init_window(graph, config, supplier)
    plain = config.theta == 0.0
    decisions = []
    while True:
        while True:
            bp_round(
                state,
                config.i_max,
                early_stop=config.early_stop if plain else False,
            )
            if plain:
                break
            if not extension_triggered(state, config):
                break
            if not _can_extend(state, config):
                break
            state.w += 2
            state._ingest_through(state.t + state.w - 1, supplier)
        decisions.append(decode_target(state))
        state.w = config.w_init
        try:
            shift_window(state, chain, supplier)
        except EndOfChain:
            break
    return decisions
