"""All-zero-codeword BPSK/AWGN channel emitting LLR blocks.

Sign convention: LLR = log(P(bit=0)/P(bit=1)) and bit 0 maps to symbol
+1, so correct decisions are positive and known-zero (doped) positions
pin to +LLR_SAT.  Doped blocks are shortened: they consume no entries
of the noise stream, and removing one never shifts the noise seen by
any other block.  Noise is drawn from a counter-based Philox stream
keyed by (seed, block index), which makes every block reproducible in
isolation regardless of worker scheduling.

An `LlrBlock` is a plain float vector holding one VN time unit's LLRs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

import numpy as np

from .errors import InvalidRate
from .lifting import TannerGraph

DEFAULT_LLR_SAT = 1000.0

LlrBlock = np.ndarray
LlrSupplier = Callable[[int], np.ndarray]


def sigma_from_ebn0(ebn0_db: float, rate: Union[Fraction, float]) -> float:
    """Noise standard deviation for BPSK at the given E_b/N_0 and rate.

    `ebn0_db = math.inf` is the noiseless sentinel and returns 0.

    Raises
    ------
    InvalidRate
        `rate` is outside the open interval (0, 1).
    """
    r = float(rate)
    if not 0.0 < r < 1.0:
        raise InvalidRate(f"code rate must be in (0, 1), got {rate}")
    if math.isinf(ebn0_db):
        if ebn0_db > 0:
            return 0.0
        raise ValueError("ebn0_db must be finite or +inf")
    return math.sqrt(1.0 / (2.0 * r * 10.0 ** (ebn0_db / 10.0)))


@dataclass(frozen=True)
class ChannelConfig:
    """Per-frame channel parameters.

    `rate` feeds the E_b/N_0 energy normalization; by convention the
    campaign passes the doped design rate here.  `seed` is the frame
    seed; distinct frames must use distinct seeds.
    """

    ebn0_db: float
    rate: Union[Fraction, float]
    seed: int
    llr_sat: float = DEFAULT_LLR_SAT

    @property
    def sigma(self) -> float:
        return sigma_from_ebn0(self.ebn0_db, self.rate)


def _block_rng(seed: int, block_index: int) -> np.random.Generator:
    key = np.array(
        [seed & 0xFFFFFFFFFFFFFFFF, block_index], dtype=np.uint64
    )
    return np.random.Generator(np.random.Philox(key=key))


def transmit_block(
    config: ChannelConfig, block_index: int, graph: TannerGraph
) -> np.ndarray:
    """Channel LLRs for one VN time unit of the all-zero codeword.

    Doped blocks return +llr_sat everywhere without touching the noise
    stream; so does every block on the noiseless channel.
    """
    if not 0 <= block_index < graph.vn_time_count:
        raise IndexError(
            f"block {block_index} outside chain of length {graph.vn_time_count}"
        )
    size = graph.vn_block_size
    if graph.known_time_mask[block_index]:
        return np.full(size, config.llr_sat)
    sigma = config.sigma
    if sigma == 0.0:
        return np.full(size, config.llr_sat)
    noise = _block_rng(config.seed, block_index).standard_normal(size)
    return (2.0 / (sigma * sigma)) * (1.0 + sigma * noise)


def channel_supplier(config: ChannelConfig, graph: TannerGraph) -> LlrSupplier:
    """Callable `block_index -> LLR vector` over this graph's chain."""

    def supply(block_index: int) -> np.ndarray:
        return transmit_block(config, block_index, graph)

    return supply
