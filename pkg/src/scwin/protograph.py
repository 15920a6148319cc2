"""Coupled protograph chains: edge spreading, doping, design rates.

A protograph is a small bipartite template described by a base matrix
whose entry (r, v) gives the number of edges between check-node type r
and variable-node type v.  An edge spreading splits the base matrix
into components summing to it; replicating the split protograph over L
consecutive time units couples the copies into a chain: the VN block at
time t sends its component-i edges to the CN block at time t+i.

Two doping constructions break the chain's steady state to give the
window decoder fresh anchors mid-stream:

* CN doping inserts one extra CN time unit per doping point.  This is
  realised as a cumulative offset on the VN-to-CN time mapping: at each
  doping point the offset grows by one, so the doped VN block skips its
  own CN time and the checks around the point have reduced degree, the
  same pattern a chain boundary shows.
* VN doping flags a VN block as known (shortened to zero).  The graph
  is unchanged, but every check touching the doped block has reduced
  effective degree once the known edges are discounted.

All rate arithmetic is exact rational arithmetic.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import (
    DopingOutOfRange,
    DopingTooDense,
    ShapeMismatch,
    SumConstraintViolated,
)


def _as_proto_matrix(entries, what: str) -> np.ndarray:
    arr = np.asarray(entries, dtype=np.int64)
    if arr.ndim != 2:
        raise ShapeMismatch(f"{what} must be a 2-D matrix, got shape {arr.shape}")
    if (arr < 0).any():
        raise ValueError(f"{what} entries must be non-negative")
    arr.flags.writeable = False
    return arr


@dataclass(eq=False)
class BaseMatrix:
    """Non-negative integer edge-multiplicity matrix, checks x variables."""

    entries: np.ndarray

    def __post_init__(self):
        self.entries = _as_proto_matrix(self.entries, "base matrix")
        if not (self.entries > 0).any():
            raise ValueError("base matrix must contain at least one edge")

    @property
    def cn_types(self) -> int:
        return self.entries.shape[0]

    @property
    def vn_types(self) -> int:
        return self.entries.shape[1]

    @property
    def is_regular(self) -> bool:
        col = self.entries.sum(axis=0)
        row = self.entries.sum(axis=1)
        return bool((col == col[0]).all() and (row == row[0]).all())

    @property
    def vn_degree(self) -> int:
        """Uniform column sum of a regular base matrix."""
        cols = self.entries.sum(axis=0)
        if not (cols == cols[0]).all():
            raise ValueError("base matrix is not regular: column sums differ")
        return int(cols[0])

    @property
    def cn_degree(self) -> int:
        """Uniform row sum of a regular base matrix."""
        rows = self.entries.sum(axis=1)
        if not (rows == rows[0]).all():
            raise ValueError("base matrix is not regular: row sums differ")
        return int(rows[0])


@dataclass(eq=False)
class EdgeSpreading:
    """Component matrices [B_0 .. B_m] with element-wise sum == base."""

    base: BaseMatrix
    components: tuple[np.ndarray, ...]

    def __post_init__(self):
        comps = tuple(
            _as_proto_matrix(c, f"spreading component {i}")
            for i, c in enumerate(self.components)
        )
        if not comps:
            raise ShapeMismatch("edge spreading needs at least one component")
        for i, c in enumerate(comps):
            if c.shape != self.base.entries.shape:
                raise ShapeMismatch(
                    f"component {i} has shape {c.shape}, "
                    f"base is {self.base.entries.shape}"
                )
        total = np.sum(comps, axis=0)
        if not np.array_equal(total, self.base.entries):
            bad = np.argwhere(total != self.base.entries)[0]
            r, v = int(bad[0]), int(bad[1])
            raise SumConstraintViolated(
                f"components sum to {total[r, v]} at entry ({r}, {v}), "
                f"base has {self.base.entries[r, v]}"
            )
        self.components = comps

    @property
    def coupling_width(self) -> int:
        return len(self.components) - 1

    @property
    def constraint_length(self) -> int:
        return len(self.components)


def validate_edge_spreading(base: BaseMatrix, components: Sequence) -> EdgeSpreading:
    """Check shapes and the sum constraint, returning the valid spreading.

    Parameters
    ----------
    base
        Base matrix being spread (a BaseMatrix or a nested list).
    components
        Matrices [B_0, ..., B_m]; must match the base's shape and sum to it.

    Raises
    ------
    ShapeMismatch
        A component's shape differs from the base.
    SumConstraintViolated
        The element-wise component sum differs from the base; the message
        names the first offending entry.
    """
    if not isinstance(base, BaseMatrix):
        base = BaseMatrix(base)
    return EdgeSpreading(base, tuple(components))


_DOPING_KINDS = ("none", "vn", "cn")


@dataclass(frozen=True)
class DopingSpec:
    """Doping kind and the strictly increasing time units it applies to."""

    kind: str = "none"
    positions: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in _DOPING_KINDS:
            raise ValueError(f"doping kind must be one of {_DOPING_KINDS}")
        pos = tuple(int(p) for p in self.positions)
        if self.kind == "none" and pos:
            raise ValueError("doping kind 'none' cannot carry positions")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError("doping positions must be strictly increasing")
        object.__setattr__(self, "positions", pos)

    @property
    def count(self) -> int:
        return len(self.positions)

    @classmethod
    def none(cls) -> DopingSpec:
        return cls("none", ())

    @classmethod
    def vn(cls, *positions: int) -> DopingSpec:
        return cls("vn", tuple(positions))

    @classmethod
    def cn(cls, *positions: int) -> DopingSpec:
        return cls("cn", tuple(positions))


class ProtoEdge(NamedTuple):
    """One protograph edge bundle incident to a CN block."""

    vn_time: int
    component: int
    cn_row: int
    vn_col: int
    multiplicity: int


class VnBlock(NamedTuple):
    time: int
    known: bool
    cn_offset: int


class CnBlock(NamedTuple):
    time: int
    edges: tuple[ProtoEdge, ...]


@dataclass(eq=False)
class CoupledChain:
    """Time-indexed protograph chain with doping annotations.

    Instances come from :func:`build_chain`; treat them as immutable.
    """

    spreading: EdgeSpreading
    frame_len: int
    terminated: bool
    doping: DopingSpec
    vn_timeline: tuple[VnBlock, ...]
    cn_timeline: tuple[CnBlock, ...]

    @property
    def coupling_width(self) -> int:
        return self.spreading.coupling_width

    @property
    def base(self) -> BaseMatrix:
        return self.spreading.base

    @property
    def cn_time_count(self) -> int:
        return len(self.cn_timeline)

    @property
    def unknown_vn_count(self) -> int:
        """Protograph-scale count of unknown (transmitted) VNs."""
        known = sum(1 for b in self.vn_timeline if b.known)
        return self.base.vn_types * (self.frame_len - known)

    @property
    def cn_count(self) -> int:
        """Protograph-scale CN count."""
        return self.base.cn_types * self.cn_time_count

    @property
    def known_times(self) -> tuple[int, ...]:
        return tuple(b.time for b in self.vn_timeline if b.known)

    def cn_offsets(self) -> np.ndarray:
        """Cumulative CN-time offset per VN time (all zero unless CN-doped)."""
        return np.array([b.cn_offset for b in self.vn_timeline], dtype=np.int64)

    def max_source_times(self) -> np.ndarray:
        """Latest VN time feeding each CN time; -1 for edgeless CN times."""
        out = np.empty(self.cn_time_count, dtype=np.int64)
        for blk in self.cn_timeline:
            out[blk.time] = max((e.vn_time for e in blk.edges), default=-1)
        return out


def build_chain(
    spreading: EdgeSpreading,
    frame_len: int,
    doping: DopingSpec | None = None,
    terminated: bool = True,
) -> CoupledChain:
    """Couple `frame_len` copies of the spread protograph into a chain.

    The VN block at time t connects through component i to the CN block
    at time t + i + offset(t), where offset(t) counts the CN-doping
    points at or before t.  A CN-doped block therefore skips its own CN
    time, reproducing the reduced-degree pattern around each doping
    point.  Termination appends the trailing reduced-degree CN blocks;
    an unterminated chain simply truncates them (see
    :func:`stream_cn_blocks` for the endless view).

    Parameters
    ----------
    spreading
        Validated edge spreading.
    frame_len
        Number of VN time units L; must exceed the coupling width.
    doping
        Doping kind and positions; default none.
    terminated
        Whether the trailing CN blocks beyond time L-1 exist.

    Raises
    ------
    DopingOutOfRange
        A doping position lies outside [0, L-1].
    DopingTooDense
        CN doping points within m time units of each other or of the
        chain end, or VN doping leaving no unknown blocks.
    """
    doping = doping or DopingSpec.none()
    m = spreading.coupling_width
    if frame_len <= m:
        raise ValueError(
            f"frame length {frame_len} must exceed coupling width {m}"
        )
    for tau in doping.positions:
        if not 0 <= tau < frame_len:
            raise DopingOutOfRange(
                f"doping position {tau} outside [0, {frame_len - 1}]"
            )
    if doping.kind == "cn":
        for a, b in zip(doping.positions, doping.positions[1:]):
            if b - a <= m:
                raise DopingTooDense(
                    f"CN doping points {a} and {b} are within {m} time units"
                )
        if doping.positions and doping.positions[-1] > frame_len - 1 - m:
            raise DopingTooDense(
                f"CN doping point {doping.positions[-1]} is within {m} "
                f"time units of the chain end"
            )
    if doping.kind == "vn":
        if doping.count >= frame_len:
            raise DopingTooDense("VN doping must leave at least one unknown block")
        if any(b - a <= m for a, b in zip(doping.positions, doping.positions[1:])):
            warnings.warn(
                "VN doping neighborhoods overlap (spacing <= coupling width)",
                stacklevel=2,
            )

    positions = np.array(doping.positions, dtype=np.int64)
    if doping.kind == "cn":
        offsets = np.searchsorted(positions, np.arange(frame_len), side="right")
    else:
        offsets = np.zeros(frame_len, dtype=np.int64)
    extra_cn = doping.count if doping.kind == "cn" else 0
    cn_times = frame_len + extra_cn + (m if terminated else 0)

    known = set(doping.positions) if doping.kind == "vn" else set()
    vn_timeline = tuple(
        VnBlock(t, t in known, int(offsets[t])) for t in range(frame_len)
    )

    comps = spreading.components
    cn_rows, vn_cols = spreading.base.entries.shape
    per_cn: list[list[ProtoEdge]] = [[] for _ in range(cn_times)]
    for t in range(frame_len):
        for i, comp in enumerate(comps):
            c = t + i + int(offsets[t])
            if c >= cn_times:
                continue  # truncated tail of an unterminated chain
            for r in range(cn_rows):
                for v in range(vn_cols):
                    q = int(comp[r, v])
                    if q:
                        per_cn[c].append(ProtoEdge(t, i, r, v, q))
    cn_timeline = tuple(
        CnBlock(c, tuple(sorted(per_cn[c]))) for c in range(cn_times)
    )

    chain = CoupledChain(
        spreading, frame_len, terminated, doping, vn_timeline, cn_timeline
    )
    src = chain.max_source_times()
    # Window coverage relies on the latest-source map being monotone.
    assert (np.diff(src[src >= 0]) >= 0).all() or len(src) < 2
    return chain


def stream_cn_blocks(
    spreading: EdgeSpreading, doping: DopingSpec | None = None
) -> Iterator[CnBlock]:
    """Endless CN-block view of an unterminated chain.

    Yields blocks for CN times 0, 1, 2, ...; a truncated unterminated
    chain of length L equals the first L (+ CN doping count) of these.
    """
    doping = doping or DopingSpec.none()
    m = spreading.coupling_width
    positions = np.array(doping.positions, dtype=np.int64)
    cn_rows, vn_cols = spreading.base.entries.shape
    c = 0
    while True:
        edges = []
        d = doping.count if doping.kind == "cn" else 0
        for t in range(max(0, c - m - d), c + 1):
            off = (
                int(np.searchsorted(positions, t, side="right"))
                if doping.kind == "cn"
                else 0
            )
            i = c - t - off
            if not 0 <= i <= m:
                continue
            comp = spreading.components[i]
            for r in range(cn_rows):
                for v in range(vn_cols):
                    q = int(comp[r, v])
                    if q:
                        edges.append(ProtoEdge(t, i, r, v, q))
        yield CnBlock(c, tuple(sorted(edges)))
        c += 1


@dataclass(frozen=True)
class RateReport:
    """Design rates as exact rationals."""

    uncoupled: Fraction
    undoped: Fraction
    doped: Fraction


def design_rate(chain: CoupledChain) -> RateReport:
    """Exact design rates of the chain.

    For a terminated chain the undoped rate is 1 - ((L+m)/L)(1-R); VN
    doping divides by L-d unknown blocks instead and CN doping adds d
    CN time units.  An unterminated chain drops the termination
    overhead (its L -> infinity limit), keeping the doping-density
    correction of the truncated frame.  Every returned rate equals
    1 - cn_count/unknown_vn_count of the chain as built.
    """
    base = chain.base
    uncoupled = 1 - Fraction(base.cn_types, base.vn_types)
    loss = 1 - uncoupled
    lf = chain.frame_len
    m = chain.coupling_width if chain.terminated else 0
    d = chain.doping.count
    undoped = 1 - Fraction(lf + m, lf) * loss
    if chain.doping.kind == "vn":
        doped = 1 - Fraction(lf + m, lf - d) * loss
    elif chain.doping.kind == "cn":
        doped = 1 - Fraction(lf + m + d, lf) * loss
    else:
        doped = undoped
    counted = 1 - Fraction(chain.cn_count, chain.unknown_vn_count)
    assert doped == counted, "rate formula disagrees with chain counts"
    assert doped <= undoped <= uncoupled
    return RateReport(uncoupled, undoped, doped)


def degree_profile(chain: CoupledChain) -> list[tuple[int, int]]:
    """Per-CN-time (degree, effective degree), multiplicities counted.

    Effective degree discounts edges into known (VN-doped) blocks.
    """
    known = set(chain.known_times)
    out = []
    for blk in chain.cn_timeline:
        deg = sum(e.multiplicity for e in blk.edges)
        eff = sum(e.multiplicity for e in blk.edges if e.vn_time not in known)
        out.append((deg, eff))
    return out


def chain_listing(chain: CoupledChain) -> str:
    """Plain-text adjacency listing, one line per CN time.

    Format: ``cn_time, degree, effective_degree, [vn_time:component,...]``
    with one bracket entry per edge (multiplicity expanded), so the
    entry count equals the degree.
    """
    profile = degree_profile(chain)
    lines = []
    for blk, (deg, eff) in zip(chain.cn_timeline, profile):
        entries = ",".join(
            f"{e.vn_time}:{e.component}"
            for e in blk.edges
            for _ in range(e.multiplicity)
        )
        lines.append(f"{blk.time}, {deg}, {eff}, [{entries}]")
    return "\n".join(lines) + "\n"
