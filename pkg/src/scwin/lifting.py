"""Protograph lifting into concrete Tanner graphs.

Each proto-node becomes M copies and each proto-edge of multiplicity q
becomes q disjoint permutations between the M copies, so the lifted
graph preserves all protograph degrees and carries no parallel edges.
Node indices are laid out block-major: lifted VN index
(t * vn_types + col) * M + lift_index, and likewise for CNs, which
keeps every time unit contiguous -- the property the window decoder's
slicing relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import LiftFailure
from .protograph import CoupledChain

_LIFT_METHODS = ("random_permutation", "circulant")
_MAX_RESAMPLES = 200


@dataclass(frozen=True)
class LiftSpec:
    factor: int
    method: str = "random_permutation"
    seed: int = 0

    def __post_init__(self):
        if self.factor < 1:
            raise ValueError("lift factor must be >= 1")
        if self.method not in _LIFT_METHODS:
            raise ValueError(f"lift method must be one of {_LIFT_METHODS}")


class TannerGraph:
    """Lifted sparse bipartite graph with per-time-unit bookkeeping.

    Edges are stored once, sorted by (cn, vn); `vn_order` permutes them
    into (vn, cn) order.  Pointer arrays delimit the edges of each node
    and of each time unit in the respective sort order.  Instances are
    immutable after construction.
    """

    def __init__(self, chain: CoupledChain, factor: int, edge_cn, edge_vn):
        base = chain.base
        self.chain = chain
        self.lift_factor = factor
        self.vn_block_size = base.vn_types * factor
        self.cn_block_size = base.cn_types * factor
        self.vn_time_count = chain.frame_len
        self.cn_time_count = chain.cn_time_count
        self.vn_count = self.vn_block_size * self.vn_time_count
        self.cn_count = self.cn_block_size * self.cn_time_count

        edge_cn = np.asarray(edge_cn, dtype=np.int64)
        edge_vn = np.asarray(edge_vn, dtype=np.int64)
        order = np.lexsort((edge_vn, edge_cn))
        self.edge_cn = edge_cn[order]
        self.edge_vn = edge_vn[order]
        self.edge_count = len(self.edge_cn)
        self.cn_edge_ptr = np.searchsorted(
            self.edge_cn, np.arange(self.cn_count + 1)
        )
        self.cn_time_edge_ptr = self.cn_edge_ptr[:: self.cn_block_size].copy()
        self.vn_order = np.lexsort((self.edge_cn, self.edge_vn))
        self.edge_vn_sorted = self.edge_vn[self.vn_order]
        self.vn_edge_ptr = np.searchsorted(
            self.edge_vn_sorted, np.arange(self.vn_count + 1)
        )
        self.vn_time_edge_ptr = self.vn_edge_ptr[:: self.vn_block_size].copy()

        self.known_time_mask = np.zeros(self.vn_time_count, dtype=bool)
        for blk in chain.vn_timeline:
            self.known_time_mask[blk.time] = blk.known
        self.known_vn_mask = np.repeat(self.known_time_mask, self.vn_block_size)
        self.cn_offsets = chain.cn_offsets()
        self.max_source_time = chain.max_source_times()
        for arr in (
            self.edge_cn, self.edge_vn, self.cn_edge_ptr, self.cn_time_edge_ptr,
            self.vn_order, self.edge_vn_sorted, self.vn_edge_ptr,
            self.vn_time_edge_ptr, self.known_time_mask, self.known_vn_mask,
            self.cn_offsets, self.max_source_time,
        ):
            arr.flags.writeable = False

    @property
    def known_vns(self) -> np.ndarray:
        return np.flatnonzero(self.known_vn_mask)

    def vn_position(self, node: int) -> tuple[int, int, int]:
        """(time unit, protograph column, lift index) of a VN."""
        t, rest = divmod(node, self.vn_block_size)
        col, k = divmod(rest, self.lift_factor)
        return t, col, k

    def cn_position(self, node: int) -> tuple[int, int, int]:
        """(time unit, protograph row, lift index) of a CN."""
        c, rest = divmod(node, self.cn_block_size)
        row, k = divmod(rest, self.lift_factor)
        return c, row, k

    def vn_degrees(self) -> np.ndarray:
        return np.diff(self.vn_edge_ptr)

    def cn_degrees(self) -> np.ndarray:
        return np.diff(self.cn_edge_ptr)


def _disjoint_permutations(rng, factor: int, q: int, method: str) -> list[np.ndarray]:
    if q > factor:
        raise LiftFailure(
            f"multiplicity {q} exceeds lift factor {factor}; parallel edges unavoidable"
        )
    if method == "circulant":
        shifts = rng.choice(factor, size=q, replace=False)
        return [(np.arange(factor) + s) % factor for s in shifts]
    perms: list[np.ndarray] = []
    for _ in range(q):
        for _attempt in range(_MAX_RESAMPLES):
            p = rng.permutation(factor)
            if not perms or not (np.array(perms) == p).any():
                perms.append(p)
                break
        else:
            raise LiftFailure(
                f"no disjoint permutation found after {_MAX_RESAMPLES} resamples"
            )
    return perms


def lift(chain: CoupledChain, spec: LiftSpec) -> TannerGraph:
    """Lift the chain by `spec.factor` into a Tanner graph.

    Deterministic for fixed (chain, spec): proto-edges are visited in
    CN-timeline order and permutations drawn from a single seeded
    generator.

    Raises
    ------
    LiftFailure
        A proto-edge's multiplicity exceeds the lift factor, or no
        disjoint permutation was found within the retry budget.
    """
    rng = np.random.default_rng(spec.seed)
    factor = spec.factor
    base = chain.base
    lift_ix = np.arange(factor, dtype=np.int64)
    cn_parts: list[np.ndarray] = []
    vn_parts: list[np.ndarray] = []
    for blk in chain.cn_timeline:
        for e in blk.edges:
            cn_base = (blk.time * base.cn_types + e.cn_row) * factor
            vn_base = (e.vn_time * base.vn_types + e.vn_col) * factor
            for perm in _disjoint_permutations(rng, factor, e.multiplicity, spec.method):
                cn_parts.append(cn_base + lift_ix)
                vn_parts.append(vn_base + perm)
    if cn_parts:
        edge_cn = np.concatenate(cn_parts)
        edge_vn = np.concatenate(vn_parts)
    else:
        edge_cn = np.empty(0, dtype=np.int64)
        edge_vn = np.empty(0, dtype=np.int64)
    return TannerGraph(chain, factor, edge_cn, edge_vn)


@dataclass
class LiftReport:
    degree_ok: bool
    block_mapping_ok: bool
    parallel_edge_count: int
    four_cycle_pairs: int
    warnings: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.degree_ok and self.block_mapping_ok and self.parallel_edge_count == 0


def verify_lift(graph: TannerGraph, chain: CoupledChain) -> LiftReport:
    """Consistency report of a lifted graph against its chain.

    Checks degree preservation per protograph position, block-pair
    edge counts (factor x multiplicity each), and parallel edges.
    4-cycles are counted as a warning only.
    """
    base = chain.base
    factor = graph.lift_factor
    proto_pair_mult: dict[tuple[int, int], int] = {}
    for blk in chain.cn_timeline:
        for e in blk.edges:
            key = (blk.time * base.cn_types + e.cn_row,
                   e.vn_time * base.vn_types + e.vn_col)
            proto_pair_mult[key] = proto_pair_mult.get(key, 0) + e.multiplicity

    vn_expected = np.zeros(graph.vn_count // factor, dtype=np.int64)
    cn_expected = np.zeros(graph.cn_count // factor, dtype=np.int64)
    for (pc, pv), q in proto_pair_mult.items():
        cn_expected[pc] += q
        vn_expected[pv] += q
    degree_ok = bool(
        (graph.vn_degrees() == np.repeat(vn_expected, factor)).all()
        and (graph.cn_degrees() == np.repeat(cn_expected, factor)).all()
    )

    pair_cn = graph.edge_cn // factor
    pair_vn = graph.edge_vn // factor
    keys = pair_cn * (graph.vn_count // factor) + pair_vn
    uniq, counts = np.unique(keys, return_counts=True)
    observed = dict(zip(uniq.tolist(), counts.tolist()))
    expected = {
        pc * (graph.vn_count // factor) + pv: q * factor
        for (pc, pv), q in proto_pair_mult.items()
    }
    block_mapping_ok = observed == expected

    edge_keys = graph.edge_cn * graph.vn_count + graph.edge_vn
    parallel = int(len(edge_keys) - len(np.unique(edge_keys)))

    four_cycles = _count_four_cycle_pairs(graph)
    warnings = []
    if four_cycles:
        warnings.append(f"{four_cycles} CN pair(s) share two or more VNs (girth 4)")
    return LiftReport(degree_ok, block_mapping_ok, parallel, four_cycles, warnings)


def _count_four_cycle_pairs(graph: TannerGraph) -> int:
    """Count unordered CN pairs connected through >= 2 common VNs."""
    degrees = np.diff(graph.vn_edge_ptr)
    cn_by_vn = graph.edge_cn[graph.vn_order]
    pair_keys = []
    for d in np.unique(degrees):
        if d < 2:
            continue
        nodes = np.flatnonzero(degrees == d)
        idx = graph.vn_edge_ptr[nodes][:, None] + np.arange(d)[None, :]
        cns = np.sort(cn_by_vn[idx], axis=1)
        for i in range(d):
            for j in range(i + 1, d):
                pair_keys.append(cns[:, i] * graph.cn_count + cns[:, j])
    if not pair_keys:
        return 0
    keys = np.concatenate(pair_keys)
    _, counts = np.unique(keys, return_counts=True)
    return int((counts >= 2).sum())


def export_alist(graph: TannerGraph) -> str:
    """Parity-check matrix in the zero-padded alist text format."""
    vn_deg = graph.vn_degrees()
    cn_deg = graph.cn_degrees()
    max_vn = int(vn_deg.max(initial=0))
    max_cn = int(cn_deg.max(initial=0))
    lines = [
        f"{graph.vn_count} {graph.cn_count}",
        f"{max_vn} {max_cn}",
        " ".join(str(int(d)) for d in vn_deg),
        " ".join(str(int(d)) for d in cn_deg),
    ]
    cn_by_vn = graph.edge_cn[graph.vn_order]
    for v in range(graph.vn_count):
        lo, hi = graph.vn_edge_ptr[v], graph.vn_edge_ptr[v + 1]
        entries = [str(int(c) + 1) for c in cn_by_vn[lo:hi]]
        entries += ["0"] * (max_vn - len(entries))
        lines.append(" ".join(entries))
    for c in range(graph.cn_count):
        lo, hi = graph.cn_edge_ptr[c], graph.cn_edge_ptr[c + 1]
        entries = [str(int(v) + 1) for v in graph.edge_vn[lo:hi]]
        entries += ["0"] * (max_cn - len(entries))
        lines.append(" ".join(entries))
    return "\n".join(lines) + "\n"
