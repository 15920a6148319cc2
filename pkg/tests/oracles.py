"""Independent reference implementations used only by tests.

Everything here is deliberately slow and dense: GF(2) codebook
enumeration, exact bitwise posteriors by brute-force marginalization,
and a dictionary-based BP that mirrors the production update rules
without sharing any code with them.
"""

import math

import numpy as np


def dense_parity(graph) -> np.ndarray:
    """0/1 parity-check matrix of a lifted graph (no parallel edges)."""
    H = np.zeros((graph.cn_count, graph.vn_count), dtype=np.uint8)
    H[graph.edge_cn, graph.edge_vn] = 1
    assert H.sum() == graph.edge_count, "parallel edges would cancel over GF(2)"
    return H


def gf2_nullspace_basis(H) -> np.ndarray:
    """Basis of the right nullspace of H over GF(2), rows are vectors."""
    A = np.array(H, dtype=np.uint8) % 2
    n_rows, n_cols = A.shape
    pivot_of_col = {}
    r = 0
    for c in range(n_cols):
        pivot = None
        for rr in range(r, n_rows):
            if A[rr, c]:
                pivot = rr
                break
        if pivot is None:
            continue
        A[[r, pivot]] = A[[pivot, r]]
        for rr in range(n_rows):
            if rr != r and A[rr, c]:
                A[rr] ^= A[r]
        pivot_of_col[c] = r
        r += 1
        if r == n_rows:
            break
    free_cols = [c for c in range(n_cols) if c not in pivot_of_col]
    basis = []
    for fc in free_cols:
        vec = np.zeros(n_cols, dtype=np.uint8)
        vec[fc] = 1
        for c, pr in pivot_of_col.items():
            if A[pr, fc]:
                vec[c] = 1
        basis.append(vec)
    return np.array(basis, dtype=np.uint8).reshape(len(basis), n_cols)


def enumerate_codewords(H, max_dim=20) -> np.ndarray:
    """All codewords of the code {x : Hx = 0 over GF(2)}."""
    basis = gf2_nullspace_basis(H)
    k = len(basis)
    if k > max_dim:
        raise ValueError(f"nullspace dimension {k} too large to enumerate")
    n = np.asarray(H).shape[1]
    words = np.zeros((1 << k, n), dtype=np.uint8)
    for i in range(1 << k):
        acc = np.zeros(n, dtype=np.uint8)
        for j in range(k):
            if (i >> j) & 1:
                acc ^= basis[j]
        words[i] = acc
    assert (np.asarray(H, dtype=np.uint8) @ words.T % 2 == 0).all()
    return words


def exact_posteriors(H, chan_llrs) -> np.ndarray:
    """Exact bitwise posterior LLRs by summing over the whole codebook.

    With LLR_j = log p(y_j|0)/p(y_j|1), a codeword x has likelihood
    proportional to exp(-sum_j x_j * LLR_j).
    """
    words = enumerate_codewords(H)
    chan = np.asarray(chan_llrs, dtype=float)
    log_w = -(words * chan).sum(axis=1)
    post = np.empty(len(chan))
    for i in range(len(chan)):
        zero = log_w[words[:, i] == 0]
        one = log_w[words[:, i] == 1]
        lz = np.logaddexp.reduce(zero) if len(zero) else -math.inf
        lo = np.logaddexp.reduce(one) if len(one) else -math.inf
        post[i] = lz - lo
    return post


_TANH_LIM = 1.0 - 1e-15


def _cn_out_sum_product(others, clamp):
    p = 1.0
    for o in others:
        p *= math.tanh(0.5 * o)
    p = min(max(p, -_TANH_LIM), _TANH_LIM)
    out = math.log1p(p) - math.log1p(-p)
    return min(max(out, -clamp), clamp)


def _cn_out_min_sum(others, clamp, scale):
    sign = 1.0
    mag = math.inf
    for o in others:
        if o < 0:
            sign = -sign
        mag = min(mag, abs(o))
    out = scale * sign * mag
    return min(max(out, -clamp), clamp)


def bp_reference(H, chan_llrs, iterations, rule="sum_product",
                 clamp=50.0, scale=0.75):
    """Flooding BP on a dense parity matrix, one edge at a time.

    Returns (decision_llrs, c2v) with c2v keyed by (cn, vn).
    """
    H = np.asarray(H)
    n_cn, n_vn = H.shape
    edges = [(c, v) for c in range(n_cn) for v in range(n_vn) if H[c, v]]
    vn_edges = {v: [c for c in range(n_cn) if H[c, v]] for v in range(n_vn)}
    cn_edges = {c: [v for v in range(n_vn) if H[c, v]] for c in range(n_cn)}
    chan = np.asarray(chan_llrs, dtype=float)
    v2c = {e: 0.0 for e in edges}
    c2v = {e: 0.0 for e in edges}
    for _ in range(iterations):
        for c, v in edges:
            total = chan[v] + sum(c2v[(c2, v)] for c2 in vn_edges[v] if c2 != c)
            v2c[(c, v)] = min(max(total, -clamp), clamp)
        for c, v in edges:
            others = [v2c[(c, u)] for u in cn_edges[c] if u != v]
            if rule == "sum_product":
                c2v[(c, v)] = _cn_out_sum_product(others, clamp)
            else:
                c2v[(c, v)] = _cn_out_min_sum(others, clamp, scale)
    dec = np.array(
        [chan[v] + sum(c2v[(c, v)] for c in vn_edges[v]) for v in range(n_vn)]
    )
    return dec, c2v
