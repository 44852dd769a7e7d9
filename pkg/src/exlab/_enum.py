"""Exhaustive enumeration over independent shadow copies of N sources.

For sources ``X_1..X_N`` we take two independent copies of each,
``X_i^0`` and ``X_i^1``, and for every selector ``b`` in ``{0,1}^N`` (bit
``i`` of the integer ``b`` picks the copy of source ``i+1``) evaluate
``Z^b = f(X_1^{b_1}, ..., X_N^{b_N})``. The engine returns exact integer
weights for the joint ``(Z^0, Z^1, ..., Z^{2^N - 1})`` (``Z^0`` in the most
significant block) or for the XOR of all ``Z^b``.
"""

import math

import numpy as np

from ._runtime import ContractError, check_budget, parallel_map

_FLOAT_EXACT = 1 << 53


def support_weights(dist):
    """(support values, integer weights or None when flat)."""
    w = dist.weights
    vals = np.array([i for i, x in enumerate(w) if x], dtype=np.int64)
    ws = [int(w[i]) for i in vals]
    if len(set(ws)) == 1:
        return vals, None, len(vals)
    return vals, np.array(ws, dtype=object), sum(ws)


def shadow_cost(sources, N):
    return math.prod(len(s.support()) ** 2 for s in sources) << N


def shadow_counts(table, N, n, m, sources, mode="concat", what="shadow enumeration"):
    """Exact weights of the shadow joint; returns (counts as object array, total weight)."""
    if len(sources) != N:
        raise ContractError(f"expected {N} sources, got {len(sources)}")
    for s in sources:
        if s.domain_bits != n:
            raise ContractError(f"source over {s.domain_bits} bits, expected {n}")
    check_budget(what, shadow_cost(sources, N))
    table = np.asarray(table, dtype=np.int64)
    sw = [support_weights(s) for s in sources]
    nb = 1 << N
    if mode == "concat":
        out_bits = m * nb
    elif mode == "xor":
        out_bits = m
    else:
        raise ContractError(f"unknown mode {mode!r}")
    if out_bits > 26:
        raise ContractError(f"joint output of {out_bits} bits is too large to tabulate")
    flat = all(w is None for _, w, _ in sw)
    total = math.prod(t * t for _, _, t in sw)
    use_float = not flat and total < _FLOAT_EXACT

    shifts = [n * (N - 1 - i) for i in range(N)]
    axes = [(i, c) for c in (0, 1) for i in range(N)][1:]
    ndim = len(axes)

    def along(vec, pos):
        shape = [1] * ndim
        shape[pos] = len(vec)
        return vec.reshape(shape)

    shifted = {}
    weights = {}
    for pos, (i, c) in enumerate(axes):
        vals, w, _ = sw[i]
        shifted[(i, c)] = along(vals << shifts[i], pos)
        if not flat:
            wv = np.ones(len(vals), dtype=object) if w is None else w
            weights[(i, c)] = along(wv.astype(np.float64) if use_float else wv, pos)

    vals0, w0, _ = sw[0]
    w0 = np.ones(len(vals0), dtype=object) if w0 is None else w0

    def chunk(j):
        v0 = int(vals0[j]) << shifts[0]
        acc = None
        for b in range(nb):
            idx = 0
            for i in range(N):
                c = (b >> i) & 1
                idx = idx + (v0 if (i, c) == (0, 0) else shifted[(i, c)])
            z = table[idx]
            if mode == "concat":
                acc = z if acc is None else (acc << m) | z
            else:
                acc = z if acc is None else acc ^ z
        shape = [1] * ndim
        for pos, (i, c) in enumerate(axes):
            shape[pos] = len(sw[i][0])
        code = np.broadcast_to(acc, shape).ravel()
        size = 1 << out_bits
        if flat:
            return np.bincount(code, minlength=size).astype(object)
        wt = int(w0[j])
        for key in weights:
            wt = wt * weights[key]
        wt = np.broadcast_to(wt, shape).ravel()
        if use_float:
            got = np.bincount(code, weights=wt, minlength=size)
            return np.array([int(round(x)) for x in got], dtype=object)
        out = np.zeros(size, dtype=object)
        np.add.at(out, code, wt)
        return out

    parts = parallel_map(chunk, range(len(vals0)))
    counts = parts[0]
    for p in parts[1:]:
        counts = counts + p
    return counts, total
