"""Brute-force statistical oracles for the constructions in ``extract``.

Every quantity is computed exactly (integer counts over an exhaustive
enumeration), except ``weak_nme_distance_mc`` which is a deliberately
independent sampling estimator used to cross-check the exact engine.

Flat sources are the canonical families here. Each quantity maximised below
is convex in each source's probability vector, so a maximum over all flat
k-sources is a maximum over all k-sources.
"""

import itertools
import math
from collections import namedtuple
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import distkit
from ._enum import shadow_counts, shadow_cost
from ._runtime import ContractError, DomainError, ResourceError, SplitMix64, check_budget, parallel_map
from .extract import CondenserContract, NmExtParams, adversarial_extract, lre3, nme_table
from .nofsim import NofProtocol, Step, _joint_distance, _product_weights
from .reports import Timer, VerifyReport, evaluate_formula
from .tables import FunctionTable, input_grid


@dataclass
class SourceFamily:
    """N independent sources, each promised to have min-entropy >= k."""

    sources: list
    k: object = 0

    def __post_init__(self):
        self.sources = list(self.sources)
        if not self.sources:
            raise ContractError("empty source family")
        n = self.sources[0].domain_bits
        cap = Fraction(1, 2) ** Fraction(self.k) if Fraction(self.k).denominator == 1 else None
        for i, s in enumerate(self.sources):
            if s.domain_bits != n:
                raise ContractError("all sources must live on the same number of bits")
            mp = distkit.max_probability(s)
            if cap is not None and mp > cap:
                raise ContractError(f"source {i} has min-entropy below {self.k}")
            if cap is None and distkit.min_entropy(s).bits < float(self.k):
                raise ContractError(f"source {i} has min-entropy below {self.k}")

    @property
    def N(self):
        return len(self.sources)

    @property
    def n(self):
        return self.sources[0].domain_bits

    @classmethod
    def uniform(cls, N, n):
        return cls([distkit.uniform(n)] * N, n)

    @classmethod
    def flat(cls, n, supports):
        specs = [distkit.FlatSourceSpec(n, tuple(s)) for s in supports]
        k = min(len(s.support) for s in specs).bit_length() - 1
        return cls([distkit.flat_source(s) for s in specs], k)

    def to_json(self):
        return {"k": str(self.k), "sources": [s.to_json() for s in self.sources]}

    @classmethod
    def from_json(cls, obj):
        if "uniform" in obj:
            return cls.uniform(int(obj["uniform"]["N"]), int(obj["uniform"]["n"]))
        if "flat" in obj:
            return cls.flat(int(obj["n"]), obj["flat"])
        return cls([distkit.Dist.from_json(s) for s in obj["sources"]], Fraction(obj.get("k", 0)))


def _as_table(nmext):
    if isinstance(nmext, FunctionTable):
        return nmext
    if isinstance(nmext, NmExtParams):
        return nme_table(nmext)
    if hasattr(nmext, "table"):
        return nmext.table()
    raise ContractError("expected a FunctionTable, NmExtParams or composed extractor")


def _sources(sources):
    return sources.sources if isinstance(sources, SourceFamily) else list(sources)


def _shadow_joint(f, srcs):
    counts, total = shadow_counts(f.table, f.N, f.n, f.m, srcs, mode="concat",
                                  what="weak NME distance")
    return counts.reshape(1 << f.m, -1), total


def weak_nme_distance(nmext, sources):
    """Exact ``|Z^0 o (Z^b)_{b != 0} - U_m o (Z^b)_{b != 0}|`` over shadow copies."""
    f = _as_table(nmext)
    srcs = _sources(sources)
    w, total = _shadow_joint(f, srcs)
    tail = w.sum(axis=0)
    diff = np.abs(w * (1 << f.m) - tail[None, :]).sum()
    return Fraction(int(diff), total << (f.m + 1))


MCEstimate = namedtuple("MCEstimate", "estimate stderr plugin samples")


def weak_nme_distance_mc(nmext, sources, samples=10**6, seed=0):
    """Sampling estimate of the weak-NME distance (independent of the exact engine).

    Half the samples choose a distinguishing set S of (z, w) cells; the other
    half estimate ``Pr[(Z^0, W) in S] - Pr[(U, W) in S]`` as a mean of i.i.d.
    bounded terms, which gives an honest standard error. The plug-in value
    from all samples is returned alongside.
    """
    f = _as_table(nmext)
    srcs = _sources(sources)
    N, n, m = f.N, f.n, f.m
    rng = np.random.default_rng(seed)
    draws = []
    for c in range(2):
        for s in srcs:
            p = np.array([float(x) for x in s.probs])
            draws.append(rng.choice(1 << n, size=samples, p=p / p.sum()))
    z0 = None
    tail = np.zeros(samples, dtype=np.int64)
    for b in range(1 << N):
        idx = np.zeros(samples, dtype=np.int64)
        for i in range(N):
            idx = (idx << n) | draws[i + N * ((b >> i) & 1)]
        z = f.table[idx]
        if b == 0:
            z0 = z
        else:
            tail = (tail << m) | z
    cells_w = 1 << (m * ((1 << N) - 1))
    half = samples // 2
    train = np.bincount(tail[:half] + (z0[:half] << (m * ((1 << N) - 1))),
                        minlength=(1 << m) * cells_w).reshape(1 << m, cells_w)
    S = train * (1 << m) > train.sum(axis=0)[None, :]
    in_s = S[z0[half:], tail[half:]].astype(np.float64)
    u_s = S[:, tail[half:]].sum(axis=0) / float(1 << m)
    terms = in_s - u_s
    est = float(terms.mean())
    se = float(terms.std(ddof=1) / math.sqrt(len(terms)))
    full = np.bincount(tail + (z0 << (m * ((1 << N) - 1))),
                       minlength=(1 << m) * cells_w).reshape(1 << m, cells_w).astype(np.float64)
    plugin = float(np.abs(full * (1 << m) - full.sum(axis=0)[None, :]).sum() / (2 * samples * (1 << m)))
    return MCEstimate(est, se, plugin, samples)


def condenser_error(cond, X, Y, ell):
    """Distance of ``cond(X, Y)`` from the nearest distribution with min-entropy >= ell."""
    if X.domain_bits != cond.n or Y.domain_bits != cond.n:
        raise ContractError("sources must match the condenser input length")
    joint = distkit.product([X, Y])
    out = distkit.pushforward(joint, cond.table().ravel(), cond.r)
    return distkit.closeness_to_min_entropy(out, ell)


def _support_matrix(n, k):
    sup = list(itertools.combinations(range(1 << n), 1 << k))
    M = np.zeros((len(sup), 1 << n), dtype=np.int64)
    for i, s in enumerate(sup):
        M[i, list(s)] = 1
    return sup, M


def _onehot(cond):
    T = np.asarray(cond.table(), dtype=np.int64)
    return (T[:, :, None] == np.arange(1 << cond.r)[None, None, :]).astype(np.int64)


Profile = namedtuple("Profile", "eps worst pairs mode")


def condenser_profile(cond, k, ell, budget=None, samples=20000, seed=0):
    """Worst condenser error over all pairs of flat k-sources.

    Counts are integers: for supports S_x, S_y of size 2^k the output
    histogram is c[z] and the error is sum_z max(c[z] 2^ell - 4^k, 0) / (4^k 2^ell).
    Falls back to ``samples`` seeded pairs (mode "sampled") over budget.
    """
    n, r = cond.n, cond.r
    if not 0 <= k <= n:
        raise ContractError("need 0 <= k <= n")
    if not 0 <= ell <= r:
        raise DomainError(f"no {ell}-bit min-entropy output over {r} bits")
    sup, M = _support_matrix(n, k)
    oh = _onehot(cond)
    # H[s, y, z] = #{x in S_s : cond(x, y) = z}
    H = np.einsum("sx,xyz->syz", M, oh)
    D = 1 << (2 * k)
    nS = len(sup)
    try:
        check_budget("condenser profile pairs", nS * nS << r, budget)
        mode = "exhaustive"
    except ResourceError:
        mode = "sampled"

    def excess(c):
        return np.maximum(c * (1 << ell) - D, 0).sum(axis=-1)

    if mode == "exhaustive":
        rows = max(1, (1 << 22) // max(1, nS << r))
        best, worst = -1, None
        chunks = [(i, min(nS, i + rows)) for i in range(0, nS, rows)]

        def run(lohi):
            lo, hi = lohi
            c = np.einsum("syz,ty->stz", H[lo:hi], M)
            e = excess(c)
            j = int(np.argmax(e))
            return int(e.flat[j]), (lo + j // nS, j % nS)

        for val, pos in parallel_map(run, chunks):
            if val > best:
                best, worst = val, pos
        pairs = nS * nS
    else:
        rng = SplitMix64(seed)
        best, worst = -1, None
        for _ in range(samples):
            i, j = rng.below(nS), rng.below(nS)
            c = H[i].T @ M[j]
            val = int(excess(c))
            if val > best:
                best, worst = val, (i, j)
        pairs = samples
    eps = Fraction(best, D << ell)
    return Profile(eps, (sup[worst[0]], sup[worst[1]]), pairs, mode)


def _bad_fraction(H, kp, ell, eps):
    """Per fixed-side support: worst Pr over the free side of landing on a bad seed.

    H[s, y, z] counts for supports of size 2^kp. Seed y is bad when the
    condenser output given y is not eps-close to min-entropy ell. The worst
    free-side flat kp-source puts as many of its 2^kp points on bad seeds as
    possible, so the worst fraction is min(#bad, 2^kp) / 2^kp.
    """
    size = 1 << kp
    num = np.maximum(H * (1 << ell) - size, 0).sum(axis=-1)
    thresh = Fraction(eps) * (size << ell)
    bad = np.array([[Fraction(int(v)) > thresh for v in row] for row in num])
    counts = bad.sum(axis=1)
    return [Fraction(min(int(c), size), size) for c in counts]


def strongness_check(cond, k, ell, eps, k_prime, budget=None):
    """Check the strong-condenser bound 2^(k + r - k') for every flat k'-source pair.

    ``(k, ell, eps)`` should describe the condenser as verified by
    ``condenser_profile``. Both the y-fixing and x-fixing directions are
    checked; the report's measured value is the larger failure probability.
    """
    n, r = cond.n, cond.r
    if not 0 <= k_prime <= n:
        raise ContractError("need 0 <= k' <= n")
    with Timer() as t:
        sup, M = _support_matrix(n, k_prime)
        check_budget("strongness supports", len(sup) << (n + r), budget)
        oh = _onehot(cond)
        # fixing y: X varies over its support
        Hy = np.einsum("sx,xyz->syz", M, oh)
        # fixing x: Y varies over its support
        Hx = np.einsum("sy,xyz->sxz", M, oh)
        fy = _bad_fraction(Hy, k_prime, ell, eps)
        fx = _bad_fraction(Hx, k_prime, ell, eps)
        worst_y, worst_x = max(fy), max(fx)
    return VerifyReport(
        "strong_condenser_failure", max(worst_y, worst_x), formula="strong_condenser",
        params={"k": k, "m": r, "k_prime": k_prime}, cost=len(sup) << (n + 1),
        runtime=t.elapsed,
        details={"ell": ell, "eps": Fraction(eps), "fix_y": worst_y, "fix_x": worst_x,
                 "supports": len(sup)})


def _leak_weights(srcs, N, n):
    weights, _ = _product_weights(srcs, N, n)
    return weights


def reduction_bound_check(nmext, sources, protocols):
    """Leakage distance against each protocol vs 2^(m+mu) (2 eps)^(1/2^N), eps measured.

    All protocols must share one length mu. Comparison is exact on 2^N-th powers.
    """
    f = _as_table(nmext)
    srcs = _sources(sources)
    protocols = list(protocols)
    mus = {P.mu for P in protocols}
    if len(mus) > 1:
        raise ContractError("protocols must all have the same length")
    mu = mus.pop() if mus else 0
    with Timer() as t:
        eps = weak_nme_distance(f, srcs)
        weights = _leak_weights(srcs, f.N, f.n)
        leaks = parallel_map(
            lambda P: _joint_distance(f.table, f.m, P.transcripts(), mu, weights), protocols)
    measured = max(leaks, default=Fraction(0))
    params = {"m": f.m, "mu": mu, "N": f.N, "eps": eps}
    bound, power = evaluate_formula("reduction", params)
    return VerifyReport(
        "leakage_distance", measured, formula="reduction",
        params=params,
        cost=shadow_cost(srcs, f.N) + len(protocols) * (1 << (f.N * f.n)), runtime=t.elapsed,
        details={"eps_hat": eps, "protocols": len(protocols),
                 "violations": sum(1 for x in leaks if x ** power > bound)})


def _var_table(params, args, good, n):
    """Table of lre3 over the good variables appearing in ``args``.

    ``args`` maps each of three positions to either ("var", j) or ("const", v).
    The table is indexed by the packed pair of the two variables it may use.
    """
    grid = input_grid(2, n)
    vals = []
    for kind, v in args:
        vals.append(grid[v] if kind == "var" else np.full_like(grid[0], v))
    return np.asarray(lre3(params, *vals), dtype=np.int64)


StructuralResult = namedtuple("StructuralResult", "holds g_tables mismatches")


def _leak_functions(params, N_total, good, bad_values):
    """Tables g_1(x_b, x_c), g_2(x_a, x_c), g_3(x_a, x_b) absorbing every other triple.

    A triple other than (a, b, c) misses at least one good index; it is
    assigned to the first good index it misses.
    """
    a, b, c = good
    n = params.n
    p3 = params.with_n_sources(3)
    g = [np.zeros(1 << (2 * n), dtype=np.int64) for _ in range(3)]
    # variables of g_i, in packed order (first = most significant)
    g_vars = [(b, c), (a, c), (a, b)]
    for trip in itertools.combinations(range(N_total), 3):
        if trip == tuple(good):
            continue
        missing = next(i for i, gi in enumerate(good) if gi not in trip)
        vars_i = g_vars[missing]
        args = []
        for idx in trip:
            if idx in vars_i:
                args.append(("var", vars_i.index(idx)))
            else:
                args.append(("const", bad_values[idx]))
        g[missing] ^= _var_table(p3, args, vars_i, n)
    return g


def adversarial_reduction_check(params, N_total, good, bad_values, sources=None, protocols=None):
    """Fix the bad sources and check the extractor collapses to lre3 plus 2-input leaks.

    (i) structural: Ext = lre3(x_a, x_b, x_c) ^ g_1(x_b, x_c) ^ g_2(x_a, x_c) ^ g_3(x_a, x_b)
        on every good input.
    (ii) statistical: |Ext(X) o Pi'(X) - U_m o Pi'(X)| is at most the lre3 leakage
        distance against Pi' followed by the NOF protocol in which the party missing
        x_a writes g_1, the party missing x_b writes g_2 and the one missing x_c writes g_3.
    ``protocols`` are optional extra 3-party protocols Pi' on the good sources.
    """
    a, b, c = good = tuple(good)
    if N_total < 3:
        raise ContractError("need at least 3 sources")
    if not a < b < c < N_total:
        raise ContractError("good indices must be increasing and within range")
    bad = [i for i in range(N_total) if i not in good]
    if set(bad) != set(bad_values):
        raise ContractError("provide a constant for every bad source")
    n, m = params.n, params.m
    p3 = params.with_n_sources(3)
    if sources is None:
        sources = [distkit.uniform(n)] * 3
    sources = _sources(sources)
    check_budget("adversarial structural check", (1 << (3 * n)) * math.comb(N_total, 3))
    with Timer() as t:
        xs = input_grid(3, n)
        full = [None] * N_total
        for i in bad:
            full[i] = np.full_like(xs[0], bad_values[i])
        for j, gi in enumerate(good):
            full[gi] = xs[j]
        ext = np.asarray(adversarial_extract(params, full), dtype=np.int64)
        lre = np.asarray(lre3(p3, *xs), dtype=np.int64)
        g = _leak_functions(params, N_total, good, bad_values)
        views = [(xs[1] << n) | xs[2], (xs[0] << n) | xs[2], (xs[0] << n) | xs[1]]
        rebuilt = lre ^ g[0][views[0]] ^ g[1][views[1]] ^ g[2][views[2]]
        mismatches = int(np.count_nonzero(rebuilt != ext))

        leak_steps = []
        for party in range(3):
            for bit in range(m):
                leak_steps.append(Step(party, None, ((g[party] >> bit) & 1).astype(np.int8)))
        extra = list(protocols) if protocols else [NofProtocol(3, n, [])]
        weights = _leak_weights(sources, 3, n)
        lhs_max, rhs_max, ok = Fraction(0), Fraction(0), True
        for P in extra:
            combined = NofProtocol(3, n, list(P.steps) + leak_steps)
            lhs = _joint_distance(ext, m, P.transcripts(), P.mu, weights)
            rhs = _joint_distance(lre, m, combined.transcripts(), combined.mu, weights)
            ok = ok and lhs <= rhs
            lhs_max, rhs_max = max(lhs_max, lhs), max(rhs_max, rhs)
    rep = VerifyReport(
        "adversarial_output_distance", lhs_max, bound=rhs_max,
        cost=(1 << (3 * n)) * math.comb(N_total, 3), runtime=t.elapsed,
        details={"N_total": N_total, "good": list(good), "bad_values": {str(k): v for k, v in bad_values.items()},
                 "structural_mismatches": mismatches, "lre_leak_distance": rhs_max,
                 "per_protocol_ok": ok, "leak_bits": 3 * m})
    rep.holds = rep.holds and mismatches == 0 and ok
    return rep
