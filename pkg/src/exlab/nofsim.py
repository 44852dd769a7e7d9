"""Number-on-forehead protocols, cylinder intersections and the cube-bias machinery.

Conventions
-----------
Parties are 0-based (``0..N-1``). Party ``p`` sees every input except
``x_p``; its view ``x_{-p}`` is packed with the lowest remaining index in the
most significant block. A transcript is an integer whose first written bit is
the most significant; after ``i`` steps the prefix is ``transcript >> (mu-i)``.

A step of an adaptive protocol stores a selector row (speaker per prefix) and
a message table of shape ``(2^i, 2^(n(N-1)))``. A non-adaptive step stores a
fixed speaker and a single table row.
"""

import itertools
import json
import math
from collections import namedtuple
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import distkit
from ._enum import shadow_counts, shadow_cost
from ._runtime import ContractError, ResourceError, SplitMix64, check_budget, parallel_map
from .reports import Timer, VerifyReport
from .tables import FunctionTable, input_grid, minus_index, popcount_parity


@dataclass(frozen=True, eq=False)
class Step:
    party: int = None
    selector: np.ndarray = None
    table: np.ndarray = None

    @property
    def adaptive(self):
        return self.selector is not None


class NofProtocol:
    def __init__(self, N, n, steps):
        self.N = int(N)
        self.n = int(n)
        if self.N < 2:
            raise ContractError("an NOF protocol needs at least two parties")
        view = 1 << (self.n * (self.N - 1))
        checked = []
        for i, st in enumerate(steps):
            tab = np.asarray(st.table, dtype=np.int8)
            if st.adaptive:
                sel = np.asarray(st.selector, dtype=np.int64)
                if sel.shape != (1 << i,) or tab.shape != (1 << i, view):
                    raise ContractError(f"adaptive step {i} has wrong table shapes")
                if sel.min() < 0 or sel.max() >= self.N:
                    raise ContractError(f"step {i} selects a party outside 0..{self.N - 1}")
                st = Step(None, sel, tab)
            else:
                if not 0 <= st.party < self.N:
                    raise ContractError(f"step {i} party {st.party} outside 0..{self.N - 1}")
                if tab.shape != (view,):
                    raise ContractError(f"step {i} table must have {view} entries")
                st = Step(int(st.party), None, tab)
            if tab.size and (tab.min() < 0 or tab.max() > 1):
                raise ContractError("message tables must be 0/1")
            tab.setflags(write=False)
            checked.append(st)
        self.steps = tuple(checked)

    @property
    def mu(self):
        return len(self.steps)

    @property
    def non_adaptive(self):
        return not any(st.adaptive for st in self.steps)

    def speaker(self, i, prefix):
        st = self.steps[i]
        return int(st.selector[prefix]) if st.adaptive else st.party

    def message(self, i, prefix, view):
        st = self.steps[i]
        return int(st.table[prefix, view] if st.adaptive else st.table[view])

    def as_adaptive(self):
        """Same protocol written in the adaptive representation."""
        steps = []
        for i, st in enumerate(self.steps):
            if st.adaptive:
                steps.append(st)
            else:
                steps.append(Step(None, np.full(1 << i, st.party), np.tile(st.table, (1 << i, 1))))
        return NofProtocol(self.N, self.n, steps)

    def transcripts(self):
        """Transcript of every packed input, as an int array of length 2^(nN)."""
        xs = input_grid(self.N, self.n)
        views = [minus_index(xs, p, self.n) for p in range(self.N)]
        pi = np.zeros(len(xs[0]), dtype=np.int64)
        for i, st in enumerate(self.steps):
            if st.adaptive:
                who = st.selector[pi]
                view = np.choose(who, views)
                bit = st.table[pi, view]
            else:
                bit = st.table[views[st.party]]
            pi = (pi << 1) | bit
        return pi

    def __eq__(self, other):
        if not isinstance(other, NofProtocol) or (self.N, self.n, self.mu) != (other.N, other.n, other.mu):
            return False
        for a, b in zip(self.steps, other.steps):
            if a.adaptive != b.adaptive or a.party != b.party:
                return False
            if a.adaptive and not np.array_equal(a.selector, b.selector):
                return False
            if not np.array_equal(a.table, b.table):
                return False
        return True

    __hash__ = None

    def __repr__(self):
        kind = "non-adaptive" if self.non_adaptive else "adaptive"
        return f"NofProtocol(N={self.N}, n={self.n}, mu={self.mu}, {kind})"

    # Protocol files: parties 0-based, tables hex-packed with entry j in bit j.
    def to_json(self):
        steps = []
        for st in self.steps:
            if st.adaptive:
                steps.append({"selector": [int(s) for s in st.selector],
                              "tables": [_pack_bits(row) for row in st.table]})
            else:
                steps.append({"party": st.party, "table": _pack_bits(st.table)})
        return {"N": self.N, "n": self.n, "steps": steps}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        N, n = int(obj["N"]), int(obj["n"])
        view = 1 << (n * (N - 1))
        steps = []
        for s in obj["steps"]:
            if "selector" in s:
                steps.append(Step(None, np.array(s["selector"]),
                                  np.array([_unpack_bits(t, view) for t in s["tables"]])))
            else:
                steps.append(Step(int(s["party"]), None, _unpack_bits(s["table"], view)))
        return cls(N, n, steps)


def _pack_bits(row):
    v = 0
    for j, b in enumerate(row):
        v |= int(b) << j
    return format(v, "x")


def _unpack_bits(text, size):
    v = int(text, 16)
    if v >> size:
        raise ContractError("packed table longer than its domain")
    return np.array([(v >> j) & 1 for j in range(size)], dtype=np.int8)


def eval_protocol(protocol, x):
    """Transcript of a single input tuple ``x`` (length N)."""
    if len(x) != protocol.N:
        raise ContractError(f"expected {protocol.N} inputs")
    n = protocol.n
    if any(not 0 <= v < 1 << n for v in x):
        raise ContractError("input out of range")
    pi = 0
    for i in range(protocol.mu):
        p = protocol.speaker(i, pi)
        pi = (pi << 1) | protocol.message(i, pi, minus_index(list(x), p, n))
    return pi


@dataclass(frozen=True, eq=False)
class CylinderIntersection:
    N: int
    n: int
    tables: tuple

    def indicator(self):
        """``prod_p C_p(x_{-p})`` over every packed input."""
        xs = input_grid(self.N, self.n)
        out = np.ones(len(xs[0]), dtype=np.int64)
        for p, c in enumerate(self.tables):
            out &= np.asarray(c)[minus_index(xs, p, self.n)]
        return out


def transcript_to_cylinder(protocol, pi):
    """Split ``[Pi(x) == pi]`` into per-party indicators ``C_p(x_{-p})``.

    Along the fixed transcript every speaker is known in advance, so party
    p only has to confirm the bits it wrote itself.
    """
    mu = protocol.mu
    if not 0 <= pi < 1 << mu:
        raise ContractError(f"transcript must have {mu} bits")
    view = 1 << (protocol.n * (protocol.N - 1))
    tables = [np.ones(view, dtype=np.int64) for _ in range(protocol.N)]
    for i in range(mu):
        prefix = pi >> (mu - i)
        want = (pi >> (mu - 1 - i)) & 1
        p = protocol.speaker(i, prefix)
        st = protocol.steps[i]
        row = st.table[prefix] if st.adaptive else st.table
        tables[p] &= (row == want).astype(np.int64)
    return CylinderIntersection(protocol.N, protocol.n, tuple(tables))


def _product_weights(X, N, n):
    """Integer weights of a product of N sources over packed inputs, plus the factors."""
    if isinstance(X, distkit.Dist):
        if X.domain_bits != N * n:
            raise ContractError(f"joint over {X.domain_bits} bits, expected {N * n}")
        if X.widths != (n,) * N:
            X = distkit.Dist(X.weights, (n,) * N)
        factors = [distkit.marginal(X, [i]) for i in range(N)]
        if distkit.product(factors) != X:
            raise ContractError("sources must be independent (joint is not a product)")
    else:
        factors = list(X)
        if len(factors) != N or any(f.domain_bits != n for f in factors):
            raise ContractError(f"expected {N} sources over {n} bits")
    return distkit.product(factors).weights, factors


def _joint_distance(code_out, m, code_side, side_bits, weights):
    """|A o B - U_m o B| for tables A (m bits) and B over a weighted domain."""
    code = (code_side << m) | code_out
    w = np.zeros(1 << (side_bits + m), dtype=object)
    np.add.at(w, code, weights)
    w = w.reshape(1 << side_bits, 1 << m)
    wb = w.sum(axis=1)
    total = int(wb.sum())
    diff = np.abs(w * (1 << m) - wb[:, None]).sum()
    return Fraction(int(diff), total << (m + 1))


def leakage_distance(f, protocol, X):
    """Exact ``|f(X) o Pi(X) - U_m o Pi(X)|`` for independent sources ``X``.

    ``X`` is either a joint Dist of N components (checked to be a product)
    or a list of N source distributions.
    """
    if (protocol.N, protocol.n) != (f.N, f.n):
        raise ContractError("function and protocol disagree on N or n")
    weights, _ = _product_weights(X, f.N, f.n)
    return _joint_distance(f.table, f.m, protocol.transcripts(), protocol.mu, weights)


def cube_bias(f, X):
    """``E[prod_b (-1)^f(X^b)]`` over independent shadow copies, exactly."""
    if f.m != 1:
        raise ContractError("cube bias is defined for Boolean functions")
    _, factors = _product_weights(X, f.N, f.n)
    counts, total = shadow_counts(f.table, f.N, f.n, 1, factors, mode="xor", what="cube bias")
    return Fraction(int(counts[0]) - int(counts[1]), total)


CSReport = namedtuple("CSReport", "lhs cube_bias holds")


def cs_chain_check(f, C, X):
    """Compare ``|E[f'(X) C(X)]|`` with ``cube_bias(f, X)^(1/2^N)`` via 2^N-th powers."""
    if f.m != 1 or (C.N, C.n) != (f.N, f.n):
        raise ContractError("shape mismatch between f and the cylinder intersection")
    weights, factors = _product_weights(X, f.N, f.n)
    sign = 1 - 2 * f.table
    corr = (weights * (sign * C.indicator()).astype(object)).sum()
    lhs = abs(Fraction(int(corr), int(weights.sum())))
    cb = cube_bias(f, factors)
    return CSReport(lhs, cb, lhs ** (1 << f.N) <= cb)


XorReport = namedtuple("XorReport", "lhs alpha rhs holds worst")


def xor_lemma_check(f, protocol, X, budget=None):
    """Check ``|f o Pi - U_m o Pi| <= 2^(m+mu) * max_{S != 0, T} |parity_{S,T} - U_1|``."""
    if (protocol.N, protocol.n) != (f.N, f.n):
        raise ContractError("function and protocol disagree on N or n")
    m, mu = f.m, protocol.mu
    weights, _ = _product_weights(X, f.N, f.n)
    check_budget("xor lemma subsets", (1 << (m + mu)) * len(weights), budget)
    trans = protocol.transcripts()
    lhs = _joint_distance(f.table, m, trans, mu, weights)
    code = (trans << m) | f.table
    cell = np.zeros(1 << (m + mu), dtype=object)
    np.add.at(cell, code, weights)
    total = int(cell.sum())
    cells = np.arange(1 << (m + mu), dtype=np.int64)
    alpha, worst = Fraction(0), None
    for mask in range(1 << (m + mu)):
        if mask & ((1 << m) - 1) == 0:
            continue  # S must be nonempty
        odd = popcount_parity(cells & mask).astype(bool)
        p1 = Fraction(int(cell[odd].sum()), total)
        bias = abs(p1 - Fraction(1, 2))
        if worst is None or bias > alpha:
            alpha, worst = bias, mask
    rhs = Fraction(1 << (m + mu)) * alpha
    return XorReport(lhs, alpha, rhs, lhs <= rhs, worst)


def protocol_count(N, n, mu, non_adaptive=True):
    d = 1 << (n * (N - 1))
    if non_adaptive:
        return (N << d) ** mu
    return math.prod((N ** (1 << i)) << ((1 << i) * d) for i in range(mu))


def enumerate_protocols(N, n, mu, non_adaptive=True, budget=None):
    """Every protocol of length ``mu``, once each, in a fixed order.

    Non-adaptive steps vary party-major, then message table as an integer
    whose bit j is the message on view j.
    """
    count = protocol_count(N, n, mu, non_adaptive)
    check_budget(f"enumerate protocols N={N} n={n} mu={mu}", count, budget)
    view = 1 << (n * (N - 1))
    bitsel = np.arange(view, dtype=np.int64)

    def row(code, size=view):
        return ((code >> np.arange(size, dtype=object)) & 1).astype(np.int8)

    if non_adaptive:
        choices = [(p, F) for p in range(N) for F in range(1 << view)]
        for combo in itertools.product(choices, repeat=mu):
            yield NofProtocol(N, n, [Step(p, None, ((F >> bitsel) & 1).astype(np.int8)) for p, F in combo])
        return
    per_step = []
    for i in range(mu):
        rows = 1 << i
        sels = list(itertools.product(range(N), repeat=rows))
        per_step.append([(s, F) for s in sels for F in range(1 << (rows * view))])
    for combo in itertools.product(*per_step):
        steps = []
        for i, (sel, F) in enumerate(combo):
            steps.append(Step(None, np.array(sel), row(F, (1 << i) * view).reshape(1 << i, view)))
        yield NofProtocol(N, n, steps)


def random_protocol(N, n, mu, non_adaptive=True, seed=0):
    """Protocol with tables drawn from SplitMix64(seed): speaker(s) first, then message bits."""
    rng = SplitMix64(seed)
    view = 1 << (n * (N - 1))
    steps = []
    for i in range(mu):
        if non_adaptive:
            p = rng.below(N)
            steps.append(Step(p, None, np.array(rng.bits(view), dtype=np.int8)))
        else:
            sel = np.array([rng.below(N) for _ in range(1 << i)])
            tab = np.array([rng.bits(view) for _ in range(1 << i)], dtype=np.int8)
            steps.append(Step(None, sel, tab))
    return NofProtocol(N, n, steps)


def _flat_supports(n, k):
    return list(itertools.combinations(range(1 << n), 1 << k))


def missing_entropy_check(f, N, n, k, mu, budget=None, samples=2000, seed=0):
    """Hardness with missing min-entropy, in its enumerated-max form.

    eps_hat is the worst leakage distance over every non-adaptive protocol
    of length mu on uniform inputs. Then every length-(mu-2) protocol and
    every tuple of flat k-sources must satisfy
    ``leakage <= eps_hat * 2^(N(n-k))``. Source tuples are exhaustive when
    the budget allows, else ``samples`` seeded draws (mode "sampled").
    """
    if (f.N, f.n) != (N, n):
        raise ContractError("function shape does not match N, n")
    if mu < 2:
        raise ContractError("mu must be at least 2 (the test side uses mu - 2 bits)")
    if not 0 <= k <= n:
        raise ContractError("need 0 <= k <= n")
    with Timer() as t:
        uni = [distkit.uniform(n)] * N
        weights, _ = _product_weights(uni, N, n)
        big = list(enumerate_protocols(N, n, mu, budget=budget))
        eps_hat = max(parallel_map(
            lambda P: _joint_distance(f.table, f.m, P.transcripts(), mu, weights), big))
        small = list(enumerate_protocols(N, n, mu - 2, budget=budget))
        small_tr = [P.transcripts() for P in small]
        supports = _flat_supports(n, k)
        n_tuples = len(supports) ** N
        cost = n_tuples * len(small) * (1 << (n * N))
        try:
            check_budget("missing-entropy source tuples", cost, budget)
            tuples = itertools.product(range(len(supports)), repeat=N)
            mode = "exhaustive"
        except ResourceError:
            rng = SplitMix64(seed)
            tuples = [tuple(rng.below(len(supports)) for _ in range(N)) for _ in range(samples)]
            mode = "sampled"

        def worst_for(tup):
            srcs = [distkit.flat_source(n, supports[j]) for j in tup]
            w = distkit.product(srcs).weights
            return max(_joint_distance(f.table, f.m, tr, mu - 2, w) for tr in small_tr)

        tuples = list(tuples)
        measured = max(parallel_map(worst_for, tuples))
    return VerifyReport(
        "missing_entropy_leakage", measured, formula="missing_entropy",
        params={"eps": eps_hat, "N": N, "n": n, "k": k},
        cost=len(big) + len(tuples) * len(small), runtime=t.elapsed, mode=mode,
        details={"eps_hat": eps_hat, "mu": mu, "protocols_max": len(big),
                 "protocols_tested": len(small), "source_tuples": len(tuples)})


def inner_product(n):
    """GF(2) inner product of two n-bit inputs as a Boolean table."""
    return FunctionTable.from_callable(lambda x, y: popcount_parity(x & y), 2, n, 1)


def shadow_cost_of(f, X):
    _, factors = _product_weights(X, f.N, f.n)
    return shadow_cost(factors, f.N)
