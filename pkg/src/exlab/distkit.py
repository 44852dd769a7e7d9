"""Exact finite distributions over tuples of bitstrings.

A distribution is stored as a vector of non-negative Python integers
(``weights``); the probability of index ``v`` is ``weights[v] / total``.
Joint distributions carry a list of component widths; the first
component occupies the most significant bits of the index.

Everything here is exact. Floats only appear when a logarithm is reported.
"""

import json
import math
from collections import namedtuple
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np

from ._runtime import ContractError, DomainError


def _obj(values):
    arr = np.empty(len(values), dtype=object)
    arr[:] = [int(v) for v in values]
    return arr


class Dist:
    """Exact distribution over ``{0,1}^(sum(widths))``.

    ``Dist`` with a single width is a plain source; with several widths it is
    a joint distribution whose components can be marginalised or conditioned.
    """

    __slots__ = ("weights", "total", "widths")

    def __init__(self, weights, widths):
        widths = tuple(int(w) for w in widths)
        if any(w < 0 for w in widths):
            raise ContractError("component widths must be non-negative")
        if isinstance(weights, np.ndarray):
            w = weights.ravel() if weights.dtype == object else _obj(weights.ravel().tolist())
        else:
            # keep Python ints exact: np.asarray would wrap values past 2^63
            w = _obj(list(weights))
        if len(w) != 1 << sum(widths):
            raise ContractError(f"expected {1 << sum(widths)} weights, got {len(w)}")
        if any(x < 0 for x in w):
            raise ContractError("probabilities must be non-negative")
        g = reduce(math.gcd, w, 0)
        if g == 0:
            raise ContractError("distribution has no mass")
        if g != 1:
            w = w // g
        self.weights = w
        self.total = int(w.sum())
        self.widths = widths

    @classmethod
    def from_probs(cls, probs, widths):
        fr = [Fraction(p) for p in probs]
        if sum(fr) != 1:
            raise ContractError("probabilities must sum to exactly 1")
        den = reduce(lambda a, b: a * b // math.gcd(a, b), (f.denominator for f in fr), 1)
        return cls([f.numerator * (den // f.denominator) for f in fr], widths)

    @property
    def domain_bits(self):
        return sum(self.widths)

    @property
    def size(self):
        return len(self.weights)

    @property
    def probs(self):
        return [Fraction(int(w), self.total) for w in self.weights]

    def prob(self, index):
        return Fraction(int(self.weights[index]), self.total)

    def support(self):
        return [i for i, w in enumerate(self.weights) if w]

    def shaped(self):
        """Weights reshaped with one axis per component."""
        return self.weights.reshape(tuple(1 << w for w in self.widths))

    def __eq__(self, other):
        if not isinstance(other, Dist):
            return NotImplemented
        return (self.domain_bits == other.domain_bits and self.total == other.total
                and bool(np.all(self.weights == other.weights)))

    def __hash__(self):
        return hash((self.domain_bits, self.total, tuple(self.weights)))

    def __repr__(self):
        return f"Dist(widths={self.widths}, total={self.total}, support={len(self.support())})"

    def to_json(self):
        return {"domain_bits": self.domain_bits, "widths": list(self.widths),
                "probs": [f"{w}/{self.total}" for w in self.weights]}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        widths = obj.get("widths") or [obj["domain_bits"]]
        if sum(widths) != obj["domain_bits"]:
            raise ContractError("widths do not add up to domain_bits")
        return cls.from_probs([Fraction(p) for p in obj["probs"]], widths)


JointDist = Dist


def uniform(bits):
    return Dist(_obj([1] * (1 << bits)), (bits,))


def point_mass(bits, value):
    w = [0] * (1 << bits)
    w[value] = 1
    return Dist(w, (bits,))


@dataclass(frozen=True)
class FlatSourceSpec:
    n: int
    support: tuple

    def __post_init__(self):
        s = tuple(int(v) for v in self.support)
        if not s:
            raise ContractError("flat source needs a nonempty support")
        if len(set(s)) != len(s):
            raise ContractError("duplicate support values")
        if min(s) < 0 or max(s) >= 1 << self.n:
            raise ContractError("support value out of range")
        object.__setattr__(self, "support", tuple(sorted(s)))


def flat_source(spec, support=None):
    """Uniform distribution on ``spec.support``; also callable as ``flat_source(n, support)``."""
    if not isinstance(spec, FlatSourceSpec):
        spec = FlatSourceSpec(spec, tuple(support))
    w = [0] * (1 << spec.n)
    for v in spec.support:
        w[v] = 1
    return Dist(w, (spec.n,))


def product(dists):
    if not dists:
        raise ContractError("product of an empty list")
    w = dists[0].weights
    for d in dists[1:]:
        w = np.multiply.outer(w, d.weights).ravel()
    return Dist(w, sum((d.widths for d in dists), ()))


def _check_table(d, table):
    table = np.asarray(table)
    if table.shape != (d.size,):
        raise ContractError(f"function table has {table.size} entries, domain has {d.size}")
    if table.size and table.min() < 0:
        raise ContractError("function values must be non-negative")
    return table.astype(np.int64)


def _out_bits(table, bits):
    if bits is None:
        return max(1, int(table.max()).bit_length()) if table.size else 1
    if table.size and int(table.max()) >= 1 << bits:
        raise ContractError(f"function value exceeds {bits} output bits")
    return bits


def pushforward(d, f, bits=None):
    """Distribution of ``f(X)`` for ``X ~ d``; ``f`` is a table over d's domain."""
    table = _check_table(d, f)
    bits = _out_bits(table, bits)
    out = np.zeros(1 << bits, dtype=object)
    np.add.at(out, table, d.weights)
    return Dist(out, (bits,))


def concat_pushforward(d, fs, bits=None):
    """Joint distribution of ``(f_1(X), ..., f_T(X))``."""
    tables = [_check_table(d, f) for f in fs]
    if bits is None:
        bits = [None] * len(tables)
    bits = [_out_bits(t, b) for t, b in zip(tables, bits)]
    code = np.zeros(d.size, dtype=np.int64)
    for t, b in zip(tables, bits):
        code = (code << b) | t
    out = np.zeros(1 << sum(bits), dtype=object)
    np.add.at(out, code, d.weights)
    return Dist(out, bits)


def _component_list(d, components):
    comps = sorted(set(int(c) for c in components))
    if not comps:
        raise ContractError("empty component set")
    if comps[0] < 0 or comps[-1] >= len(d.widths):
        raise ContractError(f"component index out of range 0..{len(d.widths) - 1}")
    return comps


def marginal(d, components):
    """Keep the given components (0-based, returned in increasing order)."""
    comps = _component_list(d, components)
    drop = tuple(i for i in range(len(d.widths)) if i not in comps)
    w = d.shaped().sum(axis=drop) if drop else d.shaped()
    return Dist(np.asarray(w, dtype=object).ravel(), [d.widths[i] for i in comps])


def condition(d, component, value):
    """Condition on ``component == value``; returns (remaining joint, Pr[event])."""
    (c,) = _component_list(d, [component])
    if not 0 <= value < 1 << d.widths[c]:
        raise ContractError("conditioning value out of range")
    w = np.take(d.shaped(), value, axis=c)
    w = np.asarray(w, dtype=object).ravel()
    mass = int(w.sum())
    if mass == 0:
        raise DomainError(f"Pr[component {c} = {value}] is zero")
    rest = [x for i, x in enumerate(d.widths) if i != c]
    return Dist(w, rest), Fraction(mass, d.total)


def statistical_distance(p, q):
    if p.domain_bits != q.domain_bits:
        raise ContractError(f"domain mismatch: {p.domain_bits} vs {q.domain_bits} bits")
    diff = np.abs(p.weights * q.total - q.weights * p.total).sum()
    return Fraction(int(diff), 2 * p.total * q.total)


MinEntropy = namedtuple("MinEntropy", "bits max_prob")


def max_probability(p):
    return Fraction(int(p.weights.max()), p.total)


def min_entropy(p):
    """H_inf(p) in bits, with the exact maximal probability alongside."""
    mp = max_probability(p)
    return MinEntropy(math.log2(mp.denominator) - math.log2(mp.numerator), mp)


def _entropy_cap(p, k):
    k = Fraction(k)
    if k.denominator != 1:
        raise ContractError("entropy target must be an integer number of bits")
    k = int(k)
    if k < 0:
        raise ContractError("entropy target must be non-negative")
    if k > p.domain_bits:
        raise DomainError(f"no {k}-bit min-entropy source over {p.domain_bits} bits")
    return k


def closeness_excess(p, k):
    """sum_x max(p(x) - 2^-k, 0): mass above the cap, which must be moved."""
    k = _entropy_cap(p, k)
    scaled = p.weights * (1 << k) - p.total
    excess = sum(int(s) for s in scaled if s > 0)
    return Fraction(excess, p.total << k)


def closeness_by_sets(p, k):
    """max over sets S of Pr[S] - |S| 2^-k (the empty set gives 0).

    For a fixed size j the best S is the j heaviest points, so scanning the
    sorted prefix sums covers every S.
    """
    k = _entropy_cap(p, k)
    ws = sorted((int(w) for w in p.weights), reverse=True)
    best = 0
    acc = 0
    for j, w in enumerate(ws, start=1):
        acc += w
        val = (acc << k) - j * p.total
        if val > best:
            best = val
    return Fraction(best, p.total << k)


def closeness_to_min_entropy(p, k):
    """Distance from ``p`` to the nearest distribution with min-entropy >= k."""
    a = closeness_excess(p, k)
    b = closeness_by_sets(p, k)
    if a != b:
        raise AssertionError(f"closeness routes disagree: {a} != {b}")
    return a


ChainRuleReport = namedtuple("ChainRuleReport", "holds failure_mass eps threshold_bits")


def verify_chain_rule(joint, eps):
    """Exact Pr_y[H_inf(X | Y=y) < H_inf(X) - log|Y| - log(1/eps)] for a joint of (X, Y).

    |Y| is the alphabet size 2^(width of Y). Comparisons are done on
    probabilities: the event is max_x Pr[X=x | Y=y] > max Pr[X] * |Y| / eps.
    """
    if len(joint.widths) != 2:
        raise ContractError("chain rule needs a two-component joint (X, Y)")
    eps = Fraction(eps)
    if not 0 < eps <= 1:
        raise ContractError("eps must lie in (0, 1]")
    w = joint.shaped()
    px_max = max_probability(marginal(joint, [0]))
    cap = px_max * (1 << joint.widths[1]) / eps
    failure = 0
    for y in range(w.shape[1]):
        col = w[:, y]
        py = int(col.sum())
        if py and Fraction(int(col.max()), py) > cap:
            failure += py
    threshold = math.log2(1 / px_max) - joint.widths[1] - math.log2(1 / eps)
    fm = Fraction(failure, joint.total)
    return ChainRuleReport(fm <= eps, fm, eps, threshold)


Reversal = namedtuple("Reversal", "A g bits")


def dependency_reversal(p, f, bits=None):
    """Factor ``X`` as ``g(f(X), A)`` with ``A`` independent of ``X``.

    ``A`` is returned in factored form: ``A[y]`` is the distribution of
    ``X | f(X) = y`` (uniform when that event is null), and the full record
    is the product of the ``A[y]``. ``g(y, a) = a[y]``.
    """
    table = _check_table(p, f)
    bits = _out_bits(table, bits)
    shaped = np.zeros((1 << bits, p.size), dtype=object)
    shaped[table, np.arange(p.size)] = p.weights
    A = []
    for y in range(1 << bits):
        row = shaped[y]
        A.append(Dist(row, p.widths) if any(row) else uniform(p.domain_bits))

    def g(y, a):
        return a[y]

    return Reversal(tuple(A), g, bits)


def reconstruct(p, f, reversal):
    """Exact distribution of ``g(f(X), A)`` using the factored record.

    Since A is independent of X and g reads only coordinate y, the output
    is the mixture sum_y Pr[f(X)=y] * A[y].
    """
    fx = pushforward(p, f, reversal.bits)
    den = math.prod(a.total for a in reversal.A)
    out = np.zeros(p.size, dtype=object)
    for y, a in enumerate(reversal.A):
        if fx.weights[y]:
            out = out + a.weights * (fx.weights[y] * (den // a.total))
    return Dist(out, p.widths)
