"""Explicit extractors built from finite-field multiplication.

The weak non-malleable extractor follows the two-stage recipe: condense each
pair ``(x_i, x_N)`` down to ``r`` bits, then feed the ``N-1`` condensed
values to a function that is hard for ``(N-1)``-party NOF protocols. Both
stages default to field multiplication followed by truncation to the low
bits. The three-source instance is the leakage-resilient extractor, and
XORing it over all triples gives the extractor for adversarial sources.
"""

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np

from . import gf2k
from ._runtime import ContractError
from .reports import evaluate_formula
from .tables import FunctionTable, input_grid


def ffm_condense(x, y, r, n):
    """Low ``r`` bits of ``x * y`` in GF(2^n). Works on ints or integer arrays."""
    if not 1 <= r <= n:
        raise ContractError(f"need 1 <= r <= n, got r={r}, n={n}")
    if isinstance(x, (int, np.integer)) and isinstance(y, (int, np.integer)):
        return gf2k.truncate(gf2k.mul(int(x), int(y), n), r)
    return gf2k.mul_array(x, y, n) & ((1 << r) - 1)


def ffm_nof(inputs, m, r):
    """Low ``m`` bits of the GF(2^r) product of all inputs."""
    if not inputs:
        raise ContractError("need at least one input")
    if not 1 <= m <= r:
        raise ContractError(f"need 1 <= m <= r, got m={m}, r={r}")
    if all(isinstance(v, (int, np.integer)) for v in inputs):
        prod = reduce(lambda a, b: gf2k.mul(a, b, r), (int(v) for v in inputs))
        return gf2k.truncate(prod, m)
    prod = reduce(lambda a, b: gf2k.mul_array(a, b, r), inputs)
    return prod & ((1 << m) - 1)


@dataclass(frozen=True)
class CondenserContract:
    """Two-source condenser ``{0,1}^n x {0,1}^n -> {0,1}^r``.

    ``eval`` must accept ints or broadcastable integer arrays. ``profile``
    is declared metadata (k0, k1, eps1); nothing checks it at construction.
    """

    n: int
    r: int
    eval: object
    name: str = "custom"
    profile: dict = field(default_factory=dict)

    def __call__(self, x, y):
        return self.eval(x, y)

    def table(self):
        """Output on every pair as a ``(2^n, 2^n)`` array indexed ``[x, y]``."""
        v = np.arange(1 << self.n, dtype=np.int64)
        out = np.asarray(self.eval(v[:, None], v[None, :]), dtype=np.int64)
        return np.broadcast_to(out, (1 << self.n, 1 << self.n))

    def as_function(self):
        return FunctionTable(self.table().ravel(), 2, self.n, self.r)


def ffm_condenser(n, r, profile=None):
    return CondenserContract(n, r, lambda x, y: ffm_condense(x, y, r, n), "ffm", profile or {})


def identity_condenser(n):
    """Returns the first argument untouched (r = n)."""
    return CondenserContract(n, n, lambda x, y: x + 0 * y, "identity")


@dataclass(frozen=True)
class NofFunction:
    """Function of ``parties`` inputs of ``r`` bits each with ``m`` output bits."""

    parties: int
    r: int
    m: int
    eval: object
    name: str = "custom"

    def __call__(self, inputs):
        return self.eval(inputs)


def ffm_nof_function(parties, r, m):
    return NofFunction(parties, r, m, lambda xs: ffm_nof(list(xs), m, r), "ffm")


@dataclass(frozen=True)
class NmExtParams:
    N: int
    n: int
    r: int
    m: int
    condenser: CondenserContract = None

    def __post_init__(self):
        if self.N < 2:
            raise ContractError("need N >= 2 sources")
        if not 1 <= self.m <= self.r <= self.n:
            raise ContractError(f"need 1 <= m <= r <= n, got m={self.m}, r={self.r}, n={self.n}")
        if self.condenser is None:
            object.__setattr__(self, "condenser", ffm_condenser(self.n, self.r))
        if (self.condenser.n, self.condenser.r) != (self.n, self.r):
            raise ContractError("condenser shape does not match (n, r)")

    @property
    def nof_width(self):
        return self.r

    @property
    def mu2(self):
        """Leakage length the NOF stage must withstand: 2^N * m."""
        return (1 << self.N) * self.m

    def with_n_sources(self, N):
        return NmExtParams(N, self.n, self.r, self.m, self.condenser)

    def to_json(self):
        return {"N": self.N, "n": self.n, "r": self.r, "m": self.m, "condenser": self.condenser.name}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        N, n, r, m = (int(obj[key]) for key in ("N", "n", "r", "m"))
        kind = obj.get("condenser", "ffm")
        if kind == "ffm":
            cond = ffm_condenser(n, r)
        elif kind == "identity":
            cond = identity_condenser(n)
        else:
            raise ContractError(f"unknown condenser {kind!r}")
        return cls(N, n, r, m, cond)


def _check_inputs(params, xs, N):
    if len(xs) != N:
        raise ContractError(f"expected {N} inputs, got {len(xs)}")
    for x in xs:
        if isinstance(x, (int, np.integer)) and not 0 <= x < 1 << params.n:
            raise ContractError(f"input {x} does not fit in {params.n} bits")


def weak_nme(params, x):
    """NOF(2Cond(x_1, x_N), ..., 2Cond(x_{N-1}, x_N)) with FFM as the NOF stage."""
    _check_inputs(params, x, params.N)
    last = x[-1]
    ys = [params.condenser(xi, last) for xi in x[:-1]]
    return ffm_nof(ys, params.m, params.r)


def lre3(params, x1, x2, x3):
    """Three-source leakage-resilient extractor: the weak NME at N = 3."""
    if params.N != 3:
        raise ContractError("lre3 needs params with N = 3")
    return weak_nme(params, (x1, x2, x3))


def adversarial_extract(params, x):
    """XOR of lre3 over all triples a < b < c, in lexicographic order."""
    if len(x) < 3:
        raise ContractError("adversarial extractor needs N >= 3 sources")
    p3 = params.with_n_sources(3)
    out = 0
    for a, b, c in itertools.combinations(range(len(x)), 3):
        out = out ^ lre3(p3, x[a], x[b], x[c])
    return out


def nme_table(params):
    """FunctionTable of weak_nme over all 2^(nN) inputs."""
    return FunctionTable(np.asarray(weak_nme(params, input_grid(params.N, params.n)), dtype=np.int64),
                         params.N, params.n, params.m)


def adversarial_table(params, N):
    xs = input_grid(N, params.n)
    return FunctionTable(np.asarray(adversarial_extract(params, xs), dtype=np.int64), N, params.n, params.m)


@dataclass(frozen=True)
class ComposedExtractor:
    """nmExt assembled from an arbitrary condenser and (N-1)-party NOF function."""

    condenser: CondenserContract
    nof: NofFunction
    N: int
    m: int

    @property
    def n(self):
        return self.condenser.n

    def __call__(self, x):
        if len(x) != self.N:
            raise ContractError(f"expected {self.N} inputs")
        ys = [self.condenser(xi, x[-1]) for xi in x[:-1]]
        return self.nof(ys)

    def table(self):
        return FunctionTable(np.asarray(self(input_grid(self.N, self.n)), dtype=np.int64),
                             self.N, self.n, self.m)

    def claimed_profile(self, k1=None, eps2=None):
        """Entropy and error promised by the recipe for the declared condenser profile.

        k = k0 + 2r + 2 log(1/eps1) and eps = 2N eps1 + 2^(N(r-k1)) eps2.
        Missing inputs give ``None`` for the dependent field.
        """
        prof = dict(self.condenser.profile)
        r = self.condenser.r
        k1 = prof.get("k1", k1)
        eps1 = prof.get("eps1")
        eps2 = prof.get("eps2", eps2)
        k0 = prof.get("k0")
        out = {"k": None, "eps": None, "mu2": (1 << self.N) * self.m}
        if k0 is not None and eps1 is not None:
            out["k"] = k0 + 2 * r + 2 * math.log2(1 / Fraction(eps1))
        if eps1 is not None and k1 is not None and eps2 is not None:
            out["eps"] = recipe_error(self.N, eps1, r, k1, eps2)
        return out


def recipe_error(N, eps1, r, k1, eps2):
    bound, _ = evaluate_formula("recipe_error", {"N": N, "eps1": eps1, "r": r, "k1": k1, "eps2": eps2})
    return bound


def recipe_compose(condenser, nof_fn, N, m):
    """Evaluator for NOF(2Cond(x_1, x_N), ..., 2Cond(x_{N-1}, x_N))."""
    if N < 2:
        raise ContractError("need N >= 2")
    if nof_fn.parties != N - 1 or nof_fn.r != condenser.r or nof_fn.m != m:
        raise ContractError("NOF function shape does not match the condenser and N")
    if m > condenser.r:
        raise ContractError("output length exceeds condenser output")
    return ComposedExtractor(condenser, nof_fn, N, m)
