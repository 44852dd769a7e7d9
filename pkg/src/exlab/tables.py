"""Truth tables of functions ``({0,1}^n)^N -> {0,1}^m``.

The input tuple ``(x_1, ..., x_N)`` is packed into one index with ``x_1`` in
the most significant block, matching the joint-distribution convention in
``distkit``.
"""

from dataclasses import dataclass

import numpy as np

from ._runtime import ContractError


def input_grid(N, n):
    """Arrays ``x_1..x_N`` over every packed index ``0 .. 2^(nN) - 1``."""
    idx = np.arange(1 << (n * N), dtype=np.int64)
    mask = (1 << n) - 1
    return [(idx >> (n * (N - 1 - i))) & mask for i in range(N)]


def pack(xs, n):
    idx = 0
    for x in xs:
        idx = (idx << n) | x
    return idx


def minus_index(xs, i, n):
    """Packed index of ``x_{-i}``: every input except ``x_i``, order preserved."""
    return pack([x for j, x in enumerate(xs) if j != i], n)


def popcount_parity(a):
    a = np.asarray(a, dtype=np.int64).copy()
    p = np.zeros_like(a)
    while np.any(a):
        p ^= a & 1
        a >>= 1
    return p


@dataclass(frozen=True, eq=False)
class FunctionTable:
    """Total function on N inputs of n bits with m output bits."""

    table: np.ndarray
    N: int
    n: int
    m: int

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.int64)
        if t.shape != (1 << (self.n * self.N),):
            raise ContractError(f"table must have 2^{self.n * self.N} entries")
        if t.size and (t.min() < 0 or t.max() >= 1 << self.m):
            raise ContractError(f"table values must fit in {self.m} bits")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @classmethod
    def from_callable(cls, fn, N, n, m):
        """Build from a function that accepts N integer arrays and returns an array."""
        out = np.asarray(fn(*input_grid(N, n)), dtype=np.int64)
        out = np.broadcast_to(out, (1 << (n * N),)).copy()
        return cls(out, N, n, m)

    def __call__(self, *xs):
        if len(xs) != self.N:
            raise ContractError(f"expected {self.N} inputs")
        return int(self.table[pack(xs, self.n)])

    def bit(self, i):
        """Output bit ``i`` (bit i of the integer value) as a Boolean table."""
        return FunctionTable((self.table >> i) & 1, self.N, self.n, 1)

    def __eq__(self, other):
        return (isinstance(other, FunctionTable) and (self.N, self.n, self.m) == (other.N, other.n, other.m)
                and bool(np.array_equal(self.table, other.table)))

    __hash__ = None
