"""Arithmetic in the binary fields GF(2^t).

Elements are integers whose bit i is the coefficient of x^i. Each supported
width t (1..16, 32, 64) has exactly one reduction polynomial: the irreducible
polynomial of degree t with the smallest integer encoding. Those are found at
import time and never change.

>>> hex(mul(0x57, 0x83, 8))
'0xc1'
"""

from dataclasses import dataclass

import numpy as np

from ._runtime import ConfigurationError, ContractError, DomainError

SUPPORTED_WIDTHS = tuple(range(1, 17)) + (32, 64)


def clmul(a, b):
    """Carry-less (GF(2)[x]) product of two polynomials, no reduction."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def poly_mod(a, p):
    dp = p.bit_length()
    while a.bit_length() >= dp:
        a ^= p << (a.bit_length() - dp)
    return a


def _poly_gcd(a, b):
    while b:
        a, b = b, poly_mod(a, b)
    return a


def _mulmod(a, b, p):
    return poly_mod(clmul(a, b), p)


def is_irreducible(p):
    """Ben-Or test: p of degree t is irreducible iff gcd(x^(2^i) - x, p) = 1 for i <= t/2."""
    t = p.bit_length() - 1
    if t < 1:
        return False
    if t == 1:
        return True
    x = 0b10
    h = x
    for _ in range(t // 2):
        h = _mulmod(h, h, p)
        if _poly_gcd(p, h ^ x) != 1:
            return False
    return True


def is_irreducible_trial(p):
    """Exhaustive trial division by every polynomial of degree 1..t/2."""
    t = p.bit_length() - 1
    if t < 1:
        return False
    for d in range(2, 1 << (t // 2 + 1)):
        if poly_mod(p, d) == 0:
            return False
    return True


def _least_irreducible(t):
    for p in range(1 << t, 1 << (t + 1)):
        if is_irreducible(p):
            return p
    raise AssertionError(f"no irreducible polynomial of degree {t}")


@dataclass(frozen=True)
class FieldSpec:
    width: int
    reduction_poly: int

    def __post_init__(self):
        if self.reduction_poly.bit_length() != self.width + 1:
            raise ContractError("reduction polynomial must have degree == width")

    @property
    def order(self):
        return 1 << self.width

    def poly_str(self):
        terms = []
        for i in range(self.width, -1, -1):
            if (self.reduction_poly >> i) & 1:
                terms.append("1" if i == 0 else "x" if i == 1 else f"x^{i}")
        return " + ".join(terms)


def _build_table():
    table = {}
    for t in SUPPORTED_WIDTHS:
        p = _least_irreducible(t)
        if t <= 16:
            assert is_irreducible_trial(p), t
        table[t] = FieldSpec(t, p)
    return table


FIELDS = _build_table()


def field(width):
    try:
        return FIELDS[width]
    except KeyError:
        raise ConfigurationError(f"unsupported field width {width}") from None


@dataclass(frozen=True)
class FieldElem:
    value: int
    width: int

    def __post_init__(self):
        if not 0 <= self.value < (1 << self.width):
            raise ContractError(f"value {self.value:#x} does not fit in {self.width} bits")

    def __add__(self, other):
        return gf_add(self, other)

    __sub__ = __add__

    def __mul__(self, other):
        return gf_mul(self, other)

    def __int__(self):
        return self.value

    def inverse(self):
        return gf_inv(self)


def _same_width(a, b):
    if a.width != b.width:
        raise ContractError(f"width mismatch: {a.width} vs {b.width}")


def gf_add(a, b):
    _same_width(a, b)
    return FieldElem(a.value ^ b.value, a.width)


def mul(a, b, width):
    """Product of raw integers in GF(2^width): shift-and-xor with interleaved reduction."""
    p = field(width).reduction_poly
    top = 1 << width
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= p
    return r


def gf_mul(a, b):
    _same_width(a, b)
    return FieldElem(mul(a.value, b.value, a.width), a.width)


def power(a, e, width):
    r = 1
    while e:
        if e & 1:
            r = mul(r, a, width)
        a = mul(a, a, width)
        e >>= 1
    return r


def inv(a, width):
    if a == 0:
        raise DomainError("zero has no multiplicative inverse")
    # a^(2^t - 2) = a^-1 in GF(2^t)*
    return power(a, (1 << width) - 2, width)


def gf_inv(a):
    return FieldElem(inv(a.value, a.width), a.width)


def truncate(x, m):
    """First ``m`` bits of ``x``: the coefficients of x^0..x^(m-1), i.e. ``x mod 2^m``."""
    if isinstance(x, FieldElem):
        width, value = x.width, x.value
        if not 1 <= m <= width:
            raise ContractError(f"truncation length {m} outside 1..{width}")
        return value & ((1 << m) - 1)
    if m < 1:
        raise ContractError(f"truncation length {m} must be >= 1")
    return x & ((1 << m) - 1)


def mul_array(a, b, width):
    """Elementwise field product of two integer arrays (widths up to 16)."""
    if width > 16:
        raise ConfigurationError("vectorised multiply supports widths <= 16")
    p = field(width).reduction_poly
    top = 1 << width
    a = np.asarray(a, dtype=np.int64).copy()
    b = np.asarray(b, dtype=np.int64).copy()
    a, b = np.broadcast_arrays(a, b)
    a = a.copy()
    b = b.copy()
    r = np.zeros_like(a)
    for _ in range(width):
        r ^= np.where(b & 1, a, 0)
        b >>= 1
        a <<= 1
        a ^= np.where(a & top, p, 0)
    return r


def mul_table(width):
    """Full 2^t x 2^t multiplication table (t <= 10)."""
    if width > 10:
        raise ConfigurationError("multiplication table only for widths <= 10")
    v = np.arange(1 << width, dtype=np.int64)
    return mul_array(v[:, None], v[None, :], width)
