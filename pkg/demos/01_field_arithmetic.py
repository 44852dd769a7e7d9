"""
Arithmetic in GF(2^t)
=====================

Field elements are integers whose bit i is the coefficient of x^i. Each
width uses the least irreducible polynomial of that degree.
"""

import numpy as np

from exlab import gf2k
from exlab.gf2k import FieldElem

# the reduction polynomials for a few widths
for t in (2, 3, 4, 8, 16):
    f = gf2k.field(t)
    print(f"t={t:2d}  {f.reduction_poly:#x}  {f.poly_str()}")

# a classic product in GF(2^8)
a, b = FieldElem(0x57, 8), FieldElem(0x83, 8)
print("0x57 * 0x83 =", hex((a * b).value))

# addition is XOR, every element is its own negative
print("a + a =", (a + a).value)

# inverses exist for every nonzero element
inv = a.inverse()
print("a^-1 =", hex(inv.value), " check:", (a * inv).value)

# truncation keeps the low-order coefficients
print("low 4 bits of 0xC1:", hex(gf2k.truncate(a * b, 4)))

# the whole multiplication table of GF(2^4), vectorised
tab = gf2k.mul_table(4)
print(tab[:4, :8])
print("each nonzero row hits 1 exactly once:", all(np.count_nonzero(tab[r] == 1) == 1 for r in range(1, 16)))
