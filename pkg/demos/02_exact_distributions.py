"""
Exact distributions and min-entropy
===================================

Every probability is a rational number, so distances and entropies come out
exact. Joint distributions put component 1 in the most significant bits.
"""

from fractions import Fraction

import numpy as np

from exlab import distkit

# a flat source: uniform on a support of size 2^k has min-entropy k
X = distkit.flat_source(3, [0, 5])
print("H_inf(X) =", distkit.min_entropy(X).bits)

# statistical distance from uniform
U = distkit.uniform(3)
print("|X - U| =", distkit.statistical_distance(X, U))

# how far X is from any source with 2 bits of min-entropy;
# two independent routes are computed and must agree
print("closeness to 2 bits:", distkit.closeness_to_min_entropy(X, 2))

# a lopsided source
p = distkit.Dist.from_probs([Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 8)], (2,))
print("H_inf(p) =", distkit.min_entropy(p).bits, " closeness to 2 bits:", distkit.closeness_to_min_entropy(p, 2))

# joints: (X, Y) where Y is the parity of X
v = np.arange(8)
parity = (v ^ (v >> 1) ^ (v >> 2)) & 1
joint = distkit.concat_pushforward(distkit.uniform(3), [v, parity], [3, 1])
print("marginal of the parity:", distkit.marginal(joint, [1]).probs)
rest, pr = distkit.condition(joint, 1, 0)
print("X given even parity:", rest.support(), "with Pr =", pr)

# chain rule: conditioning on 1 bit costs at most 1 + log(1/eps) bits, except with probability eps
print(distkit.verify_chain_rule(joint, Fraction(1, 4)))

# dependency reversal: X == g(f(X), A) with A independent of X
rev = distkit.dependency_reversal(distkit.uniform(3), parity, 1)
print("reconstruction exact:", distkit.reconstruct(distkit.uniform(3), parity, rev) == distkit.uniform(3))
