"""
Weak non-malleable extractors and the leakage reduction
=======================================================

The extractor condenses each (x_i, x_N) pair with a field product and feeds
the results to the truncated product of N-1 inputs. Its weak-NME distance
is computed exactly over independent shadow copies of the sources.
"""

from exlab import nofsim, verify
from exlab.extract import NmExtParams, weak_nme

params = NmExtParams(N=3, n=8, r=4, m=2)
print("nmExt(0x57, 0x83, 0x01) =", weak_nme(params, (0x57, 0x83, 0x01)))

# exact weak-NME distance at a brute-forceable size
small = NmExtParams(2, 4, 2, 1)
fam = verify.SourceFamily.uniform(2, 4)
eps = verify.weak_nme_distance(small, fam)
print("exact distance:", eps, "=", float(eps))

# an independent sampling estimate
mc = verify.weak_nme_distance_mc(small, fam, samples=200_000, seed=1)
print(f"Monte-Carlo: {mc.estimate:.5f} +- {mc.stderr:.5f}")

# flat sources with less entropy
flat = verify.SourceFamily.flat(4, [[0, 1, 2, 3, 4, 5, 6, 7], [1, 2, 4, 8, 3, 6, 12, 11]])
print("distance on 3-bit flat sources:", verify.weak_nme_distance(small, flat))

# leakage resilience follows: every protocol leaks at most 2^(m+mu) (2 eps)^(1/2^N)
p3 = NmExtParams(3, 4, 2, 1)
prots = [nofsim.random_protocol(3, 4, 2, True, seed=s) for s in range(50)]
rep = verify.reduction_bound_check(p3, verify.SourceFamily.uniform(3, 4), prots)
print("worst leakage:", rep.measured, " bound:", round(rep.bound_value, 3), " holds:", rep.holds)
