"""
Adversarial sources
===================

XOR the three-source extractor over every triple. If only three sources are
good and the rest are constants, the output is the three-source extractor
plus three functions that each miss one good input.
"""

from exlab import extract, verify
from exlab.extract import NmExtParams

params = NmExtParams(3, 4, 2, 1)

print("Ext(1, 2, 3, 4, 5) =", extract.adversarial_extract(params, (1, 2, 3, 4, 5)))

# sources 1 and 3 are bad and fixed to constants
rep = verify.adversarial_reduction_check(params, 5, (0, 2, 4), {1: 7, 3: 12})
print("structural mismatches:", rep.details["structural_mismatches"])
print("output distance:", rep.measured, "<= leak-conditioned distance:", rep.bound, rep.holds)

# condensers: worst case over all pairs of flat 2-bit sources
cond = extract.ffm_condenser(4, 2)
prof = verify.condenser_profile(cond, 2, 1)
print("condenser error at k=2, ell=1:", prof.eps, "over", prof.pairs, "pairs; worst supports", prof.worst)
strong = verify.strongness_check(cond, 1, 1, verify.condenser_profile(cond, 1, 1).eps, 4)
print("strongness:", strong.measured, "<=", strong.bound, strong.holds)
