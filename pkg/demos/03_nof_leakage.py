"""
Number-on-forehead leakage and the cube bias
============================================

Party p sees every input except x_p. A protocol writes one bit per step and
we ask how much the transcript reveals about a function's output.
"""

from exlab import distkit, nofsim

n = 2
ip = nofsim.inner_product(n)
uniform = [distkit.uniform(n)] * 2

# the cube bias of inner product is exactly 2^-n
for k in range(1, 6):
    print(f"cube bias of IP on {k} bits:", nofsim.cube_bias(nofsim.inner_product(k), [distkit.uniform(k)] * 2))

# a seeded random protocol with 2 bits of communication
P = nofsim.random_protocol(2, n, 2, non_adaptive=True, seed=3)
print(P, "speakers:", [s.party for s in P.steps])
print("leakage distance of IP:", nofsim.leakage_distance(ip, P, uniform))

# every transcript is a cylinder intersection
for pi in range(4):
    C = nofsim.transcript_to_cylinder(P, pi)
    print(f"transcript {pi:02b}: {int(C.indicator().sum())} inputs")

# the worst protocol over all 32 one-bit protocols
worst = max(nofsim.leakage_distance(ip, Q, uniform) for Q in nofsim.enumerate_protocols(2, n, 1))
print("worst one-bit leakage:", worst)

# Cauchy-Schwarz chain and the XOR lemma as exact inequalities
print(nofsim.cs_chain_check(ip, nofsim.transcript_to_cylinder(P, 0), uniform))
print(nofsim.xor_lemma_check(ip, P, uniform))

# hardness survives a little missing min-entropy
rep = nofsim.missing_entropy_check(ip, 2, n, 1, 2)
print("missing-entropy check:", rep.measured, "<=", rep.bound, rep.holds)
