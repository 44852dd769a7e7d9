"""Acceptance criteria 1-12, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also repeated in the terminal summary of any pytest run.
"""

import itertools
import json
import math
import random
import time
from fractions import Fraction

import numpy as np

from conftest import random_dist, record_acceptance
from exlab import distkit, extract, gf2k, nofsim, verify
from exlab.cli import ExperimentConfig, run, strip_timing
from exlab.distkit import Dist, statistical_distance
from exlab.extract import NmExtParams
from exlab.fixtures import schoolbook_mul
from exlab.nofsim import CylinderIntersection
from exlab.tables import FunctionTable

F = Fraction


def _random_triples(rng, t, count):
    return [rng.integers(0, 1 << t, size=count, dtype=np.int64) for _ in range(3)]


def _power_array(a, e, t):
    r = np.ones_like(a)
    while e:
        if e & 1:
            r = gf2k.mul_array(r, a, t)
        a = gf2k.mul_array(a, a, t)
        e >>= 1
    return r


def test_ac1_field_correctness():
    t0 = time.perf_counter()
    ok = True
    for t in range(1, 5):
        tab = gf2k.mul_table(t)
        v = np.arange(1 << t)
        ok &= bool(np.array_equal(tab, tab.T))
        ok &= bool(np.array_equal(tab[tab[:, :, None], v[None, None, :]], tab[v[:, None, None], tab[None, :, :]]))
        ok &= bool(np.array_equal(tab[v[:, None, None], v[None, :, None] ^ v[None, None, :]],
                                  tab[:, :, None] ^ tab[:, None, :]))
        ok &= all(list(tab[a]).count(1) == 1 for a in range(1, 1 << t))
    rng = np.random.default_rng(2024)
    for t in (8, 16):
        a, b, c = _random_triples(rng, t, 10**6)
        mul = lambda x, y: gf2k.mul_array(x, y, t)  # noqa: E731
        ok &= bool(np.array_equal(mul(a, b), mul(b, a)))
        ok &= bool(np.array_equal(mul(mul(a, b), c), mul(a, mul(b, c))))
        ok &= bool(np.array_equal(mul(a, b ^ c), mul(a, b) ^ mul(a, c)))
        # inverse table over the whole field, then unique-inverse check on the samples
        field = np.arange(1, 1 << t, dtype=np.int64)
        inv = np.zeros(1 << t, dtype=np.int64)
        inv[1:] = _power_array(field, (1 << t) - 2, t)
        ok &= bool(np.all(mul(field, inv[1:]) == 1)) and len(set(inv[1:].tolist())) == (1 << t) - 1
        nz = a[a != 0]
        ok &= bool(np.all(mul(nz, inv[nz]) == 1))
    pairs = 0
    for t in range(1, 7):
        p = gf2k.field(t).reduction_poly
        tab = gf2k.mul_table(t)
        for x, y in itertools.product(range(1 << t), repeat=2):
            ok &= int(tab[x, y]) == schoolbook_mul(x, y, p) == gf2k.mul(x, y, t)
            pairs += 1
    elapsed = time.perf_counter() - t0
    assert record_acceptance(1, "field correctness", ok,
                             f"axioms exhaustive t<=4, 10^6 random triples t=8,16; {pairs} oracle pairs t<=6",
                             elapsed, 30)


def test_ac2_statistical_toolkit():
    t0 = time.perf_counter()
    rng = random.Random(2)
    ok = True
    for _ in range(1000):
        bits = rng.randint(1, 10)
        p, q, z = (random_dist(rng, bits) for _ in range(3))
        ok &= statistical_distance(p, q) <= statistical_distance(p, z) + statistical_distance(z, q)
    for _ in range(1000):
        bits = rng.randint(1, 10)
        p, q = random_dist(rng, bits), random_dist(rng, bits)
        out = rng.randint(1, bits)
        f = np.array([rng.randrange(1 << out) for _ in range(1 << bits)])
        ok &= statistical_distance(distkit.pushforward(p, f, out), distkit.pushforward(q, f, out)) <= \
            statistical_distance(p, q)
    for _ in range(1000):
        bz = rng.randint(1, 5)
        bx = rng.randint(1, 10 - bz)
        j1 = random_dist(rng, bz + bx)
        j1 = Dist(j1.weights, (bz, bx))
        zw = distkit.marginal(j1, [0]).weights
        # second joint with the same Z marginal and fresh conditionals
        rows = []
        for zv in range(1 << bz):
            c = random_dist(rng, bx, sparsity=0)
            rows.extend(F(int(w), c.total) * int(zw[zv]) for w in c.weights)
        den = math.lcm(*(v.denominator for v in rows))
        j2 = Dist([int(v * den) for v in rows], (bz, bx))
        lhs = statistical_distance(j1, j2)
        rhs = F(0)
        for zv in range(1 << bz):
            if zw[zv]:
                c1, pz = distkit.condition(j1, 0, zv)
                c2, _ = distkit.condition(j2, 0, zv)
                rhs += pz * statistical_distance(c1, c2)
        ok &= lhs == rhs
    agree = 0
    for _ in range(1000):
        bits = rng.randint(1, 10)
        p = random_dist(rng, bits)
        k = rng.randint(0, bits)
        agree += distkit.closeness_excess(p, k) == distkit.closeness_by_sets(p, k)
    ok &= agree == 1000
    elapsed = time.perf_counter() - t0
    assert record_acceptance(2, "statistical toolkit exactness", ok,
                             f"triangle/data-processing/averaging 1000 each; closeness routes agree {agree}/1000",
                             elapsed, 60)


def test_ac3_dependency_reversal():
    t0 = time.perf_counter()
    rng = random.Random(3)
    good = 0
    for _ in range(100):
        bits = rng.randint(1, 8)
        out = rng.randint(1, 4)
        p = random_dist(rng, bits)
        f = np.array([rng.randrange(1 << out) for _ in range(1 << bits)])
        good += distkit.reconstruct(p, f, distkit.dependency_reversal(p, f, out)) == p
    elapsed = time.perf_counter() - t0
    assert record_acceptance(3, "dependency reversal", good == 100,
                             f"g(f(X), A) == X exactly on {good}/100 instances", elapsed, 10)


def test_ac4_chain_rule():
    t0 = time.perf_counter()
    rng = random.Random(4)
    held = 0
    worst = F(0)
    nonzero = 0
    for _ in range(1000):
        bx, by = rng.randint(1, 5), rng.randint(1, 5)
        j = random_dist(rng, bx + by, sparsity=rng.choice([0.3, 0.8, 0.95]))
        j = Dist(j.weights, (bx, by))
        for eps in (F(1, 2), F(1, 4), F(1, 16)):
            rep = distkit.verify_chain_rule(j, eps)
            held += rep.holds
            worst = max(worst, rep.failure_mass / eps)
            nonzero += rep.failure_mass > 0
    elapsed = time.perf_counter() - t0
    assert record_acceptance(4, "min-entropy chain rule", held == 3000,
                             f"{held}/3000 (joint, eps) pairs hold; {nonzero} with nonzero failure mass, "
                             f"max failure/eps = {float(worst):.3g}",
                             elapsed, 60)


def test_ac5_cube_bias():
    t0 = time.perf_counter()
    ok = all(nofsim.cube_bias(nofsim.inner_product(n), [distkit.uniform(n)] * 2) == F(1, 1 << n)
             for n in range(1, 7))
    rng = random.Random(5)
    held = 0
    for i in range(500):
        N, n = rng.choice([2, 3]), rng.choice([1, 2])
        f = FunctionTable(np.array([rng.randrange(2) for _ in range(1 << (N * n))]), N, n, 1)
        view = 1 << (n * (N - 1))
        if i % 2:
            C = CylinderIntersection(N, n, tuple(np.array([rng.randrange(2) for _ in range(view)])
                                                 for _ in range(N)))
        else:
            P = nofsim.random_protocol(N, n, rng.randint(0, 3), rng.random() < 0.5, seed=i)
            C = nofsim.transcript_to_cylinder(P, rng.randrange(1 << P.mu))
        X = [random_dist(rng, n) for _ in range(N)]
        held += nofsim.cs_chain_check(f, C, X).holds
    elapsed = time.perf_counter() - t0
    assert record_acceptance(5, "cube-bias oracle", ok and held == 500,
                             f"IP bias == 2^-n for n=1..6: {ok}; Cauchy-Schwarz chain {held}/500",
                             elapsed, 300)


def test_ac6_xor_lemma():
    t0 = time.perf_counter()
    rng = random.Random(6)
    held = 0
    for i in range(200):
        m, mu = rng.randint(1, 2), rng.randint(0, 2)
        f = FunctionTable(np.array([rng.randrange(1 << m) for _ in range(16)]), 2, 2, m)
        P = nofsim.random_protocol(2, 2, mu, rng.random() < 0.5, seed=1000 + i)
        X = [random_dist(rng, 2), random_dist(rng, 2)]
        held += nofsim.xor_lemma_check(f, P, X).holds
    elapsed = time.perf_counter() - t0
    assert record_acceptance(6, "XOR-lemma inequality", held == 200, f"{held}/200 exact", elapsed, 300)


def test_ac7_missing_entropy():
    t0 = time.perf_counter()
    rep = nofsim.missing_entropy_check(nofsim.inner_product(2), 2, 2, 1, 2)
    d = rep.details
    ok = rep.holds and rep.mode == "exhaustive" and d["source_tuples"] == 36
    elapsed = time.perf_counter() - t0
    assert record_acceptance(
        7, "missing-entropy lemma", ok,
        f"eps_hat={d['eps_hat']} over {d['protocols_max']} length-2 protocols; "
        f"max leakage {rep.measured} <= {rep.bound} over {d['source_tuples']} flat pairs", elapsed, 600)


def test_ac8_weak_nme_oracle():
    t0 = time.perf_counter()
    p = NmExtParams(2, 4, 2, 1)
    fam = verify.SourceFamily.uniform(2, 4)
    exact = verify.weak_nme_distance(p, fam)
    mc = verify.weak_nme_distance_mc(p, fam, samples=10**6, seed=8)
    z = (mc.estimate - float(exact)) / mc.stderr
    ok = abs(z) <= 3
    rng = random.Random(8)
    for m in (1, 2, 3):
        const = FunctionTable.from_callable(lambda a, b: 0 * a + 1, 2, 3, m)
        ok &= verify.weak_nme_distance(const, [random_dist(rng, 3), random_dist(rng, 3)]) == 1 - F(1, 1 << m)
    elapsed = time.perf_counter() - t0
    assert record_acceptance(8, "weak-NME oracle self-consistency", ok,
                             f"exact {exact} = {float(exact):.6f}, MC {mc.estimate:.6f} +- {mc.stderr:.6f} "
                             f"(z = {z:+.2f}); constant = 1 - 2^-m", elapsed, 300)


def test_ac9_reduction_theorem():
    t0 = time.perf_counter()
    violations, checked = 0, 0
    ok = True
    for n, r in ((1, 1), (2, 1), (2, 2)):
        p = NmExtParams(2, n, r, 1)
        for mu in (0, 1):
            prots = list(nofsim.enumerate_protocols(2, n, mu))
            rep = verify.reduction_bound_check(p, verify.SourceFamily.uniform(2, n), prots)
            ok &= rep.holds and rep.recheck()
            violations += rep.details["violations"]
            checked += len(prots)
    p3 = NmExtParams(3, 4, 2, 1)
    prots = [nofsim.random_protocol(3, 4, 2, True, seed=s) for s in range(200)]
    rep = verify.reduction_bound_check(p3, verify.SourceFamily.uniform(3, 4), prots)
    ok &= rep.holds and rep.recheck()
    violations += rep.details["violations"]
    elapsed = time.perf_counter() - t0
    assert record_acceptance(
        9, "reduction theorem end-to-end", ok and violations == 0,
        f"(a) {checked} exhaustive protocols at N=2, n<=2, mu<=1; (b) 200 seeded at N=3, n=4: "
        f"max leakage {rep.measured}, eps_hat {rep.details['eps_hat']}; violations {violations}", elapsed, 1800)


def test_ac10_adversarial():
    t0 = time.perf_counter()
    rng = random.Random(10)
    ok = True
    cases = 0
    for m in (1, 2):
        p = NmExtParams(3, 4, 2, m)
        xs = [np.arange(4096) >> 8, (np.arange(4096) >> 4) & 15, np.arange(4096) & 15]
        ok &= bool(np.array_equal(extract.adversarial_extract(p, xs), extract.lre3(p, *xs)))
        ok &= verify.adversarial_reduction_check(p, 3, (0, 1, 2), {}).holds
        for N_total in (4, 5):
            for _ in range(4):
                good = tuple(sorted(rng.sample(range(N_total), 3)))
                bad = {i: rng.randrange(16) for i in range(N_total) if i not in good}
                rep = verify.adversarial_reduction_check(p, N_total, good, bad)
                ok &= rep.holds and rep.details["structural_mismatches"] == 0
                cases += 1
    elapsed = time.perf_counter() - t0
    assert record_acceptance(10, "adversarial extractor", ok,
                             f"N_total=3 equals lre3; {cases} structural+statistical cases at N_total in {{4,5}}, n=4",
                             elapsed, 600)


def test_ac11_condenser_strongness():
    t0 = time.perf_counter()
    cond = extract.ffm_condenser(4, 2)
    ok = True
    parts = []
    for ell in (1, 2):
        prof = verify.condenser_profile(cond, 2, ell)
        ok &= prof.mode == "exhaustive" and prof.pairs == 1820 ** 2
        parts.append(f"eps(k=2,ell={ell})={prof.eps}")
        for kp in (3, 4):
            rep = verify.strongness_check(cond, 2, ell, prof.eps, kp)
            ok &= rep.holds
    prof1 = verify.condenser_profile(cond, 1, 1)
    rep = verify.strongness_check(cond, 1, 1, prof1.eps, 4)
    ok &= rep.holds
    parts.append(f"k=1,k'=4 failure {rep.measured} <= {rep.bound}")
    elapsed = time.perf_counter() - t0
    assert record_acceptance(11, "condenser profile + strongness", ok,
                             f"1820^2 pairs; " + ", ".join(parts), elapsed, 1800)


def test_ac12_reproducibility():
    t0 = time.perf_counter()

    def once(threads):
        return json.dumps(strip_timing(run(ExperimentConfig("verify suite", {}, threads=threads))), sort_keys=True)
    a, b, c = once(1), once(1), once(8)
    ok = a == b == c and json.loads(a)["holds"]
    elapsed = time.perf_counter() - t0
    assert record_acceptance(12, "reproducibility", ok,
                             f"suite reports identical across 2 runs and threads 1 vs 8 ({len(a)} bytes)", elapsed)
