import itertools
import json
import random
from fractions import Fraction

import numpy as np
import pytest

from conftest import random_dist
from exlab import distkit, nofsim
from exlab._runtime import ContractError, ResourceError, set_budget
from exlab.nofsim import (CylinderIntersection, NofProtocol, Step, cs_chain_check, cube_bias, enumerate_protocols,
                          eval_protocol, leakage_distance, random_protocol, transcript_to_cylinder,
                          xor_lemma_check)
from exlab.tables import FunctionTable, pack

F = Fraction


def naive_leakage(f, P, srcs):
    """Dict-based |f(X) o Pi(X) - U_m o Pi(X)| with per-input transcript evaluation."""
    N, n, m = f.N, f.n, f.m
    cell = {}
    for xs in itertools.product(range(1 << n), repeat=N):
        w = F(1)
        for s, x in zip(srcs, xs):
            w *= s.prob(x)
        if w:
            key = (eval_protocol(P, xs), f(*xs))
            cell[key] = cell.get(key, 0) + w
    total = F(0)
    for pi in {k[0] for k in cell}:
        ppi = sum(v for k, v in cell.items() if k[0] == pi)
        for z in range(1 << m):
            total += abs(cell.get((pi, z), 0) - ppi / (1 << m))
    return total / 2


def naive_cube_bias(f, srcs):
    N, n = f.N, f.n
    total = F(0)
    for copies in itertools.product(range(1 << n), repeat=2 * N):
        w = F(1)
        for i in range(N):
            w *= srcs[i].prob(copies[i]) * srcs[i].prob(copies[N + i])
        if not w:
            continue
        sign = 1
        for b in range(1 << N):
            xs = [copies[i + N * ((b >> i) & 1)] for i in range(N)]
            sign *= 1 - 2 * f(*xs)
        total += w * sign
    return total


def bit0_of_x2():
    # party 0 writes bit 0 of x_2 (its view is x_2 alone at N=2)
    return NofProtocol(2, 1, [Step(0, None, np.array([0, 1]))])


def test_eval_protocol_examples():
    assert eval_protocol(NofProtocol(2, 2, []), (1, 2)) == 0
    P = bit0_of_x2()
    for x1, x2 in itertools.product(range(2), repeat=2):
        assert eval_protocol(P, (x1, x2)) == x2


def test_adaptive_hand_unrolled():
    # step 0: party 1 writes x1; step 1: if bit was 0 party 0 writes x2, else party 1 writes NOT x1
    s0 = Step(None, np.array([1]), np.array([[0, 1]]))
    s1 = Step(None, np.array([0, 1]), np.array([[0, 1], [1, 0]]))
    P = NofProtocol(2, 1, [s0, s1])
    for x1, x2 in itertools.product(range(2), repeat=2):
        b1 = x1
        b2 = x2 if b1 == 0 else 1 - x1
        want = (b1 << 1) | b2
        assert eval_protocol(P, (x1, x2)) == want
        assert P.transcripts()[pack((x1, x2), 1)] == want
    assert not P.non_adaptive


def test_protocol_validation():
    with pytest.raises(ContractError):
        NofProtocol(2, 1, [Step(2, None, np.array([0, 1]))])
    with pytest.raises(ContractError):
        NofProtocol(2, 1, [Step(0, None, np.array([0, 1, 1]))])
    with pytest.raises(ContractError):
        NofProtocol(2, 1, [Step(0, None, np.array([0, 2]))])
    with pytest.raises(ContractError):
        NofProtocol(2, 1, [Step(None, np.array([0, 0]), np.zeros((2, 2)))])


def test_transcripts_match_eval():
    for N, n in ((2, 1), (2, 2), (3, 1), (3, 2)):
        for seed in range(5):
            for na in (True, False):
                P = random_protocol(N, n, 3, na, seed)
                tr = P.transcripts()
                for xs in itertools.product(range(1 << n), repeat=N):
                    assert tr[pack(xs, n)] == eval_protocol(P, xs)


def test_non_adaptive_through_adaptive_path():
    for n in (1, 2):
        for seed in range(10):
            P = random_protocol(2, n, 3, True, seed)
            A = P.as_adaptive()
            assert not A.non_adaptive
            assert np.array_equal(P.transcripts(), A.transcripts())


def test_cylinder_examples():
    P = NofProtocol(2, 2, [])
    C = transcript_to_cylinder(P, 0)
    assert all(np.all(t == 1) for t in C.tables)
    C = transcript_to_cylinder(bit0_of_x2(), 1)
    assert list(C.tables[0]) == [0, 1] and list(C.tables[1]) == [1, 1]


def test_cylinder_exact_exhaustive():
    for N, n in ((2, 1), (2, 2), (3, 1), (3, 2)):
        for seed in range(6):
            for na in (True, False):
                P = random_protocol(N, n, 2, na, seed)
                tr = P.transcripts()
                for pi in range(1 << P.mu):
                    assert np.array_equal(transcript_to_cylinder(P, pi).indicator(), (tr == pi).astype(int))
    with pytest.raises(ContractError):
        transcript_to_cylinder(P, 1 << P.mu)


def test_leakage_examples():
    u = [distkit.uniform(1)] * 2
    first = FunctionTable.from_callable(lambda a, b: a, 2, 1, 1)
    assert leakage_distance(first, NofProtocol(2, 1, []), u) == 0
    leak = NofProtocol(2, 1, [Step(1, None, np.array([0, 1]))])  # party 1 sees x1
    assert leakage_distance(first, leak, u) == F(1, 2)
    zero = FunctionTable.from_callable(lambda a, b: 0 * a, 2, 1, 1)
    r = random.Random(4)
    for seed in range(5):
        srcs = [random_dist(r, 1), random_dist(r, 1)]
        assert leakage_distance(zero, random_protocol(2, 1, 2, True, seed), srcs) == F(1, 2)


def test_leakage_rejects_non_product():
    f = FunctionTable.from_callable(lambda a, b: a, 2, 1, 1)
    diag = distkit.Dist([1, 0, 0, 1], (1, 1))
    with pytest.raises(ContractError):
        leakage_distance(f, NofProtocol(2, 1, []), diag)
    assert leakage_distance(f, NofProtocol(2, 1, []), distkit.uniform(2)) == 0


def test_leakage_matches_naive():
    r = random.Random(5)
    for _ in range(40):
        N, n, m = r.choice([(2, 1, 1), (2, 2, 2), (3, 1, 1), (3, 2, 1)])
        f = FunctionTable(np.array([r.randrange(1 << m) for _ in range(1 << (N * n))]), N, n, m)
        P = random_protocol(N, n, r.randint(0, 3), r.random() < 0.5, r.randrange(1000))
        srcs = [random_dist(r, n) for _ in range(N)]
        assert leakage_distance(f, P, srcs) == naive_leakage(f, P, srcs)


def test_leakage_mu0_is_plain_distance():
    r = random.Random(6)
    for _ in range(20):
        f = FunctionTable(np.array([r.randrange(4) for _ in range(16)]), 2, 2, 2)
        srcs = [random_dist(r, 2), random_dist(r, 2)]
        d = distkit.pushforward(distkit.product(srcs), f.table, 2)
        assert leakage_distance(f, NofProtocol(2, 2, []), srcs) == distkit.statistical_distance(d, distkit.uniform(2))


def test_cube_bias_examples():
    u1 = [distkit.uniform(1)] * 2
    assert cube_bias(FunctionTable.from_callable(lambda a, b: 0 * a, 2, 2, 1), [distkit.uniform(2)] * 2) == 1
    assert cube_bias(FunctionTable.from_callable(lambda a, b: a ^ b, 2, 1, 1), u1) == 1
    for n in range(1, 7):
        assert cube_bias(nofsim.inner_product(n), [distkit.uniform(n)] * 2) == F(1, 1 << n)


def test_cube_bias_matches_naive():
    r = random.Random(7)
    for N, n in ((2, 1), (2, 2), (3, 1)):
        for _ in range(5):
            f = FunctionTable(np.array([r.randrange(2) for _ in range(1 << (N * n))]), N, n, 1)
            srcs = [random_dist(r, n) for _ in range(N)]
            assert cube_bias(f, srcs) == naive_cube_bias(f, srcs)


def test_cube_bias_copy_relabeling():
    """Swapping copy 0 and copy 1 of one party permutes the selectors and keeps the value."""
    r = random.Random(8)
    f = FunctionTable(np.array([r.randrange(2) for _ in range(64)]), 3, 2, 1)
    srcs = [random_dist(r, 2) for _ in range(3)]
    base = naive_cube_bias(f, srcs)
    N, n = 3, 2
    for party in range(N):
        total = F(0)
        for copies in itertools.product(range(4), repeat=6):
            w = F(1)
            for i in range(N):
                w *= srcs[i].prob(copies[i]) * srcs[i].prob(copies[N + i])
            if not w:
                continue
            sign = 1
            for b in range(1 << N):
                b2 = b ^ (1 << party)
                sign *= 1 - 2 * f(*[copies[i + N * ((b2 >> i) & 1)] for i in range(N)])
            total += w * sign
        assert total == base == cube_bias(f, srcs)


def test_cube_bias_budget():
    f = nofsim.inner_product(8)
    u = [distkit.uniform(8)] * 2
    with pytest.raises(ResourceError) as e:
        cube_bias(f, u)
    assert e.value.cost == nofsim.shadow_cost_of(f, u) == (1 << 32) << 2
    set_budget(1 << 10)
    try:
        with pytest.raises(ResourceError):
            cube_bias(nofsim.inner_product(3), [distkit.uniform(3)] * 2)
    finally:
        set_budget(None)


def test_cs_chain_examples():
    ip = nofsim.inner_product(2)
    u = [distkit.uniform(2)] * 2
    ones = CylinderIntersection(2, 2, (np.ones(4, dtype=int), np.ones(4, dtype=int)))
    rep = cs_chain_check(ip, ones, u)
    assert rep.lhs == F(1, 4) and rep.cube_bias == F(1, 4) and rep.holds
    zero = FunctionTable.from_callable(lambda a, b: 0 * a, 2, 2, 1)
    r = random.Random(9)
    for _ in range(10):
        C = CylinderIntersection(2, 2, tuple(np.array([r.randrange(2) for _ in range(4)]) for _ in range(2)))
        rep = cs_chain_check(zero, C, u)
        assert rep.lhs == F(int(C.indicator().sum()), 16) and rep.cube_bias == 1 and rep.holds


def test_xor_lemma_examples():
    u = [distkit.uniform(2)] * 2
    r = random.Random(10)
    for _ in range(10):
        f = FunctionTable(np.array([r.randrange(2) for _ in range(16)]), 2, 2, 1)
        rep = xor_lemma_check(f, NofProtocol(2, 2, []), u)
        bias = abs(F(int(f.table.sum()), 16) - F(1, 2))
        assert rep.lhs == bias and rep.rhs == 2 * bias and rep.holds
    # f equal to the single leaked bit
    P = random_protocol(2, 2, 1, True, seed=3)
    f = FunctionTable(P.transcripts(), 2, 2, 1)
    rep = xor_lemma_check(f, P, u)
    assert rep.lhs == F(1, 2) and rep.alpha == F(1, 2) and rep.rhs == 2 and rep.holds


def test_enumerate_counts():
    assert len(list(enumerate_protocols(2, 1, 1))) == 8
    assert len(list(enumerate_protocols(2, 2, 0))) == 1
    assert len(list(enumerate_protocols(2, 2, 1))) == 32
    assert nofsim.protocol_count(2, 1, 2, non_adaptive=False) == 8 * (4 * 16)
    assert len(list(enumerate_protocols(2, 1, 2, non_adaptive=False))) == 512


def test_enumerate_distinct():
    seen = {json.dumps(P.to_json(), sort_keys=True) for P in enumerate_protocols(2, 1, 2)}
    assert len(seen) == 64
    tables = {tuple(P.transcripts()) + (P.steps[0].party, P.steps[1].party) for P in enumerate_protocols(2, 1, 2)}
    assert len(tables) == 64


def test_enumerate_budget():
    with pytest.raises(ResourceError) as e:
        list(enumerate_protocols(3, 2, 2, budget=1000))
    assert e.value.cost == nofsim.protocol_count(3, 2, 2)


def test_random_protocol_determinism():
    a, b = random_protocol(2, 2, 2, True, 7), random_protocol(2, 2, 2, True, 7)
    assert a == b
    assert random_protocol(3, 2, 0, True, 1).mu == 0
    assert random_protocol(2, 2, 2, True, 1) != random_protocol(2, 2, 2, True, 2)


def test_protocol_json_round_trip():
    for na in (True, False):
        P = random_protocol(3, 1, 3, na, 11)
        back = NofProtocol.from_json(json.dumps(P.to_json()))
        assert back == P


def test_missing_entropy_examples():
    ip = nofsim.inner_product(2)
    rep = nofsim.missing_entropy_check(ip, 2, 2, 1, 2)
    assert rep.holds and rep.mode == "exhaustive"
    assert rep.details["source_tuples"] == 36 and rep.details["protocols_tested"] == 1
    assert rep.recheck()
    # k = n: the bound is eps_hat itself
    rep = nofsim.missing_entropy_check(ip, 2, 2, 2, 2)
    assert rep.holds and rep.bound == rep.details["eps_hat"]
    with pytest.raises(ContractError):
        nofsim.missing_entropy_check(ip, 2, 2, 1, 1)
