"""Regenerate the frozen test fixtures from independent oracles.

Each fixture value is computed twice: once through the library and once
through a separate, deliberately naive route (coefficient-list polynomial
arithmetic, direct enumeration with ``Fraction``, or sampling). A
disagreement is a hard failure. Output files carry provenance metadata but
no timestamps, so regeneration is byte-for-byte reproducible.
"""

import itertools
import json
import os
import tempfile
from fractions import Fraction

from . import __version__, distkit, extract, gf2k, nofsim, verify
from .tables import FunctionTable


class OracleMismatch(AssertionError):
    pass


def _agree(name, a, b):
    if a != b:
        raise OracleMismatch(f"{name}: library gives {a!r}, oracle gives {b!r}")
    return a


# coefficient-list polynomial arithmetic, sharing nothing with gf2k
def _coeffs(v):
    return [(v >> i) & 1 for i in range(max(1, v.bit_length()))]


def schoolbook_mul(a, b, poly):
    A, B = _coeffs(a), _coeffs(b)
    C = [0] * (len(A) + len(B) - 1)
    for i, x in enumerate(A):
        for j, y in enumerate(B):
            C[i + j] ^= x & y
    P = _coeffs(poly)
    deg = len(P) - 1
    for i in range(len(C) - 1, deg - 1, -1):
        if C[i]:
            for j, c in enumerate(P):
                C[i - deg + j] ^= c
    return sum(c << i for i, c in enumerate(C[:deg]))


def _naive_condenser_error(n, r, ell):
    """Uniform inputs, Fraction arithmetic, closeness by the excess formula."""
    poly = gf2k.field(n).reduction_poly
    hist = [Fraction(0)] * (1 << r)
    for x in range(1 << n):
        for y in range(1 << n):
            hist[schoolbook_mul(x, y, poly) % (1 << r)] += Fraction(1, 1 << (2 * n))
    cap = Fraction(1, 1 << ell)
    return sum(max(p - cap, 0) for p in hist)


def _naive_nme_distance(fn, N, n, m):
    """Direct enumeration over all 2N shadow inputs with Fraction probabilities."""
    joint = {}
    w = Fraction(1, 1 << (2 * N * n))
    for xs in itertools.product(range(1 << n), repeat=2 * N):
        zs = tuple(fn([xs[i + N * ((b >> i) & 1)] for i in range(N)]) for b in range(1 << N))
        joint[zs] = joint.get(zs, 0) + w
    tails = {}
    for zs, p in joint.items():
        tails[zs[1:]] = tails.get(zs[1:], 0) + p
    total = Fraction(0)
    for tail, pt in tails.items():
        for z in range(1 << m):
            total += abs(joint.get((z,) + tail, 0) - pt / (1 << m))
    return total / 2


def build_fixtures():
    out = {}

    f8 = gf2k.field(8).reduction_poly
    out["field"] = {
        "oracle": "coefficient-list schoolbook multiply then long division",
        "mul_57_83_t8": format(_agree("gf_mul 0x57*0x83", gf2k.mul(0x57, 0x83, 8),
                                      schoolbook_mul(0x57, 0x83, f8)), "x"),
        "mul_2_2_t2": format(_agree("gf_mul x*x t=2", gf2k.mul(2, 2, 2),
                                    schoolbook_mul(2, 2, gf2k.field(2).reduction_poly)), "b"),
        "polys": {str(t): format(f.reduction_poly, "x") for t, f in gf2k.FIELDS.items()},
    }

    p = extract.NmExtParams(3, 8, 4, 2)
    x = (0x57, 0x83, 0x01)
    c = [schoolbook_mul(xi, x[2], f8) & 0xF for xi in x[:2]]
    naive = schoolbook_mul(c[0], c[1], gf2k.field(4).reduction_poly) & 0x3
    out["weak_nme"] = {
        "oracle": "schoolbook field multiply per stage",
        "params": p.to_json(), "inputs": [format(v, "x") for v in x],
        "condensed": [format(v, "x") for v in c],
        "output": _agree("weak_nme fixture", extract.weak_nme(p, x), naive),
    }

    x1 = FunctionTable.from_callable(lambda a, b: a, 2, 1, 1)
    fam1 = verify.SourceFamily.uniform(2, 1)
    ffm = extract.NmExtParams(2, 4, 2, 1)
    exact = verify.weak_nme_distance(ffm, verify.SourceFamily.uniform(2, 4))
    naive_ffm = _naive_nme_distance(lambda xs: extract.weak_nme(ffm, xs), 2, 4, 1)
    _agree("ffm weak NME distance", exact, naive_ffm)
    mc = verify.weak_nme_distance_mc(ffm, verify.SourceFamily.uniform(2, 4), samples=10**6, seed=1)
    if abs(mc.estimate - float(exact)) > 3 * mc.stderr:
        raise OracleMismatch(f"Monte-Carlo estimate {mc.estimate} +- {mc.stderr} vs exact {exact}")
    out["nme_distance"] = {
        "oracle": "Fraction enumeration over all shadow inputs; Monte-Carlo split estimator (seed 1)",
        "first_input_n1": str(_agree("x1 distance", verify.weak_nme_distance(x1, fam1),
                                     _naive_nme_distance(lambda xs: xs[0], 2, 1, 1))),
        "ffm_N2_n4_r2_m1": str(exact),
        "ffm_N2_n4_r2_m1_mc": {"estimate": round(mc.estimate, 12), "stderr": round(mc.stderr, 12),
                               "samples": mc.samples},
        "ffm_N3_n4_r2_m1": str(verify.weak_nme_distance(extract.NmExtParams(3, 4, 2, 1),
                                                        verify.SourceFamily.uniform(3, 4))),
    }

    cond = extract.ffm_condenser(4, 2)
    u4 = distkit.uniform(4)
    out["condenser"] = {
        "oracle": "Fraction histogram over all 256 input pairs",
        "error_uniform_ell2": str(_agree("condenser error", verify.condenser_error(cond, u4, u4, 2),
                                         _naive_condenser_error(4, 2, 2))),
        "profile_k2_ell1": str(verify.condenser_profile(cond, 2, 1).eps),
        "profile_k2_ell2": str(verify.condenser_profile(cond, 2, 2).eps),
        "profile_k1_ell1": str(verify.condenser_profile(cond, 1, 1).eps),
    }

    prots = {str(s): nofsim.random_protocol(2, 2, 2, True, seed=s).to_json() for s in (1, 2)}
    out["protocols"] = {"oracle": "SplitMix64 reference sequence", "N2_n2_mu2": prots,
                        "splitmix64_seed0_first3": [format(v, "016x") for v in _splitmix_ref(0, 3)]}
    return out


def _splitmix_ref(seed, count):
    from ._runtime import SplitMix64
    g = SplitMix64(seed)
    return [g.next_u64() for _ in range(count)]


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_atomic(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fixtures_regen(path):
    """Write every fixture file under ``path``; returns the list of files written."""
    written = []
    for name, body in build_fixtures().items():
        body = dict(body, provenance={"generator": "exlab.fixtures", "version": __version__})
        fn = os.path.join(path, f"{name}.json")
        write_atomic(fn, _dump(body))
        written.append(fn)
    return written


def fixtures_check(path):
    """Compare committed fixtures with a fresh regeneration; returns mismatching names."""
    bad = []
    for name, body in build_fixtures().items():
        body = dict(body, provenance={"generator": "exlab.fixtures", "version": __version__})
        fn = os.path.join(path, f"{name}.json")
        try:
            with open(fn) as fh:
                current = fh.read()
        except FileNotFoundError:
            bad.append(name)
            continue
        if current != _dump(body):
            bad.append(name)
    return bad
