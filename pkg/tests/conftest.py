import random
from fractions import Fraction

import pytest

from exlab import distkit


def random_dist(rng, bits, max_weight=20, sparsity=0.3):
    """Random rational distribution; a fraction of entries forced to zero."""
    w = [0 if rng.random() < sparsity else rng.randint(1, max_weight) for _ in range(1 << bits)]
    if not any(w):
        w[rng.randrange(len(w))] = 1
    return distkit.Dist(w, (bits,))


def dist_from_dict(probs, bits):
    return distkit.Dist.from_probs([probs.get(i, Fraction(0)) for i in range(1 << bits)], (bits,))


@pytest.fixture
def rng():
    return random.Random(12345)


# acceptance lines, printed together at the end of the run
ACCEPTANCE_LINES = []


def record_acceptance(number, title, ok, detail, elapsed, limit=None):
    within = limit is None or elapsed < limit
    status = "PASS" if ok and within else "FAIL"
    budget = f" < {limit:g} s" if limit is not None else ""
    line = f"AC{number:<2} {status}  {title}: {detail} [{elapsed:.1f} s{budget}]"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return ok and within


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
