"""Shared plumbing: error types, evaluation budgets, worker threads, seeded PRNG."""

import os
from concurrent.futures import ThreadPoolExecutor

DEFAULT_BUDGET = 1 << 28
MASK64 = (1 << 64) - 1


class ContractError(ValueError):
    """A precondition of an operation was violated by the caller."""


class DomainError(ValueError):
    """The operation is undefined on the given input (zero inverse, null event, ...)."""


class ConfigurationError(ValueError):
    """Unsupported parameters, e.g. a field width missing from the table."""


class ResourceError(RuntimeError):
    """An exhaustive computation would exceed the evaluation budget."""

    def __init__(self, what, cost, budget):
        self.what = what
        self.cost = int(cost)
        self.budget = int(budget)
        super().__init__(f"{what}: estimated cost {self.cost} exceeds budget {self.budget}")


_state = {"budget": None, "threads": 1}


def get_budget():
    if _state["budget"] is not None:
        return _state["budget"]
    env = os.environ.get("EXLAB_BUDGET")
    if env:
        return int(env, 0)
    return DEFAULT_BUDGET


def set_budget(budget):
    """Override the evaluation cap; ``None`` restores env/default lookup."""
    if budget is not None and budget <= 0:
        raise ContractError("budget must be positive")
    _state["budget"] = budget


def check_budget(what, cost, budget=None):
    cap = get_budget() if budget is None else budget
    if cost > cap:
        raise ResourceError(what, cost, cap)
    return cost


def get_threads():
    return _state["threads"]


def set_threads(k):
    if k < 1:
        raise ContractError("thread count must be >= 1")
    _state["threads"] = int(k)


def parallel_map(fn, items):
    """Ordered map; results come back in input order whatever the thread count."""
    items = list(items)
    k = get_threads()
    if k == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, items))


class SplitMix64:
    """SplitMix64 (Steele, Lea, Flood 2014).

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)

    all arithmetic mod 2^64. Chosen because it is a dozen lines in any
    language, so protocol tables generated from a seed are portable.
    """

    def __init__(self, seed):
        self.state = int(seed) & MASK64

    def next_u64(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def bits(self, count):
        """``count`` pseudo-random bits, least significant bit of each word first."""
        out = []
        while len(out) < count:
            w = self.next_u64()
            out.extend((w >> i) & 1 for i in range(min(64, count - len(out))))
        return out

    def below(self, bound):
        """Uniform integer in [0, bound) by rejection."""
        if bound <= 0:
            raise ContractError("bound must be positive")
        if bound == 1:
            return 0
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            w = self.next_u64()
            if w < limit:
                return w % bound
