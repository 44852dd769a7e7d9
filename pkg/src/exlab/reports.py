"""Verification reports and the bound formulas they instantiate."""

import time
from dataclasses import dataclass, field
from fractions import Fraction

from ._runtime import ContractError


def _pow2(e):
    e = Fraction(e)
    if e.denominator != 1:
        raise ContractError("non-integer exponent in an exact bound")
    e = int(e)
    return Fraction(2) ** e


# Each formula returns (bound ** exponent, exponent): bounds with a
# 2^N-th root are kept exact by raising both sides to that power.
def _reduction(m, mu, N, eps):
    e = 1 << N
    return (_pow2((m + mu) * e) * 2 * Fraction(eps), e)


def _missing_entropy(eps, N, n, k):
    return (Fraction(eps) * _pow2(N * (n - k)), 1)


def _strong(k, m, k_prime):
    return (_pow2(k + m - k_prime), 1)


def _xor_lemma(m, mu, alpha):
    return (_pow2(m + mu) * Fraction(alpha), 1)


def _recipe_error(N, eps1, r, k1, eps2):
    return (2 * N * Fraction(eps1) + _pow2(N * (r - k1)) * Fraction(eps2), 1)


def _cube_chain(N, cube_bias):
    return (Fraction(cube_bias), 1 << N)


def _plain(bound):
    return (Fraction(bound), 1)


FORMULAS = {
    "reduction": ("2^(m+mu) * (2*eps)^(1/2^N)", _reduction),
    "missing_entropy": ("eps * 2^(N*(n-k))", _missing_entropy),
    "strong_condenser": ("2^(k+m-k')", _strong),
    "xor_lemma": ("2^(m+mu) * alpha", _xor_lemma),
    "recipe_error": ("2*N*eps1 + 2^(N*(r-k1))*eps2", _recipe_error),
    "cube_chain": ("cube_bias^(1/2^N)", _cube_chain),
    "plain": ("bound", _plain),
}


def evaluate_formula(name, params):
    """Exact (bound ** exponent, exponent) for a named formula."""
    try:
        _, fn = FORMULAS[name]
    except KeyError:
        raise ContractError(f"unknown formula {name!r}") from None
    return fn(**params)


def _fmt(x):
    if x is None:
        return None
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, dict):
        return {k: _fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_fmt(v) for v in x]
    return x


@dataclass
class VerifyReport:
    """One checked quantity.

    ``bound`` holds ``B ** exponent`` where ``B`` is the claimed bound, so
    ``holds == (measured ** exponent <= bound)``; ``exponent`` is 1 unless
    the bound contains a root.
    """

    quantity: str
    measured: Fraction
    bound: Fraction = None
    exponent: int = 1
    formula: str = None
    params: dict = field(default_factory=dict)
    holds: bool = True
    cost: int = 0
    runtime: float = 0.0
    mode: str = "exhaustive"
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.formula is not None and self.bound is None:
            self.bound, self.exponent = evaluate_formula(self.formula, self.params)
        if self.bound is not None:
            self.holds = Fraction(self.measured) ** self.exponent <= self.bound

    @property
    def bound_value(self):
        """Floating value of the bound itself (root taken); for display only."""
        if self.bound is None:
            return None
        return float(self.bound) ** (1.0 / self.exponent)

    def recheck(self):
        """Re-derive the bound from the stored parameters; True when nothing drifted."""
        if self.formula is None:
            return True
        return evaluate_formula(self.formula, self.params) == (self.bound, self.exponent)

    def to_json(self, timing=True):
        out = {
            "quantity": self.quantity,
            "measured": _fmt(Fraction(self.measured)),
            "bound": _fmt(self.bound),
            "exponent": self.exponent,
            "bound_float": self.bound_value,
            "formula": self.formula,
            "formula_text": FORMULAS[self.formula][0] if self.formula else None,
            "params": _fmt(self.params),
            "holds": self.holds,
            "cost": self.cost,
            "mode": self.mode,
            "details": _fmt(self.details),
        }
        if timing:
            out["runtime"] = self.runtime
        return out


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        return False
