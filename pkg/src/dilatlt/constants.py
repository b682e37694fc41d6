"""Lieb-Thirring constants and the prefactors built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

CLASSICAL_SHARP = "classical_sharp"
DLL_BOUND = "dll_bound"


class ScopeError(ValueError):
    pass


@dataclass(frozen=True)
class MomentOrder:
    gamma: float
    d: int = 1

    def __post_init__(self):
        if not isinstance(self.d, int) or self.d < 1:
            raise ScopeError(f"dimension must be a positive integer, got {self.d!r}")
        if not math.isfinite(self.gamma) or self.gamma < 0:
            raise ScopeError(f"moment order must be finite and >= 0, got {self.gamma!r}")

    @property
    def p(self) -> float:
        # exponent of |V| on the right-hand side
        return self.gamma + self.d / 2

    def require_theorem_scope(self):
        if self.gamma < 1:
            raise ScopeError(f"gamma = {self.gamma} is outside the supported range gamma >= 1")


@dataclass(frozen=True)
class LtConstantChoice:
    mode: str
    value: float
    note: str


def gamma_fn(x: float) -> float:
    if not x > 0:
        raise ValueError(f"gamma_fn is defined here for x > 0 only, got {x!r}")
    return math.gamma(x)


def _gamma_exact(x: float):
    """Gamma(x) = q * sqrt(pi)^k with q rational, for integer and half-integer x > 0; else None."""
    if not (x > 0 and float(2 * x).is_integer() and x < 171):
        return None
    n = int(x)
    if x == n:
        return Fraction(math.factorial(n - 1)), 0
    return Fraction(math.factorial(2 * n), 4 ** n * math.factorial(n)), 1


def classical_constant(order: MomentOrder) -> float:
    g, d = order.gamma, order.d
    num, den = _gamma_exact(g + 1), _gamma_exact(g + d / 2 + 1)
    if num and den:
        # sqrt(pi) factors cancel symbolically, so e.g. gamma = 3/2, d = 1 gives 3/16 exactly
        q = num[0] / (2 ** d * den[0])
        k = num[1] - d - den[1]
        return float(q) if k == 0 else float(q) * math.pi ** (k / 2)
    return gamma_fn(g + 1) / (2 ** d * math.pi ** (d / 2) * gamma_fn(g + d / 2 + 1))


def lt_constant(order: MomentOrder) -> LtConstantChoice:
    order.require_theorem_scope()
    lcl = classical_constant(order)
    if order.gamma >= 1.5:
        return LtConstantChoice(CLASSICAL_SHARP, lcl, "sharp: equals the classical constant for gamma >= 3/2")
    return LtConstantChoice(DLL_BOUND, math.pi / math.sqrt(3) * lcl,
                            "upper bound (pi/sqrt 3) * classical constant, valid for gamma >= 1")


def flls_constant(order: MomentOrder) -> float:
    order.require_theorem_scope()
    g, d = order.gamma, order.d
    return 2 ** (1 + g / 2 + d / 4) * lt_constant(order).value


def cone_prefactor(order: MomentOrder, kappa: float) -> float:
    # kappa = inf is the limit where the cone covers the closed left half-plane
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa!r}")
    return flls_constant(order) * (1 + 2 / kappa) ** order.p
