"""Closed-form dilation-analytic potentials and their complex dilations.

Every family is evaluated at ``z = e^theta x`` through one code path, so a
real ``theta`` is literally the substitution ``x -> e^theta x``. Fractional
powers use the principal branch; each family documents why its argument
stays off the branch cut inside its strip.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import MomentOrder


class StripError(ValueError):
    """Dilation parameter outside the strip where the continuation exists."""


def _sech(z):
    # 2 e^{-w} / (1 + e^{-2w}) with Re w >= 0 never overflows
    w = np.where(np.real(z) >= 0, z, -z)
    e = np.exp(-w)
    return 2 * e / (1 + e * e)


@dataclass(frozen=True)
class RationalDecay:
    """c (1 + x^2)^(-s).

    For z = e^{i beta} x with |beta| < pi/2, 1 + z^2 = 1 + e^{2 i beta} x^2
    has Im of one sign (or is real and >= 1), so it never meets (-inf, 0]
    and the principal power is analytic in beta.
    """
    c: complex
    s: float
    family = "rational_decay"
    alpha = math.pi / 2

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError(f"rational_decay needs s > 0, got {self.s}")

    def at(self, z):
        return self.c * np.power(1 + z * z, -self.s)

    def params(self) -> dict:
        return {"s": self.s}


@dataclass(frozen=True)
class SechSquared:
    """c sech^2(x); cosh(e^{i beta} x) has no zeros on the real line for |beta| < pi/2."""
    c: complex
    family = "sech_squared"
    alpha = math.pi / 2

    def at(self, z):
        sh = _sech(z)
        return self.c * sh * sh

    def params(self) -> dict:
        return {}


@dataclass(frozen=True)
class Gaussian:
    """c exp(-a x^2); decays along e^{i beta} R only while cos 2 beta > 0."""
    c: complex
    a: float
    family = "gaussian"
    alpha = math.pi / 4

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"gaussian needs a > 0, got {self.a}")

    def at(self, z):
        return self.c * np.exp(-self.a * z * z)

    def params(self) -> dict:
        return {"a": self.a}


FAMILIES = {"rational_decay": RationalDecay, "sech_squared": SechSquared, "gaussian": Gaussian}


@dataclass(frozen=True)
class PotentialSpec:
    terms: tuple = ()
    d: int = 1
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.d != 1:
            raise ValueError("only d = 1 potentials are supported")

    @property
    def is_zero(self) -> bool:
        return all(t.c == 0 for t in self.terms)

    @property
    def is_real(self) -> bool:
        return all(complex(t.c).imag == 0 for t in self.terms)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "d": self.d,
            "terms": [{"family": t.family, "c": [complex(t.c).real, complex(t.c).imag], **t.params()}
                      for t in self.terms],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PotentialSpec":
        terms = []
        for raw in data.get("terms", []):
            raw = dict(raw)
            fam = raw.pop("family")
            if fam not in FAMILIES:
                raise ValueError(f"unknown potential family {fam!r}")
            c = raw.pop("c")
            if isinstance(c, (list, tuple)):
                c = complex(c[0], c[1])
            terms.append(FAMILIES[fam](complex(c), **{k: float(v) for k, v in raw.items()}))
        return cls(tuple(terms), int(data.get("d", 1)), str(data.get("name", "")))

    def scaled(self, t: float) -> "PotentialSpec":
        terms = tuple(type(term)(term.c * t, **term.params()) for term in self.terms)
        return PotentialSpec(terms, self.d, self.name)


def zero() -> PotentialSpec:
    return PotentialSpec((), name="zero")


def rational_decay(c: complex, s: float) -> PotentialSpec:
    return PotentialSpec((RationalDecay(complex(c), float(s)),), name=f"rational_decay(c={c}, s={s})")


def sech_squared(c: complex) -> PotentialSpec:
    return PotentialSpec((SechSquared(complex(c)),), name=f"sech_squared(c={c})")


def gaussian(c: complex, a: float = 1.0) -> PotentialSpec:
    return PotentialSpec((Gaussian(complex(c), float(a)),), name=f"gaussian(c={c}, a={a})")


def combine(*specs: PotentialSpec) -> PotentialSpec:
    terms = tuple(t for s in specs for t in s.terms)
    return PotentialSpec(terms, name=" + ".join(s.name for s in specs if s.name))


def strip_halfwidth(spec: PotentialSpec) -> float:
    return min((t.alpha for t in spec.terms), default=math.inf)


def check_strip(spec: PotentialSpec, theta: complex):
    alpha = strip_halfwidth(spec)
    if abs(complex(theta).imag) >= alpha:
        raise StripError(f"|Im theta| = {abs(complex(theta).imag):.6g} is not inside the strip "
                         f"of half-width {alpha:.6g} for {spec.name or 'this potential'}")


def evaluate_dilated(spec: PotentialSpec, theta: complex, x):
    """V(e^theta x) for scalar or array x."""
    check_strip(spec, theta)
    x = np.asarray(x, dtype=float)
    z = cmath.exp(theta) * x
    out = np.zeros(x.shape, dtype=np.complex128)
    for t in spec.terms:
        out = out + t.at(z)
    return out if out.ndim else complex(out)


def dilated_abs_power(spec: PotentialSpec, beta: float, p: float):
    check_strip(spec, 1j * beta)

    def f(x):
        return np.abs(evaluate_dilated(spec, 1j * beta, x)) ** p
    return f


def negative_part_power(spec: PotentialSpec, p: float):
    """x -> max(-V(x), 0)^p for a real-valued profile."""
    if not spec.is_real:
        raise ValueError("negative part is only defined for real-valued potentials")

    def f(x):
        v = np.real(evaluate_dilated(spec, 0.0, x))
        return np.maximum(-v, 0.0) ** p
    return f


def decay_exponent(spec: PotentialSpec, p: float) -> float | None:
    """Power-law decay rate q of |V|^p, or None when every term decays exponentially."""
    rates = [2 * t.s * p for t in spec.terms if isinstance(t, RationalDecay) and t.c != 0]
    return min(rates) if rates else None


def length_scale(spec: PotentialSpec) -> float:
    scales = [1 / math.sqrt(t.a) if isinstance(t, Gaussian) else 1.0 for t in spec.terms]
    return min(scales, default=1.0)


@dataclass(frozen=True)
class AdmissibilityReport:
    lp_ok: bool
    strip_ok_for_theorem: bool
    notes: str

    @property
    def ok(self) -> bool:
        return self.lp_ok and self.strip_ok_for_theorem


def assumption_check(spec: PotentialSpec, order: MomentOrder) -> AdmissibilityReport:
    p = order.p
    notes = []
    lp_ok = True
    for t in spec.terms:
        if isinstance(t, RationalDecay) and not 2 * t.s * p > order.d:
            lp_ok = False
            notes.append(f"|V|^{p:g} not integrable: 2*s*p = {2 * t.s * p:g} <= d = {order.d}")
    alpha = strip_halfwidth(spec)
    strip_ok = alpha > math.pi / 4
    if not strip_ok:
        notes.append(f"strip half-width {alpha:.6g} does not exceed pi/4")
    return AdmissibilityReport(lp_ok, strip_ok, "; ".join(notes) or "admissible")
