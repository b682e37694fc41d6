"""Moment sums over computed spectra and the inequalities they are checked against."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .constants import LtConstantChoice, MomentOrder, cone_prefactor, flls_constant, lt_constant
from .discretize import Grid1D, build_scaled_hamiltonian
from .eigensolver import decompose, inverse_iteration
from .potentials import PotentialSpec, assumption_check
from .quadrature import (DEFAULT_TOL, InadmissibleError, QuadratureResult, abs_power_integral,
                         negative_part_integral, rhs_integral)
from .spectral_analysis import (ALL, LOWER, UPPER, DiscreteSpectrum, Tolerances, discrete_spectrum,
                                multiplicities)

CONE = "cone"
NEGATIVE_REAL = "negative_real"
COUNT_FLOOR = 1e-6


class MissingMultiplicityError(KeyError):
    pass


@dataclass
class SpectralAnalysis:
    discrete: DiscreteSpectrum
    records: list

    @property
    def spec(self) -> PotentialSpec:
        return self.discrete.spec


@lru_cache(maxsize=16)
def _analyze(spec, grid, betas, tol, gate, backend):
    ds = discrete_spectrum(spec, grid, betas, tol, gate, backend)
    return SpectralAnalysis(ds, multiplicities(ds, tol, backend=backend))


def analyze(spec: PotentialSpec, grid: Grid1D, betas=(0.3, 0.5), tolerances: Tolerances | None = None,
            gate: bool = True, backend: str | None = None) -> SpectralAnalysis:
    """Discrete spectrum plus one multiplicity record per eigenvalue (memoised)."""
    return _analyze(spec, grid, tuple(betas), tolerances or Tolerances(), gate, backend)


def _in_region(v: complex, region, half: str) -> bool:
    if region == ALL:
        return True
    if region == UPPER:
        return half in (UPPER, NEGATIVE_REAL)
    if region == LOWER:
        return half in (LOWER, NEGATIVE_REAL)
    if region == NEGATIVE_REAL:
        return half == NEGATIVE_REAL
    if isinstance(region, tuple) and region[0] == CONE:
        kappa = region[1]
        if math.isinf(kappa):
            return v.real <= 0
        return abs(v.imag) >= kappa * v.real
    raise ValueError(f"unknown region {region!r}")


def moment_terms(spectrum: DiscreteSpectrum, records: list, region, gamma: float) -> list:
    """(lambda, m, m |lambda|^gamma) for the discrete eigenvalues in the region, sorted by (Re, Im)."""
    by_value = {r.value: r for r in records}
    out = []
    for e in sorted(spectrum.eigenvalues, key=lambda e: (e.value.real, e.value.imag)):
        if not _in_region(e.value, region, e.half):
            continue
        rec = by_value.get(e.value)
        if rec is None:
            raise MissingMultiplicityError(f"no multiplicity record for eigenvalue {e.value}")
        out.append((e.value, rec.m, rec.m * abs(e.value) ** gamma))
    return out


def moment_sum(spectrum: DiscreteSpectrum, records: list, region, gamma: float) -> float:
    return math.fsum(t[2] for t in moment_terms(spectrum, records, region, gamma))


@dataclass
class LTReport:
    spec_name: str
    order: MomentOrder
    region: str
    lhs: float
    constant_used: LtConstantChoice
    factor: float
    rhs: float
    slack: float
    holds: bool | None
    eigenvalues: list = field(default_factory=list)
    excluded: list = field(default_factory=list)
    integrals: dict = field(default_factory=dict)
    status: str = "ok"
    gate_passed: bool | None = None
    notes: str = ""

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else math.inf
        return self.lhs / self.rhs

    def to_dict(self) -> dict:
        return {
            "spec": self.spec_name, "gamma": self.order.gamma, "d": self.order.d,
            "region": self.region, "lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio,
            "slack": self.slack, "holds": self.holds, "status": self.status,
            "constant": {"mode": self.constant_used.mode, "value": self.constant_used.value,
                         "note": self.constant_used.note},
            "factor": self.factor, "gate_passed": self.gate_passed,
            "integrals": {k: {"value": v.value, "error_estimate": v.error_estimate,
                              "nodes_used": v.nodes_used, "truncation_radius": v.truncation_radius}
                          for k, v in self.integrals.items()},
            "eigenvalues": [{"value": [z.real, z.imag], "m": m, "term": t} for z, m, t in self.eigenvalues],
            "excluded": [[z.real, z.imag] for z in self.excluded],
            "notes": self.notes,
        }

    def row(self) -> str:
        flag = {True: "holds", False: "VIOLATED", None: "n/a"}[self.holds]
        return (f"{self.spec_name:<34} {self.region:<12} gamma={self.order.gamma:<4g} "
                f"lhs={self.lhs:<14.8g} rhs={self.rhs:<14.8g} ratio={self.ratio:<10.6g} "
                f"[{self.constant_used.mode}] {flag}")


def _eigen_slack(terms, gamma: float, delta: float) -> float:
    # d|lambda|^gamma = gamma |lambda|^(gamma-1) d|lambda|
    return math.fsum(m * gamma * (abs(z) + delta) ** (gamma - 1) * delta for z, m, _ in terms)


def _excluded(an: SpectralAnalysis) -> list:
    return [e.value for e in an.discrete.excluded if e.reason == "positive real"]


def _require_theorem(spec: PotentialSpec, order: MomentOrder):
    rep = assumption_check(spec, order)
    if not rep.ok:
        raise InadmissibleError(f"{spec.name or 'potential'} is inadmissible: {rep.notes}")


def verify_main(spec: PotentialSpec, grid: Grid1D, gamma: float, sign: int,
                analysis: SpectralAnalysis | None = None, tolerances: Tolerances | None = None,
                quad_tol: float = DEFAULT_TOL, **kw) -> LTReport:
    """Half-plane moment sum against C_{gamma,1} times the integral of |V_{sign*i*pi/4}|^(gamma+1/2)."""
    order = MomentOrder(gamma, 1)
    order.require_theorem_scope()
    _require_theorem(spec, order)
    tol = tolerances or Tolerances()
    an = analysis or analyze(spec, grid, tolerances=tol, **kw)
    region = UPPER if sign > 0 else LOWER
    terms = moment_terms(an.discrete, an.records, region, gamma)
    lhs = math.fsum(t[2] for t in terms)
    q = rhs_integral(spec, order, sign, quad_tol)
    C = flls_constant(order)
    rhs = C * q.value
    slack = C * q.error_estimate + _eigen_slack(terms, gamma, tol.gate)
    return LTReport(spec.name, order, region, lhs, lt_constant(order), C / lt_constant(order).value,
                    rhs, slack, lhs <= rhs + slack, terms, _excluded(an), {f"sign{sign:+d}": q},
                    gate_passed=an.discrete.gate_passed)


def verify_corollary_total(spec: PotentialSpec, grid: Grid1D, gamma: float,
                           analysis: SpectralAnalysis | None = None, tolerances: Tolerances | None = None,
                           quad_tol: float = DEFAULT_TOL, **kw) -> LTReport:
    order = MomentOrder(gamma, 1)
    order.require_theorem_scope()
    _require_theorem(spec, order)
    tol = tolerances or Tolerances()
    an = analysis or analyze(spec, grid, tolerances=tol, **kw)
    terms = moment_terms(an.discrete, an.records, ALL, gamma)
    lhs = math.fsum(t[2] for t in terms)
    qp = rhs_integral(spec, order, 1, quad_tol)
    qm = rhs_integral(spec, order, -1, quad_tol)
    C = flls_constant(order)
    rhs = C * (qp.value + qm.value)
    slack = C * (qp.error_estimate + qm.error_estimate) + _eigen_slack(terms, gamma, tol.gate)
    return LTReport(spec.name, order, ALL, lhs, lt_constant(order), C / lt_constant(order).value,
                    rhs, slack, lhs <= rhs + slack, terms, _excluded(an), {"sign+1": qp, "sign-1": qm},
                    gate_passed=an.discrete.gate_passed)


def verify_count(spec: PotentialSpec, grid: Grid1D, gamma: float, floor: float = COUNT_FLOOR,
                 analysis: SpectralAnalysis | None = None, tolerances: Tolerances | None = None,
                 quad_tol: float = DEFAULT_TOL, **kw) -> LTReport:
    """Number of eigenvalues (with multiplicity) against C / inf|lambda|^gamma times both integrals.

    ``lhs`` holds the count; the report is "vacuous" without eigenvalues and
    "degenerate_infimum" (no verdict) when the smallest |lambda| is below the floor.
    """
    order = MomentOrder(gamma, 1)
    order.require_theorem_scope()
    _require_theorem(spec, order)
    tol = tolerances or Tolerances()
    an = analysis or analyze(spec, grid, tolerances=tol, **kw)
    terms = moment_terms(an.discrete, an.records, ALL, 0.0)
    count = float(sum(m for _, m, _ in terms))
    choice = lt_constant(order)
    C = flls_constant(order)
    if not terms:
        return LTReport(spec.name, order, "count", 0.0, choice, C / choice.value, math.nan, 0.0, True,
                        status="vacuous", gate_passed=an.discrete.gate_passed,
                        notes="no discrete eigenvalues; no bound emitted")
    inf_abs = min(abs(z) for z, _, _ in terms)
    if inf_abs < floor:
        return LTReport(spec.name, order, "count", count, choice, C / choice.value, math.inf, 0.0, None,
                        terms, status="degenerate_infimum", gate_passed=an.discrete.gate_passed,
                        notes=f"inf |lambda| = {inf_abs:.3g} is below the floor {floor:g}")
    qp = rhs_integral(spec, order, 1, quad_tol)
    qm = rhs_integral(spec, order, -1, quad_tol)
    # a perturbation delta of the smallest eigenvalue moves the bound by at most this
    lo = max(inf_abs - tol.gate, floor)
    bound = C / inf_abs ** gamma * (qp.value + qm.value)
    slack = C / lo ** gamma * (qp.value + qm.value + qp.error_estimate + qm.error_estimate) - bound
    return LTReport(spec.name, order, "count", count, choice, C / choice.value / inf_abs ** gamma,
                    bound, slack, count <= bound + slack, terms, _excluded(an),
                    {"sign+1": qp, "sign-1": qm}, gate_passed=an.discrete.gate_passed,
                    notes=f"inf |lambda| = {inf_abs:.12g}")


def verify_flls_cone(spec: PotentialSpec, grid: Grid1D, gamma: float, kappa: float,
                     analysis: SpectralAnalysis | None = None, tolerances: Tolerances | None = None,
                     quad_tol: float = DEFAULT_TOL, **kw) -> LTReport:
    """Moment sum over |Im lambda| >= kappa Re lambda against the cone prefactor times the
    integral of the undilated |V|^(gamma+1/2)."""
    order = MomentOrder(gamma, 1)
    order.require_theorem_scope()
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    rep = assumption_check(spec, order)
    if not rep.lp_ok:
        raise InadmissibleError(f"|V| is not in L^{order.p:g}: {rep.notes}")
    tol = tolerances or Tolerances()
    an = analysis or analyze(spec, grid, tolerances=tol, **kw)
    terms = moment_terms(an.discrete, an.records, (CONE, kappa), gamma)
    lhs = math.fsum(t[2] for t in terms)
    q = abs_power_integral(spec, order.p, 0.0, quad_tol)
    K = cone_prefactor(order, kappa)
    rhs = K * q.value
    slack = K * q.error_estimate + _eigen_slack(terms, gamma, tol.gate)
    choice = lt_constant(order)
    return LTReport(spec.name, order, f"cone({kappa:g})", lhs, choice, K / choice.value, rhs, slack,
                    lhs <= rhs + slack, terms, _excluded(an), {"undilated": q},
                    gate_passed=an.discrete.gate_passed)


def verify_real_lt(spec: PotentialSpec, grid: Grid1D, gamma: float, tolerances: Tolerances | None = None,
                   quad_tol: float = DEFAULT_TOL, backend: str | None = None) -> LTReport:
    """Classical bound: sum of |lambda|^gamma over negative eigenvalues of the undilated
    operator against L_{gamma,1} times the integral of V_-^(gamma+1/2)."""
    if not spec.is_real:
        raise ValueError("verify_real_lt needs a real-valued potential")
    order = MomentOrder(gamma, 1)
    order.require_theorem_scope()
    tol = tolerances or Tolerances()
    A = build_scaled_hamiltonian(spec, 0.0, grid).entries
    w = decompose(A, backend=backend or "native").values.real
    neg = np.sort(w[w < 0])
    # gate: the same eigenvalues on the refined and extended grids
    changes = []
    try:
        mats = [build_scaled_hamiltonian(spec, 0.0, g).entries for g in (grid.refined(), grid.extended())]
    except ValueError:
        mats = []
    for v in neg:
        ch = max((abs(inverse_iteration(M, complex(v), steps=8)[0] - v) for M in mats), default=math.nan)
        changes.append(ch)
    gate_ok = bool(mats) and all(c <= tol.gate for c in changes)
    terms = [(complex(v), 1, abs(v) ** gamma) for v in neg]
    lhs = math.fsum(t[2] for t in terms)
    q = negative_part_integral(spec, order.p, quad_tol)
    choice = lt_constant(order)
    rhs = choice.value * q.value
    slack = choice.value * q.error_estimate + _eigen_slack(terms, gamma, tol.gate)
    return LTReport(spec.name, order, "negative", lhs, choice, 1.0, rhs, slack, lhs <= rhs + slack,
                    terms, [], {"negative_part": q}, gate_passed=gate_ok,
                    notes=f"max gate change {max(changes, default=0.0):.3g}")


def plot_data(an: SpectralAnalysis, kappa: float | None = None, ray_length: float | None = None) -> str:
    """Whitespace-separated columns for external plotting: kind re im."""
    lines = ["# kind re im"]
    for cs in (an.discrete.upper, an.discrete.lower):
        for e in sorted(cs.entries, key=lambda e: (e.value.real, e.value.imag)):
            lines.append(f"{e.cls}@{cs.theta_pair[0].imag:+g} {e.value.real!r} {e.value.imag!r}")
    for e in an.discrete.eigenvalues:
        lines.append(f"sigma_d {e.value.real!r} {e.value.imag!r}")
    vals = np.array([e.value for e in an.discrete.eigenvalues] or [1.0])
    R = ray_length or 2 * float(np.max(np.abs(vals)))
    for cs in (an.discrete.upper, an.discrete.lower):
        ang = -2 * cs.theta_pair[0].imag
        for t in np.linspace(0, R, 5):
            lines.append(f"ray@{cs.theta_pair[0].imag:+g} {t * math.cos(ang)!r} {t * math.sin(ang)!r}")
    if kappa is not None and math.isfinite(kappa):
        # boundary |Im z| = kappa Re z
        for t in np.linspace(0, R, 5):
            lines.append(f"cone_upper {t!r} {kappa * t!r}")
            lines.append(f"cone_lower {t!r} {-kappa * t!r}")
    return "\n".join(lines) + "\n"
