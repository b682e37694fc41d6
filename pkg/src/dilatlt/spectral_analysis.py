"""Discrete spectrum of a dilation-analytic Schrodinger operator.

Eigenvalues of the dilated matrix that do not move when theta changes, and
that sit away from the rotated continuum, are taken as eigenvalues of the
undilated operator. A value in the upper half-plane is only exposed for
Im theta > 0 and one in the lower half-plane only for Im theta < 0, so the
full discrete spectrum is assembled from one classification per sign.
"""
from __future__ import annotations

import cmath
import csv
import io
import json
import math
import os
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
import scipy.linalg as sla

from .discretize import SCALED, TILDE, Grid1D, build
from .eigensolver import decompose, inverse_iteration, match_nearest
from .potentials import PotentialSpec, check_strip

DISCRETE = "discrete"
CONTINUUM = "continuum_branch"
UNCERTAIN = "uncertain"


def default_backend() -> str:
    return os.environ.get("DILATLT_BACKEND", "native")


@dataclass(frozen=True)
class Tolerances:
    eps_stab: float = 1e-6
    ray_rel: float = 0.05
    ray_abs: float = 1e-3
    rank: float = 1e-8
    gate: float = 1e-6
    real_axis: float = 1e-7
    contour_fraction: float = 0.4
    contour_nodes: int = 32
    solve_residual: float = 1e-8
    uncertain_warn_fraction: float = 0.2

    def ray_standoff(self, value: complex) -> float:
        return self.ray_rel * abs(value) + self.ray_abs

    def to_dict(self) -> dict:
        return dict(self.__dict__)


class UnderResolvedWarning(UserWarning):
    pass


class ContourError(ValueError):
    pass


class IllConditionedError(RuntimeError):
    pass


@dataclass(frozen=True)
class EssentialRay:
    angle: float

    @property
    def direction(self) -> complex:
        return cmath.exp(1j * self.angle)

    def distance(self, z):
        z = np.asarray(z, dtype=np.complex128)
        w = z * np.conj(self.direction)
        return np.where(w.real >= 0, np.abs(w.imag), np.abs(w))


def essential_ray(theta: complex) -> EssentialRay:
    return EssentialRay(-2 * complex(theta).imag)


@lru_cache(maxsize=48)
def _eigvals_cached(spec: PotentialSpec, theta: complex, grid: Grid1D, kind: str, backend: str):
    A = build(spec, theta, grid, kind).entries
    w = decompose(A, backend=backend).values
    w.setflags(write=False)
    return w


def eigenvalues(spec: PotentialSpec, theta: complex, grid: Grid1D, kind: str = SCALED,
                backend: str | None = None) -> np.ndarray:
    """All eigenvalues of the dilated matrix (memoised per process)."""
    return _eigvals_cached(spec, complex(theta), grid, kind, backend or default_backend())


def clear_cache():
    _eigvals_cached.cache_clear()


def _to_h_frame(values, theta: complex, kind: str):
    # tilde eigenvalues are e^{2 theta} times those of H(theta)
    return values * cmath.exp(-2 * theta) if kind == TILDE else values


@dataclass
class SpectrumEntry:
    value: complex
    cls: str
    residual: float
    theta_drift: float
    reason: str = ""
    gate_change: float = float("nan")

    def to_dict(self) -> dict:
        return {"value": [self.value.real, self.value.imag], "class": self.cls,
                "residual": _num(self.residual), "drift": _num(self.theta_drift),
                "reason": self.reason, "gate_change": _num(self.gate_change)}


@dataclass
class GateReport:
    status: str  # passed / failed / skipped
    tolerance: float
    max_change: float
    grids: list
    changes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "passed"

    def to_dict(self) -> dict:
        return {"status": self.status, "tolerance": self.tolerance, "max_change": _num(self.max_change),
                "grids": [g.to_dict() for g in self.grids],
                "changes": [[c[0].real, c[0].imag, _num(c[1])] for c in self.changes]}


@dataclass
class ClassifiedSpectrum:
    entries: list
    theta_pair: tuple
    grid: Grid1D
    kind: str = SCALED
    gate: GateReport | None = None
    spec_name: str = ""

    def values(self, cls: str | None = None) -> np.ndarray:
        return np.array([e.value for e in self.entries if cls is None or e.cls == cls], dtype=np.complex128)

    def discrete(self) -> list:
        return [e for e in self.entries if e.cls == DISCRETE]

    def counts(self) -> dict:
        out = {DISCRETE: 0, CONTINUUM: 0, UNCERTAIN: 0}
        for e in self.entries:
            out[e.cls] += 1
        return out

    def ray_angle_fit(self) -> float:
        """Least-squares angle of the continuum entries (in the H(theta) frame)."""
        v = _to_h_frame(self.values(CONTINUUM), self.theta_pair[0], self.kind)
        v = v[np.abs(v) > 1e-12 * max(1.0, float(np.max(np.abs(v), initial=0.0)))]
        if v.size == 0:
            return float("nan")
        ref = essential_ray(self.theta_pair[0]).direction
        # fit a single phase to points r e^{i phi}: phi = arg(sum z^2 conj ref^2)/2 around the ray
        s = np.sum(np.abs(v) * (v / np.abs(v) * np.conj(ref)) ** 2)
        return essential_ray(self.theta_pair[0]).angle + 0.5 * cmath.phase(s)

    def to_dict(self) -> dict:
        return {"spec": self.spec_name, "kind": self.kind, "grid": self.grid.to_dict(),
                "theta_pair": [[t.real, t.imag] for t in self.theta_pair],
                "counts": self.counts(),
                "gate": self.gate.to_dict() if self.gate else None,
                "entries": [e.to_dict() for e in _sorted_entries(self.entries)]}

    def csv_rows(self, multiplicities: dict | None = None) -> list:
        rows = []
        for e in _sorted_entries(self.entries):
            rec = (multiplicities or {}).get(e.value)
            rows.append([repr(e.value.real), repr(e.value.imag), e.cls, _fmt(e.residual),
                         _fmt(e.theta_drift), rec.m if rec else "", rec.g if rec else ""])
        return rows


CSV_HEADER = ["value_re", "value_im", "class", "residual", "drift", "m", "g"]


def to_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerows(rows)
    return buf.getvalue()


def _num(x):
    return None if x is None or not math.isfinite(x) else float(x)


def _fmt(x) -> str:
    return "" if x is None or not math.isfinite(x) else repr(float(x))


def _sorted_entries(entries):
    return sorted(entries, key=lambda e: (e.value.real, e.value.imag))


def _check_pair(spec, theta1, theta2):
    if theta1 == theta2:
        raise ValueError("theta1 and theta2 must differ")
    if not theta1.imag * theta2.imag > 0:
        raise ValueError("theta1 and theta2 need nonzero imaginary parts of the same sign")
    check_strip(spec, theta1)
    check_strip(spec, theta2)


def classify(spec: PotentialSpec, grid: Grid1D, theta1: complex, theta2: complex,
             tolerances: Tolerances | None = None, gate: bool = True, kind: str = SCALED,
             backend: str | None = None, residuals: bool = True) -> ClassifiedSpectrum:
    """Tag every eigenvalue of the theta1 matrix as discrete, continuum or uncertain."""
    tol = tolerances or Tolerances()
    theta1, theta2 = complex(theta1), complex(theta2)
    _check_pair(spec, theta1, theta2)
    w1 = eigenvalues(spec, theta1, grid, kind, backend)
    w2 = eigenvalues(spec, theta2, grid, kind, backend)
    u1 = _to_h_frame(w1, theta1, kind)
    u2 = _to_h_frame(w2, theta2, kind)
    drift = np.full(u1.size, np.inf)
    for m in match_nearest(u1, u2):
        drift[m.i] = m.distance
    r1, r2 = essential_ray(theta1), essential_ray(theta2)
    standoff = tol.ray_rel * np.abs(u1) + tol.ray_abs
    on_ray = (r1.distance(u1) <= standoff) | (r2.distance(u1) <= standoff)

    entries = []
    for k in range(u1.size):
        v = complex(w1[k])
        u = complex(u1[k])
        if on_ray[k]:
            entries.append(SpectrumEntry(v, CONTINUUM, float("nan"), float(drift[k])))
        elif drift[k] > tol.eps_stab:
            entries.append(SpectrumEntry(v, UNCERTAIN, float("nan"), float(drift[k]), "theta drift"))
        elif u.real > 0 and abs(u.imag) <= tol.real_axis * max(1.0, abs(u)):
            entries.append(SpectrumEntry(v, UNCERTAIN, float("nan"), float(drift[k]), "positive real"))
        else:
            entries.append(SpectrumEntry(v, DISCRETE, float("nan"), float(drift[k])))

    A = None
    if residuals:
        A = build(spec, theta1, grid, kind).entries
        for e in entries:
            if e.cls != CONTINUUM:
                _, _, e.residual = inverse_iteration(A, e.value, steps=3)

    report = None
    if gate:
        report = _convergence_gate(spec, grid, theta1, kind, entries, tol)

    frac = sum(e.cls == UNCERTAIN for e in entries) / max(1, len(entries))
    if frac > tol.uncertain_warn_fraction:
        warnings.warn(f"{frac:.0%} of the eigenvalues of {spec.name or 'the potential'} on "
                      f"L={grid.L}, N={grid.N} are uncertain; the grid is probably under-resolved",
                      UnderResolvedWarning, stacklevel=2)
    return ClassifiedSpectrum(entries, (theta1, theta2), grid, kind, report, spec.name)


def _convergence_gate(spec, grid, theta, kind, entries, tol) -> GateReport:
    try:
        grids = [grid.refined(), grid.extended()]
    except ValueError:
        return GateReport("skipped", tol.gate, float("nan"), [])
    disc = [e for e in entries if e.cls == DISCRETE]
    worst = 0.0
    changes = []
    if disc:
        mats = [build(spec, theta, g, kind).entries for g in grids]
        for e in disc:
            ch = 0.0
            for A in mats:
                v, _, _ = inverse_iteration(A, e.value, steps=8)
                ch = max(ch, abs(v - e.value))
            e.gate_change = ch
            changes.append((e.value, ch))
            worst = max(worst, ch)
            if ch > tol.gate:
                e.cls = UNCERTAIN
                e.reason = "convergence gate"
    status = "passed" if worst <= tol.gate else "failed"
    return GateReport(status, tol.gate, worst, grids, changes)


# -- both half-planes ---------------------------------------------------------

UPPER = "upper"
LOWER = "lower"
ALL = "all"


@dataclass
class DiscreteEigenvalue:
    value: complex
    theta: complex
    drift: float
    residual: float
    gate_change: float
    half: str  # upper / lower / negative_real

    def to_dict(self) -> dict:
        return {"value": [self.value.real, self.value.imag], "theta": [self.theta.real, self.theta.imag],
                "half": self.half, "drift": _num(self.drift), "residual": _num(self.residual),
                "gate_change": _num(self.gate_change)}


@dataclass
class DiscreteSpectrum:
    spec: PotentialSpec
    grid: Grid1D
    eigenvalues: list
    excluded: list
    upper: ClassifiedSpectrum
    lower: ClassifiedSpectrum

    @property
    def gate_passed(self) -> bool:
        return all(c.gate is None or c.gate.passed for c in (self.upper, self.lower))

    def in_region(self, region: str) -> list:
        if region == ALL:
            return list(self.eigenvalues)
        if region == UPPER:
            return [e for e in self.eigenvalues if e.half in (UPPER, "negative_real")]
        if region == LOWER:
            return [e for e in self.eigenvalues if e.half in (LOWER, "negative_real")]
        raise ValueError(f"unknown region {region!r}")

    def values(self, region: str = ALL) -> np.ndarray:
        return np.array([e.value for e in self.in_region(region)], dtype=np.complex128)

    def to_dict(self) -> dict:
        return {"spec": self.spec.to_dict(), "grid": self.grid.to_dict(), "gate_passed": self.gate_passed,
                "eigenvalues": [e.to_dict() for e in self.eigenvalues],
                "excluded": [e.to_dict() for e in self.excluded],
                "upper": self.upper.to_dict(), "lower": self.lower.to_dict()}


def _half_of(v: complex, tol: Tolerances) -> str:
    if abs(v.imag) <= tol.real_axis * max(1.0, abs(v)):
        return "negative_real" if v.real < 0 else "positive_real"
    return UPPER if v.imag > 0 else LOWER


def discrete_spectrum(spec: PotentialSpec, grid: Grid1D, betas=(0.3, 0.5),
                      tolerances: Tolerances | None = None, gate: bool = True,
                      backend: str | None = None) -> DiscreteSpectrum:
    """Discrete eigenvalues of H from classifications at +i*beta and -i*beta."""
    tol = tolerances or Tolerances()
    b1, b2 = betas
    up = classify(spec, grid, 1j * b1, 1j * b2, tol, gate, SCALED, backend)
    lo = classify(spec, grid, -1j * b1, -1j * b2, tol, gate, SCALED, backend)
    out, excluded = [], []
    for cs, keep in ((up, UPPER), (lo, LOWER)):
        for e in cs.entries:
            if e.cls == UNCERTAIN:
                h = _half_of(e.value, tol)
                if h == keep or (keep == UPPER and h != LOWER):
                    excluded.append(e)
            if e.cls != DISCRETE:
                continue
            half = _half_of(e.value, tol)
            if half == keep:
                out.append(DiscreteEigenvalue(e.value, cs.theta_pair[0], e.theta_drift, e.residual,
                                              e.gate_change, half))
            elif half == "negative_real" and keep == UPPER:
                out.append(DiscreteEigenvalue(e.value, cs.theta_pair[0], e.theta_drift, e.residual,
                                              e.gate_change, half))
    # negative reals seen from below but missed from above are still eigenvalues
    seen = np.array([e.value for e in out if e.half == "negative_real"], dtype=np.complex128)
    for e in lo.discrete():
        if _half_of(e.value, tol) == "negative_real":
            if seen.size == 0 or np.min(np.abs(seen - e.value)) > max(tol.gate, tol.eps_stab) * 10:
                out.append(DiscreteEigenvalue(e.value, lo.theta_pair[0], e.theta_drift, e.residual,
                                              e.gate_change, "negative_real"))
    out.sort(key=lambda e: (e.value.real, e.value.imag))
    return DiscreteSpectrum(spec, grid, out, excluded, up, lo)


# -- multiplicities -------------------------------------------------------------

@dataclass
class MultiplicityRecord:
    value: complex
    m: int
    g: int
    contour_radius: float
    projector_defect: float
    nodes: int = 32
    theta: complex = 0j
    cluster_size: int = 1
    max_solve_residual: float = 0.0
    projector_singular_values: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"value": [self.value.real, self.value.imag], "m": self.m, "g": self.g,
                "contour_radius": self.contour_radius, "projector_defect": self.projector_defect,
                "nodes": self.nodes, "theta": [self.theta.real, self.theta.imag],
                "cluster_size": self.cluster_size, "max_solve_residual": self.max_solve_residual,
                "projector_singular_values": self.projector_singular_values}


def riesz_multiplicity(spec: PotentialSpec, grid: Grid1D, theta: complex, lam: complex,
                       epsilon: float | None = None, M: int | None = None,
                       tolerances: Tolerances | None = None, kind: str = SCALED,
                       backend: str | None = None) -> MultiplicityRecord:
    """Algebraic multiplicity as the rank of the contour-integrated Riesz projector."""
    tol = tolerances or Tolerances()
    M = M or tol.contour_nodes
    return riesz_multiplicities(spec, grid, theta, lam, (M,), epsilon, tol, kind, backend)[M]


def riesz_multiplicities(spec: PotentialSpec, grid: Grid1D, theta: complex, lam: complex,
                         Ms=(32, 64), epsilon: float | None = None,
                         tolerances: Tolerances | None = None, kind: str = SCALED,
                         backend: str | None = None) -> dict:
    """Riesz records for several node counts on one circle.

    Every M must divide max(Ms): the smaller rules reuse a subset of the
    resolvents of the largest one.
    """
    tol = tolerances or Tolerances()
    Ms = sorted(set(int(m) for m in Ms))
    Mmax = Ms[-1]
    if Ms[0] < 16:
        raise ValueError("at least 16 contour nodes are required")
    if any(Mmax % m for m in Ms):
        raise ValueError(f"node counts {Ms} are not nested")
    theta = complex(theta)
    A = build(spec, theta, grid, kind).entries
    n = A.shape[0]
    w = eigenvalues(spec, theta, grid, kind, backend)

    # the computed image of a defective eigenvalue is a small cluster
    d = np.abs(w - lam)
    near = d <= 1e-4 * max(1.0, abs(lam))
    if not near.any():
        near = d == d.min()
    centre = complex(np.mean(w[near]))
    spread = float(np.max(np.abs(w[near] - centre)))
    others = w[~near]
    d_other = float(np.min(np.abs(others - centre))) if others.size else math.inf
    ray_dist = float(essential_ray(theta).distance(_to_h_frame(np.array([centre]), theta, kind))[0])
    if kind == TILDE:
        ray_dist *= math.exp(2 * theta.real)
    gap = min(d_other, ray_dist)
    if epsilon is None:
        epsilon = tol.contour_fraction * gap
    if not epsilon > spread:
        raise ContourError(f"contour radius {epsilon:.3g} does not enclose the eigenvalue cluster")
    if 2 * epsilon >= gap:
        raise ContourError(f"contour radius {epsilon:.3g} is too large: another eigenvalue or the "
                           f"continuum lies within {gap:.3g} of {lam}")

    Ps = {m: np.zeros((n, n), dtype=np.complex128) for m in Ms}
    worst = {m: 0.0 for m in Ms}
    probe = np.random.default_rng(0).standard_normal(n) + 0j
    eye = np.eye(n, dtype=np.complex128)
    # fixed node order keeps the sums reproducible
    for k in range(Mmax):
        phi = 2 * np.pi * k / Mmax
        z = centre + epsilon * cmath.exp(1j * phi)
        Az = A - z * eye
        R = sla.inv(Az, check_finite=False)
        r = float(np.linalg.norm(Az @ (R @ probe) - probe) / np.linalg.norm(probe))
        for m in Ms:
            if k % (Mmax // m) == 0:
                Ps[m] += cmath.exp(1j * phi) * R
                worst[m] = max(worst[m], r)
    if max(worst.values()) > tol.solve_residual:
        raise IllConditionedError(f"resolvent solve residual {max(worst.values()):.2e} on the contour "
                                  f"exceeds {tol.solve_residual:.0e}")
    s_a = sla.svdvals(A - centre * eye, check_finite=False)
    g = int(np.sum(s_a <= tol.rank * s_a[0]))
    out = {}
    for m in Ms:
        P = Ps.pop(m)
        P *= -epsilon / m
        sv = sla.svdvals(P, check_finite=False)
        rank = int(np.sum(sv > 0.5))
        defect = float(np.linalg.norm(P @ P - P))
        out[m] = MultiplicityRecord(complex(centre), rank, g, float(epsilon), defect, m, theta,
                                    int(near.sum()), worst[m], [float(x) for x in sv[:max(rank + 2, 3)]])
    return out


def multiplicities(ds: DiscreteSpectrum, tolerances: Tolerances | None = None,
                   M: int | None = None, backend: str | None = None) -> list:
    """One Riesz record per discrete eigenvalue, at the theta it was found with."""
    out = []
    for e in ds.eigenvalues:
        rec = riesz_multiplicity(ds.spec, ds.grid, e.theta, e.value, None, M, tolerances, SCALED, backend)
        out.append(replace(rec, value=e.value))
    return out


# -- region mapping -------------------------------------------------------------

@dataclass
class RegionMappingReport:
    sign: int
    expected: list
    found: list
    unmatched_expected: list
    unmatched_found: list
    max_distance: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return not self.unmatched_expected and not self.unmatched_found and self.max_distance <= self.tolerance

    def to_dict(self) -> dict:
        c = lambda zs: [[z.real, z.imag] for z in zs]
        return {"sign": self.sign, "ok": self.ok, "expected": c(self.expected), "found": c(self.found),
                "unmatched_expected": c(self.unmatched_expected), "unmatched_found": c(self.unmatched_found),
                "max_distance": _num(self.max_distance), "tolerance": self.tolerance}


def _in_tilde_region(z: complex, sign: int, tol: Tolerances) -> bool:
    # {Re z < 0} together with the imaginary half-axis -sign*i*R_+
    on_axis = abs(z.real) <= tol.real_axis * max(1.0, abs(z))
    if on_axis:
        return sign * z.imag < 0
    return z.real < 0


def region_mapping_check(spec: PotentialSpec, grid: Grid1D, gamma: float | None = None,
                         betas=(0.3, 0.5), partner_offset: float = 0.15, match_tol: float = 1e-6,
                         tolerances: Tolerances | None = None, gate: bool = False,
                         with_multiplicities: bool = True, backend: str | None = None,
                         discrete: DiscreteSpectrum | None = None, records: list | None = None) -> list:
    """Compare sign*i times the discrete spectrum of H in each half-plane with the
    discrete spectrum of the tilde operator at theta = sign*i*pi/4 on ``grid``.

    Returns one RegionMappingReport per sign. Each eigenvalue is repeated
    according to its algebraic multiplicity on both sides. The spectrum of H
    may be supplied precomputed (``discrete`` with matching multiplicity
    ``records``), e.g. from a grid better suited to the smaller angles.
    """
    tol = tolerances or Tolerances()
    if gamma is not None:
        from .constants import MomentOrder
        from .potentials import assumption_check
        rep = assumption_check(spec, MomentOrder(gamma, 1))
        if not rep.strip_ok_for_theorem:
            raise ValueError(f"region mapping needs a strip wider than pi/4: {rep.notes}")
    ds = discrete or discrete_spectrum(spec, grid, betas, tol, gate, backend)
    reports = []
    for sign, region in ((1, UPPER), (-1, LOWER)):
        expected = []
        by_value = {r.value: r for r in records or []}
        for e in ds.in_region(region):
            m = 1
            if e.value in by_value:
                m = by_value[e.value].m
            elif with_multiplicities:
                m = riesz_multiplicity(spec, ds.grid, e.theta, e.value, tolerances=tol, backend=backend).m
            expected += [sign * 1j * e.value] * m
        th = sign * 1j * math.pi / 4
        partner = sign * 1j * (math.pi / 4 - partner_offset)
        ct = classify(spec, grid, th, partner, tol, gate, TILDE, backend, residuals=False)
        found = []
        for e in ct.discrete():
            if _in_tilde_region(e.value, sign, tol):
                m = 1
                if with_multiplicities:
                    m = riesz_multiplicity(spec, grid, th, e.value, tolerances=tol, kind=TILDE,
                                           backend=backend).m
                found += [e.value] * m
        matches = match_nearest(expected, found)
        dmax = max((mt.distance for mt in matches), default=0.0)
        ok_i = {mt.i for mt in matches if mt.distance <= match_tol}
        ok_j = {mt.j for mt in matches if mt.distance <= match_tol}
        reports.append(RegionMappingReport(
            sign, expected, found,
            [z for i, z in enumerate(expected) if i not in ok_i],
            [z for j, z in enumerate(found) if j not in ok_j],
            dmax, match_tol))
    return reports
