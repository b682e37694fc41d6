import json
import math

import numpy as np
import pytest

from dilatlt.discretize import TILDE, Grid1D
from dilatlt.potentials import StripError, gaussian, rational_decay, sech_squared, zero
from dilatlt.spectral_analysis import (CONTINUUM, DISCRETE, LOWER, UPPER, ContourError, IllConditionedError,
                                       Tolerances,
                                       UnderResolvedWarning, classify, discrete_spectrum, eigenvalues,
                                       essential_ray, multiplicities, region_mapping_check,
                                       riesz_multiplicities, riesz_multiplicity, to_csv)

G = Grid1D(16, 128)


def test_essential_ray_geometry():
    r = essential_ray(0.25j * math.pi)
    assert r.angle == pytest.approx(-math.pi / 2)
    assert r.distance(-2j) == pytest.approx(0, abs=1e-15)
    assert r.distance(1 - 2j) == pytest.approx(1)
    assert r.distance(2j) == pytest.approx(2)
    assert essential_ray(0.7).angle == 0


@pytest.mark.parametrize("beta", [0.2, 0.6])
def test_free_operator_is_all_continuum(beta):
    cs = classify(zero(), G, 1j * beta, 1j * (beta + 0.1))
    assert cs.counts()[CONTINUUM] == G.N
    assert cs.ray_angle_fit() == pytest.approx(-2 * beta, rel=1e-2)


def test_classify_rejects_bad_pairs():
    with pytest.raises(ValueError):
        classify(sech_squared(-2), G, 0.3j, 0.3j)
    with pytest.raises(ValueError):
        classify(sech_squared(-2), G, 0.3j, -0.5j)
    with pytest.raises(StripError):
        classify(gaussian(-1), G, 0.3j, 0.9j)


def test_real_well():
    ds = discrete_spectrum(sech_squared(-2), G)
    assert ds.gate_passed
    v = ds.values()
    assert v.size == 1 and abs(v[0] + 1) <= 1e-9
    assert ds.eigenvalues[0].half == "negative_real"
    assert ds.eigenvalues[0].residual <= 1e-12
    assert ds.values(UPPER).size == ds.values(LOWER).size == 1


def test_lower_half_plane_is_seen_from_below():
    ds = discrete_spectrum(sech_squared(-2 - 2j), G)
    e = ds.eigenvalues[0]
    assert e.half == LOWER and e.theta.imag < 0
    assert abs(e.value - (-0.87821107342877786715 - 1.3833969491244493242j)) <= 1e-8
    assert ds.values(UPPER).size == 0


def test_drift_detects_theta_dependence():
    cs = classify(sech_squared(-6), G, 0.3j, 0.5j, gate=False)
    for e in cs.entries:
        if e.cls == DISCRETE:
            assert e.theta_drift <= 1e-6
    assert sum(e.cls == DISCRETE for e in cs.entries) == 2


def test_under_resolved_warning():
    with pytest.warns(UnderResolvedWarning):
        classify(rational_decay(-3, 0.75), Grid1D(16, 16), 0.3j, 0.5j)


def test_eigenvalue_cache_is_read_only():
    w = eigenvalues(sech_squared(-2), 0.3j, G)
    assert w is eigenvalues(sech_squared(-2), 0.3j, G)
    with pytest.raises(ValueError):
        w[0] = 0


def test_riesz_simple():
    rec = riesz_multiplicity(sech_squared(-6), G, 0.3j, -4.0)
    assert rec.m == 1 and rec.g == 1
    assert rec.projector_defect <= 1e-9
    assert rec.projector_singular_values[0] > 0.5 > rec.projector_singular_values[1]


def test_riesz_nested_nodes_agree():
    recs = riesz_multiplicities(sech_squared(-6), G, 0.3j, -1.0, Ms=(32, 64))
    assert {r.m for r in recs.values()} == {1}
    assert recs[32].contour_radius == recs[64].contour_radius
    with pytest.raises(ValueError):
        riesz_multiplicities(sech_squared(-6), G, 0.3j, -1.0, Ms=(32, 48))


def test_riesz_rejects_bad_contours():
    with pytest.raises(ContourError):
        riesz_multiplicity(sech_squared(-6), G, 0.3j, -4.0, epsilon=2.5)
    with pytest.raises(IllConditionedError):
        riesz_multiplicity(sech_squared(-6), G, 0.3j, -4.0, epsilon=1e-12)


def test_multiplicities_are_consistent():
    ds = discrete_spectrum(sech_squared(-6 + 0.5j), G, gate=False)
    recs = multiplicities(ds)
    assert [r.value for r in recs] == list(ds.values())
    for r in recs:
        assert r.m >= r.g >= 1


def test_region_mapping_real_well():
    reports = region_mapping_check(sech_squared(-2), G, gamma=1.0)
    for rep in reports:
        assert rep.ok and len(rep.expected) == 1
    assert reports[0].found[0] == pytest.approx(-1j, abs=1e-6)
    with pytest.raises(ValueError):
        region_mapping_check(gaussian(-1), G, gamma=1.0)


def test_tilde_frame_classification():
    cs = classify(sech_squared(-2), G, 0.25j * math.pi, 0.2j * math.pi, kind=TILDE, gate=False)
    d = cs.values(DISCRETE)
    assert d.size == 1 and abs(d[0] + 1j) <= 1e-7


def test_serialisation():
    ds = discrete_spectrum(sech_squared(-2 + 1j), G)
    text = json.dumps(ds.to_dict())
    assert "eigenvalues" in json.loads(text)
    csv = to_csv(ds.upper.csv_rows())
    assert csv.splitlines()[0] == "value_re,value_im,class,residual,drift,m,g"
    assert len(csv.splitlines()) == G.N + 1


def test_tolerances():
    t = Tolerances()
    assert t.ray_standoff(10) == pytest.approx(0.501)
    assert Tolerances(gate=1e-8).to_dict()["gate"] == 1e-8
