"""
Multiplicities from contour integrals
=====================================

The rank of (1/2 pi i) times the contour integral of the resolvent around an
isolated eigenvalue is its algebraic multiplicity. The same circle sampled
with 32 and 64 nodes must agree.
"""
import math

from dilatlt import Grid1D, region_mapping_check, riesz_multiplicities, sech_squared

spec = sech_squared(-2 - 2j)
grid = Grid1D(32, 512)
lam = -0.87821107342877786715 - 1.3833969491244493242j

# lower half-plane eigenvalue: rotate the other way
for beta in (0.2, 0.3, 0.5):
    recs = riesz_multiplicities(spec, grid, -1j * beta, lam, Ms=(32, 64))
    for M, r in recs.items():
        print(f"theta = -{beta}i  M = {M}:  m = {r.m}  g = {r.g}  radius {r.contour_radius:.3f}  "
              f"|P^2 - P| = {r.projector_defect:.1e}")

# turning the picture by pi/2: H eigenvalues times +-i reappear in the tilde operator at +-i pi/4
print()
for rep in region_mapping_check(sech_squared(-2), Grid1D(16, 256)):
    print(f"sign {rep.sign:+d}: expected {rep.expected}  found {rep.found}  ok={rep.ok}")
print("strip half-width needed:", math.pi / 4)
