"""
Eigenvalue moments against potential integrals
==============================================

For real wells the sum of |lambda|^gamma over bound states is bounded by a
constant times the integral of V_-^(gamma + 1/2); the reflectionless wells
hit it exactly at gamma = 3/2. For complex wells the half-plane sums are
compared with integrals of the potential rotated by +-pi/4.
"""
from dilatlt import Grid1D, analyze, rational_decay, sech_squared, verify_flls_cone, verify_main, verify_real_lt

grid = Grid1D(16, 256)

for lam in (1, 2, 3):
    rep = verify_real_lt(sech_squared(-lam * (lam + 1)), grid, 1.5)
    print(f"lambda = {lam}: lhs {rep.lhs:.12f}  rhs {rep.rhs:.12f}  ratio {rep.ratio:.12f}")

print()
for spec, g in [(sech_squared(-6 + 0.5j), grid), (rational_decay(-2 + 2j, 0.75), Grid1D(32, 512))]:
    an = analyze(spec, g)
    for gamma in (1.0, 1.5, 2.0):
        for sign in (1, -1):
            print(verify_main(spec, g, gamma, sign, analysis=an).row())
    for kappa in (0.5, 1.0, 2.0, float("inf")):
        print(verify_flls_cone(spec, g, 1.0, kappa, analysis=an).row())
